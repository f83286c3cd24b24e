//! Hermitian matrix helpers shared by the metric and state modules.

use nalgebra::{Complex, DMatrix, DVector, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex<f64>;

pub const C_ZERO: C64 = Complex::new(0.0, 0.0);
pub const C_ONE: C64 = Complex::new(1.0, 0.0);

pub fn cr(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, ascending order.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
}

pub fn eigh(m: &DMatrix<C64>) -> HermitianEigen {
    let es = nalgebra::SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..es.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| es.eigenvalues[a].total_cmp(&es.eigenvalues[b]));
    HermitianEigen {
        values: idx.iter().map(|&k| es.eigenvalues[k]).collect(),
        vectors: idx
            .iter()
            .map(|&k| es.eigenvectors.column(k).into_owned())
            .collect(),
    }
}

pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    let mut t = C_ZERO;
    for i in 0..m.nrows() {
        t += m[(i, i)];
    }
    t
}

/// Apply `f` to the eigenvalues of a Hermitian matrix.
fn eigen_map(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let es = eigh(m);
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (lambda, v) in es.values.iter().zip(es.vectors.iter()) {
        out += (v * v.adjoint()) * cr(f(*lambda));
    }
    out
}

/// Square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues in [-PSD_CLAMP, 0) clamp to zero; anything more negative is a
/// malformed input, not noise. Positive eigenvalues below 1e-14 of the
/// spectral radius are eigensolver noise on an exact zero and also clamp,
/// since the square root would amplify them to ~1e-8 artifacts.
pub fn sqrt_psd(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let es = eigh(m);
    let min = es.values.first().copied().unwrap_or(0.0);
    if min < -tol::PSD_CLAMP {
        return Err(Error::MalformedState(format!(
            "matrix square root of non-PSD input, min eigenvalue {min:.3e}"
        )));
    }
    let floor = es.values.last().copied().unwrap_or(0.0).max(0.0) * 1e-14;
    Ok(eigen_map(m, |x| if x <= floor { 0.0 } else { x.sqrt() }))
}

/// Singular values of a complex matrix, descending, through the Hermitian
/// dilation [[0, A], [A~, 0]] whose spectrum is {+-sigma_i}. Keeps small
/// singular values at absolute eigensolver accuracy instead of the
/// sqrt-of-noise floor a Gram-matrix route would give.
pub fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    let n = a.nrows();
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            d[(i, n + j)] = a[(i, j)];
            d[(n + j, i)] = a[(i, j)].conj();
        }
    }
    let mut all: Vec<f64> = eigh(&d).values.iter().map(|x| x.abs()).collect();
    all.sort_by(|x, y| y.total_cmp(x));
    all.into_iter().step_by(2).collect()
}

/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for Hermitian PSD inputs, computed
/// as the squared nuclear norm of sqrt(rho) sqrt(sigma).
pub fn uhlmann(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    let a = sqrt_psd(rho)? * sqrt_psd(sigma)?;
    let sum: f64 = singular_values(&a).iter().sum();
    Ok(sum * sum)
}

pub fn mat2_to_dyn(m: &Matrix2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn mat4_to_dyn(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

pub fn dyn_to_mat2(m: &DMatrix<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|i, j| m[(i, j)])
}
