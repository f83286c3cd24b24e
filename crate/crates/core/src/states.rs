//! Density-matrix value types shared across the workbench.

use nalgebra::{Matrix2, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, C64, C_ZERO};
use crate::tol;

/// A 2x2 Hermitian trace-one density matrix with a Bloch-vector view,
/// rho = (I + r.sigma)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensity {
    m: Matrix2<C64>,
}

impl QubitDensity {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        if herm > tol::STATE_REJECT {
            return Err(Error::MalformedState(format!(
                "qubit state not Hermitian, deviation {herm:.3e}"
            )));
        }
        let tr = (m[(0, 0)] + m[(1, 1)]).re;
        if (tr - 1.0).abs() > tol::STATE_REJECT {
            return Err(Error::MalformedState(format!("qubit state trace {tr}")));
        }
        let state = Self { m };
        let r = state.bloch().norm();
        if r > 1.0 + tol::STATE_REJECT {
            return Err(Error::MalformedState(format!("Bloch norm {r} exceeds 1")));
        }
        Ok(state)
    }

    pub fn from_bloch(r: Vector3<f64>) -> Result<Self> {
        if r.norm() > 1.0 + tol::STATE_REJECT {
            return Err(Error::MalformedState(format!(
                "Bloch norm {} exceeds 1",
                r.norm()
            )));
        }
        let m = Matrix2::new(
            cr(0.5 * (1.0 + r.z)),
            C64::new(0.5 * r.x, -0.5 * r.y),
            C64::new(0.5 * r.x, 0.5 * r.y),
            cr(0.5 * (1.0 - r.z)),
        );
        Ok(Self { m })
    }

    /// Pure state a|0> + b|1>, normalized.
    pub fn pure(a: C64, b: C64) -> Self {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        Self {
            m: Matrix2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()),
        }
    }

    /// Projector onto the logical |0> (even cat) basis state.
    pub fn basis0() -> Self {
        Self::pure(cr(1.0), C_ZERO)
    }

    /// Projector onto the logical |1> (odd cat) basis state.
    pub fn basis1() -> Self {
        Self::pure(C_ZERO, cr(1.0))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: Matrix2::new(cr(0.5), C_ZERO, C_ZERO, cr(0.5)),
        }
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.m
    }

    pub fn bloch(&self) -> Vector3<f64> {
        Vector3::new(
            2.0 * self.m[(0, 1)].re,
            -2.0 * self.m[(0, 1)].im,
            (self.m[(0, 0)] - self.m[(1, 1)]).re,
        )
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let es = linalg::eigh(&linalg::mat2_to_dyn(&self.m));
        [es.values[0], es.values[1]]
    }
}

/// A 4x4 Hermitian trace-one density matrix in the ordered two-qubit basis
/// {|ee>, |eo>, |oe>, |oo>}; every module shares this ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDensity {
    m: Matrix4<C64>,
}

impl PairDensity {
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        if herm > tol::STATE_REJECT {
            return Err(Error::MalformedState(format!(
                "pair state not Hermitian, deviation {herm:.3e}"
            )));
        }
        let tr: f64 = (0..4).map(|i| m[(i, i)].re).sum();
        if (tr - 1.0).abs() > tol::STATE_REJECT {
            return Err(Error::MalformedState(format!("pair state trace {tr}")));
        }
        let min = linalg::eigh(&linalg::mat4_to_dyn(&m)).values[0];
        if min < -tol::STATE_REJECT {
            return Err(Error::MalformedState(format!(
                "pair state min eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::eigh(&linalg::mat4_to_dyn(&self.m)).values[0]
    }

    /// rho (x) sigma of two qubit states.
    pub fn product(rho: &QubitDensity, sigma: &QubitDensity) -> Self {
        let a = rho.matrix();
        let b = sigma.matrix();
        let m = Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)]);
        Self { m }
    }

    /// Projector onto the Bell state (|ee> + |oo>)/sqrt(2).
    pub fn bell_projector() -> Self {
        let mut m = Matrix4::zeros();
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                m[(i, j)] = cr(0.5);
            }
        }
        Self { m }
    }
}
