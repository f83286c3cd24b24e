//! Model-independent quantum-information metrics: partial trace, Wootters
//! concurrence, Uhlmann fidelity, QFI in spectral and Bloch forms, and the
//! alpha-statistical-speed family including the Hilbert-Schmidt speed.

use nalgebra::{DVector, Matrix2, Matrix4, Vector3};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::linalg::{self, cr, C64};
use crate::states::{PairDensity, QubitDensity};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeepSide {
    First,
    Second,
}

/// Trace out one side of a two-qubit state.
pub fn partial_trace(rho: &PairDensity, keep: KeepSide) -> Result<QubitDensity> {
    let m = rho.matrix();
    let pick = |i: usize, j: usize| -> C64 {
        let mut s = linalg::C_ZERO;
        for k in 0..2 {
            let (row, col) = match keep {
                KeepSide::First => (2 * i + k, 2 * j + k),
                KeepSide::Second => (2 * k + i, 2 * k + j),
            };
            s += m[(row, col)];
        }
        s
    };
    QubitDensity::new(Matrix2::new(pick(0, 0), pick(0, 1), pick(1, 0), pick(1, 1)))
}

/// Wootters concurrence from the spin-flip construction.
///
/// The square roots of the eigenvalues of rho.rho~ are the singular values
/// of sqrt(rho) (sigma_y x sigma_y) conj(sqrt(rho)), obtained without ever
/// taking a square root of near-zero eigenvalues.
pub fn concurrence(rho: &PairDensity) -> Result<f64> {
    let m = linalg::mat4_to_dyn(rho.matrix());
    // sigma_y (x) sigma_y in the {ee, eo, oe, oo} basis: antidiagonal (-1, 1, 1, -1)
    let mut yy = Matrix4::zeros();
    yy[(0, 3)] = cr(-1.0);
    yy[(1, 2)] = cr(1.0);
    yy[(2, 1)] = cr(1.0);
    yy[(3, 0)] = cr(-1.0);
    let yy = linalg::mat4_to_dyn(&yy);

    let s = linalg::sqrt_psd(&m)?;
    let a = &s * yy * s.map(|z| z.conj());
    let lambdas = linalg::singular_values(&a);
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Closed-form concurrence of the reduced channel pair state:
/// max{0, C+, C-} with
/// C+- = (1-p^2) / (2(1 + p^n cos m pi)) [ |1 +- p^(n-2) cos m pi| - (1 -+ p^(n-2) cos m pi) ].
pub fn concurrence_closed_form(params: &ChannelParams) -> Result<f64> {
    params.check_not_degenerate()?;
    let p = params.p();
    let coh = params.p_pow(params.n() as i32 - 2) * params.cos_m_pi();
    let pre = (1.0 - p * p) / (2.0 * params.denominator());
    let c_plus = pre * ((1.0 + coh).abs() - (1.0 - coh));
    let c_minus = pre * ((1.0 - coh).abs() - (1.0 + coh));
    Ok(c_plus.max(c_minus).max(0.0))
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
pub fn uhlmann_fidelity(rho: &QubitDensity, sigma: &QubitDensity) -> Result<f64> {
    linalg::uhlmann(
        &linalg::mat2_to_dyn(rho.matrix()),
        &linalg::mat2_to_dyn(sigma.matrix()),
    )
}

/// Single-qubit QFI from the Bloch vector and its parameter derivative:
/// |dr|^2 + (r.dr)^2 / (1 - |r|^2) inside the ball, |dr|^2 on the sphere.
pub fn qfi_bloch(r: Vector3<f64>, dr: Vector3<f64>) -> Result<f64> {
    let n2 = r.norm_squared();
    let rd = r.dot(&dr);
    if n2.sqrt() < 1.0 - 1e-9 {
        Ok((dr.norm_squared() + rd * rd / (1.0 - n2)).max(0.0))
    } else if rd > 1e-6 {
        // purity cannot grow for a family pinned to the sphere
        Err(Error::InconsistentFamily {
            norm: n2.sqrt(),
            r_dot_dr: rd,
        })
    } else {
        Ok(dr.norm_squared())
    }
}

/// A differentiable one-parameter family of qubit states.
pub struct ParamFamily<F: Fn(f64) -> Result<QubitDensity>> {
    pub evaluator: F,
    /// central-difference step
    pub h: f64,
    /// one step of Richardson extrapolation over h and h/2
    pub richardson: bool,
}

impl<F: Fn(f64) -> Result<QubitDensity>> ParamFamily<F> {
    pub fn new(evaluator: F) -> Self {
        Self {
            evaluator,
            h: tol::SPECTRAL_STEP,
            richardson: false,
        }
    }
}

/// Spectral-decomposition QFI: the classical Fisher term over eigenvalues,
/// the weighted pure-state term, and the overlap correction, with
/// eigenvector derivatives taken by phase-aligned central differences.
pub fn qfi_spectral<F: Fn(f64) -> Result<QubitDensity>>(
    family: &ParamFamily<F>,
    xi0: f64,
) -> Result<f64> {
    let value = qfi_spectral_step(family, xi0, family.h)?;
    if family.richardson {
        let half = qfi_spectral_step(family, xi0, family.h / 2.0)?;
        Ok((4.0 * half - value) / 3.0)
    } else {
        Ok(value)
    }
}

fn qfi_spectral_step<F: Fn(f64) -> Result<QubitDensity>>(
    family: &ParamFamily<F>,
    xi0: f64,
    h: f64,
) -> Result<f64> {
    let lo = (family.evaluator)(xi0 - h)?;
    let mid = (family.evaluator)(xi0)?;
    let hi = (family.evaluator)(xi0 + h)?;

    let d_rho = (linalg::mat2_to_dyn(hi.matrix()) - linalg::mat2_to_dyn(lo.matrix())) / cr(2.0 * h);
    if d_rho.norm() < 1e-10 {
        return Ok(0.0);
    }

    let es_mid = linalg::eigh(&linalg::mat2_to_dyn(mid.matrix()));
    let gap = (es_mid.values[1] - es_mid.values[0]).abs();
    if gap < tol::SPECTRAL_GAP {
        return Err(Error::DegenerateSpectrum { gap, xi: xi0 });
    }
    let es_lo = linalg::eigh(&linalg::mat2_to_dyn(lo.matrix()));
    let es_hi = linalg::eigh(&linalg::mat2_to_dyn(hi.matrix()));

    // Match branches to the midpoint by overlap, then fix the gauge so
    // <psi_k(xi0)|psi_k(xi0 +- h)> is real positive before differencing.
    let align = |es: &linalg::HermitianEigen, k: usize| -> (f64, DVector<C64>) {
        let reference = &es_mid.vectors[k];
        let (best, _) = (0..2)
            .map(|j| (j, (reference.adjoint() * &es.vectors[j])[(0, 0)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("two branches");
        let ov = (reference.adjoint() * &es.vectors[best])[(0, 0)];
        let phase = if ov.norm() > 0.0 {
            ov.conj() / ov.norm()
        } else {
            cr(1.0)
        };
        (es.values[best], &es.vectors[best] * phase)
    };

    let mut total = 0.0;
    let mut kept: Vec<(f64, DVector<C64>)> = Vec::new();
    for k in 0..2 {
        let lambda = es_mid.values[k];
        let (l_lo, v_lo) = align(&es_lo, k);
        let (l_hi, v_hi) = align(&es_hi, k);
        let d_lambda = (l_hi - l_lo) / (2.0 * h);
        let d_vec = (&v_hi - &v_lo) / cr(2.0 * h);
        if lambda >= tol::SPECTRAL_NULL {
            // classical Fisher term
            total += d_lambda * d_lambda / lambda;
            // pure-state QFI of the branch
            let dd = (d_vec.adjoint() * &d_vec)[(0, 0)].re;
            let vd = (es_mid.vectors[k].adjoint() * &d_vec)[(0, 0)].norm_sqr();
            total += lambda * 4.0 * (dd - vd);
        }
        kept.push((lambda, d_vec));
    }
    // overlap correction, lambda_k + lambda_l bounded away from zero
    for k in 0..2 {
        for l in 0..2 {
            if k == l {
                continue;
            }
            let (lk, _) = kept[k];
            let (ll, ref dvl) = kept[l];
            if lk < tol::SPECTRAL_NULL || ll < tol::SPECTRAL_NULL || lk + ll < tol::SPECTRAL_NULL {
                continue;
            }
            let ov = (es_mid.vectors[k].adjoint() * dvl)[(0, 0)].norm_sqr();
            total -= 8.0 * lk * ll / (lk + ll) * ov;
        }
    }
    Ok(total.max(0.0))
}

/// Nonnegative reals summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::MalformedState("negative probability entry".into()));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::MalformedState(format!("probabilities sum to {sum}")));
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Classical statistical speed ((1/2) sum |p'_x|^alpha)^(1/alpha) of a
/// probability-distribution derivative.
pub fn classical_speed_alpha(pprime: &[f64], alpha: f64) -> Result<f64> {
    if alpha < 1.0 {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let sum: f64 = pprime.iter().sum();
    if sum.abs() > 1e-9 {
        return Err(Error::MalformedState(format!(
            "derivative of a probability vector must sum to 0, got {sum:.3e}"
        )));
    }
    let s: f64 = pprime.iter().map(|x| x.abs().powf(alpha)).sum();
    Ok((0.5 * s).powf(1.0 / alpha))
}

/// Quantum statistical speed ((1/2) Tr |d rho / d xi|^alpha)^(1/alpha), via
/// the singular values of the Hermitian traceless derivative.
pub fn quantum_speed_alpha(drho: &Matrix2<C64>, alpha: f64) -> Result<f64> {
    if alpha < 1.0 {
        return Err(Error::OutOfRange {
            what: "alpha",
            value: alpha,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let herm = (drho - drho.adjoint()).norm();
    if herm > 1e-9 {
        return Err(Error::MalformedState(format!(
            "drho not Hermitian, deviation {herm:.3e}"
        )));
    }
    let tr = (drho[(0, 0)] + drho[(1, 1)]).re;
    if tr.abs() > 1e-9 {
        return Err(Error::MalformedState(format!(
            "drho trace {tr:.3e}, expected 0"
        )));
    }
    let s: f64 = linalg::eigh(&linalg::mat2_to_dyn(drho))
        .values
        .iter()
        .map(|x| x.abs().powf(alpha))
        .sum();
    Ok((0.5 * s).powf(1.0 / alpha))
}

/// Hilbert-Schmidt speed sqrt((1/2) Tr[(d rho/d xi)^2]); the alpha = 2 member
/// of the quantum speed family. Equals |dr|/2 for a single qubit.
pub fn hss(drho: &Matrix2<C64>) -> Result<f64> {
    quantum_speed_alpha(drho, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{self, ChannelParams};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn partial_trace_bell_is_mixed() {
        let bell = PairDensity::bell_projector();
        for keep in [KeepSide::First, KeepSide::Second] {
            let q = partial_trace(&bell, keep).unwrap();
            assert!((q.matrix() - QubitDensity::maximally_mixed().matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_factorizes_products() {
        let rho = QubitDensity::from_bloch(Vector3::new(0.2, -0.3, 0.4)).unwrap();
        let sigma = QubitDensity::from_bloch(Vector3::new(-0.1, 0.5, 0.2)).unwrap();
        let prod = PairDensity::product(&rho, &sigma);
        let left = partial_trace(&prod, KeepSide::First).unwrap();
        let right = partial_trace(&prod, KeepSide::Second).unwrap();
        assert!((left.matrix() - rho.matrix()).norm() < 1e-14);
        assert!((right.matrix() - sigma.matrix()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_matches_channel_single_state() {
        let params = ChannelParams::new(0.5, 3, 0).unwrap();
        let pair = channel::reduced_pair_state(&params).unwrap();
        let direct = channel::reduced_single_state(&params).unwrap();
        let traced = partial_trace(&pair, KeepSide::First).unwrap();
        assert!((direct.matrix() - traced.matrix()).norm() < 1e-12);
    }

    #[test]
    fn concurrence_extremes() {
        assert_abs_diff_eq!(
            concurrence(&PairDensity::bell_projector()).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let mixed = PairDensity::product(
            &QubitDensity::maximally_mixed(),
            &QubitDensity::maximally_mixed(),
        );
        assert_abs_diff_eq!(concurrence(&mixed).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn concurrence_closed_form_examples() {
        // no entanglement at the GHZ end for m odd
        let c = concurrence_closed_form(&ChannelParams::new(0.0, 4, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-15);
        // (1-p^2) p^(n-2) / (1+p^n) = 0.375/1.125 = 1/3
        let params = ChannelParams::new(0.5, 3, 0).unwrap();
        let c = concurrence_closed_form(&params).unwrap();
        assert_abs_diff_eq!(c, 1.0 / 3.0, epsilon = 1e-12);
        let oracle = concurrence(&channel::reduced_pair_state(&params).unwrap()).unwrap();
        assert_abs_diff_eq!(c, oracle, epsilon = 1e-10);
        // W limit 2/n
        let c = concurrence_closed_form(&ChannelParams::new(1.0 - 1e-6, 4, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn uhlmann_examples() {
        let rho = QubitDensity::from_bloch(Vector3::new(0.1, 0.2, -0.3)).unwrap();
        assert_abs_diff_eq!(uhlmann_fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-12);
        let zero = QubitDensity::basis0();
        let one = QubitDensity::basis1();
        assert_abs_diff_eq!(uhlmann_fidelity(&zero, &one).unwrap(), 0.0, epsilon = 1e-12);
        let plus = QubitDensity::pure(cr(1.0), cr(1.0));
        assert_abs_diff_eq!(
            uhlmann_fidelity(&plus, &zero).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn uhlmann_is_symmetric_and_bounded() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r1 = random_bloch(&mut rng, 1.0);
            let r2 = random_bloch(&mut rng, 1.0);
            let a = QubitDensity::from_bloch(r1).unwrap();
            let b = QubitDensity::from_bloch(r2).unwrap();
            let f_ab = uhlmann_fidelity(&a, &b).unwrap();
            let f_ba = uhlmann_fidelity(&b, &a).unwrap();
            assert_abs_diff_eq!(f_ab, f_ba, epsilon = 1e-10);
            assert!((0.0..=1.0 + 1e-9).contains(&f_ab));
            // unity exactly on identical states
            if (r1 - r2).norm() > 1e-6 {
                assert!(f_ab < 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn qfi_bloch_examples() {
        let q = qfi_bloch(Vector3::new(0.0, 0.0, 0.6), Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(q, 1.5625, epsilon = 1e-12);
        assert_abs_diff_eq!(
            qfi_bloch(Vector3::zeros(), Vector3::zeros()).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        for k in 0..8 {
            let xi = k as f64 * std::f64::consts::PI / 8.0;
            let r = Vector3::new(xi.sin(), 0.0, xi.cos());
            let dr = Vector3::new(xi.cos(), 0.0, -xi.sin());
            assert_abs_diff_eq!(qfi_bloch(r, dr).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn qfi_bloch_rejects_purity_growth_on_sphere() {
        let r = Vector3::new(0.0, 0.0, 1.0);
        let dr = Vector3::new(0.0, 0.0, 0.5);
        assert!(matches!(
            qfi_bloch(r, dr),
            Err(Error::InconsistentFamily { .. })
        ));
    }

    fn random_bloch(rng: &mut rand_chacha::ChaCha20Rng, max_norm: f64) -> Vector3<f64> {
        loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() <= 1.0 {
                return v * max_norm;
            }
        }
    }

    #[test]
    fn qfi_spectral_examples() {
        // linear z family at xi = 0.6
        let fam = ParamFamily::new(|xi: f64| QubitDensity::from_bloch(Vector3::new(0.0, 0.0, xi)));
        assert_abs_diff_eq!(qfi_spectral(&fam, 0.6).unwrap(), 1.5625, epsilon = 1e-6);
        // pure great-circle rotation
        let fam = ParamFamily::new(|xi: f64| {
            QubitDensity::from_bloch(Vector3::new(xi.sin(), 0.0, xi.cos()))
        });
        assert_abs_diff_eq!(qfi_spectral(&fam, 0.7).unwrap(), 1.0, epsilon = 1e-6);
        // constant family
        let fam = ParamFamily::new(|_| Ok(QubitDensity::maximally_mixed()));
        assert_abs_diff_eq!(qfi_spectral(&fam, 0.3).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn qfi_spectral_richardson_refines() {
        let mut fam = ParamFamily::new(|xi: f64| {
            QubitDensity::from_bloch(Vector3::new(0.0, 0.0, xi.sin() * 0.8))
        });
        fam.h = 1e-3;
        let coarse = qfi_spectral(&fam, 0.4).unwrap();
        fam.richardson = true;
        let refined = qfi_spectral(&fam, 0.4).unwrap();
        let r = 0.8 * 0.4_f64.sin();
        let dr = 0.8 * 0.4_f64.cos();
        let exact = qfi_bloch(Vector3::new(0.0, 0.0, r), Vector3::new(0.0, 0.0, dr)).unwrap();
        assert!((refined - exact).abs() < (coarse - exact).abs());
        assert!((refined - exact).abs() < 1e-9);
    }

    #[test]
    fn qfi_spectral_flags_degenerate_gap() {
        // family passing through the fully mixed state with nonzero derivative
        let fam = ParamFamily::new(|xi: f64| QubitDensity::from_bloch(Vector3::new(xi, 0.0, 0.0)));
        assert!(matches!(
            qfi_spectral(&fam, 0.0),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn qfi_routes_agree_on_random_families() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for _ in 0..100 {
            // affine Bloch families r(xi) = r0 + xi v, |r| kept under 0.95
            let r0 = random_bloch(&mut rng, 0.6) + Vector3::new(0.0, 0.0, 0.2);
            let v = random_bloch(&mut rng, 0.5);
            if r0.norm() < 0.05 {
                continue;
            }
            let fam = ParamFamily::new(move |xi: f64| QubitDensity::from_bloch(r0 + v * xi));
            let spectral = qfi_spectral(&fam, 0.0).unwrap();
            let direct = qfi_bloch(r0, v).unwrap();
            assert!(
                (spectral - direct).abs() <= 1e-6,
                "spectral {spectral} vs bloch {direct} at r0={r0:?} v={v:?}"
            );
        }
    }

    #[test]
    fn classical_speed_examples() {
        assert_abs_diff_eq!(
            classical_speed_alpha(&[1.0, -1.0], 2.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_speed_alpha(&[0.0, 0.0, 0.0], 7.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            classical_speed_alpha(&[0.5, -0.5], 1.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(classical_speed_alpha(&[1.0, -1.0], 0.5).is_err());
        assert!(classical_speed_alpha(&[1.0, 1.0], 2.0).is_err());
    }

    #[test]
    fn quantum_speed_examples() {
        let sz_half = Matrix2::new(cr(0.5), linalg::C_ZERO, linalg::C_ZERO, cr(-0.5));
        assert_abs_diff_eq!(
            quantum_speed_alpha(&sz_half, 2.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            quantum_speed_alpha(&Matrix2::zeros(), 3.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(
            quantum_speed_alpha(&sz_half, 2.0).unwrap(),
            hss(&sz_half).unwrap()
        );
        assert_abs_diff_eq!(hss(&sz_half).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn hss_equals_half_bloch_speed() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        for _ in 0..30 {
            let dr = random_bloch(&mut rng, 0.9);
            let drho = Matrix2::new(
                cr(0.5 * dr.z),
                C64::new(0.5 * dr.x, -0.5 * dr.y),
                C64::new(0.5 * dr.x, 0.5 * dr.y),
                cr(-0.5 * dr.z),
            );
            assert_abs_diff_eq!(hss(&drho).unwrap(), dr.norm() / 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbabilityVector::new(vec![0.6, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
    }
}
