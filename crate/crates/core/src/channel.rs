//! Closed-form algebra of the multipartite coherent channel: normalization,
//! logical cat-state encoding, bipartite splitting, reduced states and
//! limit-case classification.
//!
//! The single knob is the overlap p = <eta|-eta> = exp(-2|eta|^2); p -> 0 is
//! the GHZ regime, p -> 1 the separable (m even) or W (m odd) regime. The
//! convention p^0 = 1 holds everywhere, including p = 0.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::cr;
use crate::metrics;
use crate::states::{PairDensity, QubitDensity};
use crate::tol;

/// The triple (p, n, m) defining the pre-shared multipartite coherent channel.
///
/// Only the parity of m matters (cos m pi = +/-1). The point (p = 1, m odd)
/// is degenerate for every operation whose denominator carries
/// 1 + p^n cos(m pi); callers probe it as p = 1 - eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    p: f64,
    n: u32,
    m: i32,
}

impl ChannelParams {
    pub fn new(p: f64, n: u32, m: i32) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::OutOfRange {
                what: "overlap p",
                value: p,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if n < 2 {
            return Err(Error::OutOfRange {
                what: "probe count n",
                value: n as f64,
                lo: 2.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self { p, n, m })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// cos(m pi) evaluated exactly from the parity of m.
    pub fn cos_m_pi(&self) -> f64 {
        if self.m.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// 1 + p^n cos(m pi), the denominator every closed form shares.
    pub fn denominator(&self) -> f64 {
        1.0 + self.p.powi(self.n as i32) * self.cos_m_pi()
    }

    pub fn check_not_degenerate(&self) -> Result<()> {
        let d = self.denominator();
        if d <= tol::DEGENERACY {
            return Err(Error::DegenerateChannel {
                p: self.p,
                n: self.n,
                m: self.m,
                denominator: d,
            });
        }
        Ok(())
    }

    /// p^k with the global 0^0 = 1 convention.
    pub fn p_pow(&self, k: i32) -> f64 {
        self.p.powi(k)
    }
}

/// Channel normalization N = [2 + 2 p^n cos(m pi)]^(-1/2).
pub fn normalization_factor(params: &ChannelParams) -> Result<f64> {
    params.check_not_degenerate()?;
    Ok((2.0 * params.denominator()).powf(-0.5))
}

/// The logical cat-qubit encoding amplitudes: |eta> = a|0>_L + b|1>_L with
/// a = sqrt((1+p)/2), b = sqrt((1-p)/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogicalEncoding {
    pub a: f64,
    pub b: f64,
}

pub fn logical_encoding(p: f64) -> Result<LogicalEncoding> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::OutOfRange {
            what: "overlap p",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(LogicalEncoding {
        a: ((1.0 + p) / 2.0).sqrt(),
        b: ((1.0 - p) / 2.0).sqrt(),
    })
}

/// Amplitudes of the channel state split across an (r, n-r) bipartition, in
/// the basis {|0>_r|0>_{n-r}, |0>_r|1>_{n-r}, |1>_r|0>_{n-r}, |1>_r|1>_{n-r}}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCoefficients {
    pub g00: f64,
    pub g01: f64,
    pub g10: f64,
    pub g11: f64,
}

impl SplitCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.g00 * self.g00 + self.g01 * self.g01 + self.g10 * self.g10 + self.g11 * self.g11
    }
}

pub fn split_coefficients(params: &ChannelParams, r: u32) -> Result<SplitCoefficients> {
    if r < 1 || r > params.n() - 1 {
        return Err(Error::OutOfRange {
            what: "split index r",
            value: r as f64,
            lo: 1.0,
            hi: (params.n() - 1) as f64,
        });
    }
    let norm = normalization_factor(params)?;
    let sub = |k: u32| {
        let pk = params.p_pow(k as i32);
        (((1.0 + pk) / 2.0).sqrt(), ((1.0 - pk) / 2.0).sqrt())
    };
    let (a_r, b_r) = sub(r);
    let (a_s, b_s) = sub(params.n() - r);
    // e^{im pi} = cos(m pi) for integer m, so the factors are real.
    let plus = 1.0 + params.cos_m_pi();
    let minus = 1.0 - params.cos_m_pi();
    Ok(SplitCoefficients {
        g00: norm * plus * a_r * a_s,
        g01: norm * minus * a_r * b_s,
        g10: norm * minus * a_s * b_r,
        g11: norm * plus * b_r * b_s,
    })
}

/// The two-qubit reduction of the channel, assembled from first principles:
/// |+-eta, +-eta> = (a|e> +- b|o>)(x)(a|e> +- b|o>) and
/// rho12 = N^2 [ |hh><hh| + |tt><tt| + p^(n-2) cos(m pi)(|hh><tt| + h.c.) ]
/// with h = eta, t = -eta. Trace one by construction.
pub fn reduced_pair_state(params: &ChannelParams) -> Result<PairDensity> {
    params.check_not_degenerate()?;
    let enc = logical_encoding(params.p())?;
    let (a, b) = (enc.a, enc.b);
    // |eta,eta> and |-eta,-eta> in the {ee, eo, oe, oo} basis
    let u = Vector4::new(a * a, a * b, a * b, b * b);
    let v = Vector4::new(a * a, -a * b, -a * b, b * b);
    let n2 = 1.0 / (2.0 * params.denominator());
    let coh = params.p_pow(params.n() as i32 - 2) * params.cos_m_pi();
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = cr(n2 * (u[i] * u[j] + v[i] * v[j] + coh * (u[i] * v[j] + v[i] * u[j])));
        }
    }
    // the analytic trace is one; dividing by the computed trace removes the
    // cancellation rounding that 1 - p^n suffers near the degenerate point
    let trace: f64 = (0..4).map(|i| m[(i, i)].re).sum();
    PairDensity::new(m / cr(trace))
}

/// Tr_2 of the reduced pair state. Diagonal in the cat basis; trace one.
///
/// The printed identity-proportional form is not used here (its trace is not
/// one in general); see [`printed_single_state_coefficient`] for the compare
/// report.
pub fn reduced_single_state(params: &ChannelParams) -> Result<QubitDensity> {
    let pair = reduced_pair_state(params)?;
    metrics::partial_trace(&pair, metrics::KeepSide::First)
}

/// Coefficient of the printed identity-proportional reduced channel state,
/// [3 + p^2 + (1 + 3p^2) p^(n-2) cos(m pi)] / [4 (1 + p^n cos(m pi))].
///
/// The printed state is this coefficient times the 2x2 identity, whose trace
/// is 2x the coefficient (3/2 at p = 0, n = 3); kept solely for the compare
/// report.
pub fn printed_single_state_coefficient(params: &ChannelParams) -> Result<f64> {
    params.check_not_degenerate()?;
    let p = params.p();
    let coh = params.p_pow(params.n() as i32 - 2) * params.cos_m_pi();
    Ok((3.0 + p * p + (1.0 + 3.0 * p * p) * coh) / (4.0 * params.denominator()))
}

/// Asymptotic regime of the channel state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitClass {
    /// p -> 0: both branches orthogonal, GHZ-type channel.
    Ghz,
    /// p -> 1 with m even: separable ground-state channel.
    Ground,
    /// p -> 1 with m odd: W-type channel.
    W,
    Generic,
}

pub fn classify_limit(params: &ChannelParams, tolerance: f64) -> LimitClass {
    if params.p() <= tolerance {
        LimitClass::Ghz
    } else if params.p() >= 1.0 - tolerance {
        if params.cos_m_pi() > 0.0 {
            LimitClass::Ground
        } else {
            LimitClass::W
        }
    } else {
        LimitClass::Generic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization_examples() {
        // p^n = 0 kills the coherence term
        let n = normalization_factor(&ChannelParams::new(0.0, 3, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(n, 1.0 / 2.0_f64.sqrt(), epsilon = 1e-12);
        let n = normalization_factor(&ChannelParams::new(1.0, 2, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(n, 0.5, epsilon = 1e-15);
        let err = normalization_factor(&ChannelParams::new(1.0, 3, 1).unwrap());
        assert!(matches!(err, Err(Error::DegenerateChannel { .. })));
    }

    #[test]
    fn encoding_examples() {
        let e = logical_encoding(0.0).unwrap();
        assert_abs_diff_eq!(e.a, 1.0 / 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.b, 1.0 / 2.0_f64.sqrt(), epsilon = 1e-15);
        let e = logical_encoding(1.0).unwrap();
        assert_abs_diff_eq!(e.a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.b, 0.0, epsilon = 1e-15);
        let e = logical_encoding(0.5).unwrap();
        assert_abs_diff_eq!(e.a, 0.75_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.b, 0.5, epsilon = 1e-15);
        assert!(logical_encoding(1.2).is_err());
        assert!(logical_encoding(-0.1).is_err());
    }

    #[test]
    fn encoding_is_normalized_with_overlap_p() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let e = logical_encoding(p).unwrap();
            assert_abs_diff_eq!(e.a * e.a + e.b * e.b, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(e.a * e.a - e.b * e.b, p, epsilon = 1e-14);
        }
    }

    #[test]
    fn split_bell_limits() {
        let g = split_coefficients(&ChannelParams::new(0.0, 2, 0).unwrap(), 1).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(g.g00, s, epsilon = 1e-12);
        assert_abs_diff_eq!(g.g01, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.g10, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.g11, s, epsilon = 1e-12);

        let g = split_coefficients(&ChannelParams::new(0.0, 2, 1).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(g.g00, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.g01, s, epsilon = 1e-12);
        assert_abs_diff_eq!(g.g10, s, epsilon = 1e-12);
        assert_abs_diff_eq!(g.g11, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn split_even_m_kills_cross_terms() {
        let g = split_coefficients(&ChannelParams::new(0.5, 4, 0).unwrap(), 2).unwrap();
        assert_eq!(g.g01, 0.0);
        assert_eq!(g.g10, 0.0);
        assert_abs_diff_eq!(g.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn split_rejects_bad_r() {
        let params = ChannelParams::new(0.3, 4, 0).unwrap();
        assert!(split_coefficients(&params, 0).is_err());
        assert!(split_coefficients(&params, 4).is_err());
    }

    #[test]
    fn pair_state_bell_limit() {
        let rho = reduced_pair_state(&ChannelParams::new(0.0, 2, 0).unwrap()).unwrap();
        let bell = PairDensity::bell_projector();
        assert!((rho.matrix() - bell.matrix()).norm() < 1e-12);
    }

    #[test]
    fn pair_state_w_limit_concurrence() {
        // two-qubit reduction of the W state has pairwise concurrence 2/n
        let rho = reduced_pair_state(&ChannelParams::new(1.0 - 1e-6, 3, 1).unwrap()).unwrap();
        let c = metrics::concurrence(&rho).unwrap();
        assert_abs_diff_eq!(c, 2.0 / 3.0, epsilon = 1e-3);
    }

    #[test]
    fn single_state_balanced_limit() {
        let rho = reduced_single_state(&ChannelParams::new(0.0, 3, 0).unwrap()).unwrap();
        let m = rho.matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(1, 1)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_state_closed_form_oracle() {
        // independent route: diagonal entries 2 N^2 a^2 (1 + p^(n-1) cos) and
        // 2 N^2 b^2 (1 - p^(n-1) cos)
        for &(p, n, m) in &[(0.5, 3, 0), (0.3, 5, 1), (0.9, 2, 0), (0.0, 2, 1)] {
            let params = ChannelParams::new(p, n, m).unwrap();
            let rho = reduced_single_state(&params).unwrap();
            let enc = logical_encoding(p).unwrap();
            let n2 = 1.0 / (2.0 * params.denominator());
            let coh = params.p_pow(n as i32 - 1) * params.cos_m_pi();
            let le = 2.0 * n2 * enc.a * enc.a * (1.0 + coh);
            let lo = 2.0 * n2 * enc.b * enc.b * (1.0 - coh);
            assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, le, epsilon = 1e-12);
            assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, lo, epsilon = 1e-12);
            assert_abs_diff_eq!(le + lo, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn printed_single_state_coefficient_flags_discrepancy() {
        let c = printed_single_state_coefficient(&ChannelParams::new(0.0, 3, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(c, 0.75, epsilon = 1e-15);
        // trace of the printed rho1 would be 1.5, not 1
        assert_abs_diff_eq!(2.0 * c, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn limit_classification() {
        assert_eq!(
            classify_limit(&ChannelParams::new(1e-9, 5, 0).unwrap(), 1e-6),
            LimitClass::Ghz
        );
        assert_eq!(
            classify_limit(&ChannelParams::new(1.0 - 1e-9, 5, 1).unwrap(), 1e-6),
            LimitClass::W
        );
        assert_eq!(
            classify_limit(&ChannelParams::new(1.0 - 1e-9, 5, 2).unwrap(), 1e-6),
            LimitClass::Ground
        );
        assert_eq!(
            classify_limit(&ChannelParams::new(0.5, 5, 0).unwrap(), 1e-6),
            LimitClass::Generic
        );
    }

    #[test]
    fn m_parity_invariance() {
        for m in [-3, -1, 1, 3, 5] {
            let a = reduced_pair_state(&ChannelParams::new(0.4, 4, m).unwrap()).unwrap();
            let b = reduced_pair_state(&ChannelParams::new(0.4, 4, m + 2).unwrap()).unwrap();
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn pair_state_valid_over_grid() {
        let mut ps: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        ps.push(1.0 - 1e-6);
        for &p in &ps {
            for n in 2..=25 {
                for m in 0..=1 {
                    let params = ChannelParams::new(p, n, m).unwrap();
                    let rho = reduced_pair_state(&params).unwrap();
                    assert!(
                        (rho.trace() - 1.0).abs() < 1e-12,
                        "trace at p={p} n={n} m={m}"
                    );
                    assert!(rho.min_eigenvalue() >= -1e-12, "PSD at p={p} n={n} m={m}");
                }
            }
        }
    }
}
