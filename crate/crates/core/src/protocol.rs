//! The bidirectional teleportation pipeline: trigger states, success weights,
//! teleported outputs, closed-form and oracle fidelities in both directions,
//! and trigger-phase QFI/HSS.
//!
//! Every printed closed form is evaluated verbatim and left unclamped; the
//! oracle route (convex output states built from the trace-one reduced
//! channel) runs beside it so the compare report can quantify where the two
//! disagree. Printed Bloch components that leave the Bloch ball are flagged,
//! never repaired.

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::linalg::{cr, C64};
use crate::metrics;
use crate::states::QubitDensity;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Alice sends the even state to Bob; the estimated phase is theta_e.
    AliceToBob,
    /// Bob sends the odd state to Alice; the estimated phase is theta_o.
    BobToAlice,
}

impl Direction {
    pub fn label(&self) -> &'static str {
        match self {
            Direction::AliceToBob => "ab",
            Direction::BobToAlice => "ba",
        }
    }
}

/// Trigger preparation angles, both in [0, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerPhase {
    pub theta_e: f64,
    pub theta_o: f64,
}

impl TriggerPhase {
    pub fn new(theta_e: f64, theta_o: f64) -> Result<Self> {
        for (what, v) in [("theta_e", theta_e), ("theta_o", theta_o)] {
            if !(0.0..=std::f64::consts::PI).contains(&v) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    lo: 0.0,
                    hi: std::f64::consts::PI,
                });
            }
        }
        Ok(Self { theta_e, theta_o })
    }
}

/// Which reduced channel state is mixed into the outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rho1Mode {
    /// Trace-one partial trace of the reduced pair state (physical default).
    PartialTrace,
    /// The printed identity-proportional form; trace differs from one, kept
    /// for the compare report only.
    Printed,
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub channel: ChannelParams,
    pub triggers: TriggerPhase,
    pub rho1_mode: Rho1Mode,
    pub input_even: QubitDensity,
    pub input_odd: QubitDensity,
}

impl ProtocolConfig {
    /// Default inputs: the logical basis projectors |0_L><0_L| and |1_L><1_L|.
    pub fn new(channel: ChannelParams, triggers: TriggerPhase) -> Self {
        Self {
            channel,
            triggers,
            rho1_mode: Rho1Mode::PartialTrace,
            input_even: QubitDensity::basis0(),
            input_odd: QubitDensity::basis1(),
        }
    }

    pub fn with_rho1_mode(mut self, mode: Rho1Mode) -> Self {
        self.rho1_mode = mode;
        self
    }
}

/// Pure trigger state cos(theta/2)|0>_T + sin(theta/2)|1>_T; Bloch vector
/// (sin theta, 0, cos theta).
pub fn trigger_state(theta: f64) -> Result<QubitDensity> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::OutOfRange {
            what: "theta",
            value: theta,
            lo: 0.0,
            hi: std::f64::consts::PI,
        });
    }
    Ok(QubitDensity::pure(
        cr((theta / 2.0).cos()),
        cr((theta / 2.0).sin()),
    ))
}

/// Trigonometric convention for the printed success weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrigConvention {
    /// cos(theta) sin(theta), exactly as printed with the weight formula.
    FullAngle,
    /// cos(theta/2) sin(theta/2), the convention used by the printed helper
    /// functions; selectable for the compare report.
    HalfAngle,
}

/// Printed closed form P = (1/2)(1-p)[1 - 2 cos(theta) sin(theta)].
pub fn closed_form_weight(p: f64, theta: f64, convention: TrigConvention) -> f64 {
    let angle = match convention {
        TrigConvention::FullAngle => theta,
        TrigConvention::HalfAngle => theta / 2.0,
    };
    0.5 * (1.0 - p) * (1.0 - 2.0 * angle.cos() * angle.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub p_e: f64,
    pub p_o: f64,
}

/// Both routes to the success weights: the printed closed form and the trace
/// definition Tr(rho_T rho_in). Values are clamped to [0, 1]; the raw
/// pre-clamp values ride along for the compare report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessWeights {
    pub closed: WeightPair,
    pub closed_raw: WeightPair,
    pub oracle: WeightPair,
    pub oracle_raw: WeightPair,
}

pub fn success_weights(config: &ProtocolConfig) -> Result<SuccessWeights> {
    let p = config.channel.p();
    let raw_e = closed_form_weight(p, config.triggers.theta_e, TrigConvention::FullAngle);
    let raw_o = closed_form_weight(p, config.triggers.theta_o, TrigConvention::FullAngle);
    let t_e = trigger_state(config.triggers.theta_e)?;
    let t_o = trigger_state(config.triggers.theta_o)?;
    let trace_with = |t: &QubitDensity, rho: &QubitDensity| -> f64 {
        let prod = t.matrix() * rho.matrix();
        (prod[(0, 0)] + prod[(1, 1)]).re
    };
    let o_e = trace_with(&t_e, &config.input_even);
    let o_o = trace_with(&t_o, &config.input_odd);
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    Ok(SuccessWeights {
        closed: WeightPair {
            p_e: clamp(raw_e),
            p_o: clamp(raw_o),
        },
        closed_raw: WeightPair {
            p_e: raw_e,
            p_o: raw_o,
        },
        oracle: WeightPair {
            p_e: clamp(o_e),
            p_o: clamp(o_o),
        },
        oracle_raw: WeightPair { p_e: o_e, p_o: o_o },
    })
}

/// The reduced channel state mixed into the outputs, as a raw matrix so the
/// printed (non-trace-one) variant can be represented.
fn rho1_matrix(config: &ProtocolConfig) -> Result<Matrix2<C64>> {
    match config.rho1_mode {
        Rho1Mode::PartialTrace => Ok(*channel::reduced_single_state(&config.channel)?.matrix()),
        Rho1Mode::Printed => {
            let c = channel::printed_single_state_coefficient(&config.channel)?;
            Ok(Matrix2::new(cr(c), cr(0.0), cr(0.0), cr(c)))
        }
    }
}

/// Closed-form and oracle fidelities per direction, as carried by
/// [`TeleportOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub closed_ab: Option<f64>,
    pub closed_ba: Option<f64>,
    /// set when a closed-form value falls outside [0, 1]
    pub closed_ab_out_of_range: bool,
    pub closed_ba_out_of_range: bool,
    pub oracle_ab: Option<f64>,
    pub oracle_ba: Option<f64>,
}

/// The pair of teleported outputs with their weights and fidelity record.
///
/// The output matrices follow the printed labels: rho_out_e mixes the odd
/// input with weight P_o(1-P_e), rho_out_o mixes the even input with weight
/// P_e(1-P_o). In partial-trace mode both are valid states.
#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub rho_out_e: Matrix2<C64>,
    pub rho_out_o: Matrix2<C64>,
    pub p_e: f64,
    pub p_o: f64,
    pub weight_e: f64,
    pub weight_o: f64,
    pub fidelities: FidelityRecord,
}

impl TeleportOutcome {
    pub fn output_e_state(&self) -> Result<QubitDensity> {
        QubitDensity::new(self.rho_out_e)
    }

    pub fn output_o_state(&self) -> Result<QubitDensity> {
        QubitDensity::new(self.rho_out_o)
    }
}

pub fn teleported_states(config: &ProtocolConfig) -> Result<TeleportOutcome> {
    config.channel.check_not_degenerate()?;
    let weights = success_weights(config)?;
    let (p_e, p_o) = (weights.closed.p_e, weights.closed.p_o);
    let weight_e = p_o * (1.0 - p_e);
    let weight_o = p_e * (1.0 - p_o);
    let rho1 = rho1_matrix(config)?;
    let rho_out_e = config.input_odd.matrix() * cr(weight_e) + rho1 * cr(1.0 - weight_e);
    let rho_out_o = config.input_even.matrix() * cr(weight_o) + rho1 * cr(1.0 - weight_o);

    let closed_ab =
        fidelity_closed_form(Direction::AliceToBob, &config.channel, &config.triggers).ok();
    let closed_ba =
        fidelity_closed_form(Direction::BobToAlice, &config.channel, &config.triggers).ok();
    let out_of_range = |f: &Option<f64>| f.map(|x| !(0.0..=1.0).contains(&x)).unwrap_or(false);
    let (oracle_ab, oracle_ba) = if config.rho1_mode == Rho1Mode::PartialTrace {
        (
            Some(metrics::uhlmann_fidelity(
                &config.input_even,
                &QubitDensity::new(rho_out_o)?,
            )?),
            Some(metrics::uhlmann_fidelity(
                &config.input_odd,
                &QubitDensity::new(rho_out_e)?,
            )?),
        )
    } else {
        (None, None)
    };
    Ok(TeleportOutcome {
        rho_out_e,
        rho_out_o,
        p_e,
        p_o,
        weight_e,
        weight_o,
        fidelities: FidelityRecord {
            closed_ab_out_of_range: out_of_range(&closed_ab),
            closed_ba_out_of_range: out_of_range(&closed_ba),
            closed_ab,
            closed_ba,
            oracle_ab,
            oracle_ba,
        },
    })
}

/// Lambda(p, n, m) = 3 + p^2 + (3p^2 + 1) p^(n-2) cos(m pi).
pub fn lambda_factor(params: &ChannelParams) -> f64 {
    let p = params.p();
    3.0 + p * p + (3.0 * p * p + 1.0) * params.p_pow(params.n() as i32 - 2) * params.cos_m_pi()
}

/// The printed fidelity expressions, evaluated verbatim and returned
/// untouched; values may fall outside [0, 1] and are flagged downstream,
/// never clamped here.
pub fn fidelity_closed_form(
    direction: Direction,
    params: &ChannelParams,
    triggers: &TriggerPhase,
) -> Result<f64> {
    params.check_not_degenerate()?;
    let p = params.p();
    let se = triggers.theta_e.sin();
    let so = triggers.theta_o.sin();
    let denom = params.denominator();
    match direction {
        Direction::AliceToBob => {
            let first = 0.125 * (1.0 + p).powi(2) * (1.0 + se) * (1.0 + p + (1.0 - p) * so);
            let bracket =
                (1.0 + p) * so - p - 3.0 + (1.0 + p).powi(2) * se * ((p - 1.0) * so - 1.0 - p);
            Ok(first + lambda_factor(params) * (p * p - 1.0) / (32.0 * denom) * bracket)
        }
        Direction::BobToAlice => {
            if p == 0.0 {
                return Err(Error::OutOfDomain("printed B->A fidelity divides by p^2"));
            }
            let coh = params.p_pow(params.n() as i32) * params.cos_m_pi();
            let first = p * p * (3.0 + p * p) + coh * (1.0 + 3.0 * p * p);
            let second =
                p * p + 2.0 * p - 3.0 + (1.0 + p).powi(2) * se - (p * p - 1.0) * (1.0 + se) * so;
            Ok((p - 1.0) / (32.0 * p * p * denom) * first * second)
        }
    }
}

/// Uhlmann fidelity between the configured input and the output that carries
/// it: A->B compares input_even with rho_out_o, B->A compares input_odd with
/// rho_out_e.
pub fn fidelity_oracle(direction: Direction, config: &ProtocolConfig) -> Result<f64> {
    if config.rho1_mode != Rho1Mode::PartialTrace {
        return Err(Error::MalformedState(
            "oracle fidelity requires the trace-one channel residue".into(),
        ));
    }
    let outcome = teleported_states(config)?;
    match direction {
        Direction::AliceToBob => {
            metrics::uhlmann_fidelity(&config.input_even, &outcome.output_o_state()?)
        }
        Direction::BobToAlice => {
            metrics::uhlmann_fidelity(&config.input_odd, &outcome.output_e_state()?)
        }
    }
}

/// Grouping of the printed Bloch-component denominator, typeset ambiguously
/// as 4(1+p^n)cos(m pi).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenominatorGrouping {
    /// 4(1 + p^n cos(m pi)) — matches every other denominator in the closed
    /// forms; the default.
    CosInside,
    /// 4(1 + p^n) cos(m pi) — the literal reading, kept as an alternative.
    CosOutside,
}

/// Printed Bloch components of a teleported state with the derivative taken
/// against the estimated trigger phase, plus the |r| sanity flag.
#[derive(Debug, Clone, Copy)]
pub struct BlochReport {
    pub r: Vector3<f64>,
    pub dr: Vector3<f64>,
    pub norm: f64,
    pub within_ball: bool,
}

fn printed_components(
    direction: Direction,
    params: &ChannelParams,
    theta_e: f64,
    theta_o: f64,
    grouping: DenominatorGrouping,
) -> Result<Vector3<f64>> {
    params.check_not_degenerate()?;
    let p = params.p();
    let cm = params.cos_m_pi();
    let numerator = 3.0 + p * p + (1.0 + 3.0 * p * p) * params.p_pow(params.n() as i32 - 2) * cm;
    let t = match grouping {
        DenominatorGrouping::CosInside => numerator / (4.0 * params.denominator()),
        DenominatorGrouping::CosOutside => {
            numerator / (4.0 * (1.0 + params.p_pow(params.n() as i32)) * cm)
        }
    };
    let p_e = closed_form_weight(p, theta_e, TrigConvention::FullAngle);
    let p_o = closed_form_weight(p, theta_o, TrigConvention::FullAngle);
    // both printed z-components read -P_o (1 - P_e)
    let z = -p_o * (1.0 - p_e);
    let w = match direction {
        Direction::AliceToBob => p_e * (1.0 - p_o),
        Direction::BobToAlice => p_o * (1.0 - p_e),
    };
    Ok(Vector3::new(
        2.0 * w + (1.0 - w) * t,
        -2.0 * (1.0 - w) * t,
        z,
    ))
}

/// Evaluate the printed component expressions verbatim and differentiate them
/// against the estimated trigger phase by central differences.
pub fn teleported_bloch(
    direction: Direction,
    params: &ChannelParams,
    triggers: &TriggerPhase,
    grouping: DenominatorGrouping,
) -> Result<BlochReport> {
    let h = tol::TRIGGER_STEP;
    let at = |theta: f64| -> Result<Vector3<f64>> {
        match direction {
            Direction::AliceToBob => {
                printed_components(direction, params, theta, triggers.theta_o, grouping)
            }
            Direction::BobToAlice => {
                printed_components(direction, params, triggers.theta_e, theta, grouping)
            }
        }
    };
    let theta = match direction {
        Direction::AliceToBob => triggers.theta_e,
        Direction::BobToAlice => triggers.theta_o,
    };
    let r = at(theta)?;
    let dr = (at(theta + h)? - at(theta - h)?) / (2.0 * h);
    let norm = r.norm();
    Ok(BlochReport {
        r,
        dr,
        norm,
        within_ball: norm <= 1.0 + 1e-9,
    })
}

/// Strict QFI of the printed component family. The printed formulas leave
/// the Bloch ball on the published parameter grids; that is reported as
/// `InvalidBloch`, never clamped away.
pub fn qfi_trigger_printed(
    direction: Direction,
    params: &ChannelParams,
    triggers: &TriggerPhase,
    grouping: DenominatorGrouping,
) -> Result<f64> {
    let report = teleported_bloch(direction, params, triggers, grouping)?;
    if !report.within_ball {
        return Err(Error::InvalidBloch { norm: report.norm });
    }
    metrics::qfi_bloch(report.r, report.dr)
}

/// Evaluate the physical teleported state (partial-trace residue) as a
/// function of the estimated trigger phase. The closed-form weights extend
/// smoothly outside [0, pi], so endpoint derivatives need no special casing.
fn physical_output(
    direction: Direction,
    config: &ProtocolConfig,
    theta: f64,
) -> Result<QubitDensity> {
    let p = config.channel.p();
    let rho1 = channel::reduced_single_state(&config.channel)?;
    let (weight, source) = match direction {
        Direction::AliceToBob => {
            let p_e = closed_form_weight(p, theta, TrigConvention::FullAngle);
            let p_o = closed_form_weight(p, config.triggers.theta_o, TrigConvention::FullAngle);
            (p_e * (1.0 - p_o), &config.input_even)
        }
        Direction::BobToAlice => {
            let p_e = closed_form_weight(p, config.triggers.theta_e, TrigConvention::FullAngle);
            let p_o = closed_form_weight(p, theta, TrigConvention::FullAngle);
            (p_o * (1.0 - p_e), &config.input_odd)
        }
    };
    QubitDensity::new(source.matrix() * cr(weight) + rho1.matrix() * cr(1.0 - weight))
}

/// Trigger-phase estimation metrics of the teleported-state family: QFI
/// through the Bloch pipeline, both HSS readings, and the printed-component
/// diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TriggerEstimation {
    pub qfi: f64,
    /// sqrt((1/2) Tr[(d rho/d theta)^2]) = |dr|/2 of the state family
    pub hss_direct: f64,
    /// the relation the closed forms assert: (1/2) sqrt(QFI)
    pub hss_from_qfi: f64,
    pub hss_deviation: f64,
    pub bloch_norm: f64,
    pub r_dot_dr: f64,
    /// |r| of the printed component formulas at the same point
    pub printed_norm: f64,
    pub printed_within_ball: bool,
    /// Eq.-34 value of the printed components when they stay in the ball
    pub printed_qfi: Option<f64>,
}

pub fn trigger_estimation(
    direction: Direction,
    config: &ProtocolConfig,
) -> Result<TriggerEstimation> {
    config.channel.check_not_degenerate()?;
    let theta = match direction {
        Direction::AliceToBob => config.triggers.theta_e,
        Direction::BobToAlice => config.triggers.theta_o,
    };
    let h = tol::TRIGGER_STEP;
    let mid = physical_output(direction, config, theta)?;
    let hi = physical_output(direction, config, theta + h)?;
    let lo = physical_output(direction, config, theta - h)?;
    let r = mid.bloch();
    let dr = (hi.bloch() - lo.bloch()) / (2.0 * h);
    let drho = (hi.matrix() - lo.matrix()) / cr(2.0 * h);
    let qfi = metrics::qfi_bloch(r, dr)?;
    let hss_direct = metrics::hss(&drho)?;
    let hss_from_qfi = 0.5 * qfi.sqrt();
    let printed = teleported_bloch(
        direction,
        &config.channel,
        &config.triggers,
        DenominatorGrouping::CosInside,
    )?;
    let printed_qfi = if printed.within_ball {
        metrics::qfi_bloch(printed.r, printed.dr).ok()
    } else {
        None
    };
    Ok(TriggerEstimation {
        qfi,
        hss_direct,
        hss_from_qfi,
        hss_deviation: (hss_direct - hss_from_qfi).abs(),
        bloch_norm: r.norm(),
        r_dot_dr: r.dot(&dr),
        printed_norm: printed.norm,
        printed_within_ball: printed.within_ball,
        printed_qfi,
    })
}

/// QFI of the teleported-state family against the estimated trigger phase.
pub fn qfi_trigger(direction: Direction, config: &ProtocolConfig) -> Result<f64> {
    Ok(trigger_estimation(direction, config)?.qfi)
}

/// Direct HSS of the teleported-state family plus the value the closed forms
/// assert, (1/2) sqrt(QFI), and their deviation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HssReport {
    pub direct: f64,
    pub asserted_from_qfi: f64,
    pub deviation: f64,
}

pub fn hss_trigger(direction: Direction, config: &ProtocolConfig) -> Result<HssReport> {
    let est = trigger_estimation(direction, config)?;
    Ok(HssReport {
        direct: est.hss_direct,
        asserted_from_qfi: est.hss_from_qfi,
        deviation: est.hss_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepQuantity {
    FidelityClosed,
    FidelityOracle,
    Qfi,
    Hss,
}

/// One grid cell of a sweep; failures are data, recorded in place.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub direction: Direction,
    pub p: f64,
    pub n: u32,
    pub m: i32,
    pub theta_e: f64,
    pub theta_o: f64,
    pub value: Option<f64>,
    pub error: Option<String>,
}

/// Rectangular sweep of the selected quantity; cells are produced in grid
/// order (channel-major, then theta_e, then theta_o) and errors never abort
/// the sweep.
pub fn sweep(
    direction: Direction,
    channels: &[ChannelParams],
    theta_e_grid: &[f64],
    theta_o_grid: &[f64],
    quantity: SweepQuantity,
) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(channels.len() * theta_e_grid.len() * theta_o_grid.len());
    for ch in channels {
        for &te in theta_e_grid {
            for &to in theta_o_grid {
                let value = TriggerPhase::new(te, to).and_then(|triggers| {
                    let config = ProtocolConfig::new(*ch, triggers);
                    match quantity {
                        SweepQuantity::FidelityClosed => {
                            fidelity_closed_form(direction, ch, &triggers)
                        }
                        SweepQuantity::FidelityOracle => fidelity_oracle(direction, &config),
                        SweepQuantity::Qfi => qfi_trigger(direction, &config),
                        SweepQuantity::Hss => hss_trigger(direction, &config).map(|h| h.direct),
                    }
                });
                let (value, error) = match value {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                cells.push(SweepCell {
                    direction,
                    p: ch.p(),
                    n: ch.n(),
                    m: ch.m(),
                    theta_e: te,
                    theta_o: to,
                    value,
                    error,
                });
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn config(p: f64, n: u32, m: i32, te: f64, to: f64) -> ProtocolConfig {
        ProtocolConfig::new(
            ChannelParams::new(p, n, m).unwrap(),
            TriggerPhase::new(te, to).unwrap(),
        )
    }

    #[test]
    fn trigger_state_bloch() {
        let b = trigger_state(0.0).unwrap().bloch();
        assert!((b - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
        let b = trigger_state(FRAC_PI_2).unwrap().bloch();
        assert!((b - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
        let b = trigger_state(PI).unwrap().bloch();
        assert!((b - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-14);
        assert!(trigger_state(-0.1).is_err());
        assert!(trigger_state(PI + 0.1).is_err());
    }

    #[test]
    fn closed_form_weight_examples() {
        assert_abs_diff_eq!(
            closed_form_weight(0.0, 0.0, TrigConvention::FullAngle),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            closed_form_weight(0.0, FRAC_PI_4, TrigConvention::FullAngle),
            0.0,
            epsilon = 1e-15
        );
        for theta in [0.0, 0.3, 1.0, PI] {
            assert_abs_diff_eq!(
                closed_form_weight(1.0, theta, TrigConvention::FullAngle),
                0.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn weights_closed_vs_oracle_both_reported() {
        let w = success_weights(&config(0.0, 3, 0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(w.closed.p_e, 0.5, epsilon = 1e-15);
        // trace route with default inputs gives cos^2(theta/2) = 1 at theta=0
        assert_abs_diff_eq!(w.oracle.p_e, 1.0, epsilon = 1e-12);
        assert!(w.closed_raw.p_e >= 0.0 && w.closed_raw.p_e <= 1.0);
    }

    #[test]
    fn teleported_states_midpoint_example() {
        let out = teleported_states(&config(0.0, 3, 0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(out.p_e, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.p_o, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.weight_e, 0.25, epsilon = 1e-15);
        // (1/4)|1><1| + (3/4) I/2 = diag(3/8, 5/8)
        assert_abs_diff_eq!(out.rho_out_e[(0, 0)].re, 0.375, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rho_out_e[(1, 1)].re, 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(out.rho_out_o[(0, 0)].re, 0.625, epsilon = 1e-12);
    }

    #[test]
    fn teleported_states_endpoints_exact() {
        // p=0, theta_e=3pi/4 -> P_e = 1, theta_o=pi/4 -> P_o = 0: weight_o = 1
        let cfg = config(0.0, 3, 0, 3.0 * FRAC_PI_4, FRAC_PI_4);
        let out = teleported_states(&cfg).unwrap();
        assert_abs_diff_eq!(out.weight_o, 1.0, epsilon = 1e-15);
        assert!((out.rho_out_o - cfg.input_even.matrix()).norm() < 1e-12);
        // and weight_e = P_o (1-P_e) = 0: output e collapses to rho1 = I/2
        assert_abs_diff_eq!(out.weight_e, 0.0, epsilon = 1e-15);
        let rho1 = channel::reduced_single_state(&cfg.channel).unwrap();
        assert!((out.rho_out_e - rho1.matrix()).norm() < 1e-12);
    }

    #[test]
    fn printed_rho1_mode_keeps_printed_trace() {
        let cfg = config(0.0, 3, 0, 0.0, 0.0).with_rho1_mode(Rho1Mode::Printed);
        let out = teleported_states(&cfg).unwrap();
        let tr = (out.rho_out_e[(0, 0)] + out.rho_out_e[(1, 1)]).re;
        // 0.25 * 1 + 0.75 * (2 * 3/4) = 1.375
        assert_abs_diff_eq!(tr, 1.375, epsilon = 1e-12);
        assert!(out.output_e_state().is_err());
    }

    #[test]
    fn fidelity_closed_form_headline_points() {
        let triggers = TriggerPhase::new(0.0, 0.0).unwrap();
        let f = fidelity_closed_form(
            Direction::AliceToBob,
            &ChannelParams::new(1.0, 3, 0).unwrap(),
            &triggers,
        )
        .unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);

        let f = fidelity_closed_form(
            Direction::AliceToBob,
            &ChannelParams::new(0.0, 3, 0).unwrap(),
            &triggers,
        )
        .unwrap();
        assert_abs_diff_eq!(f, 13.0 / 32.0, epsilon = 1e-12);

        // printed formula escapes [0, 1]
        let triggers = TriggerPhase::new(FRAC_PI_2, 0.0).unwrap();
        let f = fidelity_closed_form(
            Direction::AliceToBob,
            &ChannelParams::new(1.0, 3, 0).unwrap(),
            &triggers,
        )
        .unwrap();
        assert_abs_diff_eq!(f, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_closed_form_domain_guards() {
        let triggers = TriggerPhase::new(0.0, 0.0).unwrap();
        let err = fidelity_closed_form(
            Direction::BobToAlice,
            &ChannelParams::new(0.0, 3, 0).unwrap(),
            &triggers,
        );
        assert!(matches!(err, Err(Error::OutOfDomain(_))));
        let err = fidelity_closed_form(
            Direction::AliceToBob,
            &ChannelParams::new(1.0, 3, 1).unwrap(),
            &triggers,
        );
        assert!(matches!(err, Err(Error::DegenerateChannel { .. })));
    }

    #[test]
    fn fidelity_oracle_endpoints() {
        // weight 1: output equals the input exactly
        let cfg = config(0.0, 3, 0, 3.0 * FRAC_PI_4, FRAC_PI_4);
        assert_abs_diff_eq!(
            fidelity_oracle(Direction::AliceToBob, &cfg).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // weight 0 with input |0><0| against rho1 = diag(lambda_e, lambda_o)
        let cfg = config(0.5, 3, 0, FRAC_PI_4, 0.0);
        let out = teleported_states(&cfg).unwrap();
        assert_abs_diff_eq!(out.weight_o, 0.0, epsilon = 1e-15);
        let rho1 = channel::reduced_single_state(&cfg.channel).unwrap();
        let lambda_e = rho1.matrix()[(0, 0)].re;
        assert_abs_diff_eq!(
            fidelity_oracle(Direction::AliceToBob, &cfg).unwrap(),
            lambda_e,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fidelity_oracle_convex_value() {
        // weight 1/4 onto the pure input plus 3/4 of I/2
        let cfg = config(0.0, 3, 0, 0.0, 0.0);
        assert_abs_diff_eq!(
            fidelity_oracle(Direction::AliceToBob, &cfg).unwrap(),
            0.625,
            epsilon = 1e-12
        );
    }

    #[test]
    fn printed_bloch_components() {
        let params = ChannelParams::new(0.0, 3, 0).unwrap();
        let triggers = TriggerPhase::new(0.0, 0.0).unwrap();
        let rep = teleported_bloch(
            Direction::AliceToBob,
            &params,
            &triggers,
            DenominatorGrouping::CosInside,
        )
        .unwrap();
        // z component reads -P_o(1-P_e) = -1/4
        assert_abs_diff_eq!(rep.r.z, -0.25, epsilon = 1e-12);
        assert!(
            !rep.within_ball,
            "published grids leave the Bloch ball, |r| = {}",
            rep.norm
        );

        // at p = 1 all weights vanish; only the channel term survives
        let params = ChannelParams::new(1.0, 3, 0).unwrap();
        let rep = teleported_bloch(
            Direction::AliceToBob,
            &params,
            &triggers,
            DenominatorGrouping::CosInside,
        )
        .unwrap();
        assert_abs_diff_eq!(rep.r.z, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.r.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.r.y, -2.0, epsilon = 1e-12);
        // theta-independent components differentiate to zero
        assert!(rep.dr.norm() < 1e-9);
    }

    #[test]
    fn denominator_groupings_differ_only_for_odd_m() {
        let triggers = TriggerPhase::new(0.4, 1.1).unwrap();
        let even = ChannelParams::new(0.3, 4, 0).unwrap();
        let a = teleported_bloch(
            Direction::AliceToBob,
            &even,
            &triggers,
            DenominatorGrouping::CosInside,
        )
        .unwrap();
        let b = teleported_bloch(
            Direction::AliceToBob,
            &even,
            &triggers,
            DenominatorGrouping::CosOutside,
        )
        .unwrap();
        assert!((a.r - b.r).norm() < 1e-15);

        let odd = ChannelParams::new(0.3, 4, 1).unwrap();
        let a = teleported_bloch(
            Direction::AliceToBob,
            &odd,
            &triggers,
            DenominatorGrouping::CosInside,
        )
        .unwrap();
        let b = teleported_bloch(
            Direction::AliceToBob,
            &odd,
            &triggers,
            DenominatorGrouping::CosOutside,
        )
        .unwrap();
        // the literal reading flips the sign of the channel term at odd m
        assert!((a.r - b.r).norm() > 0.1);
    }

    #[test]
    fn printed_qfi_reports_invalid_bloch() {
        let params = ChannelParams::new(0.0, 3, 0).unwrap();
        let triggers = TriggerPhase::new(0.0, 0.0).unwrap();
        let err = qfi_trigger_printed(
            Direction::AliceToBob,
            &params,
            &triggers,
            DenominatorGrouping::CosInside,
        );
        assert!(matches!(err, Err(Error::InvalidBloch { .. })));
    }

    #[test]
    fn trigger_estimation_theta_independent_family() {
        // p = 1, m even: both weights vanish for every theta
        let est = trigger_estimation(Direction::AliceToBob, &config(1.0, 3, 0, 0.3, 0.7)).unwrap();
        assert_abs_diff_eq!(est.qfi, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(est.hss_direct, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn qfi_is_four_hss_squared_when_orthogonal() {
        // at p=0 the residue is I/2 and theta_e=pi/4 puts the state at the
        // center, so r.dr = 0 there
        let est =
            trigger_estimation(Direction::AliceToBob, &config(0.0, 3, 0, FRAC_PI_4, 0.0)).unwrap();
        assert!(est.r_dot_dr.abs() < 1e-9);
        assert_abs_diff_eq!(
            est.qfi,
            4.0 * est.hss_direct * est.hss_direct,
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(est.hss_deviation, 0.0, epsilon = 1e-8);
    }

    #[test]
    fn pipeline_matches_spectral_route() {
        for &(p, te) in &[(0.3, 0.6), (0.5, 1.1), (0.7, 2.0)] {
            let cfg = config(p, 3, 0, te, 0.4);
            let est = trigger_estimation(Direction::AliceToBob, &cfg).unwrap();
            if est.bloch_norm < 1.0 - 1e-6 {
                let cfg2 = cfg.clone();
                let fam = metrics::ParamFamily::new(move |theta: f64| {
                    physical_output(Direction::AliceToBob, &cfg2, theta)
                });
                let spectral = metrics::qfi_spectral(&fam, te).unwrap();
                assert!(
                    (spectral - est.qfi).abs() < 1e-6,
                    "spectral {spectral} vs pipeline {} at p={p} te={te}",
                    est.qfi
                );
            }
        }
    }

    #[test]
    fn sweep_records_errors_in_cells() {
        let channels = vec![
            ChannelParams::new(0.0, 3, 0).unwrap(),
            ChannelParams::new(0.5, 3, 0).unwrap(),
        ];
        let cells = sweep(
            Direction::BobToAlice,
            &channels,
            &[0.0],
            &[0.0, FRAC_PI_2],
            SweepQuantity::FidelityClosed,
        );
        assert_eq!(cells.len(), 4);
        // B->A closed form is out of domain at p = 0
        assert!(cells[0].value.is_none());
        assert!(cells[0].error.as_deref().unwrap().contains("out of domain"));
        assert!(cells[2].value.is_some());
    }

    #[test]
    fn sweep_single_cell_matches_pointwise() {
        let ch = ChannelParams::new(0.4, 3, 0).unwrap();
        let cfg = config(0.4, 3, 0, 0.9, 0.2);
        let one = |q: SweepQuantity| {
            let cells = sweep(Direction::AliceToBob, &[ch], &[0.9], &[0.2], q);
            assert_eq!(cells.len(), 1);
            cells[0].value.unwrap()
        };
        assert_abs_diff_eq!(
            one(SweepQuantity::Qfi),
            qfi_trigger(Direction::AliceToBob, &cfg).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            one(SweepQuantity::Hss),
            hss_trigger(Direction::AliceToBob, &cfg).unwrap().direct,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            one(SweepQuantity::FidelityOracle),
            fidelity_oracle(Direction::AliceToBob, &cfg).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            one(SweepQuantity::FidelityClosed),
            fidelity_closed_form(Direction::AliceToBob, &ch, &cfg.triggers).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn outputs_valid_states_across_grid() {
        let thetas: Vec<f64> = (0..=31)
            .map(|k| k as f64 * 0.1)
            .filter(|&t| t <= PI)
            .collect();
        let mut ps: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        ps.push(1.0 - 1e-6);
        for &p in &ps {
            for n in 2..=25 {
                for m in 0..=1 {
                    for &theta in &thetas {
                        let cfg = config(p, n, m, theta, theta);
                        let out = teleported_states(&cfg).unwrap();
                        out.output_e_state().unwrap();
                        out.output_o_state().unwrap();
                    }
                }
            }
        }
    }
}
