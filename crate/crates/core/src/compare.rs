//! Printed-form vs oracle comparison ledger: every printed quantity that
//! has an independent first-principles route is evaluated both ways over a
//! grid, and the deviations become report rows.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelParams};
use crate::error::Result;
use crate::linalg::{cr, C64};
use crate::metrics;
use crate::protocol::{self, Direction, ProtocolConfig, TrigConvention, TriggerPhase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// the two routes agree at cross-route tolerance
    Consistent,
    /// the printed form is structurally broken (for instance trace != 1)
    Inconsistent,
    /// a real, expected printed-vs-oracle gap, documented not asserted
    Flagged,
}

/// A concrete grid cell pinned into the report as evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRef {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    pub p: f64,
    pub n: u32,
    pub m: i32,
    pub theta_e: f64,
    pub theta_o: f64,
    pub printed: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareEntry {
    pub quantity: String,
    /// representative printed-form value (see note for the cell)
    pub printed_value: f64,
    pub oracle_value: f64,
    pub max_abs_deviation: f64,
    pub mean_abs_deviation: f64,
    pub verdict: Verdict,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<CellRef>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub entries: Vec<CompareEntry>,
}

impl CompareReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Printed forms vs oracle comparison\n\n");
        out.push_str("| quantity | printed | oracle | max |dev| | mean |dev| | verdict | note |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for e in &self.entries {
            out.push_str(&format!(
                "| {} | {:.6} | {:.6} | {:.3e} | {:.3e} | {} | {} |\n",
                e.quantity,
                e.printed_value,
                e.oracle_value,
                e.max_abs_deviation,
                e.mean_abs_deviation,
                match e.verdict {
                    Verdict::Consistent => "consistent",
                    Verdict::Inconsistent => "inconsistent",
                    Verdict::Flagged => "flagged",
                },
                e.note
            ));
        }
        for e in &self.entries {
            if let Some(cell) = &e.example {
                out.push_str(&format!(
                    "\n- {} example cell: direction={} p={} n={} m={} theta_e={} theta_o={}: printed={} oracle={}\n",
                    e.quantity,
                    cell.direction.as_deref().unwrap_or("-"),
                    cell.p,
                    cell.n,
                    cell.m,
                    cell.theta_e,
                    cell.theta_o,
                    cell.printed,
                    cell.oracle
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn entry(&self, quantity: &str) -> Option<&CompareEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }
}

/// The printed even/odd-basis expansion of the reduced pair state, evaluated
/// verbatim (with the (a^4 + b^4) coefficient on both diagonal cat
/// projectors); its trace is not one in general.
pub fn pair_state_printed(params: &ChannelParams) -> Result<Matrix4<C64>> {
    params.check_not_degenerate()?;
    let enc = channel::logical_encoding(params.p())?;
    let (a, b) = (enc.a, enc.b);
    let n2 = 1.0 / (2.0 * params.denominator());
    let coh = params.p_pow(params.n() as i32 - 2) * params.cos_m_pi();
    let diag = (a.powi(4) + b.powi(4)) * (1.0 + coh);
    let cross = a * a * b * b * (1.0 - coh);
    let corner = a * a * b * b * (1.0 + coh);
    let mut m = Matrix4::zeros();
    m[(0, 0)] = cr(diag);
    m[(3, 3)] = cr(diag);
    for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        m[(i, j)] = cr(cross);
    }
    m[(0, 3)] = cr(corner);
    m[(3, 0)] = cr(corner);
    Ok(m * cr(2.0 * n2))
}

struct Accumulator {
    max: f64,
    sum: f64,
    count: usize,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            max: 0.0,
            sum: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, dev: f64) {
        self.max = self.max.max(dev);
        self.sum += dev;
        self.count += 1;
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

/// Build the full per-quantity ledger over the given channel and trigger
/// grids. Cells where a printed formula is undefined (degenerate channel,
/// B->A at p = 0) are skipped for that quantity, never fatal.
pub fn compare_report(channels: &[ChannelParams], thetas: &[f64]) -> Result<CompareReport> {
    let mut entries = Vec::new();

    // reduced pair state: printed expansion vs trace-one reconstruction
    {
        let mut acc = Accumulator::new();
        let mut trace_acc = Accumulator::new();
        for ch in channels {
            let (Ok(printed), Ok(rebuilt)) =
                (pair_state_printed(ch), channel::reduced_pair_state(ch))
            else {
                continue;
            };
            acc.push((printed - rebuilt.matrix()).norm());
            let tr: f64 = (0..4).map(|i| printed[(i, i)].re).sum();
            trace_acc.push((tr - 1.0).abs());
        }
        let probe = ChannelParams::new(0.0, 3, 0).expect("valid");
        let printed_trace: f64 = (0..4)
            .map(|i| pair_state_printed(&probe).unwrap()[(i, i)].re)
            .sum();
        entries.push(CompareEntry {
            quantity: "pair_state".into(),
            printed_value: printed_trace,
            oracle_value: 1.0,
            max_abs_deviation: acc.max,
            mean_abs_deviation: acc.mean(),
            verdict: if trace_acc.max > 1e-10 { Verdict::Inconsistent } else { Verdict::Consistent },
            note: format!(
                "printed expansion trace reaches {:.4} (values are traces at p=0, n=3, m=0); max trace deviation {:.3e}",
                printed_trace, trace_acc.max
            ),
            example: None,
        });
    }

    // reduced single state: printed identity-proportional form vs partial trace
    {
        let mut acc = Accumulator::new();
        for ch in channels {
            if let Ok(c) = channel::printed_single_state_coefficient(ch) {
                acc.push((2.0 * c - 1.0).abs());
            }
        }
        let probe = ChannelParams::new(0.0, 3, 0).expect("valid");
        let printed = 2.0 * channel::printed_single_state_coefficient(&probe).unwrap();
        entries.push(CompareEntry {
            quantity: "single_state".into(),
            printed_value: printed,
            oracle_value: 1.0,
            max_abs_deviation: acc.max,
            mean_abs_deviation: acc.mean(),
            verdict: if acc.max > 1e-10 {
                Verdict::Inconsistent
            } else {
                Verdict::Consistent
            },
            note: "values are traces at p=0, n=3, m=0; the printed coefficient is not trace-one"
                .into(),
            example: None,
        });
    }

    // concurrence: closed form vs Wootters eigenvalue oracle
    {
        let mut acc = Accumulator::new();
        for ch in channels {
            let (Ok(closed), Ok(pair)) = (
                metrics::concurrence_closed_form(ch),
                channel::reduced_pair_state(ch),
            ) else {
                continue;
            };
            let oracle = metrics::concurrence(&pair)?;
            acc.push((closed - oracle).abs());
        }
        let probe = ChannelParams::new(0.5, 3, 0).expect("valid");
        let closed = metrics::concurrence_closed_form(&probe).unwrap();
        let oracle = metrics::concurrence(&channel::reduced_pair_state(&probe).unwrap()).unwrap();
        entries.push(CompareEntry {
            quantity: "concurrence".into(),
            printed_value: closed,
            oracle_value: oracle,
            max_abs_deviation: acc.max,
            mean_abs_deviation: acc.mean(),
            verdict: if acc.max <= 1e-10 {
                Verdict::Consistent
            } else {
                Verdict::Inconsistent
            },
            note: "values at p=0.5, n=3, m=0".into(),
            example: None,
        });
    }

    // fidelity: printed closed forms vs Uhlmann oracle, both directions
    {
        let mut acc = Accumulator::new();
        let mut out_of_range = 0usize;
        let mut example: Option<CellRef> = None;
        let mut probe: Option<(f64, f64)> = None;
        for direction in [Direction::AliceToBob, Direction::BobToAlice] {
            for ch in channels {
                for &te in thetas {
                    for &to in thetas {
                        let Ok(triggers) = TriggerPhase::new(te, to) else {
                            continue;
                        };
                        let Ok(closed) = protocol::fidelity_closed_form(direction, ch, &triggers)
                        else {
                            continue;
                        };
                        let config = ProtocolConfig::new(*ch, triggers);
                        let oracle = protocol::fidelity_oracle(direction, &config)?;
                        acc.push((closed - oracle).abs());
                        if probe.is_none() {
                            probe = Some((closed, oracle));
                        }
                        if !(0.0..=1.0).contains(&closed) {
                            out_of_range += 1;
                            if example.is_none() && (0.0..=1.0 + 1e-9).contains(&oracle) {
                                example = Some(CellRef {
                                    direction: Some(direction.label().into()),
                                    p: ch.p(),
                                    n: ch.n(),
                                    m: ch.m(),
                                    theta_e: te,
                                    theta_o: to,
                                    printed: closed,
                                    oracle,
                                });
                            }
                        }
                    }
                }
            }
        }
        let (printed_value, oracle_value) = probe.unwrap_or((f64::NAN, f64::NAN));
        entries.push(CompareEntry {
            quantity: "fidelity".into(),
            printed_value,
            oracle_value,
            max_abs_deviation: acc.max,
            mean_abs_deviation: acc.mean(),
            verdict: Verdict::Flagged,
            note: format!(
                "{out_of_range} grid cell(s) where the printed formula leaves [0,1]; oracle stays in range"
            ),
            example,
        });
    }

    // success weights: printed closed form vs trace definition, plus the
    // half-angle trig convention
    {
        let mut acc = Accumulator::new();
        let mut half_acc = Accumulator::new();
        for ch in channels {
            for &te in thetas {
                for &to in thetas {
                    let Ok(triggers) = TriggerPhase::new(te, to) else {
                        continue;
                    };
                    let config = ProtocolConfig::new(*ch, triggers);
                    let w = protocol::success_weights(&config)?;
                    acc.push((w.closed.p_e - w.oracle.p_e).abs());
                    acc.push((w.closed.p_o - w.oracle.p_o).abs());
                    let half = protocol::closed_form_weight(ch.p(), te, TrigConvention::HalfAngle);
                    half_acc.push((w.closed.p_e - half).abs());
                }
            }
        }
        let probe_ch = channels
            .first()
            .copied()
            .unwrap_or(ChannelParams::new(0.0, 3, 0).expect("valid"));
        let w = protocol::success_weights(&ProtocolConfig::new(
            probe_ch,
            TriggerPhase::new(0.0, 0.0).expect("valid"),
        ))?;
        entries.push(CompareEntry {
            quantity: "success_weights".into(),
            printed_value: w.closed.p_e,
            oracle_value: w.oracle.p_e,
            max_abs_deviation: acc.max,
            mean_abs_deviation: acc.mean(),
            verdict: Verdict::Flagged,
            note: format!(
                "trace definition does not reproduce the printed closed form; half-angle convention differs by up to {:.3e}",
                half_acc.max
            ),
            example: None,
        });
    }

    // HSS: direct statistical speed vs the asserted (1/2) sqrt(QFI)
    {
        let mut acc = Accumulator::new();
        let mut probe: Option<(f64, f64)> = None;
        for direction in [Direction::AliceToBob, Direction::BobToAlice] {
            for ch in channels {
                for &te in thetas {
                    for &to in thetas {
                        let Ok(triggers) = TriggerPhase::new(te, to) else {
                            continue;
                        };
                        let config = ProtocolConfig::new(*ch, triggers);
                        let Ok(est) = protocol::trigger_estimation(direction, &config) else {
                            continue;
                        };
                        acc.push(est.hss_deviation);
                        if probe.is_none() {
                            probe = Some((est.hss_from_qfi, est.hss_direct));
                        }
                    }
                }
            }
        }
        let (printed_value, oracle_value) = probe.unwrap_or((f64::NAN, f64::NAN));
        entries.push(CompareEntry {
            quantity: "hss_relation".into(),
            printed_value,
            oracle_value,
            max_abs_deviation: acc.max,
            mean_abs_deviation: acc.mean(),
            verdict: Verdict::Flagged,
            note: "HSS = (1/2) sqrt(QFI) holds only where r.dr = 0; deviation reported".into(),
            example: None,
        });
    }

    // printed Bloch components: fraction of cells leaving the Bloch ball
    {
        let mut total = 0usize;
        let mut outside = 0usize;
        let mut worst: f64 = 0.0;
        for direction in [Direction::AliceToBob, Direction::BobToAlice] {
            for ch in channels {
                for &te in thetas {
                    for &to in thetas {
                        let Ok(triggers) = TriggerPhase::new(te, to) else {
                            continue;
                        };
                        let Ok(rep) = protocol::teleported_bloch(
                            direction,
                            ch,
                            &triggers,
                            protocol::DenominatorGrouping::CosInside,
                        ) else {
                            continue;
                        };
                        total += 1;
                        if !rep.within_ball {
                            outside += 1;
                        }
                        worst = worst.max(rep.norm);
                    }
                }
            }
        }
        entries.push(CompareEntry {
            quantity: "printed_bloch_norm".into(),
            printed_value: worst,
            oracle_value: 1.0,
            max_abs_deviation: (worst - 1.0).max(0.0),
            mean_abs_deviation: (worst - 1.0).max(0.0),
            verdict: if outside > 0 {
                Verdict::Inconsistent
            } else {
                Verdict::Consistent
            },
            note: format!("{outside} of {total} cells leave the Bloch ball (|r| up to {worst:.4})"),
            example: None,
        });
    }

    Ok(CompareReport { entries })
}

/// Default compare grid: the figure-panel channels crossed with a coarse
/// trigger sweep.
pub fn default_grid() -> (Vec<ChannelParams>, Vec<f64>) {
    let mut channels = Vec::new();
    for &p in &[0.0, 0.2, 0.5, 1.0 - 1e-6] {
        for &n in &[3u32, 25] {
            for m in 0..=1 {
                channels.push(ChannelParams::new(p, n, m).expect("valid grid point"));
            }
        }
    }
    let thetas: Vec<f64> = (0..=8)
        .map(|k| k as f64 * std::f64::consts::PI / 8.0)
        .collect();
    (channels, thetas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn printed_pair_state_trace_discrepancy() {
        let m = pair_state_printed(&ChannelParams::new(0.0, 3, 0).unwrap()).unwrap();
        let tr: f64 = (0..4).map(|i| m[(i, i)].re).sum();
        assert_abs_diff_eq!(tr, 1.5, epsilon = 1e-12);
        // the misgrouped diagonal puts weight on |oo><oo| even at p = 1
        let probe = ChannelParams::new(1.0, 3, 0).unwrap();
        let printed = pair_state_printed(&probe).unwrap();
        let rebuilt = channel::reduced_pair_state(&probe).unwrap();
        assert_abs_diff_eq!(printed[(3, 3)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rebuilt.matrix()[(3, 3)].re, 0.0, epsilon = 1e-12);
        assert!((printed - rebuilt.matrix()).norm() > 0.9);
    }

    #[test]
    fn report_has_expected_verdicts() {
        let (channels, thetas) = default_grid();
        let report = compare_report(&channels, &thetas).unwrap();
        assert_eq!(
            report.entry("single_state").unwrap().verdict,
            Verdict::Inconsistent
        );
        assert_eq!(
            report.entry("pair_state").unwrap().verdict,
            Verdict::Inconsistent
        );
        let conc = report.entry("concurrence").unwrap();
        assert_eq!(conc.verdict, Verdict::Consistent);
        assert!(conc.max_abs_deviation < 1e-10);
        let fid = report.entry("fidelity").unwrap();
        assert!(
            fid.example.is_some(),
            "an out-of-range fidelity cell must be documented"
        );
        let cell = fid.example.as_ref().unwrap();
        assert!(!(0.0..=1.0).contains(&cell.printed));
        assert!((0.0..=1.0 + 1e-9).contains(&cell.oracle));
        assert_eq!(
            report.entry("printed_bloch_norm").unwrap().verdict,
            Verdict::Inconsistent
        );
    }

    #[test]
    fn report_serializes_both_ways() {
        let channels = vec![ChannelParams::new(0.5, 3, 0).unwrap()];
        let thetas = vec![0.0, 1.0];
        let report = compare_report(&channels, &thetas).unwrap();
        let md = report.to_markdown();
        assert!(md.contains("| concurrence |"));
        let json = report.to_json();
        let parsed: CompareReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.entries.len(), report.entries.len());
    }
}
