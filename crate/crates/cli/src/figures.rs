//! Figure dataset subcommands: concurrence, fidelity, and QFI/HSS sweeps.

use anyhow::Result;
use serde::Serialize;

use bqt_core::channel::{self, ChannelParams};
use bqt_core::metrics;
use bqt_core::protocol::{self, Direction, ProtocolConfig, Rho1Mode, TriggerPhase};

use crate::render::{err_field, flag, num, opt_num};
use crate::{DirectionArg, Fig1Args, OutputFormat, Rendered, Rho1ModeArg, SweepArgs, PI};

const P_DEFAULT: [f64; 4] = [0.0, 0.2, 0.5, 1.0 - 1e-6];
const PANEL_POINTS: usize = 101;

fn directions(arg: Option<DirectionArg>) -> Vec<Direction> {
    match arg.unwrap_or(DirectionArg::Both) {
        DirectionArg::Ab => vec![Direction::AliceToBob],
        DirectionArg::Ba => vec![Direction::BobToAlice],
        DirectionArg::Both => vec![Direction::AliceToBob, Direction::BobToAlice],
    }
}

fn rho1_mode(arg: Option<Rho1ModeArg>) -> Rho1Mode {
    match arg.unwrap_or(Rho1ModeArg::Trace) {
        Rho1ModeArg::Trace => Rho1Mode::PartialTrace,
        Rho1ModeArg::Paper => Rho1Mode::Printed,
    }
}

fn sweep_angles(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| k as f64 * PI / (points - 1) as f64)
        .collect()
}

fn pi_units(list: &[f64]) -> Vec<f64> {
    list.iter().map(|v| v * PI).collect()
}

#[derive(Debug, Clone, Serialize)]
struct Fig1Row {
    p: f64,
    n: u32,
    m: i32,
    c_closed: Option<f64>,
    c_wootters: Option<f64>,
    abs_dev: Option<f64>,
    error: Option<String>,
}

pub const FIG1_HEADER: &str = "p,n,m,C_closed,C_wootters,abs_dev,error";

pub fn fig1(args: Fig1Args) -> Result<Rendered> {
    let p_list = args
        .p
        .unwrap_or_else(|| (0..=50).map(|k| k as f64 * 0.02).collect());
    let n_list = args.n.unwrap_or_else(|| vec![3, 5, 10, 25]);
    let m_list = args.m.unwrap_or_else(|| vec![0, 1]);
    anyhow::ensure!(
        !p_list.is_empty() && !n_list.is_empty() && !m_list.is_empty(),
        "empty grid"
    );

    let mut rows = Vec::new();
    for &m in &m_list {
        for &n in &n_list {
            for &p_req in &p_list {
                // degenerate (p = 1, m odd) is probed as a limit
                let p = if p_req >= 1.0 && m.rem_euclid(2) == 1 {
                    1.0 - 1e-6
                } else {
                    p_req
                };
                let cell = ChannelParams::new(p, n, m).and_then(|params| {
                    let closed = metrics::concurrence_closed_form(&params)?;
                    let oracle = metrics::concurrence(&channel::reduced_pair_state(&params)?)?;
                    Ok((closed, oracle))
                });
                rows.push(match cell {
                    Ok((c, w)) => Fig1Row {
                        p,
                        n,
                        m,
                        c_closed: Some(c),
                        c_wootters: Some(w),
                        abs_dev: Some((c - w).abs()),
                        error: None,
                    },
                    Err(e) => Fig1Row {
                        p,
                        n,
                        m,
                        c_closed: None,
                        c_wootters: None,
                        abs_dev: None,
                        error: Some(e.to_string()),
                    },
                });
            }
        }
    }

    let payload = match args.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut out = String::from(FIG1_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    num(r.p),
                    r.n,
                    r.m,
                    opt_num(r.c_closed),
                    opt_num(r.c_wootters),
                    opt_num(r.abs_dev),
                    err_field(&r.error)
                ));
            }
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    Ok(Rendered::routed(args.out, payload))
}

/// A published panel: which direction, channel parity/size, and the value of
/// the non-swept trigger angle.
struct Panel {
    direction: Direction,
    m: i32,
    n: u32,
    fixed: f64,
}

fn panel_cells(panels: &[Panel], points: usize) -> Vec<(Direction, ChannelParams, f64, f64)> {
    let sweep = sweep_angles(points);
    let mut cells = Vec::new();
    for panel in panels {
        for &p in P_DEFAULT.iter() {
            let params = ChannelParams::new(p, panel.n, panel.m).expect("panel grid is valid");
            for &theta in &sweep {
                let (te, to) = match panel.direction {
                    Direction::AliceToBob => (theta, panel.fixed),
                    Direction::BobToAlice => (panel.fixed, theta),
                };
                cells.push((panel.direction, params, te, to));
            }
        }
    }
    cells
}

fn explicit_cells(args: &SweepArgs) -> Result<Vec<(Direction, ChannelParams, f64, f64)>> {
    let p_list = args.p.clone().unwrap_or_else(|| P_DEFAULT.to_vec());
    let n_list = args.n.clone().unwrap_or_else(|| vec![3]);
    let m_list = args.m.clone().unwrap_or_else(|| vec![0]);
    let te_list = args
        .theta_e
        .as_deref()
        .map(pi_units)
        .unwrap_or_else(|| sweep_angles(args.points.unwrap_or(PANEL_POINTS)));
    let to_list = args
        .theta_o
        .as_deref()
        .map(pi_units)
        .unwrap_or_else(|| vec![0.0]);
    anyhow::ensure!(
        !p_list.is_empty()
            && !n_list.is_empty()
            && !m_list.is_empty()
            && !te_list.is_empty()
            && !to_list.is_empty(),
        "empty grid"
    );
    let mut cells = Vec::new();
    for direction in directions(args.direction) {
        for &m in &m_list {
            for &n in &n_list {
                for &p_req in &p_list {
                    let p = if p_req >= 1.0 && m.rem_euclid(2) == 1 {
                        1.0 - 1e-6
                    } else {
                        p_req
                    };
                    let params = ChannelParams::new(p, n, m)
                        .map_err(|e| anyhow::anyhow!("bad grid point: {e}"))?;
                    for &te in &te_list {
                        for &to in &to_list {
                            cells.push((direction, params, te, to));
                        }
                    }
                }
            }
        }
    }
    Ok(cells)
}

fn is_panel_mode(args: &SweepArgs) -> bool {
    args.p.is_none()
        && args.n.is_none()
        && args.m.is_none()
        && args.theta_e.is_none()
        && args.theta_o.is_none()
        && args.direction.is_none()
}

/// The four published fidelity panels.
pub fn fig4_panels() -> Vec<(Direction, ChannelParams, f64, f64)> {
    panel_cells(
        &[
            Panel {
                direction: Direction::AliceToBob,
                m: 0,
                n: 3,
                fixed: 0.0,
            },
            Panel {
                direction: Direction::AliceToBob,
                m: 1,
                n: 25,
                fixed: PI,
            },
            Panel {
                direction: Direction::BobToAlice,
                m: 0,
                n: 3,
                fixed: 0.0,
            },
            Panel {
                direction: Direction::BobToAlice,
                m: 1,
                n: 25,
                fixed: PI,
            },
        ],
        PANEL_POINTS,
    )
}

/// The four published QFI/HSS panels.
pub fn fig5_panels() -> Vec<(Direction, ChannelParams, f64, f64)> {
    panel_cells(
        &[
            Panel {
                direction: Direction::AliceToBob,
                m: 0,
                n: 3,
                fixed: 0.0,
            },
            Panel {
                direction: Direction::AliceToBob,
                m: 1,
                n: 25,
                fixed: PI / 6.0,
            },
            Panel {
                direction: Direction::BobToAlice,
                m: 0,
                n: 3,
                fixed: 0.0,
            },
            Panel {
                direction: Direction::BobToAlice,
                m: 1,
                n: 25,
                fixed: PI / 6.0,
            },
        ],
        PANEL_POINTS,
    )
}

#[derive(Debug, Clone, Serialize)]
struct Fig4Row {
    direction: &'static str,
    p: f64,
    n: u32,
    m: i32,
    theta_e: f64,
    theta_o: f64,
    f_closed: Option<f64>,
    f_oracle: Option<f64>,
    flag_out_of_range: bool,
    error: Option<String>,
}

pub const FIG4_HEADER: &str =
    "direction,p,n,m,theta_e,theta_o,F_closed,F_oracle,flag_out_of_range,error";

pub fn fig4(args: SweepArgs) -> Result<Rendered> {
    let cells = if is_panel_mode(&args) {
        fig4_panels()
    } else {
        explicit_cells(&args)?
    };
    let mode = rho1_mode(args.rho1_mode);

    let mut rows = Vec::new();
    for (direction, params, te, to) in cells {
        let mut errors: Vec<String> = Vec::new();
        let triggers = TriggerPhase::new(te, to).map_err(|e| anyhow::anyhow!("{e}"))?;
        let closed = match protocol::fidelity_closed_form(direction, &params, &triggers) {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };
        let config = ProtocolConfig::new(params, triggers).with_rho1_mode(mode);
        let oracle = match protocol::fidelity_oracle(direction, &config) {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        };
        rows.push(Fig4Row {
            direction: direction.label(),
            p: params.p(),
            n: params.n(),
            m: params.m(),
            theta_e: te,
            theta_o: to,
            f_closed: closed,
            f_oracle: oracle,
            flag_out_of_range: closed.map(|f| !(0.0..=1.0).contains(&f)).unwrap_or(false),
            error: if errors.is_empty() {
                None
            } else {
                Some(errors.join("; "))
            },
        });
    }

    let payload = match args.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut out = String::from(FIG4_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.direction,
                    num(r.p),
                    r.n,
                    r.m,
                    num(r.theta_e),
                    num(r.theta_o),
                    opt_num(r.f_closed),
                    opt_num(r.f_oracle),
                    flag(r.flag_out_of_range),
                    err_field(&r.error)
                ));
            }
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    Ok(Rendered::routed(args.out, payload))
}

#[derive(Debug, Clone, Serialize)]
struct Fig5Row {
    direction: &'static str,
    p: f64,
    n: u32,
    m: i32,
    theta_e: f64,
    theta_o: f64,
    qfi: Option<f64>,
    hss_direct: Option<f64>,
    hss_from_qfi: Option<f64>,
    printed_r_norm: Option<f64>,
    flag_bloch: bool,
    error: Option<String>,
}

pub const FIG5_HEADER: &str =
    "direction,p,n,m,theta_e,theta_o,QFI_pipeline,HSS_direct,HSS_from_QFI,printed_r_norm,flag_bloch,error";

pub fn fig5(args: SweepArgs) -> Result<Rendered> {
    let cells = if is_panel_mode(&args) {
        fig5_panels()
    } else {
        explicit_cells(&args)?
    };
    let mode = rho1_mode(args.rho1_mode);

    let mut rows = Vec::new();
    for (direction, params, te, to) in cells {
        let triggers = TriggerPhase::new(te, to).map_err(|e| anyhow::anyhow!("{e}"))?;
        let config = ProtocolConfig::new(params, triggers).with_rho1_mode(mode);
        let row = if mode == Rho1Mode::Printed {
            Err("QFI pipeline requires the trace-one channel residue".to_string())
        } else {
            protocol::trigger_estimation(direction, &config).map_err(|e| e.to_string())
        };
        rows.push(match row {
            Ok(est) => Fig5Row {
                direction: direction.label(),
                p: params.p(),
                n: params.n(),
                m: params.m(),
                theta_e: te,
                theta_o: to,
                qfi: Some(est.qfi),
                hss_direct: Some(est.hss_direct),
                hss_from_qfi: Some(est.hss_from_qfi),
                printed_r_norm: Some(est.printed_norm),
                flag_bloch: !est.printed_within_ball,
                error: None,
            },
            Err(e) => Fig5Row {
                direction: direction.label(),
                p: params.p(),
                n: params.n(),
                m: params.m(),
                theta_e: te,
                theta_o: to,
                qfi: None,
                hss_direct: None,
                hss_from_qfi: None,
                printed_r_norm: None,
                flag_bloch: false,
                error: Some(e),
            },
        });
    }

    let payload = match args.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut out = String::from(FIG5_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.direction,
                    num(r.p),
                    r.n,
                    r.m,
                    num(r.theta_e),
                    num(r.theta_o),
                    opt_num(r.qfi),
                    opt_num(r.hss_direct),
                    opt_num(r.hss_from_qfi),
                    opt_num(r.printed_r_norm),
                    flag(r.flag_bloch),
                    err_field(&r.error)
                ));
            }
            out
        }
        OutputFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    Ok(Rendered::routed(args.out, payload))
}
