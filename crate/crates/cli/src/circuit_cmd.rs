//! Circuit execution and compare-report subcommands.

use anyhow::Result;
use serde::Serialize;

use bqt_core::channel::ChannelParams;
use bqt_core::circuit::{self, Circuit, Histogram, RoundtripReport, SimState};
use bqt_core::compare;
use bqt_core::protocol::TriggerPhase;

use crate::{CircuitArgs, CompareArgs, Rendered, PI};

/// Published reference probabilities for the two circuit configurations
/// (simulator columns; the hardware column is out of scope here).
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRow {
    pub direction: &'static str,
    pub p: f64,
    pub m: i32,
    pub phase_shift: f64,
    pub input_probabilities: [f64; 4],
    pub qasm_range: [f64; 2],
    pub aer_range: [f64; 2],
}

pub fn reference() -> Vec<ReferenceRow> {
    vec![
        ReferenceRow {
            direction: "ab",
            p: 0.0,
            m: 1,
            phase_shift: PI,
            input_probabilities: [0.25; 4],
            qasm_range: [0.249, 0.252],
            aer_range: [0.240, 0.251],
        },
        ReferenceRow {
            direction: "ba",
            p: 1.0,
            m: 0,
            phase_shift: 0.0,
            input_probabilities: [0.25; 4],
            qasm_range: [0.244, 0.253],
            aer_range: [0.245, 0.247],
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
struct CircuitOutput {
    p: f64,
    n: u32,
    m: i32,
    theta_e: f64,
    theta_o: f64,
    exact: Histogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<Histogram>,
    reference: Vec<ReferenceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roundtrip: Option<RoundtripReport>,
}

fn text_bars(hist: &Histogram) -> String {
    let mut out = String::new();
    for (key, &p) in &hist.probabilities {
        let bar = "#".repeat((p * 40.0).round() as usize);
        out.push_str(&format!("{key} {bar} {p:.4}\n"));
    }
    out
}

pub fn run(args: CircuitArgs) -> Result<Rendered> {
    // degenerate (p = 1, m odd) is probed as a limit
    let p = if args.p >= 1.0 && args.m.rem_euclid(2) == 1 {
        1.0 - 1e-9
    } else {
        args.p
    };
    let params = ChannelParams::new(p, args.n, args.m)?;
    let triggers = TriggerPhase::new(args.theta_e * PI, args.theta_o * PI)?;

    let built = circuit::build_bqt_circuit(&params, &triggers);
    let gates = match &args.circuit_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("circuit file {}: {e}", path.display()))?;
            Circuit::from_json(&text)?
        }
        None => built,
    };
    let mut files = Vec::new();
    if let Some(path) = &args.emit_circuit {
        files.push((path.clone(), gates.to_json() + "\n"));
    }

    let init = SimState::with_channel(&params)?;
    let exact = circuit::run_exact(&gates, &init)?;
    let sampled = match args.shots {
        Some(shots) => Some(circuit::run_shots(&gates, &init, shots, args.seed)?),
        None => None,
    };
    let roundtrip = if args.roundtrip {
        Some(circuit::teleport_roundtrip_check(&params, &triggers)?)
    } else {
        None
    };

    let output = CircuitOutput {
        p,
        n: args.n,
        m: args.m,
        theta_e: args.theta_e * PI,
        theta_o: args.theta_o * PI,
        exact,
        sampled,
        reference: reference(),
        roundtrip,
    };
    let json = serde_json::to_string_pretty(&output)? + "\n";

    match args.out {
        Some(path) => {
            files.push((path.clone(), json));
            Ok(Rendered {
                stdout: format!("{}wrote {}\n", text_bars(&output.exact), path.display()),
                files,
            })
        }
        None => Ok(Rendered {
            stdout: json,
            files,
        }),
    }
}

pub fn compare(args: CompareArgs) -> Result<Rendered> {
    let p_list = args.p.unwrap_or_else(|| vec![0.0, 0.2, 0.5, 1.0 - 1e-6]);
    let n_list = args.n.unwrap_or_else(|| vec![3, 25]);
    let m_list = args.m.unwrap_or_else(|| vec![0, 1]);
    anyhow::ensure!(
        !p_list.is_empty() && !n_list.is_empty() && !m_list.is_empty(),
        "empty grid"
    );
    let mut channels = Vec::new();
    for &p in &p_list {
        for &n in &n_list {
            for &m in &m_list {
                let p = if p >= 1.0 && m.rem_euclid(2) == 1 {
                    1.0 - 1e-6
                } else {
                    p
                };
                channels.push(ChannelParams::new(p, n, m)?);
            }
        }
    }
    let mut thetas: Vec<f64> = match (&args.theta_e, &args.theta_o) {
        (None, None) => (0..=8).map(|k| k as f64 * PI / 8.0).collect(),
        (te, to) => {
            let mut v: Vec<f64> = te
                .iter()
                .chain(to.iter())
                .flatten()
                .map(|u| u * PI)
                .collect();
            v.sort_by(|a, b| a.total_cmp(b));
            v.dedup();
            v
        }
    };
    thetas.retain(|t| (0.0..=PI).contains(t));
    anyhow::ensure!(!thetas.is_empty(), "empty grid");
    let report = compare::compare_report(&channels, &thetas)?;
    let markdown = report.to_markdown();
    let json = report.to_json() + "\n";
    match args.out {
        Some(base) => {
            let md_path = base.with_extension("md");
            let json_path = base.with_extension("json");
            Ok(Rendered {
                stdout: format!("wrote {} and {}\n", md_path.display(), json_path.display()),
                files: vec![(md_path, markdown), (json_path, json)],
            })
        }
        None => Ok(Rendered {
            stdout: format!("{markdown}\n{json}"),
            files: Vec::new(),
        }),
    }
}
