//! Command-line front end: figure datasets, circuit experiments, Fock-level
//! validation, and printed-vs-oracle compare reports.
//!
//! Every subcommand is a pure function of its flags (plus seed), so repeated
//! invocations are byte-identical. Numerical discrepancies inside cells are
//! data, never process failures.

pub mod circuit_cmd;
pub mod figures;
pub mod render;
pub mod validate_cmd;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub const PI: f64 = std::f64::consts::PI;

#[derive(Parser, Debug)]
#[command(
    name = "bqt",
    version,
    about = "Bidirectional cat-state teleportation workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Concurrence of the channel pair state: closed form vs Wootters oracle
    Fig1(Fig1Args),
    /// Teleportation fidelity sweeps: printed closed form vs Uhlmann oracle
    Fig4(SweepArgs),
    /// Trigger-phase QFI and HSS sweeps
    Fig5(SweepArgs),
    /// Run the 10-qubit circuit, exactly and with sampled shots
    Circuit(CircuitArgs),
    /// Printed-form vs oracle comparison ledger
    Compare(CompareArgs),
    /// Fock-space validation of the overlap and encoding laws
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum DirectionArg {
    Ab,
    Ba,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Rho1ModeArg {
    Trace,
    Paper,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Fig1Args {
    /// overlap values, comma separated
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// probe counts, comma separated
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// parity indices, comma separated
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<i32>>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run-config replacing all other flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<i32>>,
    /// trigger phases in units of pi, comma separated
    #[arg(long = "theta-e", value_delimiter = ',')]
    pub theta_e: Option<Vec<f64>>,
    #[arg(long = "theta-o", value_delimiter = ',')]
    pub theta_o: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// points for the swept angle in panel mode
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long = "rho1-mode", value_enum)]
    pub rho1_mode: Option<Rho1ModeArg>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CircuitArgs {
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub m: i32,
    /// trigger phases in units of pi
    #[arg(long = "theta-e", default_value_t = 1.0)]
    pub theta_e: f64,
    #[arg(long = "theta-o", default_value_t = 1.0)]
    pub theta_o: f64,
    /// sampled shots; omit for exact-only output
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// include the per-branch roundtrip fidelity report
    #[arg(long, default_value_t = false)]
    pub roundtrip: bool,
    /// load the gate list from a circuit description file instead of the
    /// shipped reconstruction
    #[arg(long = "circuit-file")]
    pub circuit_file: Option<PathBuf>,
    /// write the gate list actually used to a description file
    #[arg(long = "emit-circuit")]
    pub emit_circuit: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Default for CircuitArgs {
    fn default() -> Self {
        Self {
            p: 0.0,
            n: 3,
            m: 1,
            theta_e: 1.0,
            theta_o: 1.0,
            shots: None,
            seed: 7,
            roundtrip: false,
            circuit_file: None,
            emit_circuit: None,
            out: None,
            config: None,
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareArgs {
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<i32>>,
    /// trigger phases in units of pi (used for both angles)
    #[arg(long = "theta-e", value_delimiter = ',')]
    pub theta_e: Option<Vec<f64>>,
    #[arg(long = "theta-o", value_delimiter = ',')]
    pub theta_o: Option<Vec<f64>>,
    /// base output path; writes `<out>.md` and `<out>.json`
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidateArgs {
    /// coherent amplitudes, comma separated
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// photon-number cutoff; omitted means automatic per amplitude
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Rendered command output: text for stdout plus files to write.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Rendered {
    fn stdout_only(text: String) -> Self {
        Self {
            stdout: text,
            files: Vec::new(),
        }
    }

    /// Route the primary payload to a file when `out` is given, else stdout.
    fn routed(out: Option<PathBuf>, payload: String) -> Self {
        match out {
            Some(path) => Self {
                stdout: format!("wrote {}\n", path.display()),
                files: vec![(path, payload)],
            },
            None => Self::stdout_only(payload),
        }
    }
}

fn load_config<T: serde::de::DeserializeOwned>(path: &PathBuf) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("run-config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("run-config {}: {e}", path.display()))
}

fn with_config<T: serde::de::DeserializeOwned>(
    args: T,
    config: &Option<PathBuf>,
) -> anyhow::Result<T> {
    match config {
        Some(path) => load_config(path),
        None => Ok(args),
    }
}

/// Execute a parsed command; pure apart from reading --config / circuit files.
pub fn execute(cli: Cli) -> anyhow::Result<Rendered> {
    match cli.command {
        Command::Fig1(args) => {
            let cfg = args.config.clone();
            figures::fig1(with_config(args, &cfg)?)
        }
        Command::Fig4(args) => {
            let cfg = args.config.clone();
            figures::fig4(with_config(args, &cfg)?)
        }
        Command::Fig5(args) => {
            let cfg = args.config.clone();
            figures::fig5(with_config(args, &cfg)?)
        }
        Command::Circuit(args) => {
            let cfg = args.config.clone();
            circuit_cmd::run(with_config(args, &cfg)?)
        }
        Command::Compare(args) => {
            let cfg = args.config.clone();
            circuit_cmd::compare(with_config(args, &cfg)?)
        }
        Command::Validate(args) => {
            let cfg = args.config.clone();
            validate_cmd::run(with_config(args, &cfg)?)
        }
    }
}
