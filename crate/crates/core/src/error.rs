use thiserror::Error;

/// Errors raised by the workbench operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The channel denominator 1 + p^n cos(m pi) vanishes; the (p = 1, m odd)
    /// point must be approached as a limit (p = 1 - eps).
    #[error("degenerate channel: 1 + p^n cos(m pi) = {denominator:.3e} at p={p}, n={n}, m={m}")]
    DegenerateChannel {
        p: f64,
        n: u32,
        m: i32,
        denominator: f64,
    },

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Fock truncation too aggressive for the requested amplitude.
    #[error("cutoff {cutoff} below required {required} for |eta| = {eta_abs}")]
    CutoffTooSmall {
        cutoff: usize,
        required: usize,
        eta_abs: f64,
    },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    /// The odd cat state has zero norm at eta = 0.
    #[error("degenerate state: {0}")]
    DegenerateState(&'static str),

    #[error("malformed state: {0}")]
    MalformedState(String),

    /// A nominally pure single-qubit family whose Bloch norm grows past 1.
    #[error("inconsistent family: |r| = {norm} with r.dr = {r_dot_dr:.3e}")]
    InconsistentFamily { norm: f64, r_dot_dr: f64 },

    /// Eigenvalue gap too small for eigenvector differentiation.
    #[error("degenerate spectrum: gap {gap:.3e} below 1e-8 at xi = {xi}")]
    DegenerateSpectrum { gap: f64, xi: f64 },

    /// The printed B->A fidelity divides by p^2.
    #[error("out of domain: {0}")]
    OutOfDomain(&'static str),

    /// Printed Bloch components left the Bloch ball; recorded, never clamped.
    #[error("invalid Bloch vector: |r| = {norm} exceeds 1")]
    InvalidBloch { norm: f64 },

    #[error("malformed gate: {0}")]
    MalformedGate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
