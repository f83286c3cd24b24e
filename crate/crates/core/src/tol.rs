//! Shared numeric tolerances.
//!
//! Structural invariants (trace, hermiticity, normalization) are checked at
//! machine-precision scale; agreement between independent computation routes
//! at a looser scale that absorbs eigensolver iteration error.

/// Structural invariants: trace one, unit normalization, orthogonality.
pub const STRUCTURAL: f64 = 1e-12;

/// Agreement between two independent implementations of the same quantity.
pub const CROSS_ROUTE: f64 = 1e-10;

/// Offset used to probe p -> 1 limits without hitting the degenerate channel.
pub const LIMIT_EPS: f64 = 1e-6;

/// Central-difference step for trigger-phase derivatives.
pub const TRIGGER_STEP: f64 = 1e-6;

/// Default central-difference step for spectral-QFI differentiation.
pub const SPECTRAL_STEP: f64 = 1e-5;

/// Eigenvalues in [-PSD_CLAMP, 0) are numerical noise and clamp to zero;
/// anything more negative is a malformed state.
pub const PSD_CLAMP: f64 = 1e-10;

/// Rejection threshold for state-type constructors.
pub const STATE_REJECT: f64 = 1e-9;

/// Channel denominator below this is degenerate.
pub const DEGENERACY: f64 = 1e-15;

/// Eigenvalue gap below this makes eigenvector differentiation ill-posed.
pub const SPECTRAL_GAP: f64 = 1e-8;

/// Eigenvalues below this are dropped from the spectral QFI sums.
pub const SPECTRAL_NULL: f64 = 1e-12;
