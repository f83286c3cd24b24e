//! Simulation and verification workbench for bidirectional teleportation of
//! even/odd cat-state qubits over a multipartite coherent channel.
//!
//! The crate evaluates the protocol's closed-form quantities, recomputes each
//! from first principles (truncated Fock arithmetic, Wootters eigenvalue
//! oracle, Uhlmann fidelity, spectral QFI), simulates the 10-qubit circuit,
//! and assembles figure datasets and printed-vs-oracle compare reports.

pub mod channel;
pub mod circuit;
pub mod compare;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod metrics;
pub mod protocol;
pub mod states;
pub mod tol;

pub use error::{Error, Result};
pub use states::{PairDensity, QubitDensity};
