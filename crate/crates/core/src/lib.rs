//! Quantum Fisher information under noise.
//!
//! The crate computes SLD operators and QFI for qubit families
//! `ρ_θ = e^{-iθG} ρ e^{iθG}`, decides whether an error set or channel
//! preserves the QFI, builds stabilizer-protected GHZ schemes and evaluates the
//! closed-form QFI of GHZ probes under parallel and transverse dephasing,
//! with a dense density-matrix oracle for cross-checks.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod figures;
pub mod linalg;
pub mod oracle;
pub mod preservation;
pub mod qfi;
pub mod random;
pub mod schemes;
pub mod stabilizer;
pub mod state;

pub use error::{QfiError, Result};
