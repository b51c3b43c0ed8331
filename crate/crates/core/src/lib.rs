//! Magic of random matrix product states.
//!
//! The crate has two halves that are checked against each other. The
//! analytic half builds the fourth-moment Haar average of a random MPS as a
//! 24-state transfer-matrix model over `S4`. The sampling half draws Haar
//! unitaries, contracts the MPS to a statevector and evaluates the L1-norm
//! magic and fourth-moment Pauli sums directly.

pub mod error;
pub mod exact;
pub mod harness;
pub mod magic;
pub mod pauli;
pub mod polynomial;
pub mod rmps;
pub mod spectra;
pub mod sym4;
pub mod transfer;
pub mod weingarten;

pub use error::{MagicError, Result};
