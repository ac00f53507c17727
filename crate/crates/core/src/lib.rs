//! Exact non-Markovian dynamics of two entangled qubits, each coupled through
//! a mini-reservoir atom to a thermal bath.
//!
//! The fast path ([`propagator`], [`reconstruction`], [`entanglement`])
//! evolves nine coefficients per subsystem with exact matrix exponentials.
//! [`oracle`] integrates the full four-atom Lindblad equation and
//! [`nz_kernel`] solves the projected memory-kernel equation; both exist to
//! cross-check the fast path.

pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod nz_kernel;
pub mod ode;
pub mod oracle;
pub mod presets;
pub mod propagator;
pub mod reconstruction;
pub mod simulation;

pub use error::{Error, Result};
