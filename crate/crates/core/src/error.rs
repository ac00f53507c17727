use thiserror::Error;

/// Everything that can go wrong inside the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` is out of range: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("trajectories were computed on different time grids")]
    GridMismatch,

    #[error("density matrix is not of X form: entry ({row},{col}) has magnitude {magnitude:.3e}")]
    NotXState {
        row: usize,
        col: usize,
        magnitude: f64,
    },

    #[error("state is not a physical density matrix: {0}")]
    Unphysical(String),

    #[error("integrator failed at t = {t}: {reason} (step {step:.3e}, {steps} steps taken)")]
    Integrator {
        t: f64,
        step: f64,
        steps: usize,
        reason: String,
    },

    #[error("memory kernel covers lags up to {available}, but {required} is required")]
    KernelCoverage { available: f64, required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
