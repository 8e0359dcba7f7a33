use alloc::string::String;

use crate::socp::SolveStatus;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("rate threshold {r_th} bps/Hz is infeasible")]
    Infeasible { r_th: f64 },

    #[error("cone solver stopped with {status:?} after {iterations} iterations (primal {primal:.2e}, dual {dual:.2e}, gap {gap:.2e})")]
    Solver { status: SolveStatus, iterations: usize, primal: f64, dual: f64, gap: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
