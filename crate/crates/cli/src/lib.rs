//! Command-line harness: configuration, dispatch, reports and sweeps.

pub mod config;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{Command, RunArgs, RunConfig};
pub use report::{Report, Status};
pub use run::{render, run};
pub use sweep::{sweep, SweepSpec};

use zfx_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl RunError {
    /// 1 usage or I/O, 2 guard, 3 search failure, 4 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Io(_) => 1,
            RunError::Core(Error::ResourceLimit { .. }) => 2,
            RunError::Core(Error::SearchFailure { .. }) => 3,
            RunError::Core(Error::GuaranteeFailure { .. }) => 4,
            RunError::Core(Error::InvalidArgument(_) | Error::Parse(_)) => 1,
        }
    }
}
