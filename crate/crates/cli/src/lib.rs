//! Library surface of the `zeno` command-line tool, exposed so integration
//! tests can drive the commands without spawning processes.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

/// Command-line failure modes, mapped onto process exit codes:
/// configuration problems exit 2, numerical degeneracies exit 3, I/O and
/// internal errors exit 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub(crate) fn from_io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("write to {} failed: {e}", path.display()))
    }

    /// Core errors surfacing through a command are configuration problems
    /// (bad physics input) unless they are numerical degeneracies.
    pub fn from_core(e: zeno_core::Error) -> Self {
        match e {
            zeno_core::Error::DegenerateLaw(_)
            | zeno_core::Error::ZeroGeometricAverage
            | zeno_core::Error::ZeroArithmeticAverage
            | zeno_core::Error::DegenerateWeights => CliError::Degenerate(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
