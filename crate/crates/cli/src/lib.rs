//! Command-line driver: configuration, seeding and the pipeline commands.

pub mod commands;
pub mod config;

pub use config::Config;

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numeric divergence: {0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Diverged(_) => 4,
        }
    }
}

impl From<rmppi_core::Error> for CliError {
    fn from(e: rmppi_core::Error) -> Self {
        use rmppi_core::Error as E;
        match e {
            E::Io(_) | E::Format { .. } => CliError::Io(e.to_string()),
            E::Diverged(_) | E::NonFinite(_) => CliError::Diverged(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
