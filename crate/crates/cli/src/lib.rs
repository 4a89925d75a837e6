//! Command-line surface of `kbwave`: job configuration, the verbs and their file formats.

pub mod config;
pub mod jobs;
pub mod output;
pub mod presets;

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed flags or configuration; exit code 2.
    Usage(String),
    /// The requested construction does not exist for these inputs.
    Infeasible(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) | CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::Failed(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
