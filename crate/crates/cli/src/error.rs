use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// Failures of a CLI run, each mapped to a documented exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Serialize)]
struct Report<'a> {
    status: &'static str,
    kind: &'static str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a PathBuf>,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Check(_) => "check",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON error report for stderr.
    pub fn report(&self) -> String {
        let path = match self {
            CliError::Io { path, .. } => Some(path),
            _ => None,
        };
        let r =
            Report { status: "error", kind: self.kind(), exit_code: self.exit_code(), message: self.to_string(), path };
        serde_json::to_string(&r).expect("error report serializes")
    }
}

/// Bad inputs are config errors, failed convergence is numerical.
impl From<propertime::Error> for CliError {
    fn from(e: propertime::Error) -> Self {
        use propertime::Error as E;
        match e {
            E::NonConvergence { .. } | E::UnderResolved { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
