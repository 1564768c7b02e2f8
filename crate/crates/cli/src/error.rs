use std::path::PathBuf;

use gridlay::{ExportError, GraphError, HierarchyError, PointCloudError, SolverError};
use thiserror::Error;

/// Failures, split by exit code: bad input exits with 2, numeric failure with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) | Self::Io { .. } => 2,
            Self::Numeric(_) => 3,
        }
    }

    /// Prefixes the message with where the failure happened.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            Self::Input(m) => Self::Input(format!("{what}: {m}")),
            Self::Numeric(m) => Self::Numeric(format!("{what}: {m}")),
            io @ Self::Io { .. } => io,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<PointCloudError> for CliError {
    fn from(e: PointCloudError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(_) | SolverError::EmptyGraph | SolverError::Input(_) => Self::Input(e.to_string()),
            SolverError::NonFinite { .. } => Self::Numeric(e.to_string()),
        }
    }
}

impl From<HierarchyError> for CliError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::Solver(inner) => inner.into(),
            HierarchyError::Overflow { .. } | HierarchyError::OutOfBounds { .. } => Self::Numeric(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Solver(inner) => inner.into(),
            ExportError::Overflow { .. } => Self::Numeric(e.to_string()),
            ExportError::Io { path, source } => Self::Io { path, source },
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Input(format!("invalid json: {e}"))
    }
}
