use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed ingestion document. `element` names the first offending
    /// field path, e.g. `sections[1].paragraphs[0]`.
    #[error("parse error at {element}: {message}")]
    Parse { element: String, message: String },

    #[error("document {0} has an empty reference list")]
    EmptyReferences(String),

    #[error("unresolvable citation marker {marker:?} in sentence {sent_id}: {reason}")]
    UnresolvedMarker { marker: String, sent_id: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("model missing for stage {stage}: {hint}")]
    ModelMissing { stage: &'static str, hint: String },

    #[error(
        "propagation did not converge after {iterations} iterations (residual {residual:.3e}); \
         the damped citation operator likely has spectral radius >= 1, try a smaller damping"
    )]
    Divergence { iterations: usize, residual: f64 },

    #[error("model file {kind}: {message}")]
    ModelFormat { kind: &'static str, message: String },

    #[error("already exists: {0} (use --force to overwrite)")]
    AlreadyExists(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(element: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { element: element.into(), message: message.into() }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub(crate) fn model_format(kind: &'static str, message: impl Into<String>) -> Self {
        Error::ModelFormat { kind, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::EmptyReferences(_) => "empty-references",
            Error::UnresolvedMarker { .. } => "unresolved-marker",
            Error::Invalid(_) => "invalid",
            Error::NotFound(_) => "not-found",
            Error::ModelMissing { .. } => "model-missing",
            Error::Divergence { .. } => "divergence",
            Error::ModelFormat { .. } => "model-format",
            Error::AlreadyExists(_) => "exists",
            Error::Io { .. } => "io",
        }
    }
}
