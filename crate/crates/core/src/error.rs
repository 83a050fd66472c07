use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("spine detection failed: {reason}")]
    DetectionFailed {
        reason: String,
        best_score: Option<f64>,
    },

    #[error("missing pixel spacing: supply psize explicitly or add pixel_spacing_mm to the sidecar")]
    MissingPixelSpacing,

    #[error("out-of-order request: {0}")]
    Workflow(String),

    #[error("duplicate record {0}")]
    Duplicate(String),

    #[error("storage error: {0}")]
    Storage(#[from] io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Stable machine-readable code used in error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Decode(_) => "decode_error",
            Error::Validation(_) => "validation_error",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::DetectionFailed { .. } => "detection_failed",
            Error::MissingPixelSpacing => "missing_pixel_spacing",
            Error::Workflow(_) => "workflow_conflict",
            Error::Duplicate(_) => "duplicate_record",
            Error::Storage(_) => "storage_error",
            Error::Serialization(_) => "serialization_error",
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
