use std::io;

use thiserror::Error;

/// Errors produced anywhere in the ferns pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid training set: {0}")]
    InvalidTrainingSet(String),

    #[error("feature vector has {got} entries, expected {expected}")]
    FeatureLength { expected: usize, got: usize },

    #[error("class `{class}` has no {side} examples")]
    OneSidedClass { class: String, side: &'static str },

    #[error("model is in {actual} mode, operation requires {required}")]
    WrongMode {
        required: &'static str,
        actual: &'static str,
    },

    #[error("signal is silent")]
    SilentSignal,

    #[error("signal has zero RMS")]
    ZeroRms,

    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),

    #[error("invalid instrument library: {0}")]
    InvalidLibrary(String),

    #[error("prediction and truth streams are misaligned at t={time}s: {reason}")]
    Misaligned { time: f64, reason: String },

    #[error("malformed model file: {0}")]
    Format(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}

impl From<hound::Error> for Error {
    fn from(err: hound::Error) -> Self {
        match err {
            hound::Error::IoError(e) => Error::Io(e),
            other => Error::UnsupportedAudio(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
