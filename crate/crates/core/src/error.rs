use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state is not normalized (norm² = {0})")]
    Unnormalized(f64),

    #[error("no measurements")]
    NoMeasurements,

    #[error("weak-phase assumption violated at pixel ({x}, {y}): 1 + 2δθ = {value}")]
    WeakPhaseViolated { x: usize, y: usize, value: f64 },

    #[error("scan position ({x} nm, {y} nm) lies outside the map")]
    OutsideMap { x: f64, y: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
