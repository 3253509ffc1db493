use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("integration blew up at r = {radius}")]
    IntegrationBlowup { radius: f64 },

    #[error("no bracketing propagation constant at e0 = {e0}: {reason}")]
    NoBracket { e0: f64, reason: String },

    #[error("no amplitude in the requested range produced a trapped mode")]
    AllFailed,

    #[error("field blew up at z = {z}")]
    Blowup { z: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("moments undefined for a zero-power field")]
    ZeroPower,

    #[error("no torus solution: {0}")]
    NoSolution(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("mask error: {0}")]
    Mask(String),

    #[error("grid file format error: {0}")]
    Format(String),

    #[error("grid file truncated at byte offset {offset}")]
    Truncated { offset: u64 },

    #[error("non-finite data: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParams(_) => "invalid-params",
            Error::IntegrationBlowup { .. } => "integration-blowup",
            Error::NoBracket { .. } => "no-bracket",
            Error::AllFailed => "all-failed",
            Error::Blowup { .. } => "blowup",
            Error::Geometry(_) => "geometry",
            Error::ZeroPower => "zero-power",
            Error::NoSolution(_) => "no-solution",
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::Mask(_) => "mask",
            Error::Format(_) => "format",
            Error::Truncated { .. } => "truncated",
            Error::NonFinite(_) => "non-finite",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Process exit status: 2 for usage and configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
