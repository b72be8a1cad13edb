use thiserror::Error;

/// Errors produced by the voxfuse library.
#[derive(Debug, Error)]
pub enum Error {
    /// The projected point lies on the camera's principal plane.
    #[error("degenerate projection: point lies on the image plane (z' = {0:e})")]
    DegenerateProjection(f64),

    /// Inputs that disagree in size or layout.
    #[error("configuration error: {0}")]
    Config(String),

    /// Values outside an operation's domain (NaN, non-unit quaternion, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Point configuration too degenerate for a similarity fit.
    #[error("rank-deficient point configuration: {0}")]
    RankDeficient(String),

    /// Malformed or unsupported file contents.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
