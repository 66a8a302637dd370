use std::io;

use thiserror::Error;

/// Errors produced by the transforms, bound computations and file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate window: {samples} samples under the scaled window at frame {frame} (need at least 4)")]
    DegenerateWindow { frame: usize, samples: usize },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("entropy undefined for an all-zero slice")]
    UndefinedEntropy,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
