//! Crate-wide error type and its mapping to process exit codes.

use thiserror::Error;

use crate::boxcount::BoxCountError;
use crate::conditions::ConditionError;
use crate::dimension::DimensionError;
use crate::gallery::GalleryError;
use crate::ifs::IfsError;
use crate::numerics::NumericError;
use crate::render::RenderError;
use crate::uplift::UpliftError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ifs(#[from] IfsError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    BoxCount(#[from] BoxCountError),
    #[error(transparent)]
    Uplift(#[from] UpliftError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code: 2 validation, 3 numerical failure, 4 I/O, 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Ifs(_) | Error::Uplift(_) => 2,
            Error::Numeric(_) | Error::Dimension(_) => 3,
            Error::Condition(e) => match e {
                ConditionError::Numeric(_) => 3,
                _ => 2,
            },
            Error::Render(e) => match e {
                RenderError::Io(_) => 4,
                _ => 2,
            },
            Error::BoxCount(e) => match e {
                BoxCountError::Render(RenderError::Io(_)) => 4,
                BoxCountError::Fit(_) => 3,
                _ => 2,
            },
            Error::Gallery(_) => 2,
            Error::Io(_) => 4,
            Error::Usage(_) => 64,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
