use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo {lo} > hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid coordinate ({x}, {y})")]
    InvalidCoordinate { x: f64, y: f64 },

    #[error("cannot seed {seeds} displacements in a {width}x{height} field")]
    TooManySeeds {
        seeds: usize,
        width: usize,
        height: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("only 4 orientations are supported, got {0}")]
    UnsupportedOrientationCount(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid bounding box ({x1}, {y1}, {x2}, {y2})")]
    InvalidBbox { x1: i64, y1: i64, x2: i64, y2: i64 },

    #[error("unknown category `{0}`")]
    UnknownCategory(String),

    #[error("mask leaves no probability mass")]
    DegenerateMask,

    #[error("nothing to evaluate")]
    EmptyEval,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: ::image::ImageError,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn shape(message: impl Into<String>) -> Self {
        Error::Shape(message.into())
    }
}
