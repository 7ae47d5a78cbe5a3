use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid sidecar {path}: {source}")]
    Sidecar {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported element type {found:?}, expected {expected:?}")]
    UnsupportedDtype { expected: &'static str, found: String },

    #[error("data size mismatch: header implies {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid spacing {0:?}: every component must be finite and > 0")]
    InvalidSpacing([f64; 3]),

    #[error("invalid dimensions {0:?}: every extent must be > 0")]
    InvalidDims(Vec<usize>),

    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },

    #[error("value {value} at element {index} is not representable as {dtype}")]
    NotRepresentable {
        index: usize,
        value: f64,
        dtype: &'static str,
    },

    #[error("element {index} has value {value}, expected 0 or 1")]
    NotBinary { index: usize, value: f64 },

    #[error("negative attenuation {value} at element {index}")]
    NegativeAttenuation { index: usize, value: f64 },

    #[error("volume dimensions {actual:?} do not match {expected:?}")]
    DimsMismatch { expected: [usize; 3], actual: [usize; 3] },

    #[error("image geometry {actual:?} does not match {expected:?} (width, height)")]
    GeometryMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("projection is not normalized to 8 bits")]
    NotNormalized,

    #[error("degenerate image plane: {0}")]
    DegenerateImage(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("class {class_id}: {source}")]
    Class {
        class_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the underlying file system rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Class { source, .. } => source.is_io(),
            _ => false,
        }
    }

    pub fn for_class(self, class_id: impl Into<String>) -> Self {
        Error::Class {
            class_id: class_id.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
