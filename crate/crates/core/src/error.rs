use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate ({row}, {col}) outside {height}x{width} image")]
    Coordinate {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("shape mismatch: {left_h}x{left_w} vs {right_h}x{right_w}")]
    Shape {
        left_h: usize,
        left_w: usize,
        right_h: usize,
        right_w: usize,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid configuration for `{param}`: {reason}")]
    Config { param: &'static str, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode {path}: {reason}")]
    Decode { path: String, reason: String },

    #[error("cannot encode {path}: {reason}")]
    Encode { path: String, reason: String },
}

impl Error {
    pub(crate) fn config(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            param,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
