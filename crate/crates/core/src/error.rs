use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("source is {distance} m from the perceived origin, direction is undefined")]
    DegenerateSource { distance: f64 },

    #[error("invalid value for {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("unknown preset {0:?} (expected sine, footstep or rumble)")]
    UnknownPreset(String),

    #[error("trajectory has no keyframes")]
    EmptyTrajectory,

    #[error("trajectory line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("wav: {0}")]
    Wav(#[from] WavError),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Attaches the path of the file the error came from.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WavError {
    #[error("malformed header: {0}")]
    Malformed(&'static str),
    #[error("truncated data chunk: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("unsupported format code {code} with {bits} bits per sample")]
    UnsupportedFormat { code: u16, bits: u16 },
    #[error("buffer has {buffer} channels but spec declares {spec}")]
    ChannelMismatch { buffer: usize, spec: usize },
    #[error("non-finite sample in channel {channel} at frame {frame}")]
    NonFinite { channel: usize, frame: usize },
    #[error("invalid spec: {0}")]
    InvalidSpec(&'static str),
}
