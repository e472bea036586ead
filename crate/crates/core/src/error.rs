use thiserror::Error;

/// Errors produced by the holocgh library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("optimization diverged at iteration {iteration}: loss is {loss}")]
    Diverged { iteration: usize, loss: f64 },

    #[error("resolution of {requested} cpd exceeds the display cutoff of {cutoff} cpd")]
    AboveCutoff { requested: f64, cutoff: f64 },

    #[error("comparison graph is disconnected; components: {0:?}")]
    Disconnected(Vec<Vec<usize>>),

    #[error("variance of score difference ({i}, {j}) is not positive: {variance}")]
    DegenerateVariance { i: usize, j: usize, variance: f64 },

    #[error("no matched feature pairs; detection rate is undefined")]
    NoMatches,

    #[error("light field is missing view ({row}, {col})")]
    MissingView { row: usize, col: usize },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },

    #[error("frame {frame} contains a non-binary value at ({row}, {col}): {value}")]
    NonBinary {
        frame: usize,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("malformed {format} data: {reason}")]
    Malformed { format: &'static str, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("image decode error for {path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
