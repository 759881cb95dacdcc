use thiserror::Error;

/// Errors raised by the transform, the classifiers and the dataset helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hadamard order {0}: must be a power of two no larger than {max}", max = crate::hadamard::MAX_ORDER)]
    InvalidOrder(usize),
    #[error("kernel index {index} out of range for order {order}")]
    KernelIndex { index: usize, order: usize },
    #[error("invalid dilation scheme: {0}")]
    InvalidScheme(String),
    #[error("series of length {len} is shorter than the required {required}")]
    SeriesTooShort { len: usize, required: usize },
    #[error("series {index}: {source}")]
    Series {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("padding target {target} is shorter than the series length {len}")]
    InvalidTarget { len: usize, target: usize },
    #[error("empty convolution output")]
    EmptyOutput,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("shape mismatch: expected layout {expected}, found {found}")]
    Shape { expected: String, found: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported document version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
