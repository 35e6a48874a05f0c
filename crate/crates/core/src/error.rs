use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left} vs {right}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("invalid network shape: {0}")]
    InvalidShape(String),

    #[error("unknown activation `{0}` (expected identity, sigmoid, relu, modified-relu or thresholded-sigmoid)")]
    UnknownActivation(String),

    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("training diverged: non-finite cost at epoch {epoch}")]
    NonFinite { epoch: usize },

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("{file}: bad magic number 0x{found:08x} (expected 0x{expected:08x})")]
    IdxBadMagic {
        file: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("{file}: truncated payload (expected {expected} bytes, found {found})")]
    IdxTruncated {
        file: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("image count {images} does not match label count {labels}")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("csv line {line}: expected {expected} fields, found {found}")]
    CsvRagged {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("csv line {line}: field `{field}` is not a number")]
    CsvNonNumeric { line: u64, field: String },

    #[error("csv line {line}: feature {value} is negative; inputs must scale into [0, 1]")]
    CsvNegativeFeature { line: u64, value: f64 },

    #[error("unknown data source `{0}`")]
    UnknownDataSource(String),

    #[error("model file: bad magic {found:?} (expected {expected:?})")]
    ModelBadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("model file: unsupported format version {found} (supported: {supported})")]
    ModelVersion { supported: u32, found: u32 },

    #[error("model file: inconsistent payload: {0}")]
    ModelPayload(String),

    #[error("mask marks weight {index} of layer {layer} frozen but its value is {value}")]
    MaskViolation {
        layer: usize,
        index: usize,
        value: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: impl Into<String>, right: impl Into<String>) -> Self {
        Error::Shape {
            op,
            left: left.into(),
            right: right.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
