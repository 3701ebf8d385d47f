use thiserror::Error;

/// Errors raised by hypervector arithmetic, item-memory construction,
/// encoding and classification.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HdcError {
    #[error("invalid dimension {0}: must be positive")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("bundle underflow: removing a vector that was never added (component {component})")]
    BundleUnderflow { component: usize },

    #[error("invalid level count {levels}: {reason}")]
    InvalidLevels { levels: usize, reason: &'static str },

    #[error("invalid split count {splits} for {levels} levels (allowed 1..={max})")]
    InvalidSplits {
        splits: usize,
        levels: usize,
        max: usize,
    },

    #[error("invalid edge count {edges} for {levels} levels")]
    InvalidEdges { edges: usize, levels: usize },

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid encoder configuration: {0}")]
    InvalidConfig(String),

    #[error("label {0} is not part of the model's label set")]
    UnknownLabel(u32),

    #[error("duplicate label {0} in label set")]
    DuplicateLabel(u32),

    #[error("class {0} has no training samples")]
    EmptyClass(u32),

    #[error("{0} set is empty")]
    Empty(&'static str),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
}

pub type Result<T, E = HdcError> = std::result::Result<T, E>;
