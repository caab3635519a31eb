use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = MstcError> = std::result::Result<T, E>;

/// Every failure the scoring pipeline can report.
///
/// Variant names are part of the public contract: [`MstcError::name`] returns
/// them verbatim so foreign bindings and the batch harness can surface the
/// same identifier.
#[derive(Debug, Error)]
pub enum MstcError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("non-finite value at row {row}, col {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("invalid dimensions {height}x{width}")]
    InvalidDimensions { height: usize, width: usize },

    #[error("percentile {0} is outside the open interval (0, 100)")]
    InvalidPercentile(f64),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("graph has {components} connected components (largest k tried: {k}); increase k")]
    DisconnectedGraph { components: usize, k: usize },

    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("non-degenerate hull has non-positive area {0}")]
    NonPositiveArea(f64),

    #[error("spanning tree length must be positive, got {0}")]
    ZeroLength(f64),

    #[error("all attribution values are zero")]
    AllZero,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("zero variance input")]
    ZeroVariance,

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

impl MstcError {
    /// Stable identifier of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            MstcError::FileNotFound(_) => "FileNotFound",
            MstcError::Io(_) => "Io",
            MstcError::Format(_) => "FormatError",
            MstcError::NonFiniteValue { .. } => "NonFiniteValue",
            MstcError::InvalidDimensions { .. } => "InvalidDimensions",
            MstcError::InvalidPercentile(_) => "InvalidPercentile",
            MstcError::EmptyPointSet => "EmptyPointSet",
            MstcError::DisconnectedGraph { .. } => "DisconnectedGraph",
            MstcError::TooFewNodes(_) => "TooFewNodes",
            MstcError::NonPositiveArea(_) => "NonPositiveArea",
            MstcError::ZeroLength(_) => "ZeroLength",
            MstcError::AllZero => "AllZero",
            MstcError::LengthMismatch(..) => "LengthMismatch",
            MstcError::ZeroVariance => "ZeroVariance",
            MstcError::InvalidSpec(_) => "InvalidSpec",
        }
    }
}
