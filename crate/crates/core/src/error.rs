use thiserror::Error;

use crate::subset::SubsetMask;

/// Errors produced by the index algebra, the models and the estimators.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum GsiError {
    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::subset::MAX_DIM)]
    DimensionOutOfRange(usize),

    #[error("dimension {0} is too large to enumerate all subsets (limit {max})", max = crate::subset::MAX_ENUM_DIM)]
    EnumerationTooLarge(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index {index} is outside 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("bitmask {bits:#x} has bits set at or above position {d}")]
    InvalidMask { bits: u64, d: usize },

    #[error("no value stored for subset {0}")]
    MissingSubset(SubsetMask),

    #[error("coordinate {index} = {value} is outside [0,1]")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("point has {got} coordinates, expected {expected}")]
    WrongLength { expected: usize, got: usize },

    #[error("{kind} is not available in closed form for {model}")]
    Unsupported { model: String, kind: String },

    #[error("problem size {size} exceeds cap {cap}")]
    SizeCap { size: u128, cap: u128 },

    #[error("invalid split: {w1} is not a subset of {w}")]
    InvalidSplit { w: SubsetMask, w1: SubsetMask },

    #[error("{0} requires a nonempty set")]
    EmptySet(&'static str),

    #[error("coefficient vector is empty")]
    EmptyCoefficients,

    #[error("sample size n = {n} is too small (need at least {min})")]
    SampleSize { n: usize, min: usize },

    #[error("base function fails moment checks: {0}")]
    InvalidBaseFunction(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GsiError {
    fn from(e: std::io::Error) -> Self {
        GsiError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GsiError {
    fn from(e: serde_json::Error) -> Self {
        GsiError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GsiError>;
