use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by model evaluation, fitting and evaluation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("all training targets share one class")]
    DegenerateClass,

    #[error("dataset carries no ground-truth classes")]
    MissingTruth,

    #[error("holdout split contains no labeled examples")]
    NoLabeledHoldout,

    #[error("truth vector contains a single class")]
    SingleClass,

    #[error("hyperparameter grid is empty")]
    EmptyGrid,

    #[error("non-finite objective or gradient at iteration {iteration}")]
    NonFinite { iteration: usize, params: Vec<f64> },
}

pub type Result<T> = core::result::Result<T, Error>;
