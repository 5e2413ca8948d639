use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoresetError {
    #[error("dimension mismatch: expected dim={expected}, got dim={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension must be >= 1")]
    ZeroDimension,

    #[error("invalid weight {value} at index {index}: weights must be finite and >= 0")]
    InvalidWeight { index: usize, value: f64 },

    #[error("non-finite coordinate at point {index}")]
    NonFinitePoint { index: usize },

    #[error("all weights are zero")]
    ZeroTotalWeight,

    #[error("query must contain at least one center")]
    EmptyQuery,

    #[error("k must be >= 1")]
    InvalidK,

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-uniform weights require the generalized-weights sensitivity path")]
    NonUniformWeights,

    #[error("weighted variance is zero; every point coincides with the mean (sensitivity is 1/total weight everywhere)")]
    ZeroVariance,

    #[error("sampling probability is zero at positive-weight point {index}")]
    ZeroProbability { index: usize },

    #[error("probabilities sum to {sum}, expected 1")]
    UnnormalizedProbabilities { sum: f64 },

    #[error("sample size m must be >= 1")]
    ZeroSampleSize,

    #[error("k={k} exceeds the number of distinct points ({distinct})")]
    TooFewDistinctPoints { k: usize, distinct: usize },

    #[error("partition enumeration needs {required} candidates, cap is {cap}")]
    PartitionCapExceeded { required: u128, cap: u128 },

    #[error("every query in the grid has zero cost")]
    AllQueriesDegenerate,

    #[error("stream is empty")]
    EmptyStream,

    #[error("query suite is empty")]
    EmptySuite,

    #[error("malformed input: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoresetError {
    fn from(err: std::io::Error) -> Self {
        CoresetError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoresetError>;
