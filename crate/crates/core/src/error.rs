use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("component index {index} out of range for {order} components")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("product of an empty factor list")]
    EmptyFactors,

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("operation needs at least two components")]
    SingleComponent,

    #[error("gram matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    /// The Gram matrix has a direction of negative curvature.
    #[error("gram matrix is not positive semidefinite: vᵀGv < 0 for v = [{}]", .certificate.join(", "))]
    NotPsd { certificate: Vec<String> },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("inconsistent facts: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
