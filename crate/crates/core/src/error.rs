use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input that violates a structural precondition (bad index, wrong
    /// vector length, invalid degree tuple, ...).
    #[error("malformed input: {0}")]
    Malformed(String),

    /// Two objects that must agree in shape do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The exact vertex oracle would have to visit more sign patterns than allowed.
    #[error("vertex enumeration needs 2^{required_log2} sign patterns, budget is 2^{budget_log2}")]
    VertexBudget { required_log2: u32, budget_log2: u32 },

    /// Composition expansion produced more intermediate monomials than allowed.
    #[error("expansion needs {required} intermediate monomials, budget is {budget}")]
    TermBudget { required: usize, budget: usize },

    #[error("coefficient recovery failed: {0}")]
    Recovery(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
