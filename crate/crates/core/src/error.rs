use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("eigensolver did not converge after {iterations} iterations")]
    Solver { iterations: usize },
    #[error("lambda = {re}{im:+}i is within {threshold:.3e} of the spectrum")]
    Pole { re: f64, im: f64, threshold: f64 },
    #[error("degenerate decay fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
