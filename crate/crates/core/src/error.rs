use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The 2x2 matrix has a single eigenvector; the eigenvalues are still
    /// reported.
    #[error("defective matrix: eigenvalues coalesce at {:.12}", eigenvalues[0])]
    DefectiveMatrix { eigenvalues: [Complex64; 2] },

    #[error("eigensolver failed to converge within {max_iter} iterations")]
    ConvergenceFailure { max_iter: usize },

    #[error("matrix dimension {dim} exceeds the cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("discriminant does not change sign over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("subspace n = {n} is at an exceptional point (mu = {mu})")]
    ExceptionalPoint { n: u32, mu: f64 },

    #[error("trace has imaginary residue {imag:e} relative to |Z| = {re:e}")]
    ComplexTrace { re: f64, imag: f64 },

    #[error("finite-difference stencil [{lo}, {hi}] crosses a zero of Z")]
    StencilCrossesSingularity { lo: f64, hi: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("failed to write {destination}: {message}")]
    Io {
        destination: String,
        message: String,
    },
}
