use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no positive solution: eps = {eps} is not below the existence threshold {threshold} for length {length}")]
    NoPositiveSolution { eps: f64, length: f64, threshold: f64 },
    #[error("profile right-hand side does not decay: |rhs(T)| = {value:e} at T = {t_max}")]
    Truncation { value: f64, t_max: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian: tridiagonal pivot {pivot:e} at row {row}")]
    SingularJacobian { row: usize, pivot: f64 },
    #[error("singular linearized system on the arc: pivot {pivot:e} at row {row}")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("arc {arc} has length {length} which is not longer than pi*eps = {bound}")]
    ArcTooShort { arc: usize, length: f64, bound: f64 },
    #[error("configuration is not critical: max first variation {max_variation:e} exceeds {tolerance:e}")]
    NotCritical { max_variation: f64, tolerance: f64 },
    #[error("invalid node configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
