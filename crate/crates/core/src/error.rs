use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("operator error: {0}")]
    Operator(String),
    #[error("dense size {size} exceeds the dense cap {cap}; use the matrix-free path")]
    DenseCapExceeded { size: usize, cap: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("Krylov eigensolver did not converge at shift {shift} (worst residual {residual:e})")]
    EigenNonConvergence { shift: f64, residual: f64 },
    #[error("resolvent solve failed at z = {z} (best relative residual {residual:e})")]
    ResolventSolve { z: Complex64, residual: f64 },
    #[error("Bessel function argument {x} outside the supported range [0, 1e4]")]
    BesselRange { x: f64 },
    #[error("oracle diagnostic: {0}")]
    Oracle(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("boundary condition violated by {violation:e} (limit {limit:e})")]
    BoundaryCondition { violation: f64, limit: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
