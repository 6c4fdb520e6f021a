use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("density positivity lost (min rho = {min:e})")]
    DensityPositivity { min: f64 },
    #[error("pressure iteration diverged after {iterations} iterations (relative residual {residual:e})")]
    PressureDiverged { iterations: usize, residual: f64 },
    #[error("CFL abort: cfl = {cfl:.6} exceeds 1.0")]
    CflAbort { cfl: f64 },
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps the error with run coordinates or similar context.
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerical integration itself
    /// (density loss, CFL, pressure solver, blow-up).
    pub fn is_numerical_abort(&self) -> bool {
        matches!(
            self.root(),
            Error::DensityPositivity { .. }
                | Error::PressureDiverged { .. }
                | Error::CflAbort { .. }
                | Error::NonFinite(_)
        )
    }
}
