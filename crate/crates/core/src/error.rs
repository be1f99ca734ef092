use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hyperbolicity violated: 1 - phi'(x) = {margin:.3e} at x = {at:.6}")]
    HyperbolicityViolated { margin: f64, at: f64 },

    #[error("{what}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stencil point within {distance:.3e} of a fan boundary (need > {required:.3e})")]
    RegionBoundaryTooClose { distance: f64, required: f64 },

    #[error("quadrature not converged: successive refinements differ by {change:.3e} (tol {tol:.3e})")]
    QuadratureNotConverged { change: f64, tol: f64 },

    #[error("time step {dt:.4e} exceeds stability bound {bound:.4e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("non-finite value at node ({i}, {j})")]
    NonFiniteValue { i: usize, j: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
