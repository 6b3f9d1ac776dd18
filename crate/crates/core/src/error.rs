use thiserror::Error;

/// Failure modes of the numeric kernels and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("root not bracketed: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    Bracket { g_lo: f64, g_hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate channels: {0}")]
    Degenerate(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
