use thiserror::Error;

use crate::grid::HeightField;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("expression parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("integrator failed at p = {p}: {reason}")]
    Integrator { p: f64, reason: String },

    #[error("background outside supported regime: {0}")]
    UnsupportedRegime(String),

    #[error("bordered system singular: {0}")]
    SingularSystem(String),

    #[error("Newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best: Option<Box<HeightField>>,
    },

    #[error("ellipticity lost: {0}")]
    Stagnation(String),

    #[error("continuation could not start: {0}")]
    BranchStart(String),

    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("field file error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            msg: msg.into(),
        }
    }
}
