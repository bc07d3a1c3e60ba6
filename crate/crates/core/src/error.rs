use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::num::NumError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("jet order {0} is invalid; orders start at 1")]
    InvalidOrder(usize),
    #[error("insufficient jet order: need {need}, have {have}")]
    InsufficientOrder { need: usize, have: usize },
    #[error("lagrangian is not regular: reciprocal condition {rcond:e} below {threshold:e} at state {state:?}{}", time.map(|t| format!(", t = {t}")).unwrap_or_default())]
    Singular { rcond: f64, threshold: f64, state: Vec<f64>, time: Option<f64> },
    #[error("variation does not vanish at the endpoints: {0}")]
    Boundary(String),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("euler-lagrange residual is not affine in the top jet block (deviation {0:e})")]
    NotAffine(f64),
    #[error("morphism check failed: {0}")]
    Morphism(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Error {
        Error::Config(e.to_string())
    }
}

impl Error {
    /// Attaches the integration time to a regularity failure.
    pub fn at_time(self, t: f64) -> Error {
        match self {
            Error::Singular { rcond, threshold, state, time: None } => Error::Singular { rcond, threshold, state, time: Some(t) },
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
