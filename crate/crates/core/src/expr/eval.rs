use thiserror::Error;

use super::ast::{BinOp, Expr, Var};
use crate::num::{NumError, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Variable bindings for one evaluation.
pub trait Env<T: Scalar> {
    /// Shape used for literals.
    fn shape(&self) -> T::Shape;
    fn lookup(&self, var: &Var) -> Option<T>;
}

/// Name-value pairs, searched linearly.
pub struct SliceEnv<'a, T: Scalar> {
    shape: T::Shape,
    pairs: &'a [(&'a str, T)],
}

impl<'a, T: Scalar> SliceEnv<'a, T> {
    pub fn new(shape: T::Shape, pairs: &'a [(&'a str, T)]) -> Self {
        SliceEnv { shape, pairs }
    }
}

impl SliceEnv<'static, f64> {
    pub fn empty() -> Self {
        SliceEnv { shape: (), pairs: &[] }
    }
}

impl<T: Scalar> Env<T> for SliceEnv<'_, T> {
    fn shape(&self) -> T::Shape {
        self.shape.clone()
    }

    fn lookup(&self, var: &Var) -> Option<T> {
        self.pairs.iter().find(|(n, _)| *n == var.name).map(|(_, v)| v.clone())
    }
}

impl Expr {
    pub fn eval<T: Scalar>(&self, env: &impl Env<T>) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Num(v) => T::constant(&env.shape(), *v),
            Expr::Pi => T::constant(&env.shape(), std::f64::consts::PI),
            Expr::Var(v) => env.lookup(v).ok_or_else(|| EvalError::Unbound(v.name.clone()))?,
            Expr::Neg(a) => a.eval(env)?.neg(),
            Expr::Call(f, a) => a.eval(env)?.elem(*f)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(env)?;
                match op {
                    BinOp::Pow => match b.integer_literal() {
                        Some(n) => x.powi(n)?,
                        None => x.powf(&b.eval(env)?)?,
                    },
                    BinOp::Add => x.try_add(&b.eval(env)?)?,
                    BinOp::Sub => x.try_sub(&b.eval(env)?)?,
                    BinOp::Mul => x.try_mul(&b.eval(env)?)?,
                    BinOp::Div => x.try_div(&b.eval(env)?)?,
                }
            }
        })
    }
}
