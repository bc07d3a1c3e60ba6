use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("division by a scalar whose constant term is zero")]
    DivisionByZero,
    #[error("{func} is undefined at {at}")]
    Domain { func: &'static str, at: f64 },
}

pub type NumResult<T> = Result<T, NumError>;

/// Elementary functions understood by every scalar kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Tan,
    Tanh,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
            Elementary::Ln => "log",
            Elementary::Sqrt => "sqrt",
            Elementary::Tan => "tan",
            Elementary::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "exp" => Elementary::Exp,
            "log" => Elementary::Ln,
            "sqrt" => Elementary::Sqrt,
            "tan" => Elementary::Tan,
            "tanh" => Elementary::Tanh,
            _ => return None,
        })
    }

    pub const ALL: [Elementary; 7] = [Elementary::Sin, Elementary::Cos, Elementary::Exp, Elementary::Ln, Elementary::Sqrt, Elementary::Tan, Elementary::Tanh];
}

/// Arithmetic shared by all scalar kinds.
///
/// Binary operations are fallible: operands of different shape (for
/// instance Taylor series of different degree) are rejected rather than
/// promoted.
pub trait Scalar: Clone + fmt::Debug + PartialEq {
    /// Everything needed to build a constant of the same kind.
    type Shape: Clone + PartialEq + fmt::Debug;

    fn shape(&self) -> Self::Shape;
    fn constant(shape: &Self::Shape, c: f64) -> Self;
    /// Innermost real part.
    fn re(&self) -> f64;

    fn try_add(&self, rhs: &Self) -> NumResult<Self>;
    fn try_sub(&self, rhs: &Self) -> NumResult<Self>;
    fn try_mul(&self, rhs: &Self) -> NumResult<Self>;
    fn try_div(&self, rhs: &Self) -> NumResult<Self>;
    fn neg(&self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn elem(&self, f: Elementary) -> NumResult<Self>;

    /// Integer power by repeated squaring.
    fn powi(&self, n: i64) -> NumResult<Self> {
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.try_mul(&base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        let acc = match acc {
            Some(a) => a,
            None => Self::constant(&self.shape(), 1.0),
        };
        if n < 0 {
            Self::constant(&self.shape(), 1.0).try_div(&acc)
        } else {
            Ok(acc)
        }
    }

    /// `exp(b log a)`; the base must have positive real part.
    fn powf(&self, b: &Self) -> NumResult<Self> {
        self.elem(Elementary::Ln)?.try_mul(b)?.elem(Elementary::Exp)
    }
}

impl Scalar for f64 {
    type Shape = ();

    fn shape(&self) {}

    fn constant(_: &(), c: f64) -> f64 {
        c
    }

    fn re(&self) -> f64 {
        *self
    }

    fn try_add(&self, rhs: &f64) -> NumResult<f64> {
        Ok(self + rhs)
    }

    fn try_sub(&self, rhs: &f64) -> NumResult<f64> {
        Ok(self - rhs)
    }

    fn try_mul(&self, rhs: &f64) -> NumResult<f64> {
        Ok(self * rhs)
    }

    fn try_div(&self, rhs: &f64) -> NumResult<f64> {
        if *rhs == 0.0 {
            return Err(NumError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    fn neg(&self) -> f64 {
        -self
    }

    fn scale(&self, c: f64) -> f64 {
        self * c
    }

    fn elem(&self, f: Elementary) -> NumResult<f64> {
        let x = *self;
        Ok(match f {
            Elementary::Sin => x.sin(),
            Elementary::Cos => x.cos(),
            Elementary::Exp => x.exp(),
            Elementary::Ln => {
                if x <= 0.0 {
                    return Err(NumError::Domain { func: "log", at: x });
                }
                x.ln()
            }
            Elementary::Sqrt => {
                if x < 0.0 {
                    return Err(NumError::Domain { func: "sqrt", at: x });
                }
                x.sqrt()
            }
            Elementary::Tan => {
                if x.cos() == 0.0 {
                    return Err(NumError::Domain { func: "tan", at: x });
                }
                x.tan()
            }
            Elementary::Tanh => x.tanh(),
        })
    }

    fn powf(&self, b: &f64) -> NumResult<f64> {
        if *self <= 0.0 {
            return Err(NumError::Domain { func: "pow", at: *self });
        }
        Ok(f64::powf(*self, *b))
    }
}
