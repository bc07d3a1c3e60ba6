//! Minimal-parenthesis printing; `parse(print(e)) == e` for parsed trees.

use std::fmt;

use super::ast::{BinOp, Expr};

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v == 0.0 || (1e-5..1e15).contains(&v.abs()) => write!(f, "{v}"),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(v) => f.write_str(&v.name),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, prec(a) < 3)
            }
            Expr::Bin(BinOp::Pow, a, b) => {
                wrap(f, a, prec(a) <= 4)?;
                f.write_str("^")?;
                wrap(f, b, prec(b) < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = prec(self);
                wrap(f, a, prec(a) < p)?;
                write!(f, " {} ", op.symbol())?;
                wrap(f, b, prec(b) <= p)
            }
        }
    }
}
