use std::collections::BTreeSet;

use crate::num::Elementary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Role of a variable name under the jet naming convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// `x<i+1>`: base coordinate `i` (0-based).
    X(usize),
    /// `y<alpha+1>_<r>`: fiber component `alpha` (0-based) at level `r >= 1`.
    Y {
        alpha: usize,
        r: usize,
    },
    /// `t`.
    Time,
    Other,
}

impl VarKind {
    pub fn classify(name: &str) -> VarKind {
        if name == "t" {
            return VarKind::Time;
        }
        let positive = |s: &str| -> Option<usize> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || s.starts_with('0') {
                return None;
            }
            s.parse().ok()
        };
        if let Some(rest) = name.strip_prefix('x') {
            if let Some(i) = positive(rest) {
                return VarKind::X(i - 1);
            }
        }
        if let Some(rest) = name.strip_prefix('y') {
            if let Some((a, r)) = rest.split_once('_') {
                if let (Some(a), Some(r)) = (positive(a), positive(r)) {
                    return VarKind::Y { alpha: a - 1, r };
                }
            }
        }
        VarKind::Other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
}

impl Var {
    pub fn new(name: impl Into<String>) -> Var {
        let name = name.into();
        let kind = VarKind::classify(&name);
        Var { name, kind }
    }

    pub fn x(i: usize) -> Var {
        Var::new(format!("x{}", i + 1))
    }

    pub fn y(alpha: usize, r: usize) -> Var {
        Var::new(format!("y{}_{}", alpha + 1, r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Elementary, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Var::new(name))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Pi => {}
            Expr::Var(v) => {
                out.insert(v.name.clone());
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Variables with their parsed roles.
    pub fn vars(&self) -> Vec<Var> {
        self.free_vars().into_iter().map(Var::new).collect()
    }

    /// Highest jet level `r` among `y<A>_<r>` variables, 0 if none.
    pub fn jet_order(&self) -> usize {
        self.vars()
            .iter()
            .filter_map(|v| match v.kind {
                VarKind::Y { r, .. } => Some(r),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Value of a closed expression; `None` if it has variables or fails.
    pub fn constant_value(&self) -> Option<f64> {
        if !self.free_vars().is_empty() {
            return None;
        }
        self.eval(&super::SliceEnv::<f64>::empty()).ok()
    }

    pub fn is_zero(&self) -> bool {
        self.constant_value() == Some(0.0)
    }

    /// Literal integer exponent, if the node is one (possibly negated).
    pub(crate) fn integer_literal(&self) -> Option<i64> {
        let (v, sign) = match self {
            Expr::Num(v) => (*v, 1),
            Expr::Neg(inner) => match inner.as_ref() {
                Expr::Num(v) => (*v, -1),
                _ => return None,
            },
            _ => return None,
        };
        (v.fract() == 0.0 && v.abs() < 1e9).then(|| sign * v as i64)
    }

    /// Replaces variables by expressions; unmapped variables are kept.
    pub fn substitute(&self, f: &impl Fn(&Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Call(g, a) => Expr::Call(*g, Box::new(a.substitute(f))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(f), b.substitute(f)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_of_names() {
        assert_eq!(VarKind::classify("x3"), VarKind::X(2));
        assert_eq!(VarKind::classify("y2_1"), VarKind::Y { alpha: 1, r: 1 });
        assert_eq!(VarKind::classify("y12_10"), VarKind::Y { alpha: 11, r: 10 });
        assert_eq!(VarKind::classify("t"), VarKind::Time);
        for other in ["x0", "y0_1", "y1_0", "y1", "x01", "foo", "y1_", "xy"] {
            assert_eq!(VarKind::classify(other), VarKind::Other, "{other}");
        }
    }

    #[test]
    fn constructors_match_names() {
        assert_eq!(Var::x(0).name, "x1");
        assert_eq!(Var::y(2, 4).name, "y3_4");
        assert_eq!(Var::y(2, 4).kind, VarKind::Y { alpha: 2, r: 4 });
    }
}
