//! Scalar expression language for anchors, structure functions,
//! Lagrangians, observables and symmetry generators.
//!
//! Grammar (loosest binding first):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          right-associative
//! primary := number | "pi" | ident | func "(" expr ")" | "(" expr ")"
//! func    := sin | cos | exp | log | sqrt | tan | tanh
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! Variable names `x<i>` (base coordinate, 1-based) and `y<A>_<r>`
//! (component A at jet level r, both 1-based) are recognised at parse time;
//! `t` is the time variable of curve-indexed sections. Any other identifier
//! is kept as an opaque variable.

mod ast;
mod eval;
mod lexer;
mod parser;
mod print;

pub use ast::{BinOp, Expr, Var, VarKind};
pub use eval::{Env, EvalError, SliceEnv};
pub use parser::{parse, ParseError, ParseErrorKind};
