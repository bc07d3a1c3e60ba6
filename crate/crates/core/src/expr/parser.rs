use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, Var};
use super::lexer::{lex, Spanned, Tok};
use crate::num::Elementary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lexical => "lexical error",
            ParseErrorKind::Syntax => "syntax error",
        })
    }
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at byte {offset}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
    pub message: String,
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    match &p.peek().tok {
        Tok::End => Ok(e),
        Tok::RParen => Err(p.error("unbalanced parenthesis")),
        _ => Err(p.error("unexpected token after expression")),
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::End) {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError { kind: ParseErrorKind::Syntax, offset: self.peek().at, message: msg.to_string() }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            return Ok(Expr::bin(BinOp::Pow, base, self.unary()?));
        }
        Ok(base)
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::RParen => {
                self.bump();
                Ok(())
            }
            Tok::End => Err(self.error("unbalanced parenthesis")),
            _ => Err(self.error("expected ')'")),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.close_paren()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                let call = self.peek().tok == Tok::LParen;
                match (Elementary::from_name(&name), call) {
                    (Some(f), true) => {
                        self.bump();
                        let arg = self.expr()?;
                        self.close_paren()?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    (Some(_), false) => Err(self.error(&format!("expected '(' after '{name}'"))),
                    (None, true) => Err(ParseError { kind: ParseErrorKind::Syntax, offset: t.at, message: format!("unknown function '{name}'") }),
                    (None, false) if name == "pi" => Ok(Expr::Pi),
                    (None, false) => Ok(Expr::Var(Var::new(name))),
                }
            }
            Tok::End => Err(self.error("unexpected end of input")),
            Tok::RParen => Err(self.error("unbalanced parenthesis")),
            _ => Err(self.error("expected an operand")),
        }
    }
}
