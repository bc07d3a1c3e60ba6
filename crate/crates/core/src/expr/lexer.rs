use super::parser::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

/// Token with its starting byte offset.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub at: usize,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let at = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned { tok, at });
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            i = number_end(bytes, i).ok_or_else(|| lexical(at, "malformed number"))?;
            let v: f64 = src[at..i].parse().map_err(|_| lexical(at, "malformed number"))?;
            out.push(Spanned { tok: Tok::Num(v), at });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Spanned { tok: Tok::Ident(src[at..i].to_string()), at });
        } else {
            let ch = src[at..].chars().next().unwrap_or('?');
            return Err(lexical(at, &format!("unexpected character '{ch}'")));
        }
    }
    out.push(Spanned { tok: Tok::End, at: bytes.len() });
    Ok(out)
}

fn digits(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    i
}

/// End of the number starting at `i`, or `None` if it has no digits.
fn number_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut i = digits(bytes, start);
    let mut seen = i > start;
    if i < bytes.len() && bytes[i] == b'.' {
        let j = digits(bytes, i + 1);
        seen |= j > i + 1;
        i = j;
    }
    if !seen {
        return None;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let k = digits(bytes, j);
        if k == j {
            return None;
        }
        i = k;
    }
    Some(i)
}

fn lexical(at: usize, msg: &str) -> ParseError {
    ParseError { kind: ParseErrorKind::Lexical, offset: at, message: msg.to_string() }
}
