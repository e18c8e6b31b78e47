use std::f64::consts::{E, PI};

use num_complex::Complex64;

use super::{BinaryOp, Expr, UnaryOp};

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || ch == '.' {
            while i < bytes.len() && ((bytes[i] as char).is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError {
                position: start,
                message: format!("malformed number '{lit}'"),
            })?;
            out.push((Tok::Num(v), start));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let tok = match ch {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    return Err(ParseError {
                        position: start,
                        message: format!("unexpected character '{ch}'"),
                    })
                }
            };
            i += ch.len_utf8();
            out.push((tok, start));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

/// Combines literal constants so complex literals read back as one node.
fn fold(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
    if let (Expr::Const(a), Expr::Const(b)) = (&lhs, &rhs) {
        let v = match op {
            BinaryOp::Add => Some(a + b),
            BinaryOp::Sub => Some(a - b),
            BinaryOp::Mul => Some(a * b),
            BinaryOp::Div if b.norm() > 0.0 => Some(a / b),
            BinaryOp::Div => None,
        };
        if let Some(v) = v.filter(|v| v.re.is_finite() && v.im.is_finite()) {
            return Expr::Const(v);
        }
    }
    Expr::Binary(op, Box::new(lhs), Box::new(rhs))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.err("expected ')'")
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = fold(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.signed()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.signed()?;
            lhs = fold(op, lhs, rhs);
        }
    }

    fn signed(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(match self.signed()? {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::unary(UnaryOp::Neg, e),
                })
            }
            Tok::Op('+') => {
                self.bump();
                self.signed()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let n = self.integer_exponent()?;
        Ok(Expr::Powi(Box::new(base), n))
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseError> {
        let at = self.here();
        let parenthesised = *self.peek() == Tok::LParen;
        if parenthesised {
            self.bump();
        }
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Tok::Op('-') => sign = -sign,
                Tok::Op('+') => {}
                _ => break,
            }
            self.bump();
        }
        let v = match self.bump() {
            Tok::Num(v) => sign * v,
            _ => {
                return Err(ParseError {
                    position: at,
                    message: "exponent must be an integer literal".into(),
                })
            }
        };
        if parenthesised {
            self.expect_rparen()?;
        }
        if v.fract() != 0.0 || v.abs() > f64::from(i32::MAX) {
            return Err(ParseError {
                position: at,
                message: format!("exponent {v} is not an integer; use exp/log or sqrt"),
            });
        }
        Ok(v as i32)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.here();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(op) = UnaryOp::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.err(format!("expected '(' after {name}"));
                    }
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::unary(op, arg));
                }
                match name.as_str() {
                    "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::real(PI)),
                    "e" => Ok(Expr::real(E)),
                    _ => {
                        if let Some(idx) = name.strip_prefix('u') {
                            if let Ok(k) = idx.parse::<usize>() {
                                if k >= 1 {
                                    return Ok(Expr::Var(k - 1));
                                }
                            }
                        }
                        Err(ParseError {
                            position: at,
                            message: format!("unknown identifier '{name}'"),
                        })
                    }
                }
            }
            Tok::End => Err(ParseError {
                position: at,
                message: "unexpected end of expression".into(),
            }),
            t => Err(ParseError {
                position: at,
                message: format!("unexpected token {t:?}"),
            }),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse("-u1^2").unwrap();
        let v = e.eval(&[Complex64::new(3.0, 0.0)]).unwrap();
        assert_eq!(v, Complex64::new(-9.0, 0.0));
        let e = parse("1 + 2*3 - 4/2").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), Complex64::new(5.0, 0.0));
    }

    #[test]
    fn negative_exponent_forms() {
        for text in ["u1^-2", "u1^(-2)", "u1^(+2)"] {
            assert!(parse(text).is_ok(), "{text}");
        }
    }

    #[test]
    fn fractional_exponent_rejected() {
        let err = parse("u1^0.5").unwrap_err();
        assert_eq!(err.position, 3);
    }

    #[test]
    fn errors_report_position() {
        assert_eq!(parse("u1 + $").unwrap_err().position, 5);
        assert_eq!(parse("exp u1").unwrap_err().position, 4);
        assert_eq!(parse("(u1 + 2").unwrap_err().position, 7);
        assert_eq!(parse("foo(u1)").unwrap_err().position, 0);
        assert_eq!(parse("u1 u2").unwrap_err().position, 3);
        assert_eq!(parse("").unwrap_err().position, 0);
    }

    #[test]
    fn imaginary_unit_and_constants() {
        let e = parse("i*i + pi - pi").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), Complex64::new(-1.0, 0.0));
        let e = parse("2.5e-1 + 1E1").unwrap();
        assert_eq!(e.eval(&[]).unwrap(), Complex64::new(10.25, 0.0));
    }
}
