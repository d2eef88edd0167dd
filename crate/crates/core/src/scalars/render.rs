//! Textual grammar for scalars: integers, `z` for the cyclotomic generator,
//! `q1..qk`, operators `+ - * / ^`, parentheses. Printing and parsing are
//! mutually inverse up to canonical form.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::cyclotomic::{CycRat, FieldCtx};
use super::poly::MPoly;
use super::scalar::Scalar;
use crate::error::QvlaError;

fn render_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// One cyclotomic coefficient as a factor, parenthesized when it is a sum.
fn render_cyc(c: &CycRat) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (e, coeff) in c.coeffs.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let body = if e == 0 {
            render_rational(coeff)
        } else {
            let zpow = if e == 1 {
                "z".to_string()
            } else {
                format!("z^{}", e)
            };
            if coeff.is_one() {
                zpow
            } else if *coeff == -BigRational::one() {
                format!("-{}", zpow)
            } else {
                format!("{}*{}", render_rational(coeff), zpow)
            }
        };
        parts.push(body);
    }
    if parts.is_empty() {
        return "0".to_string();
    }
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        if let Some(stripped) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(stripped);
        } else {
            out.push_str(" + ");
            out.push_str(p);
        }
    }
    out
}

fn cyc_is_simple(c: &CycRat) -> bool {
    c.coeffs.iter().filter(|x| !x.is_zero()).count() <= 1
}

pub fn render_poly(p: &MPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    // Highest terms first for readability.
    for (mono, coeff) in p.terms.iter().rev() {
        let mut factors: Vec<String> = Vec::new();
        for (i, &e) in mono.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if e == 1 {
                factors.push(format!("q{}", i + 1));
            } else {
                factors.push(format!("q{}^{}", i + 1, e));
            }
        }
        let cs = if cyc_is_simple(coeff) {
            render_cyc(coeff)
        } else {
            format!("({})", render_cyc(coeff))
        };
        let body = if factors.is_empty() {
            cs
        } else if coeff.is_one() {
            factors.join("*")
        } else if *coeff == CycRat::from_i64(-1) {
            format!("-{}", factors.join("*"))
        } else {
            format!("{}*{}", cs, factors.join("*"))
        };
        parts.push(body);
    }
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        if let Some(stripped) = p.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(stripped);
        } else {
            out.push_str(" + ");
            out.push_str(p);
        }
    }
    out
}

pub fn render_scalar(s: &Scalar) -> String {
    if s.den.is_one() {
        if s.num.terms.len() <= 1 {
            render_poly(&s.num)
        } else {
            render_poly(&s.num)
        }
    } else {
        let n = if s.num.terms.len() == 1 {
            render_poly(&s.num)
        } else {
            format!("({})", render_poly(&s.num))
        };
        let d = if s.den.terms.len() == 1 && s.den.leading().map_or(false, |(_, c)| cyc_is_simple(c))
        {
            render_poly(&s.den)
        } else {
            format!("({})", render_poly(&s.den))
        };
        format!("{}/{}", n, d)
    }
}

// ---------------------------------------------------------------------------
// Parser: a small recursive-descent expression grammar.
// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := atom ('^' sint)?  |  '-' factor
// atom   := integer | 'z' | 'q'<digits> | '(' expr ')'
// ---------------------------------------------------------------------------

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Zeta,
    Param(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn next_tok(&mut self) -> Result<Tok, QvlaError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(Tok::End);
        }
        let c = self.src[self.pos];
        self.pos += 1;
        match c {
            b'+' => Ok(Tok::Plus),
            b'-' => Ok(Tok::Minus),
            b'*' => Ok(Tok::Star),
            b'/' => Ok(Tok::Slash),
            b'^' => Ok(Tok::Caret),
            b'(' => Ok(Tok::LParen),
            b')' => Ok(Tok::RParen),
            b'z' => Ok(Tok::Zeta),
            b'q' => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(QvlaError::Parse(format!(
                        "expected parameter index after 'q' at byte {}",
                        start
                    )));
                }
                let idx: usize = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| QvlaError::Parse("bad parameter index".into()))?;
                if idx == 0 {
                    return Err(QvlaError::Parse("parameters are 1-based (q1..)".into()));
                }
                Ok(Tok::Param(idx - 1))
            }
            b'0'..=b'9' => {
                let start = self.pos - 1;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let n: BigInt = std::str::from_utf8(&self.src[start..self.pos])
                    .unwrap()
                    .parse()
                    .unwrap();
                Ok(Tok::Int(n))
            }
            _ => Err(QvlaError::Parse(format!(
                "unexpected character '{}' at byte {}",
                c as char,
                self.pos - 1
            ))),
        }
    }
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ctx: &'a Arc<FieldCtx>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        self.toks.get(self.pos).unwrap_or(&Tok::End)
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), QvlaError> {
        let got = self.bump();
        if got == t {
            Ok(())
        } else {
            Err(QvlaError::Parse(format!("expected {:?}, got {:?}", t, got)))
        }
    }

    fn expr(&mut self) -> Result<Scalar, QvlaError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, QvlaError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    acc = acc.div(&self.factor()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Scalar, QvlaError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let mut sign = 1i64;
            if *self.peek() == Tok::Minus {
                self.bump();
                sign = -1;
            }
            match self.bump() {
                Tok::Int(n) => {
                    let e: i64 = n
                        .try_into()
                        .map_err(|_| QvlaError::Parse("exponent too large".into()))?;
                    base.pow(sign * e)
                }
                t => Err(QvlaError::Parse(format!("expected exponent, got {:?}", t))),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Scalar, QvlaError> {
        match self.bump() {
            Tok::Int(n) => Ok(Scalar::from_rational(
                self.ctx,
                BigRational::from_integer(n),
            )),
            Tok::Zeta => {
                if self.ctx.torsion_order == 1 {
                    return Err(QvlaError::Parse(
                        "'z' is not available when T = 1".into(),
                    ));
                }
                Ok(Scalar::zeta_pow(self.ctx, 1))
            }
            Tok::Param(i) => {
                if i >= self.ctx.num_params as usize {
                    return Err(QvlaError::Parse(format!(
                        "parameter q{} exceeds declared count {}",
                        i + 1,
                        self.ctx.num_params
                    )));
                }
                Ok(Scalar::param_pow(self.ctx, i, 1))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => Err(QvlaError::Parse(format!("unexpected token {:?}", t))),
        }
    }
}

pub fn parse_scalar(ctx: &Arc<FieldCtx>, src: &str) -> Result<Scalar, QvlaError> {
    let mut lex = Lexer::new(src);
    let mut toks = Vec::new();
    loop {
        let t = lex.next_tok()?;
        let end = t == Tok::End;
        toks.push(t);
        if end {
            break;
        }
    }
    let mut p = Parser { toks, pos: 0, ctx };
    let s = p.expr()?;
    p.expect(Tok::End)?;
    Ok(s)
}

/// Sign convention helper: true if the rendered form would begin with '-'.
pub fn renders_negative(s: &Scalar) -> bool {
    render_scalar(s).starts_with('-')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::scalar::FieldSpec;

    #[test]
    fn parse_print_roundtrip() {
        let ctx = FieldSpec::new(4, 2).unwrap();
        for src in [
            "1",
            "-3/7",
            "q1 + q2^-1",
            "(q1 - q1^-1)^-1",
            "z^2*q1 - 5",
            "(1 + z)/(q2^3 - q1)",
            "0",
        ] {
            let s = parse_scalar(&ctx, src).unwrap();
            let printed = render_scalar(&s);
            let back = parse_scalar(&ctx, &printed).unwrap();
            assert_eq!(s, back, "roundtrip failed for {} -> {}", src, printed);
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        let ctx = FieldSpec::new(1, 1).unwrap();
        assert!(parse_scalar(&ctx, "q2").is_err());
        assert!(parse_scalar(&ctx, "z").is_err());
        assert!(parse_scalar(&ctx, "1 +").is_err());
        assert!(parse_scalar(&ctx, "$").is_err());
    }

    #[test]
    fn division_by_zero_rejected() {
        let ctx = FieldSpec::new(1, 1).unwrap();
        assert!(parse_scalar(&ctx, "1/(q1 - q1)").is_err());
    }
}
