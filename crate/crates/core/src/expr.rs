//! Parser for polynomial inputs of the star product.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! sum     := ["+"|"-"] product (("+"|"-") product)*
//! product := power (["*"] power)*
//! power   := atom ["^" integer]
//! atom    := integer | variable | "(" sum ")"
//! ```
//!
//! Products inside a polynomial are commutative. A star expression
//! `<poly> ⋆ <poly>` may use `⋆`, or a single `*` at parenthesis depth 0;
//! with `*` any other product in the operands must be parenthesized or
//! written by juxtaposition (`2x`, `x^2y`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hseries::HSeries;
use crate::qplane::PlaneElement;
use crate::spacetime4d::FourElement;

pub const PLANE_VARS: [&str; 2] = ["x", "y"];
pub const FOUR_VARS: [&str; 4] = ["x1", "y1", "x2", "y2"];

/// Commutative polynomial with real coefficients over a fixed variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(vars: &[&str]) -> Self {
        Polynomial { vars: vars.iter().map(|v| v.to_string()).collect(), terms: BTreeMap::new() }
    }

    pub fn constant(c: f64, vars: &[&str]) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], c);
        p
    }

    pub fn variable(index: usize, vars: &[&str]) -> Self {
        let mut exps = vec![0; vars.len()];
        exps[index] = 1;
        let mut p = Self::zero(vars);
        p.add_term(exps, 1.0);
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Terms as `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        let entry = self.terms.entry(exps.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&exps);
        }
    }

    fn add(&self, other: &Polynomial, sign: f64) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), sign * c);
        }
        out
    }

    fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial { vars: self.vars.clone(), terms: BTreeMap::new() };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    fn pow(&self, n: u32) -> Polynomial {
        let vars: Vec<&str> = self.vars.iter().map(String::as_str).collect();
        (0..n).fold(Polynomial::constant(1.0, &vars), |acc, _| acc.mul(self))
    }

    pub fn to_plane(&self, order: usize) -> Result<PlaneElement> {
        if self.vars.len() != 2 {
            return Err(Error::InvalidQuery("plane elements need exactly two variables".into()));
        }
        let mut out = PlaneElement::zero(order);
        for (e, &c) in &self.terms {
            out = &out + &PlaneElement::from_classical_monomial(e[0], e[1], &HSeries::constant(c, order));
        }
        Ok(out)
    }

    pub fn to_four(&self, order: usize) -> Result<FourElement> {
        if self.vars.len() != 4 {
            return Err(Error::InvalidQuery("4-space elements need exactly four variables".into()));
        }
        let mut out = FourElement::zero(order);
        for (e, &c) in &self.terms {
            let exps = [e[0], e[1], e[2], e[3]];
            out = &out + &FourElement::from_classical_monomial(exps, &HSeries::constant(c, order));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(u64),
    Var(String),
    Plus,
    Minus,
    Star,
    Caret,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    chars.next();
                }
                let n = s.parse().map_err(|_| Error::Parse(format!("integer `{s}` out of range")))?;
                out.push(Token::Num(n));
            }
            // one letter plus optional digits, so `xy` is two variables
            c if c.is_ascii_alphabetic() => {
                let mut s = String::from(c);
                chars.next();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    chars.next();
                }
                out.push(Token::Var(s));
            }
            '+' | '-' | '*' | '^' | '(' | ')' => {
                chars.next();
                out.push(match c {
                    '+' => Token::Plus,
                    '-' => Token::Minus,
                    '*' => Token::Star,
                    '^' => Token::Caret,
                    '(' => Token::Open,
                    _ => Token::Close,
                });
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn sum(&mut self) -> Result<Polynomial> {
        let mut sign = 1.0;
        match self.peek() {
            Some(Token::Minus) => {
                sign = -1.0;
                self.pos += 1;
            }
            Some(Token::Plus) => self.pos += 1,
            _ => {}
        }
        let mut acc = Polynomial::zero(self.vars).add(&self.product()?, sign);
        loop {
            let sign = match self.peek() {
                Some(Token::Plus) => 1.0,
                Some(Token::Minus) => -1.0,
                _ => return Ok(acc),
            };
            self.pos += 1;
            acc = acc.add(&self.product()?, sign);
        }
    }

    fn product(&mut self) -> Result<Polynomial> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(Token::Num(_) | Token::Var(_) | Token::Open) => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            return match self.next() {
                Some(Token::Num(n)) => {
                    let n = u32::try_from(n).map_err(|_| Error::Parse(format!("exponent {n} too large")))?;
                    Ok(base.pow(n))
                }
                _ => Err(Error::Parse("expected a non-negative integer exponent after `^`".into())),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.next() {
            Some(Token::Num(n)) => Ok(Polynomial::constant(n as f64, self.vars)),
            Some(Token::Var(v)) => match self.vars.iter().position(|&known| known == v) {
                Some(i) => Ok(Polynomial::variable(i, self.vars)),
                None if PLANE_VARS.contains(&v.as_str()) || FOUR_VARS.contains(&v.as_str()) => {
                    Err(Error::UnsupportedGenerator(format!("`{v}` (coordinates are {})", self.vars.join(", "))))
                }
                None => Err(Error::Parse(format!("unknown variable `{v}`"))),
            },
            Some(Token::Open) => {
                let inner = self.sum()?;
                match self.next() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err(Error::Parse("missing `)`".into())),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}

/// Parses a commutative polynomial over `vars`.
pub fn parse_polynomial(src: &str, vars: &[&str]) -> Result<Polynomial> {
    let mut p = Parser { tokens: tokenize(src)?, pos: 0, vars };
    if p.tokens.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let out = p.sum()?;
    if p.pos < p.tokens.len() {
        return Err(Error::Parse(format!("trailing input at token {:?}", p.tokens[p.pos])));
    }
    Ok(out)
}

/// Splits `a ⋆ b` (or `a * b` with a single top-level `*`) into its operands.
pub fn split_star(src: &str) -> Result<(&str, &str)> {
    let stars: Vec<usize> = src.match_indices('⋆').map(|(i, _)| i).collect();
    match stars.len() {
        1 => return Ok((&src[..stars[0]], &src[stars[0] + '⋆'.len_utf8()..])),
        0 => {}
        _ => return Err(Error::Parse("expected exactly one `⋆`".into())),
    }
    let mut depth = 0i32;
    let mut top = Vec::new();
    for (i, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => top.push(i),
            _ => {}
        }
    }
    match top.as_slice() {
        [i] => Ok((&src[..*i], &src[i + 1..])),
        [] => Err(Error::Parse("expected `<poly> * <poly>`".into())),
        _ => Err(Error::Parse(
            "more than one top-level `*`: parenthesize the operands or use `⋆` for the star product".into(),
        )),
    }
}

/// Parses a star expression into its two operands.
pub fn parse_star_expr(src: &str, vars: &[&str]) -> Result<(Polynomial, Polynomial)> {
    let (l, r) = split_star(src)?;
    Ok((parse_polynomial(l, vars)?, parse_polynomial(r, vars)?))
}
