//! Recursive-descent parser for equations, series and operators.
//!
//! ```text
//! expr     := ['-'] term { ('+' | '-') term }
//! term     := factor { '*' factor }
//! factor   := atom [ '^' integer ]
//! atom     := 'y' { '\'' } | 'y^(' uint ')' | 'z' | rational | '(' expr ')'
//! rational := int [ '/' uint ]
//! ```
//!
//! Series additionally accept a trailing `O(z^p)` term marking precision.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::diffpoly::DiffPoly;
use crate::error::Error;
use crate::laurent::{LaurentSeries, Rational};
use crate::linops::LinOp;

const MAX_EXPONENT: i64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    Unexpected {
        expected: &'static str,
        found: String,
    },
    ZeroDenominator,
    DivisionByJet,
    UnsupportedDivision,
    NonIntegerExponent,
    NonInvertiblePower,
    ExponentTooLarge,
    JetInSeries,
    MisplacedPrecision,
    TooManyEquals,
    Empty,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::Unexpected { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::ZeroDenominator => write!(f, "zero denominator"),
            ParseErrorKind::DivisionByJet => write!(f, "division by a jet variable is not allowed"),
            ParseErrorKind::UnsupportedDivision => {
                write!(f, "'/' is only allowed inside rational literals")
            }
            ParseErrorKind::NonIntegerExponent => write!(f, "exponent must be an integer"),
            ParseErrorKind::NonInvertiblePower => {
                write!(
                    f,
                    "negative powers are only allowed for nonzero single-term expressions in z"
                )
            }
            ParseErrorKind::ExponentTooLarge => write!(f, "exponent too large"),
            ParseErrorKind::JetInSeries => write!(f, "a series may not contain y"),
            ParseErrorKind::MisplacedPrecision => {
                write!(f, "O(z^p) must appear as a top-level '+' term of a series")
            }
            ParseErrorKind::TooManyEquals => write!(f, "at most one '=' is allowed"),
            ParseErrorKind::Empty => write!(f, "empty input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

/// Result of parsing an equation or expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedEquation {
    pub poly: DiffPoly,
    pub source_text: String,
    /// True if the input was `LHS = RHS`, normalized to `LHS - RHS`.
    pub normalized_from_equation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Jet(u32),
    Z,
    BigO,
    Int(BigInt),
    Decimal,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Jet(i) => write!(f, "'{}'", crate::diffpoly::jet_name(*i)),
            Tok::Z => write!(f, "'z'"),
            Tok::BigO => write!(f, "'O'"),
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Decimal => write!(f, "decimal literal"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Eq => write!(f, "'='"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn err(kind: ParseErrorKind, position: usize) -> ParseError {
    ParseError { kind, position }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'y' => {
                i += 1;
                if src[i..].starts_with("^(") {
                    let digits: String = src[i + 2..]
                        .chars()
                        .take_while(char::is_ascii_digit)
                        .collect();
                    let close = i + 2 + digits.len();
                    if !digits.is_empty() && bytes.get(close) == Some(&b')') {
                        i = close + 1;
                        let k = digits
                            .parse::<u32>()
                            .ok()
                            .filter(|&k| k as i64 <= MAX_EXPONENT)
                            .ok_or_else(|| err(ParseErrorKind::ExponentTooLarge, start))?;
                        out.push((Tok::Jet(k), start));
                        continue;
                    }
                }
                let mut primes = 0;
                while bytes.get(i) == Some(&b'\'') {
                    primes += 1;
                    i += 1;
                }
                Tok::Jet(primes)
            }
            b'z' => {
                i += 1;
                Tok::Z
            }
            b'O' => {
                i += 1;
                Tok::BigO
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if bytes.get(i) == Some(&b'.') {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    Tok::Decimal
                } else {
                    Tok::Int(src[start..i].parse().expect("ascii digits"))
                }
            }
            _ => {
                i += 1;
                match c {
                    b'+' => Tok::Plus,
                    b'-' => Tok::Minus,
                    b'*' => Tok::Star,
                    b'/' => Tok::Slash,
                    b'^' => Tok::Caret,
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b'=' => Tok::Eq,
                    b'.' => Tok::Decimal,
                    _ => {
                        let ch = src[start..].chars().next().unwrap_or('?');
                        return Err(err(ParseErrorKind::UnexpectedChar(ch), start));
                    }
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    series_mode: bool,
    precision: Option<i64>,
}

impl Parser {
    fn new(src: &str, series_mode: bool) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            series_mode,
            precision: None,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        err(
            ParseErrorKind::Unexpected {
                expected,
                found: self.peek().to_string(),
            },
            self.offset(),
        )
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expr(&mut self, top_level: bool) -> Result<DiffPoly, ParseError> {
        let negate = *self.peek() == Tok::Minus;
        if negate {
            self.bump();
        }
        let first = self.signed_term(top_level, negate)?;
        let mut acc = first;
        loop {
            let negate = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let t = self.signed_term(top_level, negate)?;
            acc = &acc + &t;
        }
        Ok(acc)
    }

    fn signed_term(&mut self, top_level: bool, negate: bool) -> Result<DiffPoly, ParseError> {
        if *self.peek() == Tok::BigO {
            let at = self.offset();
            if !(self.series_mode && top_level && !negate) || self.precision.is_some() {
                return Err(err(ParseErrorKind::MisplacedPrecision, at));
            }
            self.precision = Some(self.big_o()?);
            return Ok(DiffPoly::zero());
        }
        let t = self.term()?;
        Ok(if negate { -t } else { t })
    }

    fn big_o(&mut self) -> Result<i64, ParseError> {
        self.bump();
        self.expect(Tok::LParen, "'(' after O")?;
        let p = match self.peek() {
            Tok::Int(n) if n.is_one() => {
                self.bump();
                0
            }
            Tok::Z => {
                self.bump();
                if *self.peek() == Tok::Caret {
                    self.bump();
                    self.integer_exponent()?
                } else {
                    1
                }
            }
            _ => return Err(self.unexpected("'z^p' inside O(...)")),
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(p)
    }

    fn term(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let f = self.factor()?;
                    acc = &acc * &f;
                }
                Tok::Slash => {
                    let at = self.offset();
                    self.bump();
                    let kind = match self.peek() {
                        Tok::Jet(_) => ParseErrorKind::DivisionByJet,
                        _ => ParseErrorKind::UnsupportedDivision,
                    };
                    return Err(err(kind, at));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<DiffPoly, ParseError> {
        let base_at = self.offset();
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let k = self.integer_exponent()?;
        if k >= 0 {
            return Ok(base.pow(k as u32));
        }
        if !base.is_x_free() {
            return Err(err(ParseErrorKind::DivisionByJet, base_at));
        }
        let c = base.x_free_part();
        let mut terms = c.terms();
        match (terms.next(), terms.next()) {
            (Some((e, r)), None) => {
                let inv = LaurentSeries::monomial(r.recip(), -e);
                Ok(DiffPoly::constant(inv.pow((-k) as u32)))
            }
            _ => Err(err(ParseErrorKind::NonInvertiblePower, base_at)),
        }
    }

    fn integer_exponent(&mut self) -> Result<i64, ParseError> {
        let at = self.offset();
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match self.bump() {
            Tok::Int(n) => {
                let v = n
                    .to_i64()
                    .filter(|v| *v <= MAX_EXPONENT)
                    .ok_or_else(|| err(ParseErrorKind::ExponentTooLarge, at))?;
                if *self.peek() == Tok::Slash {
                    return Err(err(ParseErrorKind::NonIntegerExponent, at));
                }
                Ok(if negative { -v } else { v })
            }
            Tok::Decimal | Tok::LParen | Tok::Jet(_) | Tok::Z => {
                Err(err(ParseErrorKind::NonIntegerExponent, at))
            }
            other => Err(err(
                ParseErrorKind::Unexpected {
                    expected: "integer exponent",
                    found: other.to_string(),
                },
                at,
            )),
        }
    }

    fn atom(&mut self) -> Result<DiffPoly, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Jet(i) => {
                self.bump();
                Ok(DiffPoly::jet(i))
            }
            Tok::Z => {
                self.bump();
                Ok(DiffPoly::z_pow(1))
            }
            Tok::Int(num) => {
                self.bump();
                let mut value = Rational::from_integer(num);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Int(den) => {
                            self.bump();
                            if den.is_zero() {
                                return Err(err(ParseErrorKind::ZeroDenominator, at));
                            }
                            value /= Rational::from_integer(den);
                        }
                        Tok::Jet(_) => return Err(err(ParseErrorKind::DivisionByJet, at)),
                        _ => return Err(err(ParseErrorKind::UnsupportedDivision, at)),
                    }
                }
                Ok(DiffPoly::constant(LaurentSeries::constant(value)))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(false)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Decimal => Err(err(
                ParseErrorKind::Unexpected {
                    expected: "rational literal p/q",
                    found: "decimal literal".into(),
                },
                at,
            )),
            Tok::BigO => Err(err(ParseErrorKind::MisplacedPrecision, at)),
            _ => Err(self.unexpected("'y', 'z', a number or '('")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// Parses an expression or an equation `LHS = RHS` (normalized to `LHS - RHS`).
pub fn parse_equation(text: &str) -> Result<ParsedEquation, ParseError> {
    if text.trim().is_empty() {
        return Err(err(ParseErrorKind::Empty, 0));
    }
    let mut p = Parser::new(text, false)?;
    let lhs = p.expr(true)?;
    let (poly, normalized) = if *p.peek() == Tok::Eq {
        p.bump();
        let rhs = p.expr(true)?;
        if *p.peek() == Tok::Eq {
            return Err(err(ParseErrorKind::TooManyEquals, p.offset()));
        }
        (&lhs - &rhs, true)
    } else {
        (lhs, false)
    };
    p.finish()?;
    Ok(ParsedEquation {
        poly,
        source_text: text.to_string(),
        normalized_from_equation: normalized,
    })
}

/// Parses a Laurent series such as `3/2*z^-1 + 5 - z^2 + O(z^4)`.
pub fn parse_series(text: &str) -> Result<LaurentSeries, Error> {
    if text.trim().is_empty() {
        return Err(err(ParseErrorKind::Empty, 0).into());
    }
    let mut p = Parser::new(text, true)?;
    let poly = p.expr(true)?;
    p.finish()?;
    if !poly.is_x_free() {
        let at = text.find('y').unwrap_or(0);
        return Err(err(ParseErrorKind::JetInSeries, at).into());
    }
    let series = poly.x_free_part();
    Ok(match p.precision {
        Some(bound) => series.truncated(bound),
        None => series,
    })
}

/// Parses an operator as `a0; a1; ...; an` (coefficient of `d^i` in slot i).
pub fn parse_operator(text: &str) -> Result<LinOp, Error> {
    let coeffs = text
        .split(';')
        .map(parse_series)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LinOp::new(coeffs))
}

/// Convenience for tests and examples: panics on malformed input.
pub fn poly(text: &str) -> DiffPoly {
    parse_equation(text)
        .unwrap_or_else(|e| panic!("bad polynomial {text:?}: {e}"))
        .poly
}

pub fn series(text: &str) -> LaurentSeries {
    parse_series(text).unwrap_or_else(|e| panic!("bad series {text:?}: {e}"))
}

pub fn operator(text: &str) -> LinOp {
    parse_operator(text).unwrap_or_else(|e| panic!("bad operator {text:?}: {e}"))
}
