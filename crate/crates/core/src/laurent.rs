//! Formal Laurent series `k((z))` over the rationals.
//!
//! A series stores finitely many nonzero coefficients together with a
//! [`Precision`] marker. `Exact` series are Laurent polynomials; a series
//! marked `KnownBelow(p)` is only authoritative for exponents `< p`, which
//! is how truncated power-series solutions are represented.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Which coefficients of a series are known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Exact,
    /// Coefficients at exponents `< p` are authoritative, the rest unknown.
    KnownBelow(i64),
}

impl Precision {
    /// `None` stands for +infinity.
    pub fn bound(self) -> Option<i64> {
        match self {
            Precision::Exact => None,
            Precision::KnownBelow(p) => Some(p),
        }
    }

    fn from_bound(bound: Option<i64>) -> Self {
        bound.map_or(Precision::Exact, Precision::KnownBelow)
    }

    pub fn meet(self, other: Precision) -> Precision {
        Precision::from_bound(ext_min(self.bound(), other.bound()))
    }

    pub fn covers(self, exponent: i64) -> bool {
        self.bound().is_none_or(|p| exponent < p)
    }
}

/// Three-valued answer for equality questions on partially known series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Indeterminate,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

// Arithmetic on Option<i64> with None = +infinity.
fn ext_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn ext_add(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentSeries {
    coeffs: BTreeMap<i64, Rational>,
    precision: Precision,
}

impl Default for LaurentSeries {
    fn default() -> Self {
        Self::zero()
    }
}

impl LaurentSeries {
    /// Exact series from `(exponent, coefficient)` pairs; repeated exponents are summed.
    pub fn new<I: IntoIterator<Item = (i64, Rational)>>(terms: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            accumulate(&mut coeffs, e, c);
        }
        LaurentSeries {
            coeffs,
            precision: Precision::Exact,
        }
    }

    pub fn zero() -> Self {
        LaurentSeries {
            coeffs: BTreeMap::new(),
            precision: Precision::Exact,
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Rational, exponent: i64) -> Self {
        Self::new([(exponent, c)])
    }

    /// `z^exponent`
    pub fn z_pow(exponent: i64) -> Self {
        Self::monomial(Rational::one(), exponent)
    }

    /// Restricts the known window to exponents `< p` (never widens it).
    pub fn truncated(mut self, p: i64) -> Self {
        self.precision = self.precision.meet(Precision::KnownBelow(p));
        self.coeffs.retain(|&e, _| e < p);
        self
    }

    fn with_precision(self, precision: Precision) -> Self {
        match precision {
            Precision::Exact => self,
            Precision::KnownBelow(p) => self.truncated(p),
        }
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision == Precision::Exact
    }

    /// True only for the exact zero series.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.is_exact()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &Rational)> + '_ {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `z^exponent`, failing if it lies outside the known window.
    pub fn coeff(&self, exponent: i64) -> Result<Rational> {
        if let Precision::KnownBelow(p) = self.precision {
            if exponent >= p {
                return Err(Error::InsufficientPrecision {
                    exponent,
                    known_below: p,
                });
            }
        }
        Ok(self
            .coeffs
            .get(&exponent)
            .cloned()
            .unwrap_or_else(Rational::zero))
    }

    /// Lowest exponent with a stored nonzero coefficient.
    pub fn min_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lower bound on the exponent of any nonzero coefficient, known or not.
    /// `None` means the series is exactly zero.
    pub fn valuation_bound(&self) -> Option<i64> {
        ext_min(self.min_exponent(), self.precision.bound())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return LaurentSeries {
                coeffs: BTreeMap::new(),
                precision: self.precision,
            };
        }
        LaurentSeries {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e, v * c)).collect(),
            precision: self.precision,
        }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, v)| (e + k, v.clone()))
                .collect(),
            precision: Precision::from_bound(self.precision.bound().map(|p| p + k)),
        }
    }

    pub fn ddz(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&e, _)| e != 0)
            .map(|(&e, v)| (e - 1, v * integer(e)))
            .collect();
        LaurentSeries {
            coeffs,
            precision: Precision::from_bound(self.precision.bound().map(|p| p - 1)),
        }
    }

    pub fn ddz_n(&self, n: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.ddz();
        }
        out
    }

    pub fn residue(&self) -> Result<Rational> {
        self.coeff(-1)
    }

    /// The antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Result<Self> {
        let residue = self.residue()?;
        if !residue.is_zero() {
            return Err(Error::NonIntegrable { residue });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&e, v)| (e + 1, v / integer(e + 1)))
            .collect();
        Ok(LaurentSeries {
            coeffs,
            precision: Precision::from_bound(self.precision.bound().map(|p| p + 1)),
        })
    }

    /// Compares on the overlap of the known windows.
    pub fn compare(&self, other: &LaurentSeries) -> Verdict {
        let diff = self - other;
        if !diff.coeffs.is_empty() {
            Verdict::Fails
        } else if diff.is_exact() {
            Verdict::Holds
        } else {
            Verdict::Indeterminate
        }
    }

    /// Whether the series is zero, as far as its known window tells.
    pub fn zero_verdict(&self) -> Verdict {
        self.compare(&LaurentSeries::zero())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = LaurentSeries::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }
}

fn accumulate(map: &mut BTreeMap<i64, Rational>, e: i64, c: Rational) {
    if c.is_zero() {
        return;
    }
    match map.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;

    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        let mut coeffs = self.coeffs.clone();
        for (&e, c) in &rhs.coeffs {
            accumulate(&mut coeffs, e, c.clone());
        }
        LaurentSeries {
            coeffs,
            precision: Precision::Exact,
        }
        .with_precision(self.precision.meet(rhs.precision))
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;

    fn neg(self) -> LaurentSeries {
        LaurentSeries {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
            precision: self.precision,
        }
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;

    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self + &(-rhs)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;

    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        let mut coeffs = BTreeMap::new();
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &rhs.coeffs {
                accumulate(&mut coeffs, a + b, ca * cb);
            }
        }
        // Unknown coefficients of one factor first reach the product at
        // (its precision) + (lowest possible exponent of the other factor).
        let bound = ext_min(
            ext_add(self.precision.bound(), rhs.valuation_bound()),
            ext_add(rhs.precision.bound(), self.valuation_bound()),
        );
        LaurentSeries {
            coeffs,
            precision: Precision::Exact,
        }
        .with_precision(Precision::from_bound(bound))
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        -&self
    }
}

/// Writes `c*z^e` style terms. `first` controls whether a leading `+` is emitted.
pub(crate) fn write_signed_coeff(
    f: &mut fmt::Formatter<'_>,
    c: &Rational,
    first: bool,
    has_factor: bool,
) -> fmt::Result {
    let mag = c.abs();
    match (first, c.is_negative()) {
        (true, true) => write!(f, "-")?,
        (true, false) => {}
        (false, true) => write!(f, " - ")?,
        (false, false) => write!(f, " + ")?,
    }
    if !has_factor {
        write!(f, "{mag}")
    } else if mag.is_one() {
        Ok(())
    } else {
        write!(f, "{mag}*")
    }
}

pub(crate) fn write_z_power(f: &mut fmt::Formatter<'_>, e: i64) -> fmt::Result {
    match e {
        0 => Ok(()),
        1 => write!(f, "z"),
        _ => write!(f, "z^{e}"),
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&e, c) in &self.coeffs {
            write_signed_coeff(f, c, first, e != 0)?;
            write_z_power(f, e)?;
            first = false;
        }
        match self.precision {
            Precision::Exact if first => write!(f, "0"),
            Precision::Exact => Ok(()),
            Precision::KnownBelow(p) => {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "O(z^{p})")
            }
        }
    }
}

impl std::str::FromStr for LaurentSeries {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::frontend::parse::parse_series(s)
    }
}
