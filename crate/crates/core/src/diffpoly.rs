//! The differential polynomial ring `K[x0, x1, x2, ...]`, where `x_i`
//! stands for the i-th derivative of the unknown function `y(z)`.
//!
//! Coefficients are exact Laurent polynomials in `z`. The ring carries the
//! total derivative (`d/dz` on coefficients, `x_i -> x_{i+1}` on jets), from
//! which the variational derivative is built.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::laurent::{
    integer, write_signed_coeff, write_z_power, LaurentSeries, Precision, Rational,
};

/// Product of jet variables, stored as `(index, exponent)` pairs sorted by
/// index with no zero exponents. The empty product is the monomial `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct JetMonomial {
    exps: Vec<(u32, u32)>,
}

impl JetMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(index: u32) -> Self {
        Self::var_pow(index, 1)
    }

    pub fn var_pow(index: u32, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        JetMonomial {
            exps: vec![(index, exp)],
        }
    }

    pub fn from_exponents<I: IntoIterator<Item = (u32, u32)>>(pairs: I) -> Self {
        let mut m: BTreeMap<u32, u32> = BTreeMap::new();
        for (i, e) in pairs {
            *m.entry(i).or_default() += e;
        }
        JetMonomial {
            exps: m.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exps
    }

    pub fn exponent(&self, index: u32) -> u32 {
        self.exps
            .iter()
            .find(|&&(i, _)| i == index)
            .map_or(0, |&(_, e)| e)
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    /// Highest jet index present, `None` for the monomial 1.
    pub fn order(&self) -> Option<u32> {
        self.exps.last().map(|&(i, _)| i)
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &JetMonomial) -> JetMonomial {
        JetMonomial::from_exponents(self.exps.iter().chain(&other.exps).copied())
    }

    /// `d/dx_index`, as (multiplicity, remaining monomial).
    pub fn partial(&self, index: u32) -> Option<(u32, JetMonomial)> {
        let e = self.exponent(index);
        if e == 0 {
            return None;
        }
        let exps = self
            .exps
            .iter()
            .filter_map(|&(i, k)| match (i == index, k) {
                (true, 1) => None,
                (true, k) => Some((i, k - 1)),
                (false, k) => Some((i, k)),
            })
            .collect();
        Some((e, JetMonomial { exps }))
    }
}

// Graded order: lower total degree first, then by exponent vector.
impl Ord for JetMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for JetMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn jet_name(index: u32) -> String {
    match index {
        0..=3 => format!("y{}", "'".repeat(index as usize)),
        k => format!("y^({k})"),
    }
}

impl fmt::Display for JetMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (n, &(i, e)) in self.exps.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}", jet_name(i))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Element of the differential polynomial ring with exact Laurent
/// polynomial coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DiffPoly {
    terms: BTreeMap<JetMonomial, LaurentSeries>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(LaurentSeries::one())
    }

    /// x-free element. Panics on inexact input; use [`DiffPoly::from_series`] otherwise.
    pub fn constant(c: LaurentSeries) -> Self {
        Self::from_series(c, JetMonomial::one()).expect("exact coefficient")
    }

    pub fn jet(index: u32) -> Self {
        Self::term(Rational::one(), 0, JetMonomial::var(index))
    }

    /// The z-power `z^e`.
    pub fn z_pow(e: i64) -> Self {
        Self::term(Rational::one(), e, JetMonomial::one())
    }

    /// `c * z^z_exp * mono`
    pub fn term(c: Rational, z_exp: i64, mono: JetMonomial) -> Self {
        Self::from_series(LaurentSeries::monomial(c, z_exp), mono).expect("exact coefficient")
    }

    pub fn from_series(c: LaurentSeries, mono: JetMonomial) -> Result<Self> {
        if !c.is_exact() {
            return Err(Error::InexactCoefficient);
        }
        let mut p = DiffPoly::zero();
        p.add_term(mono, c);
        Ok(p)
    }

    fn add_term(&mut self, mono: JetMonomial, c: LaurentSeries) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&JetMonomial, &LaurentSeries)> + '_ {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &JetMonomial) -> LaurentSeries {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Highest jet index, `None` when the element is x-free.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().filter_map(JetMonomial::order).max()
    }

    pub fn xdegree(&self) -> u32 {
        self.terms
            .keys()
            .map(JetMonomial::degree)
            .max()
            .unwrap_or(0)
    }

    /// Range of z-exponents over all coefficients.
    pub fn z_support(&self) -> Option<(i64, i64)> {
        let lo = self
            .terms
            .values()
            .filter_map(LaurentSeries::min_exponent)
            .min()?;
        let hi = self
            .terms
            .values()
            .filter_map(LaurentSeries::max_exponent)
            .max()?;
        Some((lo, hi))
    }

    pub fn x_free_part(&self) -> LaurentSeries {
        self.coefficient(&JetMonomial::one())
    }

    pub fn is_x_free(&self) -> bool {
        self.terms.keys().all(JetMonomial::is_one)
    }

    /// Terms of exactly the given x-degree.
    pub fn homogeneous_part(&self, degree: u32) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.clone(), s.scale(c)))
                .collect(),
        }
    }

    /// Multiplies every coefficient by an exact series.
    pub fn mul_series(&self, c: &LaurentSeries) -> Result<DiffPoly> {
        if !c.is_exact() {
            return Err(Error::InexactCoefficient);
        }
        let mut out = DiffPoly::zero();
        for (m, s) in &self.terms {
            out.add_term(m.clone(), s * c);
        }
        Ok(out)
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> DiffPoly {
        DiffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.clone(), s.shift(k)))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> DiffPoly {
        let mut acc = DiffPoly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// The total derivative `∂_z`.
    pub fn total_derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.ddz());
            for &(i, e) in m.exponents() {
                let (_, rest) = m.partial(i).expect("index present");
                out.add_term(
                    rest.mul(&JetMonomial::var(i + 1)),
                    c.scale(&integer(e as i64)),
                );
            }
        }
        out
    }

    pub fn total_derivative_n(&self, n: usize) -> DiffPoly {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.total_derivative();
        }
        out
    }

    /// Formal partial derivative with respect to `x_index`.
    pub fn jet_partial(&self, index: u32) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.partial(index) {
                out.add_term(rest, c.scale(&integer(e as i64)));
            }
        }
        out
    }

    /// The variational derivative `Σ_i (-1)^i ∂_z^i ∂/∂x_i`.
    pub fn variational_derivative(&self) -> DiffPoly {
        let Some(order) = self.order() else {
            return DiffPoly::zero();
        };
        let mut out = DiffPoly::zero();
        for i in 0..=order {
            let term = self.jet_partial(i).total_derivative_n(i as usize);
            out = if i % 2 == 0 {
                &out + &term
            } else {
                &out - &term
            };
        }
        out
    }

    /// Evaluates the element at `y = gamma`, i.e. `x_i -> gamma^{(i)}`.
    pub fn substitute_solution(&self, gamma: &LaurentSeries) -> Result<LaurentSeries> {
        let order = self.order().unwrap_or(0) as usize;
        let derivs: Vec<LaurentSeries> =
            std::iter::successors(Some(gamma.clone()), |g| Some(g.ddz()))
                .take(order + 1)
                .collect();
        let mut powers: BTreeMap<(u32, u32), LaurentSeries> = BTreeMap::new();
        let mut acc = LaurentSeries::zero();
        let mut lowest: Option<i64> = None;
        for (m, c) in &self.terms {
            let mut val = c.clone();
            for &(i, e) in m.exponents() {
                let p = powers
                    .entry((i, e))
                    .or_insert_with(|| derivs[i as usize].pow(e));
                val = &val * p;
            }
            if let Some(v) = val.valuation_bound() {
                lowest = Some(lowest.map_or(v, |l| l.min(v)));
            }
            acc = &acc + &val;
        }
        check_known_window(&acc, lowest)?;
        Ok(acc)
    }

    /// Splits by x-degree: the coefficient of `t^d` in `D(z, t x0, t x1, ...)`.
    pub(crate) fn scale_dependent(&self) -> ParameterScaled {
        let mut components: BTreeMap<u32, DiffPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            components
                .entry(m.degree())
                .or_default()
                .add_term(m.clone(), c.clone());
        }
        ParameterScaled { components }
    }
}

/// Errors when a result has no authoritative coefficient at all: every
/// exponent at or above the lowest one that could appear is unknown.
pub(crate) fn check_known_window(result: &LaurentSeries, lowest: Option<i64>) -> Result<()> {
    if let (Precision::KnownBelow(p), Some(low)) = (result.precision(), lowest) {
        if p <= low {
            return Err(Error::InsufficientPrecision {
                exponent: low,
                known_below: p,
            });
        }
    }
    Ok(())
}

/// A differential polynomial whose coefficients are polynomials in an
/// auxiliary parameter `t`, stored as `t`-degree -> component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ParameterScaled {
    pub(crate) components: BTreeMap<u32, DiffPoly>,
}

impl ParameterScaled {
    /// `∫_0^1 (Σ_d t^d P_d) dt = Σ_d P_d / (d + 1)`
    pub(crate) fn integrate_unit_interval(&self) -> DiffPoly {
        self.components
            .iter()
            .fold(DiffPoly::zero(), |acc, (&d, p)| {
                &acc + &p.scale(&Rational::new(1.into(), (d as i64 + 1).into()))
            })
    }
}

impl Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self + &(-rhs)
    }
}

impl Mul for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for DiffPoly {
            type Output = DiffPoly;
            fn $m(self, rhs: DiffPoly) -> DiffPoly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

/// Renders in the input grammar, one `c*z^e*monomial` atom per term.
impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            for (e, r) in c.terms() {
                let has_factor = e != 0 || !m.is_one();
                write_signed_coeff(f, r, first, has_factor)?;
                write_z_power(f, e)?;
                if !m.is_one() {
                    if e != 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{m}")?;
                }
                first = false;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for DiffPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(crate::frontend::parse::parse_equation(s)?.poly)
    }
}
