//! Truncated loop-space model.
//!
//! A differential polynomial `D` is evaluated on the universal series
//! `y(z) = Σ_{low <= i <= high} y_i z^i`; the `z^n` coefficient `D_n` is a
//! polynomial in the loop variables `y_i`. Variables above `high` are
//! dropped, so only coefficients in a computed exact range are kept.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::diffpoly::DiffPoly;
use crate::error::{Error, Result};
use crate::laurent::{integer, write_signed_coeff, Rational};
use crate::linops::falling_factorial;

/// Loop-variable window `[low, high]` plus the range `[exact_low, exact_high]`
/// of output exponents that are unaffected by the truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Window {
    pub low: i64,
    pub high: i64,
    pub exact_low: i64,
    pub exact_high: i64,
}

impl Window {
    /// A loop window with the exact range not yet specialized to an equation.
    pub fn new(low: i64, high: i64) -> Result<Self> {
        if low > high || low > 0 {
            return Err(Error::InvalidWindow {
                low,
                high,
                reason: "need low <= 0 and low <= high",
            });
        }
        Ok(Window {
            low,
            high,
            exact_low: i64::MIN,
            exact_high: i64::MAX,
        })
    }

    /// Exact range of the expansion of `d` in this window.
    ///
    /// With x-degree `deg`, order `r` and lowest coefficient exponent `v`,
    /// a loop variable above `high` first reaches exponent
    /// `(high + 1 - r) + (deg - 1)(low - r) + v`, and nothing lies below
    /// `deg (low - r) + v`. An x-free `d` is exact everywhere; its range is
    /// widened to cover every index the checks in this window can ask for.
    pub fn for_poly(&self, d: &DiffPoly) -> Window {
        let (low, high) = (self.low, self.high);
        let (v_min, v_max) = d.z_support().unwrap_or((0, 0));
        let (exact_low, exact_high) = match d.order() {
            None => (v_min.min(-1 - high), v_max.max(-1 - low)),
            Some(r) => {
                let r = r as i64;
                let deg = d.xdegree() as i64;
                (
                    deg * (low - r) + v_min,
                    (high - r) + (deg - 1) * (low - r) + v_min,
                )
            }
        };
        Window {
            low,
            high,
            exact_low,
            exact_high,
        }
    }

    pub fn contains_index(&self, i: i64) -> bool {
        (self.low..=self.high).contains(&i)
    }

    pub fn is_exact_at(&self, n: i64) -> bool {
        (self.exact_low..=self.exact_high).contains(&n)
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.low..=self.high
    }
}

/// Monomial in loop variables: `(index, exponent)` pairs sorted by index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LoopMonomial {
    exps: Vec<(i64, u32)>,
}

impl LoopMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(index: i64) -> Self {
        LoopMonomial {
            exps: vec![(index, 1)],
        }
    }

    pub fn from_exponents<I: IntoIterator<Item = (i64, u32)>>(pairs: I) -> Self {
        let mut m: BTreeMap<i64, u32> = BTreeMap::new();
        for (i, e) in pairs {
            *m.entry(i).or_default() += e;
        }
        LoopMonomial {
            exps: m.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponents(&self) -> &[(i64, u32)] {
        &self.exps
    }

    fn mul(&self, other: &LoopMonomial) -> LoopMonomial {
        LoopMonomial::from_exponents(self.exps.iter().chain(&other.exps).copied())
    }
}

// Graded lexicographic on (index, exponent) pairs.
impl Ord for LoopMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for LoopMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LoopMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, &(i, e)) in self.exps.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            if i < 0 {
                write!(f, "y_({i})")?;
            } else {
                write!(f, "y_{i}")?;
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Polynomial in loop variables with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LoopPoly {
    terms: BTreeMap<LoopMonomial, Rational>,
}

impl LoopPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, LoopMonomial::one())
    }

    pub fn var(index: i64) -> Self {
        Self::term(Rational::one(), LoopMonomial::var(index))
    }

    pub fn term(c: Rational, m: LoopMonomial) -> Self {
        let mut p = LoopPoly::zero();
        p.add_term(m, c);
        p
    }

    fn add_term(&mut self, m: LoopMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LoopMonomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Rational) -> LoopPoly {
        let mut out = LoopPoly::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Formal `∂/∂y_index` with no window check.
    pub fn partial(&self, index: i64) -> LoopPoly {
        let mut out = LoopPoly::zero();
        for (m, c) in &self.terms {
            let e = m
                .exps
                .iter()
                .find(|&&(i, _)| i == index)
                .map_or(0, |&(_, e)| e);
            if e == 0 {
                continue;
            }
            let rest = LoopMonomial::from_exponents(m.exps.iter().map(|&(i, k)| {
                if i == index {
                    (i, k - 1)
                } else {
                    (i, k)
                }
            }));
            out.add_term(rest, c * integer(e as i64));
        }
        out
    }

    /// Largest variable index occurring, if any.
    pub fn max_index(&self) -> Option<i64> {
        self.terms
            .keys()
            .filter_map(|m| m.exps.last().map(|&(i, _)| i))
            .max()
    }
}

pub fn partial_wrt(p: &LoopPoly, j: i64, window: &Window) -> Result<LoopPoly> {
    if !window.contains_index(j) {
        return Err(Error::IndexOutOfWindow {
            index: j,
            low: window.low,
            high: window.high,
        });
    }
    Ok(p.partial(j))
}

impl Add for &LoopPoly {
    type Output = LoopPoly;
    fn add(self, rhs: &LoopPoly) -> LoopPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &LoopPoly {
    type Output = LoopPoly;
    fn neg(self) -> LoopPoly {
        self.scale(&-Rational::one())
    }
}

impl Sub for &LoopPoly {
    type Output = LoopPoly;
    fn sub(self, rhs: &LoopPoly) -> LoopPoly {
        self + &(-rhs)
    }
}

impl Mul for &LoopPoly {
    type Output = LoopPoly;
    fn mul(self, rhs: &LoopPoly) -> LoopPoly {
        let mut out = LoopPoly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for LoopPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let has_factor = m.degree() > 0;
            write_signed_coeff(f, c, n == 0, has_factor)?;
            if has_factor {
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

impl Sub for LoopPoly {
    type Output = LoopPoly;
    fn sub(self, rhs: LoopPoly) -> LoopPoly {
        &self - &rhs
    }
}

impl Add for LoopPoly {
    type Output = LoopPoly;
    fn add(self, rhs: LoopPoly) -> LoopPoly {
        &self + &rhs
    }
}

/// The exact coefficients `D_n` of an expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopExpansion {
    coeffs: BTreeMap<i64, LoopPoly>,
    pub window: Window,
}

impl LoopExpansion {
    /// `D_n`; zero inside the exact range unless stored.
    pub fn coeff(&self, n: i64) -> Result<LoopPoly> {
        if !self.window.is_exact_at(n) {
            return Err(Error::OutsideExactRange {
                exponent: n,
                exact_low: self.window.exact_low,
                exact_high: self.window.exact_high,
            });
        }
        Ok(self.coeffs.get(&n).cloned().unwrap_or_default())
    }

    /// Nonzero coefficients, ascending in `n`.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, &LoopPoly)> + '_ {
        self.coeffs.iter().map(|(&n, p)| (n, p))
    }
}

type LoopSeries = BTreeMap<i64, LoopPoly>;

/// `Σ_i (i)_r y_i z^{i-r}`: the r-th derivative of the universal series.
fn universal_derivative(window: &Window, r: u32) -> LoopSeries {
    let mut out = LoopSeries::new();
    for i in window.indices() {
        let c = falling_factorial(i, r as usize);
        if !c.is_zero() {
            out.insert(i - r as i64, LoopPoly::term(c, LoopMonomial::var(i)));
        }
    }
    out
}

/// Product of loop series, keeping only exponents that can still land at
/// or below `cap` once factors with lowest exponent sum `rest_min` are added.
fn mul_capped(a: &LoopSeries, b: &LoopSeries, cap: i64, rest_min: i64) -> LoopSeries {
    let mut out = LoopSeries::new();
    for (&ea, pa) in a {
        for (&eb, pb) in b {
            let e = ea + eb;
            if e + rest_min > cap {
                break;
            }
            let prod = pa * pb;
            let slot = out.entry(e).or_default();
            *slot = &*slot + &prod;
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

pub fn expand_on_loops(d: &DiffPoly, window: &Window) -> Result<LoopExpansion> {
    let window = window.for_poly(d);
    let order = d.order().unwrap_or(0);
    let derivs: Vec<LoopSeries> = (0..=order)
        .map(|r| universal_derivative(&window, r))
        .collect();
    let mins: Vec<i64> = derivs
        .iter()
        .map(|s| s.keys().next().copied().unwrap_or(0))
        .collect();
    let cap = window.exact_high;
    let mut coeffs = LoopSeries::new();
    for (m, c) in d.terms() {
        let factors: Vec<usize> = m
            .exponents()
            .iter()
            .flat_map(|&(i, e)| std::iter::repeat_n(i as usize, e as usize))
            .collect();
        if factors.iter().any(|&r| derivs[r].is_empty()) {
            continue;
        }
        let mut suffix_min = vec![0i64; factors.len() + 1];
        for k in (0..factors.len()).rev() {
            suffix_min[k] = suffix_min[k + 1] + mins[factors[k]];
        }
        let mut acc: LoopSeries = c
            .terms()
            .map(|(e, r)| (e, LoopPoly::constant(r.clone())))
            .collect();
        for (k, &r) in factors.iter().enumerate() {
            acc = mul_capped(&acc, &derivs[r], cap, suffix_min[k + 1]);
        }
        for (e, p) in acc {
            if window.is_exact_at(e) {
                let slot = coeffs.entry(e).or_default();
                *slot = &*slot + &p;
            }
        }
    }
    coeffs.retain(|_, p| !p.is_zero());
    Ok(LoopExpansion { coeffs, window })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElIndexCheck {
    pub i: i64,
    pub pass: bool,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElReport {
    pub pass: bool,
    pub checked: Vec<ElIndexCheck>,
    /// Window indices where one side is not exact.
    pub unchecked: Vec<i64>,
}

/// Checks `∂ D_{-1} / ∂y_i = (δD)_{-1-i}` at every window index where both
/// sides are exact.
pub fn euler_lagrange_identity_check(d: &DiffPoly, window: &Window) -> Result<ElReport> {
    let lhs_exp = expand_on_loops(d, window)?;
    let alpha = lhs_exp.coeff(-1)?;
    let rhs_exp = expand_on_loops(&d.variational_derivative(), window)?;
    let mut checked = Vec::new();
    let mut unchecked = Vec::new();
    for i in window.indices() {
        if !rhs_exp.window.is_exact_at(-1 - i) {
            unchecked.push(i);
            continue;
        }
        let lhs = alpha.partial(i);
        let rhs = rhs_exp.coeff(-1 - i)?;
        checked.push(ElIndexCheck {
            i,
            pass: lhs == rhs,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        });
    }
    Ok(ElReport {
        pass: checked.iter().all(|c| c.pass),
        checked,
        unchecked,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub i: i64,
    pub j: i64,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosednessReport {
    pub pass: bool,
    pub checked_pairs: usize,
    pub unchecked_pairs: usize,
    pub violation: Option<Violation>,
}

/// Checks `∂D_{-1-i}/∂y_j = ∂D_{-1-j}/∂y_i` over unordered pairs `i < j` of
/// window indices. Pairs where either coefficient is outside the exact range
/// are counted as unchecked.
pub fn symplectic_closedness_check(d: &DiffPoly, window: &Window) -> Result<ClosednessReport> {
    let exp = expand_on_loops(d, window)?;
    let usable: Vec<i64> = window
        .indices()
        .filter(|&i| exp.window.is_exact_at(-1 - i))
        .collect();
    if usable.is_empty() {
        return Err(Error::EmptyExactRange {
            low: window.low,
            high: window.high,
            exact_low: exp.window.exact_low,
            exact_high: exp.window.exact_high,
        });
    }
    let n = (window.high - window.low + 1) as usize;
    let total_pairs = n * (n - 1) / 2;
    let coeffs: BTreeMap<i64, LoopPoly> = usable
        .iter()
        .map(|&i| Ok((i, exp.coeff(-1 - i)?)))
        .collect::<Result<_>>()?;
    let mut checked = 0;
    let mut violation = None;
    for (a, &i) in usable.iter().enumerate() {
        for &j in &usable[a + 1..] {
            checked += 1;
            if violation.is_some() {
                continue;
            }
            let lhs = coeffs[&i].partial(j);
            let rhs = coeffs[&j].partial(i);
            if lhs != rhs {
                violation = Some(Violation {
                    i,
                    j,
                    lhs: lhs.to_string(),
                    rhs: rhs.to_string(),
                });
            }
        }
    }
    Ok(ClosednessReport {
        pass: violation.is_none(),
        checked_pairs: checked,
        unchecked_pairs: total_pairs - checked,
        violation,
    })
}

/// `z^j δ(z^i D) - z^i δ(z^j D)` in the differential polynomial ring.
pub fn cross_integrand(d: &DiffPoly, i: i64, j: i64) -> DiffPoly {
    let a = d.shift(i).variational_derivative().shift(j);
    let b = d.shift(j).variational_derivative().shift(i);
    &a - &b
}

/// The `z^-1` loop coefficient of [`cross_integrand`]; zero means the
/// `(i, j)` integrability condition holds.
pub fn cross_integrability(d: &DiffPoly, i: i64, j: i64, window: &Window) -> Result<LoopPoly> {
    expand_on_loops(&cross_integrand(d, i, j), window)?.coeff(-1)
}

/// For `order(D) <= 2`:
/// `(j-i) z^{i+j-1} ∂_1 D + 2(i-j) z^{i+j-1} ∂_z(∂_2 D) + (i(i-1) - j(j-1)) z^{i+j-2} ∂_2 D`.
pub fn order2_integrand(d: &DiffPoly, i: i64, j: i64) -> Result<DiffPoly> {
    if let Some(order) = d.order().filter(|&o| o > 2) {
        return Err(Error::OrderTooHigh {
            max: 2,
            found: order,
        });
    }
    let p1 = d.jet_partial(1);
    let p2 = d.jet_partial(2);
    let first = p1.shift(i + j - 1).scale(&integer(j - i));
    let second = p2
        .total_derivative()
        .shift(i + j - 1)
        .scale(&integer(2 * (i - j)));
    let third = p2
        .shift(i + j - 2)
        .scale(&integer(i * (i - 1) - j * (j - 1)));
    Ok(&(&first + &second) + &third)
}
