//! Linear differential operators `Σ a_i(z) ∂^i` over Laurent series.
//!
//! Adjoints are taken with respect to the residue pairing
//! `(f, g) = res_0(f g dz)`. Tangent cohomology of a linearised equation is
//! approximated by kernel/cokernel dimensions of the operator's matrix on a
//! finite window of monomials, with a stabilization check.

use std::fmt;

use num_traits::{One, Zero};

use crate::diffpoly::{check_known_window, DiffPoly, JetMonomial};
use crate::error::{Error, Result};
use crate::laurent::{integer, LaurentSeries, Precision, Rational, Verdict};
use crate::loopspace::Window;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinOp {
    coeffs: Vec<LaurentSeries>,
}

pub(crate) fn binomial(n: usize, k: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * integer((n - i) as i64) / integer((i + 1) as i64);
    }
    acc
}

/// `a (a-1) ... (a-k+1)`
pub(crate) fn falling_factorial(a: i64, k: usize) -> Rational {
    (0..k as i64).fold(Rational::one(), |acc, j| acc * integer(a - j))
}

impl LinOp {
    /// Builds `Σ coeffs[i] ∂^i`. Trailing zero coefficients are dropped and
    /// every coefficient is cut down to the common known window.
    pub fn new(mut coeffs: Vec<LaurentSeries>) -> Self {
        let precision = coeffs
            .iter()
            .fold(Precision::Exact, |p, c| p.meet(c.precision()));
        if let Precision::KnownBelow(p) = precision {
            coeffs = coeffs.into_iter().map(|c| c.truncated(p)).collect();
        }
        while coeffs.last().is_some_and(LaurentSeries::is_zero) {
            coeffs.pop();
        }
        LinOp { coeffs }
    }

    pub fn zero() -> Self {
        LinOp { coeffs: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::multiplication(LaurentSeries::one())
    }

    /// `∂^k`
    pub fn d(k: usize) -> Self {
        let mut coeffs = vec![LaurentSeries::zero(); k];
        coeffs.push(LaurentSeries::one());
        LinOp { coeffs }
    }

    pub fn multiplication(c: LaurentSeries) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[LaurentSeries] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> LaurentSeries {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// `None` for the zero operator.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(LaurentSeries::is_exact)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.scale(c)).collect())
    }

    pub fn add(&self, other: &LinOp) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &LinOp) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn apply(&self, f: &LaurentSeries) -> Result<LaurentSeries> {
        let mut acc = LaurentSeries::zero();
        let mut lowest: Option<i64> = None;
        let mut deriv = f.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                deriv = deriv.ddz();
            }
            let term = a * &deriv;
            if let Some(v) = term.valuation_bound() {
                lowest = Some(lowest.map_or(v, |l| l.min(v)));
            }
            acc = &acc + &term;
        }
        check_known_window(&acc, lowest)?;
        Ok(acc)
    }

    /// `self ∘ other`, expanded with Leibniz: `a ∂^i ∘ b ∂^j = Σ_k C(i,k) a b^{(k)} ∂^{i-k+j}`.
    pub fn compose(&self, other: &LinOp) -> LinOp {
        let (Some(n), Some(m)) = (self.order(), other.order()) else {
            return LinOp::zero();
        };
        let mut out = vec![LaurentSeries::zero(); n + m + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let mut bk = b.clone();
                for k in 0..=i {
                    if k > 0 {
                        bk = bk.ddz();
                    }
                    let term = (a * &bk).scale(&binomial(i, k));
                    let slot = i - k + j;
                    out[slot] = &out[slot] + &term;
                }
            }
        }
        LinOp::new(out)
    }

    /// Formal adjoint `Σ_i (-1)^i ∂^i ∘ a_i`, i.e.
    /// `b_j = Σ_{i>=j} (-1)^i C(i,j) a_i^{(i-j)}`.
    pub fn adjoint(&self) -> LinOp {
        let n = self.coeffs.len();
        let mut out = vec![LaurentSeries::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            let sign = if i % 2 == 0 { integer(1) } else { integer(-1) };
            let mut da = a.clone();
            for j in (0..=i).rev() {
                let term = da.scale(&(&sign * binomial(i, j)));
                out[j] = &out[j] + &term;
                da = da.ddz();
            }
        }
        LinOp::new(out)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint_verdict().holds()
    }

    /// Self-adjointness on the known window of the coefficients.
    pub fn self_adjoint_verdict(&self) -> Verdict {
        let adj = self.adjoint();
        let n = self.coeffs.len().max(adj.coeffs.len());
        let mut verdict = Verdict::Holds;
        for i in 0..n {
            match self.coeff(i).compare(&adj.coeff(i)) {
                Verdict::Fails => return Verdict::Fails,
                Verdict::Indeterminate => verdict = Verdict::Indeterminate,
                Verdict::Holds => {}
            }
        }
        verdict
    }

    /// `Σ a_i x_i` as an element of the differential polynomial ring.
    pub fn to_diffpoly(&self) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            out = &out + &DiffPoly::from_series(a.clone(), JetMonomial::var(i as u32))?;
        }
        Ok(out)
    }

    /// The operator `Σ a_k ∂^k` of a linear element `Σ a_k x_k`. The x-free
    /// (inhomogeneous) part is ignored.
    pub fn from_linear(d: &DiffPoly) -> Result<LinOp> {
        let order = d.order().map_or(0, |o| o as usize + 1);
        let mut coeffs = vec![LaurentSeries::zero(); order];
        for (m, c) in d.terms() {
            match m.degree() {
                0 => {}
                1 => coeffs[m.order().expect("degree one") as usize] = c.clone(),
                degree => return Err(Error::NotLinear { degree }),
            }
        }
        Ok(LinOp::new(coeffs))
    }
}

impl fmt::Display for LinOp {
    /// Semicolon list of coefficients, lowest order first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for LinOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::frontend::parse::parse_operator(s)
    }
}

pub fn residue_pairing(f: &LaurentSeries, g: &LaurentSeries) -> Result<Rational> {
    (f * g).residue()
}

/// Linearisation of an equation at a candidate solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linearisation {
    pub operator: LinOp,
    /// Whether `D(γ) = 0` on the known window. The operator is returned
    /// either way; it is the ε-coefficient of `D(γ + εy)`.
    pub at_solution: Verdict,
}

pub fn linearize_at(d: &DiffPoly, gamma: &LaurentSeries) -> Result<Linearisation> {
    let at_solution = d.substitute_solution(gamma)?.zero_verdict();
    let order = d.order().map_or(0, |o| o as usize + 1);
    let coeffs = (0..order)
        .map(|i| d.jet_partial(i as u32).substitute_solution(gamma))
        .collect::<Result<Vec<_>>>()?;
    Ok(Linearisation {
        operator: LinOp::new(coeffs),
        at_solution,
    })
}

/// Coefficients `∂D/∂x_i` of `∂^i` in the linearisation over the ring itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalLinearisation {
    pub coeffs: Vec<DiffPoly>,
}

impl UniversalLinearisation {
    pub fn evaluate_at(&self, gamma: &LaurentSeries) -> Result<LinOp> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.substitute_solution(gamma))
            .collect::<Result<Vec<_>>>()?;
        Ok(LinOp::new(coeffs))
    }
}

pub fn universal_linearization(d: &DiffPoly) -> UniversalLinearisation {
    let order = d.order().map_or(0, |o| o + 1);
    UniversalLinearisation {
        coeffs: (0..order).map(|i| d.jet_partial(i)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// `k[[z]]`
    Disc,
    /// `k((z))`
    Punctured,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyDims {
    pub h0: usize,
    pub h1: usize,
    /// Source columns `[low, high]`; the exact range holds the target rows used.
    pub window_used: Window,
    pub stabilized: bool,
}

/// Growth of each window side between the two runs compared for stabilization.
pub const STABILIZATION_STEP: i64 = 5;

/// Truncated kernel and cokernel dimensions of `L` acting on `k[[z]]` or
/// `k((z))`. The window is `[0, high]` (disc) or `[-high, high]` (punctured).
pub fn tangent_cohomology_dims(l: &LinOp, space: Space, high: i64) -> Result<CohomologyDims> {
    let low = match space {
        Space::Disc => 0,
        Space::Punctured => -high,
    };
    tangent_cohomology_dims_in(l, space, low, high)
}

/// As [`tangent_cohomology_dims`] with an explicit source window `[low, high]`.
pub fn tangent_cohomology_dims_in(
    l: &LinOp,
    space: Space,
    low: i64,
    high: i64,
) -> Result<CohomologyDims> {
    if !l.is_exact() {
        return Err(Error::InexactCoefficient);
    }
    if low > high || (space == Space::Disc && low != 0) {
        return Err(Error::InvalidWindow {
            low,
            high,
            reason: "disc windows start at 0 and low must not exceed high",
        });
    }
    if space == Space::Disc {
        for (i, a) in l.coeffs.iter().enumerate() {
            if let Some(v) = a.min_exponent().filter(|&v| v < 0) {
                return Err(Error::NotDiscOperator {
                    order: i,
                    exponent: v,
                });
            }
        }
    }
    let (h0, h1, window_used) = truncated_dims(l, space, low, high)?;
    let grown_low = if space == Space::Disc {
        low
    } else {
        low - STABILIZATION_STEP
    };
    let (g0, g1, _) = truncated_dims(l, space, grown_low, high + STABILIZATION_STEP)?;
    Ok(CohomologyDims {
        h0,
        h1,
        window_used,
        stabilized: (h0, h1) == (g0, g1),
    })
}

fn shift_range(l: &LinOp) -> (i64, i64) {
    let shifts: Vec<i64> = l
        .coeffs
        .iter()
        .enumerate()
        .flat_map(|(i, a)| a.terms().map(move |(v, _)| v - i as i64))
        .collect();
    match (shifts.iter().min(), shifts.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0, 0),
    }
}

fn truncated_dims(l: &LinOp, space: Space, low: i64, high: i64) -> Result<(usize, usize, Window)> {
    let (s_min, s_max) = shift_range(l);
    let band = s_max - s_min;
    // Rows whose every contributing column lies inside the source window.
    let row_low = match space {
        Space::Disc => 0,
        Space::Punctured => low + s_max,
    };
    let row_high = high + s_min;
    if row_low > row_high {
        return Err(Error::EmptyExactRange {
            low,
            high,
            exact_low: row_low,
            exact_high: row_high,
        });
    }
    let cols: Vec<i64> = (low..=high).collect();
    let rows = (row_high - row_low + 1) as usize;
    let mut matrix = vec![vec![Rational::zero(); cols.len()]; rows];
    for (c, &a) in cols.iter().enumerate() {
        for (i, coeff) in l.coeffs.iter().enumerate() {
            let ff = falling_factorial(a, i);
            if ff.is_zero() {
                continue;
            }
            for (v, r) in coeff.terms() {
                let row = a + v - i as i64;
                if (row_low..=row_high).contains(&row) {
                    matrix[(row - row_low) as usize][c] += r * &ff;
                }
            }
        }
    }
    // Columns within `band` of a truncated edge can carry kernel vectors
    // that are artifacts of the cut; h0 counts the kernel's projection onto
    // the interior columns.
    let interior_low = match space {
        Space::Disc => low,
        Space::Punctured => low + band,
    };
    let interior_high = high - band;
    let boundary: Vec<usize> = cols
        .iter()
        .enumerate()
        .filter(|(_, &a)| a < interior_low || a > interior_high)
        .map(|(c, _)| c)
        .collect();
    let rank_full = rank(matrix.clone());
    let boundary_matrix = matrix
        .iter()
        .map(|row| boundary.iter().map(|&c| row[c].clone()).collect())
        .collect();
    let rank_boundary = rank(boundary_matrix);
    let h0 = (cols.len() - rank_full) - (boundary.len() - rank_boundary);
    let h1 = rows - rank_full;
    let window = Window {
        low,
        high,
        exact_low: row_low,
        exact_high: row_high,
    };
    Ok((h0, h1, window))
}

/// Rank over the rationals by Gaussian elimination.
pub(crate) fn rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest {
            if row[c].is_zero() {
                continue;
            }
            let factor = &row[c] / &pivot_row[c];
            for (x, p) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x -= &factor * p;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}
