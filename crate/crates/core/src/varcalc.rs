//! Inverse problem of the calculus of variations for a single equation:
//! Helmholtz conditions, the Vainberg–Tonti Lagrangian, and total-derivative
//! detection.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::diffpoly::{DiffPoly, JetMonomial};
use crate::error::{Error, Result};
use crate::laurent::{integer, rational};
use crate::linops::{binomial, LinOp};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelmholtzReport {
    /// Level `l` (1..=order) -> residual of the l-th condition.
    pub residuals: BTreeMap<u32, DiffPoly>,
    pub passed: bool,
}

impl HelmholtzReport {
    /// First level with a nonzero residual.
    pub fn first_failure(&self) -> Option<(u32, &DiffPoly)> {
        self.residuals
            .iter()
            .find(|(_, r)| !r.is_zero())
            .map(|(&l, r)| (l, r))
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Residual {
            level: u32,
            poly: String,
        }
        #[derive(Serialize)]
        struct Shape {
            passed: bool,
            residuals: Vec<Residual>,
        }
        serde_json::to_value(Shape {
            passed: self.passed,
            residuals: self
                .residuals
                .iter()
                .map(|(&level, p)| Residual {
                    level,
                    poly: p.to_string(),
                })
                .collect(),
        })
        .expect("plain struct")
    }
}

/// Residual at level `l`:
/// `(1 + (-1)^{l+1}) ∂_l D - Σ_{k>l} (-1)^k C(k,l) ∂_z^{k-l} ∂_k D`.
pub fn helmholtz_check(d: &DiffPoly) -> HelmholtzReport {
    let order = d.order().unwrap_or(0);
    let partials: Vec<DiffPoly> = (0..=order).map(|k| d.jet_partial(k)).collect();
    let mut residuals = BTreeMap::new();
    for l in 1..=order {
        let lhs_factor = if l % 2 == 1 { 2 } else { 0 };
        let mut residual = partials[l as usize].scale(&integer(lhs_factor));
        for k in (l + 1)..=order {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let c = binomial(k as usize, l as usize) * integer(sign);
            let term = partials[k as usize]
                .total_derivative_n((k - l) as usize)
                .scale(&c);
            residual = &residual - &term;
        }
        residuals.insert(l, residual);
    }
    let passed = residuals.values().all(DiffPoly::is_zero);
    HelmholtzReport { residuals, passed }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangianResult {
    pub lagrangian: DiffPoly,
    /// Whether `δ(lagrangian) = D` holds exactly.
    pub verified: bool,
}

impl LagrangianResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lagrangian": self.lagrangian.to_string(),
            "verified": self.verified,
        })
    }
}

/// `x0 · ∫_0^1 D(z, t x0, t x1, ...) dt`, integrated monomial by monomial.
pub fn vainberg_tonti(d: &DiffPoly) -> LagrangianResult {
    let integrated = d.scale_dependent().integrate_unit_interval();
    let lagrangian = &DiffPoly::jet(0) * &integrated;
    let verified = lagrangian.variational_derivative() == *d;
    LagrangianResult {
        lagrangian,
        verified,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariationalVerdict {
    pub variational: bool,
    pub helmholtz: HelmholtzReport,
    pub reconstruction: LagrangianResult,
}

/// Decides whether `D = δA` for some `A`, requiring the Helmholtz residuals
/// and the constructive reconstruction to agree.
pub fn is_variational(d: &DiffPoly) -> Result<VariationalVerdict> {
    let helmholtz = helmholtz_check(d);
    let reconstruction = vainberg_tonti(d);
    if helmholtz.passed != reconstruction.verified {
        return Err(Error::InternalInconsistency {
            helmholtz_passed: helmholtz.passed,
            reconstruction_verified: reconstruction.verified,
        });
    }
    Ok(VariationalVerdict {
        variational: helmholtz.passed,
        helmholtz,
        reconstruction,
    })
}

/// Whether `D` lies in the image of the total derivative.
pub fn is_total_derivative(d: &DiffPoly) -> bool {
    let residue = d
        .x_free_part()
        .residue()
        .expect("differential polynomial coefficients are exact");
    d.variational_derivative().is_zero() && residue.is_zero()
}

pub fn equivalent_mod_total_derivative(p: &DiffPoly, q: &DiffPoly) -> bool {
    is_total_derivative(&(p - q))
}

/// `(1/2) Σ_i a_i x0 x_i`, whose critical locus is `L y = 0` when `L` is self-adjoint.
pub fn quadratic_action(l: &LinOp) -> Result<DiffPoly> {
    let half = rational(1, 2);
    let mut out = DiffPoly::zero();
    for (i, a) in l.coeffs().iter().enumerate() {
        let mono = JetMonomial::from_exponents([(0, 1), (i as u32, 1)]);
        out = &out + &DiffPoly::from_series(a.scale(&half), mono)?;
    }
    Ok(out)
}
