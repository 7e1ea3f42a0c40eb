//! Seeded random generators for identity batteries.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::diffpoly::{DiffPoly, JetMonomial};
use crate::laurent::{rational, LaurentSeries, Rational};
use crate::linops::LinOp;

pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Shape of random differential polynomials.
#[derive(Clone, Copy, Debug)]
pub struct PolyShape {
    pub max_order: u32,
    pub max_degree: u32,
    /// Inclusive range of z-exponents in coefficients.
    pub z_range: (i64, i64),
    pub max_terms: usize,
}

impl Default for PolyShape {
    fn default() -> Self {
        PolyShape {
            max_order: 3,
            max_degree: 3,
            z_range: (-3, 3),
            max_terms: 4,
        }
    }
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let num = loop {
        let n = rng.gen_range(-5i64..=5);
        if n != 0 {
            break n;
        }
    };
    rational(num, rng.gen_range(1i64..=3))
}

/// Laurent polynomial with up to `max_terms` terms.
pub fn random_laurent<R: Rng>(rng: &mut R, z_range: (i64, i64), max_terms: usize) -> LaurentSeries {
    let n = rng.gen_range(1..=max_terms.max(1));
    LaurentSeries::new(
        (0..n)
            .map(|_| (rng.gen_range(z_range.0..=z_range.1), random_rational(rng)))
            .collect::<Vec<_>>(),
    )
}

pub fn random_monomial<R: Rng>(rng: &mut R, max_order: u32, max_degree: u32) -> JetMonomial {
    let degree = rng.gen_range(0..=max_degree);
    JetMonomial::from_exponents((0..degree).map(|_| (rng.gen_range(0..=max_order), 1)))
}

pub fn random_diffpoly<R: Rng>(rng: &mut R, shape: PolyShape) -> DiffPoly {
    let n = rng.gen_range(1..=shape.max_terms.max(1));
    (0..n).fold(DiffPoly::zero(), |acc, _| {
        let mono = random_monomial(rng, shape.max_order, shape.max_degree);
        let c = random_laurent(rng, shape.z_range, 2);
        &acc + &DiffPoly::from_series(c, mono).expect("exact")
    })
}

pub fn random_linop<R: Rng>(rng: &mut R, max_order: usize, z_range: (i64, i64)) -> LinOp {
    let order = rng.gen_range(0..=max_order);
    LinOp::new(
        (0..=order)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    LaurentSeries::zero()
                } else {
                    random_laurent(rng, z_range, 3)
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_reproducible() {
        let a = random_diffpoly(&mut rng(7), PolyShape::default());
        let b = random_diffpoly(&mut rng(7), PolyShape::default());
        assert_eq!(a, b);
        let shape = PolyShape {
            max_order: 2,
            max_degree: 2,
            z_range: (-1, 1),
            max_terms: 3,
        };
        let mut r = rng(1);
        for _ in 0..50 {
            let p = random_diffpoly(&mut r, shape);
            assert!(p.order().unwrap_or(0) <= 2 && p.xdegree() <= 2);
            let (lo, hi) = p.z_support().unwrap_or((0, 0));
            assert!(lo >= -1 && hi <= 1);
        }
    }
}
