use thiserror::Error;

use crate::laurent::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient precision: coefficient of z^{exponent} is unknown (series known below z^{known_below})")]
    InsufficientPrecision { exponent: i64, known_below: i64 },

    #[error("z^-1 term with coefficient {residue} cannot be integrated")]
    NonIntegrable { residue: Rational },

    #[error("coefficient must be an exact Laurent polynomial")]
    InexactCoefficient,

    #[error("window [{low}, {high}] leaves no exact coefficients (exact range would be [{exact_low}, {exact_high}])")]
    EmptyExactRange {
        low: i64,
        high: i64,
        exact_low: i64,
        exact_high: i64,
    },

    #[error("invalid window [{low}, {high}]: {reason}")]
    InvalidWindow {
        low: i64,
        high: i64,
        reason: &'static str,
    },

    #[error("loop variable y_{index} lies outside the window [{low}, {high}]")]
    IndexOutOfWindow { index: i64, low: i64, high: i64 },

    #[error("coefficient D_{exponent} is outside the exact range [{exact_low}, {exact_high}]")]
    OutsideExactRange {
        exponent: i64,
        exact_low: i64,
        exact_high: i64,
    },

    #[error("operation requires order <= {max}, got order {found}")]
    OrderTooHigh { max: u32, found: u32 },

    #[error("expected a linear differential polynomial, found a term of degree {degree}")]
    NotLinear { degree: u32 },

    #[error("operator does not preserve k[[z]]: coefficient of d^{order} has a term z^{exponent}")]
    NotDiscOperator { order: usize, exponent: i64 },

    #[error("Helmholtz residuals and the Vainberg-Tonti reconstruction disagree (helmholtz passed: {helmholtz_passed}, reconstruction verified: {reconstruction_verified})")]
    InternalInconsistency {
        helmholtz_passed: bool,
        reconstruction_verified: bool,
    },

    #[error(transparent)]
    Parse(#[from] crate::frontend::parse::ParseError),
}
