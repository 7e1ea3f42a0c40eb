//! Exact variational calculus for one differential equation on the formal
//! punctured disc.
//!
//! Equations are elements of the differential polynomial ring over
//! `Q((z))`. The crate decides whether an equation is an Euler–Lagrange
//! equation (Helmholtz conditions), reconstructs a Lagrangian when it is
//! (Vainberg–Tonti), computes formal adjoints under the residue pairing,
//! linearises at solutions, and checks the coefficient-symmetry form of the
//! `(-1)`-symplectic closedness conditions on a truncated loop space.

pub mod battery;
pub mod diffpoly;
pub mod error;
pub mod frontend;
pub mod laurent;
pub mod linops;
pub mod loopspace;
pub mod varcalc;

pub use diffpoly::{DiffPoly, JetMonomial};
pub use error::{Error, Result};
pub use laurent::{LaurentSeries, Precision, Rational, Verdict};
pub use linops::{CohomologyDims, LinOp, Space};
pub use loopspace::{LoopPoly, Window};
