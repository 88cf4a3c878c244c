//! Symbolic-numeric evaluation of index formulas on moduli of principal
//! bundles over a curve.
//!
//! The crate is organised bottom-up:
//!
//! * [`liealg`]: root systems, Weyl groups, torus points, flag Poincaré polynomials.
//! * [`charfun`]: virtual characters and their derivatives on the torus.
//! * [`series`]: truncated multivariate power series with complex coefficients.
//! * [`snf`]: Smith normal form and lattice coset enumeration.
//! * [`levels`]: levels, Verlinde point sets, Verlinde numbers, fusion oracle.
//! * [`deform`]: formal deformation of Verlinde points.
//! * [`index`]: index formulas for even and odd Atiyah–Bott classes.
//! * [`kaehler`]: Kähler-differential index, continuation to `t = -1`.
//! * [`witten`]: large-level asymptotics for `SL(2)`.
//! * [`cli`]: configuration and tabular output for the `verlinde` binary.

pub mod charfun;
mod dd;
pub mod cli;
pub mod deform;
pub mod error;
pub mod index;
pub mod kaehler;
pub mod levels;
pub mod liealg;
pub mod linalg;
pub mod series;
pub mod snf;
pub mod witten;

pub use error::{Error, Result};

pub use num_complex::Complex64;
pub use num_rational::Rational64;
