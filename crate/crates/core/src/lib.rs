//! Equilibrium problems for the elliptic Ginibre ensemble with a point charge:
//! droplets, Cauchy and logarithmic transforms, variational certificates,
//! Fekete configurations and the Hermitian limit.
// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fekete;
pub mod geometry;
pub mod hermitian;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod transforms;
pub mod variational;

pub use error::{Error, Result};
pub use potential::{ComplexPoint, ModelParams, PotentialKind, Symmetry};
