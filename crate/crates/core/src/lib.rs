//! Dirichlet spectra of `-y'' + q y` on `[0, pi]` for distributional
//! potentials `q = u'` with complex `u` in `L2`.
//!
//! The crate computes eigenvalues, normalized eigenfunctions and the
//! biorthogonal system, evaluates the two-term asymptotic formulas for all of
//! them, and measures the remainders.

pub mod eigenfunctions;
pub mod error;
pub mod odesolve;
pub mod oscint;
pub mod potential;
pub mod spectrum;
mod quad;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::{Catalogue, PotentialPrimitive, Segment};
