//! One-dimensional fractional Poisson analysis.
//!
//! The crate implements the computational side of the analysis built on
//! the fractional Poisson measure: Mittag-Leffler evaluation, the measure
//! itself with its moment calculus, the (generalized) Appell polynomial
//! system and its biorthogonal dual, Hilbert-norm diagnostics for the
//! associated test/generalized function spaces, the S- and C-transforms,
//! and Wick algebra on coefficient expansions. Every identity the theory
//! provides is exposed as a checkable operation with explicit tolerances.

#![forbid(unsafe_code)]

mod bigfloat;
mod error;
mod gamma;

pub mod appell_system;
pub mod combinatorics;
pub mod measure;
pub mod mittag_leffler;
pub mod polynomials;
pub mod spaces;
pub mod transforms;
pub mod wick;

pub use error::{Error, Result};
pub use measure::{FpmParams, MomentCache};
pub use mittag_leffler::MlConfig;



