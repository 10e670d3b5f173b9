//! Steady states of a two-dimensional nonnecrotic tumor-growth free
//! boundary model: the radial equilibrium, the Fourier-multiplier
//! spectrum of its boundary linearization, the catalog of bifurcation
//! values of the relative mitosis rate G, and the non-radial solution
//! branches that emanate from them.
//!
//! Pipeline:
//!
//! 1. [`radial`] shoots the radially symmetric equilibrium (radius
//!    `R_A`, scaled nutrient profile `v0`).
//! 2. [`modes`] integrates the singular ODE family whose boundary data
//!    feed the linearization symbol.
//! 3. [`spectrum`] evaluates the symbol, locates its roots `G_k`, and
//!    assembles the bifurcation catalog.
//! 4. [`field`] solves the two Dirichlet problems on a perturbed
//!    star-shaped domain and assembles the nonlinear boundary operator
//!    Phi(G, rho) by Fourier x Chebyshev collocation.
//! 5. [`continuation`] traces nontrivial solution branches of
//!    Phi(G, rho) = 0 by amplitude continuation with a Newton
//!    corrector.
//!
//! The `growthbif` binary exposes the pipeline as subcommands; see the
//! repository README.

// `!(x > 0.0)` guards below deliberately reject NaN as well; the
// positive-comparison form clippy prefers would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod checks;
pub mod cli;
pub mod config;
pub mod continuation;
pub mod error;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod model;
pub mod modes;
pub mod ode;
pub mod radial;
pub mod report;
pub mod spectrum;
pub mod svg;

pub use error::{Error, Result};
pub use model::{ModelParams, NutrientFn};
pub use radial::RadialEquilibrium;
