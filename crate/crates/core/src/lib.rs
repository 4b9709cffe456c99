//! Numerical laboratory for the random tridiagonal matrix
//!
//! ```text
//! A_n = β(n+1)²·tridiag(1, −2, 1) + diag(√(n+1)·ξ_i),   ξ_i ~ N(0, 1) i.i.d.
//! ```
//!
//! which discretizes the random Schrödinger operator `L = β d²/dx² + b′` on
//! `[0, 1]` with Dirichlet boundaries. The crate computes the spectrum of
//! `A_n`, the variational (min-max) characterizations of the same spectrum
//! in discrete and continuum form, and Monte Carlo studies of how the
//! eigenvalues converge as the mesh is refined.
//!
//! Module map:
//!
//! * [`grid`]: uniform partitions and the step / piecewise-linear projections.
//! * [`noise`]: seedable Gaussian streams, Brownian paths, coupled increments.
//! * [`linalg`]: Sturm bisection, cyclic Jacobi, generalized eigenproblems.
//! * [`operator`]: matrix assembly, weak forms, the heat-equation stepper.
//! * [`variational`]: the discrete and continuum quadratic functionals,
//!   Gram matrices, Rayleigh–Ritz and discrete min-max.
//! * [`stats`]: ensembles, KS distances, quantiles and convergence reports.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod linalg;
pub mod noise;
pub mod operator;
pub mod stats;
pub mod variational;

pub use error::{Error, Result};
