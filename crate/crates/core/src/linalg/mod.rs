//! Eigenvalue solvers.
//!
//! [`eigen_bisect`] (Sturm-sequence bisection on a [`SymTridiagonal`]) is
//! the workhorse for the large matrices; [`eigen_dense`] (cyclic Jacobi)
//! serves as its reference oracle and solves the small Ritz and Gram
//! problems, and [`eigen_generalized`] reduces `Qv = λGv` to the standard
//! form through a Cholesky factor of `G`.

mod ddouble;
mod dense;
#[cfg(any(test, feature = "test-support"))]
mod inverse_iteration;
mod tridiagonal;

pub use dense::{cholesky, eigen_dense, eigen_generalized, DenseSymmetric};
#[cfg(any(test, feature = "test-support"))]
pub use inverse_iteration::inverse_iteration;
pub use tridiagonal::{eigen_bisect, gershgorin_bounds, sturm_count, SymTridiagonal};

/// Eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Largest final bracket width (bisection) or residual off-diagonal
    /// Frobenius mass (Jacobi).
    pub tolerance_achieved: f64,
    /// Dimension of the matrix the values came from.
    pub size: usize,
}
