use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// A function that must vanish at x = 0 and x = 1 does not.
    #[error("boundary violation: {what} is {left} at x=0 and {right} at x=1, both must be 0")]
    BoundaryViolation {
        what: &'static str,
        left: f64,
        right: f64,
    },

    /// The fine Brownian grid cannot be coarsened onto the requested partition.
    #[error(
        "fine grid of {fine_n} steps is not divisible by n+1 = {cells}; try --fine {suggested}"
    )]
    Divisibility {
        fine_n: usize,
        cells: usize,
        suggested: usize,
    },

    #[error(
        "unstable time step dt = {dt}: explicit Euler requires dt <= dx^2/(2 beta) = {max_dt}"
    )]
    Unstable { dt: f64, max_dt: f64 },

    #[error("matrix is not symmetric: |M[{row}][{col}] - M[{col}][{row}]| = {asymmetry:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        asymmetry: f64,
    },

    /// Cholesky failed; for Gram matrices this means the trial basis is
    /// degenerate when sampled on the current grid.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("index range {lo}..={hi} is invalid for a matrix of size {size}")]
    InvalidRange { lo: usize, hi: usize, size: usize },
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}
