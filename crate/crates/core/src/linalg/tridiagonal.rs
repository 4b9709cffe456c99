use rayon::prelude::*;

use super::ddouble::DD;
use super::SpectrumResult;
use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix; the off-diagonal band is stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidArgument("matrix must have n >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::LengthMismatch {
                what: "off-diagonal",
                expected: diag.len() - 1,
                found: offdiag.len(),
            });
        }
        Ok(SymTridiagonal { diag, offdiag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn negated(&self) -> Self {
        SymTridiagonal {
            diag: self.diag.iter().map(|a| -a).collect(),
            offdiag: self.offdiag.iter().map(|b| -b).collect(),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n, "vector length must match matrix size");
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.offdiag[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `‖T‖∞`, the largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n())
            .map(|i| self.diag[i].abs() + self.radius(i))
            .fold(0.0, f64::max)
    }

    fn radius(&self, i: usize) -> f64 {
        let left = if i > 0 {
            self.offdiag[i - 1].abs()
        } else {
            0.0
        };
        let right = self.offdiag.get(i).map_or(0.0, |b| b.abs());
        left + right
    }
}

/// Interval `[lo, hi]` containing every eigenvalue (Gershgorin discs).
pub fn gershgorin_bounds(t: &SymTridiagonal) -> (f64, f64) {
    (0..t.n()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let r = t.radius(i);
        (lo.min(t.diag[i] - r), hi.max(t.diag[i] + r))
    })
}

/// Number of eigenvalues strictly below `shift`.
///
/// Counts negative pivots of `T − shift·I = LDLᵀ`. The pivots are carried
/// in double-double precision; an exactly zero pivot is replaced by
/// `+ε·‖T‖∞`, so a shift sitting exactly on an eigenvalue does not count it.
pub fn sturm_count(t: &SymTridiagonal, shift: f64) -> usize {
    let scale = t.inf_norm().max(f64::MIN_POSITIVE);
    count_below(t, shift, f64::EPSILON * scale)
}

fn count_below(t: &SymTridiagonal, shift: f64, zero_pivot: f64) -> usize {
    let mut count = 0;
    let mut d = DD::diff(t.diag[0], shift);
    for i in 0..t.n() {
        if i > 0 {
            let q = DD::square(t.offdiag[i - 1]).div(d);
            d = DD::diff(t.diag[i], shift).sub(q);
        }
        if d.hi == 0.0 {
            d = DD::new(zero_pivot);
        }
        if d.hi < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues `λ_{k_lo} ≤ … ≤ λ_{k_hi}` (1-based, ascending) by Sturm
/// bisection, each bracket refined until narrower than `tol`.
///
/// Each index is bracketed independently, so coincident eigenvalues
/// simply converge to the same value. Brackets stop shrinking early if
/// their midpoint is no longer representable between the endpoints.
pub fn eigen_bisect(
    t: &SymTridiagonal,
    k_lo: usize,
    k_hi: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    let n = t.n();
    if k_lo == 0 || k_lo > k_hi || k_hi > n {
        return Err(Error::InvalidRange {
            lo: k_lo,
            hi: k_hi,
            size: n,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be > 0, got {tol}"
        )));
    }

    let scale = t.inf_norm().max(f64::MIN_POSITIVE);
    let zero_pivot = f64::EPSILON * scale;
    let (glo, ghi) = gershgorin_bounds(t);
    let pad = 2.0 * f64::EPSILON * scale + f64::MIN_POSITIVE;
    let (glo, ghi) = (glo - pad, ghi + pad);

    let solve = |k: usize| -> (f64, f64) {
        let (mut lo, mut hi) = (glo, ghi);
        while hi - lo >= tol {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(t, mid, zero_pivot) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi), hi - lo)
    };

    let ks: Vec<usize> = (k_lo..=k_hi).collect();
    // parallel only when there is enough work to amortize the pool
    let solved: Vec<(f64, f64)> = if n * ks.len() >= 1 << 15 {
        ks.par_iter().map(|&k| solve(k)).collect()
    } else {
        ks.iter().map(|&k| solve(k)).collect()
    };

    Ok(SpectrumResult {
        tolerance_achieved: solved.iter().map(|s| s.1).fold(0.0, f64::max),
        eigenvalues: solved.into_iter().map(|s| s.0).collect(),
        size: n,
    })
}
