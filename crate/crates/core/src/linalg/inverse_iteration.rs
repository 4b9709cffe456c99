//! Eigenvector recovery for residual checks; not part of the solver API.

use super::SymTridiagonal;

/// Unit eigenvector of `t` for the (already accurate) eigenvalue `lambda`,
/// by a few steps of shifted inverse iteration with a dense
/// partial-pivoting LU. Intended for modest `n`.
pub fn inverse_iteration(t: &SymTridiagonal, lambda: f64) -> Vec<f64> {
    let n = t.n();
    let norm = t.inf_norm().max(f64::MIN_POSITIVE);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = t.diag()[i] - lambda;
        if i + 1 < n {
            a[i * n + i + 1] = t.offdiag()[i];
            a[(i + 1) * n + i] = t.offdiag()[i];
        }
    }

    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .unwrap();
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            perm.swap(col, piv);
        }
        if a[col * n + col].abs() < f64::EPSILON * norm {
            a[col * n + col] = f64::EPSILON * norm;
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            a[r * n + col] = f;
            for j in col + 1..n {
                a[r * n + j] -= f * a[col * n + j];
            }
        }
    }

    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.37 * ((i as f64) * 1.3).sin())
        .collect();
    for _ in 0..4 {
        let mut y: Vec<f64> = perm.iter().map(|&p| x[p]).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= a[i * n + k] * y[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= a[i * n + k] * y[k];
            }
            y[i] /= a[i * n + i];
        }
        let s = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / s).collect();
    }
    x
}
