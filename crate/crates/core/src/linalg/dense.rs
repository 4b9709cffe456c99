use super::SpectrumResult;
use crate::error::{Error, Result};

/// Largest tolerated asymmetry, relative to the largest entry.
const SYMMETRY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Dense symmetric `m×m` matrix in row-major storage.
///
/// Construction symmetrizes exactly, so `entry(i, j) == entry(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    m: usize,
    data: Vec<f64>,
}

impl DenseSymmetric {
    /// Builds from row-major entries, rejecting asymmetry beyond 1e-12
    /// (relative to the largest entry).
    pub fn new(m: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("matrix must have m >= 1".into()));
        }
        crate::error::check_len("dense entries", m * m, data.len())?;
        let scale = data.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        let mut data = data;
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (data[i * m + j], data[j * m + i]);
                let asymmetry = (a - b).abs();
                if asymmetry > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        asymmetry,
                    });
                }
                let avg = 0.5 * (a + b);
                data[i * m + j] = avg;
                data[j * m + i] = avg;
            }
        }
        Ok(DenseSymmetric { m, data })
    }

    /// Evaluates `f(i, j)` on the upper triangle and mirrors it.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(m: usize, mut f: F) -> Self {
        assert!(m >= 1, "matrix must have m >= 1");
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = f(i, j);
                data[i * m + j] = v;
                data[j * m + i] = v;
            }
        }
        DenseSymmetric { m, data }
    }

    pub fn identity(m: usize) -> Self {
        Self::from_fn(m, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        DenseSymmetric {
            m: self.m,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `max_{ij} |M_ij − δ_ij|`.
    pub fn max_deviation_from_identity(&self) -> f64 {
        let m = self.m;
        (0..m * m)
            .map(|idx| {
                let id = if idx / m == idx % m { 1.0 } else { 0.0 };
                (self.data[idx] - id).abs()
            })
            .fold(0.0, f64::max)
    }

    fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn off_norm(a: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            s += a[i * m + j] * a[i * m + j];
        }
    }
    (2.0 * s).sqrt()
}

/// All eigenvalues by cyclic Jacobi rotations, ascending.
///
/// Sweeps stop once the off-diagonal Frobenius mass drops below `tol`, or
/// below `4ε‖M‖_F` when `tol` is finer than the matrix can resolve.
pub fn eigen_dense(mat: &DenseSymmetric, tol: f64) -> Result<SpectrumResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let m = mat.m;
    let mut a = mat.data.clone();
    let floor = 4.0 * f64::EPSILON * mat.frobenius();
    let target = tol.max(floor);

    let mut off = off_norm(&a, m);
    let mut sweeps = 0;
    while off >= target && sweeps < MAX_SWEEPS {
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * m + p], a[q * m + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * m + p] = app - t * apq;
                a[q * m + q] = aqq + t * apq;
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;
                for r in 0..m {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[r * m + p];
                    let h = a[r * m + q];
                    let rp = g - s * (h + g * tau);
                    let rq = h + s * (g - h * tau);
                    a[r * m + p] = rp;
                    a[p * m + r] = rp;
                    a[r * m + q] = rq;
                    a[q * m + r] = rq;
                }
            }
        }
        off = off_norm(&a, m);
        sweeps += 1;
    }

    let mut eigenvalues: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumResult {
        eigenvalues,
        tolerance_achieved: off,
        size: m,
    })
}

/// Lower-triangular Cholesky factor `L` of `G = LLᵀ`, row-major.
///
/// Pivots at or below `m·ε·max_i G_ii` count as failure.
pub fn cholesky(g: &DenseSymmetric) -> Result<Vec<f64>> {
    let m = g.m;
    let max_diag = (0..m).map(|i| g.get(i, i)).fold(0.0, f64::max);
    let floor = m as f64 * f64::EPSILON * max_diag;
    let mut l = vec![0.0; m * m];
    for j in 0..m {
        let mut d = g.get(j, j);
        for k in 0..j {
            d -= l[j * m + k] * l[j * m + k];
        }
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[j * m + j] = d;
        for i in j + 1..m {
            let mut s = g.get(i, j);
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L X = B` in place for all columns of the row-major `m×m` `B`.
fn forward_substitute(l: &[f64], b: &mut [f64], m: usize) {
    for col in 0..m {
        for i in 0..m {
            let mut s = b[i * m + col];
            for k in 0..i {
                s -= l[i * m + k] * b[k * m + col];
            }
            b[i * m + col] = s / l[i * m + i];
        }
    }
}

/// Eigenvalues of the pencil `Qv = λGv` with `G` symmetric positive
/// definite: `G = LLᵀ`, then Jacobi on `L⁻¹QL⁻ᵀ`.
pub fn eigen_generalized(
    q: &DenseSymmetric,
    g: &DenseSymmetric,
    tol: f64,
) -> Result<SpectrumResult> {
    let m = q.m;
    crate::error::check_len("generalized pencil", m, g.m)?;
    let l = cholesky(g)?;

    // W = L⁻¹Q, then C = L⁻¹Wᵀ = L⁻¹QL⁻ᵀ
    let mut w = q.data.clone();
    forward_substitute(&l, &mut w, m);
    let mut c: Vec<f64> = (0..m * m).map(|idx| w[(idx % m) * m + idx / m]).collect();
    forward_substitute(&l, &mut c, m);

    let reduced = DenseSymmetric::from_fn(m, |i, j| 0.5 * (c[i * m + j] + c[j * m + i]));
    eigen_dense(&reduced, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn jacobi_examples() {
        let r = eigen_dense(&DenseSymmetric::identity(3), 1e-12).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0, 1.0, 1.0]);

        let r = eigen_dense(&DenseSymmetric::diagonal(&[4.0 * PI * PI, PI * PI]), 1e-12).unwrap();
        assert_eq!(r.eigenvalues, vec![PI * PI, 4.0 * PI * PI]);

        let swap = DenseSymmetric::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = eigen_dense(&swap, 1e-12).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn asymmetric_input_rejected() {
        assert!(matches!(
            DenseSymmetric::new(2, vec![1.0, 2.0, 2.1, 1.0]),
            Err(Error::NotSymmetric { .. })
        ));
        let ok = DenseSymmetric::new(2, vec![1.0, 2.0, 2.0 + 1e-15, 1.0]).unwrap();
        assert_eq!(ok.get(0, 1), ok.get(1, 0));
    }

    #[test]
    fn jacobi_trace_and_frobenius_preserved() {
        let m = 12;
        let a = DenseSymmetric::from_fn(m, |i, j| {
            ((i * 7 + j * 3) as f64).sin() + (i == j) as u8 as f64
        });
        let r = eigen_dense(&a, 1e-13).unwrap();
        let trace: f64 = (0..m).map(|i| a.get(i, i)).sum();
        let sum: f64 = r.eigenvalues.iter().sum();
        assert!((trace - sum).abs() < 1e-12);
        let fro2: f64 = a.as_slice().iter().map(|v| v * v).sum();
        let sq: f64 = r.eigenvalues.iter().map(|v| v * v).sum();
        assert!((fro2 - sq).abs() < 1e-11);
        assert!(r.tolerance_achieved < 1e-13);
    }

    #[test]
    fn generalized_examples() {
        let q = DenseSymmetric::from_fn(4, |i, j| 1.0 / (1 + i + j) as f64 + (i == j) as u8 as f64);
        let plain = eigen_dense(&q, 1e-13).unwrap();
        let gen = eigen_generalized(&q, &DenseSymmetric::identity(4), 1e-13).unwrap();
        for (a, b) in plain.eigenvalues.iter().zip(&gen.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }

        let g = DenseSymmetric::from_fn(3, |i, j| {
            if i == j {
                3.0
            } else {
                0.5 / (1 + i + j) as f64
            }
        });
        let r = eigen_generalized(&g.scaled(2.0), &g, 1e-13).unwrap();
        for v in r.eigenvalues {
            assert!((v - 2.0).abs() < 1e-12);
        }

        let q = DenseSymmetric::diagonal(&[1.0, 4.0]);
        let g = DenseSymmetric::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            eigen_generalized(&q, &g, 1e-12),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn cholesky_reconstructs() {
        let g = DenseSymmetric::from_fn(5, |i, j| {
            if i == j {
                4.0
            } else {
                1.0 / (1 + i + j) as f64
            }
        });
        let l = cholesky(&g).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let s: f64 = (0..5).map(|k| l[i * 5 + k] * l[j * 5 + k]).sum();
                assert!((s - g.get(i, j)).abs() < 1e-14);
            }
        }
    }
}
