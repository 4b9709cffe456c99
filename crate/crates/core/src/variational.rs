//! Discrete and continuum quadratic functionals and their min-max values.
//!
//! For a grid function `g` with `g_0 = g_{n+1} = 0` and noise `X`,
//!
//! ```text
//! F_n(g) = Σ_{i=0}^{n} ((g_{i+1} − g_i)/dx)² dx + Σ_{i=1}^{n} g_i² X_i
//! ```
//!
//! is exactly the Rayleigh quotient of `−A_n(−X)` at `v = √dx·g`, so its
//! min-max over k-dimensional subspaces under `Σ g_i² dx = 1` is the k-th
//! eigenvalue of that matrix. The continuum counterpart is
//! `F(g) = ∫(g′)² dx + ∫g² dB`, whose min-max is the spectrum of `−d²/dx² + b′`.
//!
//! Trial subspaces are always spans of the first `m` members of a
//! [`TrialBasis`]; the min-max then becomes a (generalized) symmetric
//! eigenproblem for the coefficient vector `α`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{check_len, Error, Result};
use crate::grid::{check_boundary, Partition};
use crate::linalg::{eigen_dense, eigen_generalized, DenseSymmetric, SpectrumResult};
use crate::noise::{ito_sum, BrownianPath, NoiseIncrements};
use crate::operator::OperatorParams;

/// How the boundary cells enter `F_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// Difference sum over all `n + 1` cells, no extra terms. Exact
    /// Rayleigh quotient of the matrix at every `n`.
    #[default]
    Symmetric,
    /// Difference sum over `i = 1..n` plus the two printed boundary terms
    /// `(g_1 − g_0)g_1/dx + (g_{n+1} − g_n)g_n/dx`. Differs from
    /// `Symmetric` by `g_n²/dx`, which vanishes as the mesh refines.
    BoundaryTerms,
}

/// `F_n(g)` for node values `g_0..g_{n+1}` and noise `X_1..X_n`.
pub fn f_discrete(g: &[f64], noise: &NoiseIncrements, convention: Convention) -> Result<f64> {
    let n = noise.n();
    check_len("grid function nodes", n + 2, g.len())?;
    check_boundary("g", g)?;
    let dx = noise.dx();
    let diff = |i: usize| (g[i + 1] - g[i]) / dx;
    let potential: f64 = g[1..=n]
        .iter()
        .zip(noise.values())
        .map(|(g, x)| g * g * x)
        .sum();
    Ok(match convention {
        Convention::Symmetric => (0..=n).map(|i| diff(i).powi(2)).sum::<f64>() * dx + potential,
        Convention::BoundaryTerms => {
            (1..=n).map(|i| diff(i).powi(2)).sum::<f64>() * dx
                + potential
                + diff(0) * g[1]
                + diff(n) * g[n]
        }
    })
}

/// `F(g) = ∫(g′)² dx + ∫g² dB`: left-endpoint quadrature plus Itô sum,
/// with `g` and `g′` given at `t_0..t_{fine_n}`.
pub fn f_continuum(g: &[f64], dg: &[f64], path: &BrownianPath) -> Result<f64> {
    let fine = path.fine_n();
    check_len("g samples", fine + 1, g.len())?;
    check_len("g' samples", fine + 1, dg.len())?;
    check_boundary("g", g)?;
    let energy = dg[..fine].iter().map(|d| d * d).sum::<f64>() * path.dt();
    let g2: Vec<f64> = g[..fine].iter().map(|v| v * v).collect();
    Ok(energy + ito_sum(&g2, path)?)
}

/// Coefficients `α` of `g = Σ α_j e_j` in a trial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialCoefficients {
    pub alpha: Vec<f64>,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    /// `‖g‖₂ = 1`.
    L2,
    /// `Σ_{i=1}^{n} g(x_i)² dx = 1` on the given partition size.
    Discrete {
        n: usize,
    },
}

impl TrialCoefficients {
    pub fn new(alpha: Vec<f64>) -> Self {
        TrialCoefficients {
            alpha,
            normalization: Normalization::None,
        }
    }

    /// Rescales so that `αᵀGα = 1`, with `G` the Gram matrix of the
    /// basis on `partition`. For an orthonormal basis this maps the unit
    /// sphere of `α` onto the discrete unit sphere of `g`.
    pub fn normalize_discrete(&self, basis: &TrialBasis, partition: &Partition) -> Result<Self> {
        let k = self.alpha.len();
        let g = gram_matrix(basis, k, partition)?;
        let q: f64 = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| self.alpha[i] * g.get(i, j) * self.alpha[j])
            .sum();
        if !(q > 0.0) {
            return Err(Error::InvalidArgument("g vanishes on the grid".into()));
        }
        let s = q.sqrt();
        Ok(TrialCoefficients {
            alpha: self.alpha.iter().map(|a| a / s).collect(),
            normalization: Normalization::Discrete { n: partition.n() },
        })
    }

    /// Node values `g(x_0)..g(x_{n+1})`.
    pub fn nodes(&self, basis: &TrialBasis, partition: &Partition) -> Vec<f64> {
        partition.sample(|x| {
            self.alpha
                .iter()
                .enumerate()
                .map(|(j, a)| a * basis.value(j, x))
                .sum()
        })
    }
}

/// Trial functions in `H₁`, vanishing at 0 and 1. Index `j` is 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialBasis {
    /// `e_j(x) = √2 sin((j+1)πx)`, orthonormal in `L²`.
    Sine { m: usize },
    /// Orthonormalized `x(1−x)·x^j` polynomials, stored as monomial
    /// coefficients (lowest degree first).
    Polynomial { coeffs: Vec<Vec<f64>> },
    /// Functions given by values and derivatives at `t_j = j/fine_n`;
    /// evaluation interpolates linearly between fine nodes.
    Sampled {
        values: Vec<Vec<f64>>,
        derivatives: Vec<Vec<f64>>,
    },
}

impl TrialBasis {
    pub fn sine(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("basis needs m >= 1".into()));
        }
        Ok(TrialBasis::Sine { m })
    }

    /// The first `m` members of `x(1−x), x²(1−x), …`, Gram–Schmidt
    /// orthonormalized with exact monomial moments `∫x^p = 1/(p+1)`.
    pub fn polynomial(m: usize) -> Result<Self> {
        if m == 0 || m > 8 {
            return Err(Error::InvalidArgument(format!(
                "polynomial basis supports 1..=8 members, got {m}"
            )));
        }
        let inner = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    s += x * y / (i + j + 1) as f64;
                }
            }
            s
        };
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(m);
        for j in 0..m {
            // x^{j+1} − x^{j+2}
            let mut p = vec![0.0; m + 2];
            p[j + 1] = 1.0;
            p[j + 2] = -1.0;
            for _ in 0..2 {
                for q in &out {
                    let c = inner(&p, q);
                    for (pi, qi) in p.iter_mut().zip(q) {
                        *pi -= c * qi;
                    }
                }
            }
            let norm = inner(&p, &p).sqrt();
            p.iter_mut().for_each(|c| *c /= norm);
            out.push(p);
        }
        Ok(TrialBasis::Polynomial { coeffs: out })
    }

    pub fn sampled(values: Vec<Vec<f64>>, derivatives: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("basis needs m >= 1".into()));
        }
        check_len("derivative arrays", values.len(), derivatives.len())?;
        let len = values[0].len();
        if len < 2 {
            return Err(Error::InvalidArgument(
                "sampled basis needs >= 2 nodes".into(),
            ));
        }
        for (v, d) in values.iter().zip(&derivatives) {
            check_len("sampled values", len, v.len())?;
            check_len("sampled derivatives", len, d.len())?;
            check_boundary("trial function", v)?;
        }
        Ok(TrialBasis::Sampled {
            values,
            derivatives,
        })
    }

    pub fn m(&self) -> usize {
        match self {
            TrialBasis::Sine { m } => *m,
            TrialBasis::Polynomial { coeffs } => coeffs.len(),
            TrialBasis::Sampled { values, .. } => values.len(),
        }
    }

    pub fn value(&self, j: usize, x: f64) -> f64 {
        match self {
            TrialBasis::Sine { .. } => SQRT_2 * ((j + 1) as f64 * PI * x).sin(),
            TrialBasis::Polynomial { coeffs } => horner(&coeffs[j], x),
            TrialBasis::Sampled { values, .. } => interp(&values[j], x),
        }
    }

    pub fn derivative(&self, j: usize, x: f64) -> f64 {
        match self {
            TrialBasis::Sine { .. } => {
                let w = (j + 1) as f64 * PI;
                SQRT_2 * w * (w * x).cos()
            }
            TrialBasis::Polynomial { coeffs } => {
                let d: Vec<f64> = coeffs[j]
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(p, c)| p as f64 * c)
                    .collect();
                horner(&d, x)
            }
            TrialBasis::Sampled { derivatives, .. } => interp(&derivatives[j], x),
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn interp(samples: &[f64], x: f64) -> f64 {
    let n = samples.len() - 1;
    let s = (x.clamp(0.0, 1.0)) * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let t = s - i as f64;
    samples[i] + t * (samples[i + 1] - samples[i])
}

/// `U_nU_nᵀ`: entry `(i, j) = Σ_{r=1}^{n} e_i(x_r) e_j(x_r) dx` for the
/// first `k` basis members.
pub fn gram_matrix(basis: &TrialBasis, k: usize, partition: &Partition) -> Result<DenseSymmetric> {
    if k == 0 || k > basis.m() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            basis.m()
        )));
    }
    let samples = sample_basis(basis, k, partition);
    let dx = partition.dx();
    Ok(DenseSymmetric::from_fn(k, |i, j| {
        (1..=partition.n())
            .map(|r| samples[i][r] * samples[j][r])
            .sum::<f64>()
            * dx
    }))
}

/// Values of the first `k` members at all `n + 2` partition points.
fn sample_basis(basis: &TrialBasis, k: usize, partition: &Partition) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| {
            let mut v = partition.sample(|x| basis.value(j, x));
            // the basis vanishes at the ends; drop round-off like sin(π)
            let last = v.len() - 1;
            v[0] = 0.0;
            v[last] = 0.0;
            v
        })
        .collect()
}

/// Rayleigh–Ritz estimates of the `k` lowest eigenvalues of `−d²/dx² + b′`
/// on the span of the first `m` sine modes:
/// `R_ij = δ_ij (iπ)² + Σ_t e_i(t) e_j(t) ΔB_t`.
///
/// The noise block uses `2 sin(aπt) sin(bπt) = cos((a−b)πt) − cos((a+b)πt)`,
/// so only `2m + 1` cosine sums over the fine grid are needed.
pub fn ritz_spectrum(m: usize, path: &BrownianPath, k: usize) -> Result<SpectrumResult> {
    check_ritz_range(m, k)?;
    let fine = path.fine_n();
    let increments: Vec<f64> = path.increments().collect();
    let cos_sums: Vec<f64> = (0..=2 * m)
        .map(|p| {
            let w = p as f64 * PI / fine as f64;
            increments
                .iter()
                .enumerate()
                .map(|(j, db)| (w * j as f64).cos() * db)
                .sum()
        })
        .collect();
    let r = DenseSymmetric::from_fn(m, |i, j| {
        let (a, b) = (i + 1, j + 1);
        let stiffness = if a == b { (a as f64 * PI).powi(2) } else { 0.0 };
        stiffness + cos_sums[a.abs_diff(b)] - cos_sums[a + b]
    });
    lowest(eigen_dense(&r, 1e-10)?, k)
}

/// Rayleigh–Ritz on an arbitrary basis: stiffness by left-endpoint
/// quadrature of `e_i′e_j′`, noise by Itô sums of `e_ie_j`, and the
/// `L²` Gram matrix by left-endpoint quadrature.
pub fn ritz_spectrum_basis(
    basis: &TrialBasis,
    path: &BrownianPath,
    k: usize,
) -> Result<SpectrumResult> {
    let m = basis.m();
    check_ritz_range(m, k)?;
    let fine = path.fine_n();
    let dt = path.dt();
    let t: Vec<f64> = (0..fine).map(|j| path.time(j)).collect();
    let vals: Vec<Vec<f64>> = (0..m)
        .map(|i| t.iter().map(|&x| basis.value(i, x)).collect())
        .collect();
    let ders: Vec<Vec<f64>> = (0..m)
        .map(|i| t.iter().map(|&x| basis.derivative(i, x)).collect())
        .collect();

    let mut entries = vec![0.0; m * m];
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let prod: Vec<f64> = vals[i].iter().zip(&vals[j]).map(|(a, b)| a * b).collect();
            let stiff: f64 = ders[i]
                .iter()
                .zip(&ders[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                * dt;
            let e = stiff + ito_sum(&prod, path)?;
            let g = prod.iter().sum::<f64>() * dt;
            entries[i * m + j] = e;
            entries[j * m + i] = e;
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    let q = DenseSymmetric::new(m, entries)?;
    let g = DenseSymmetric::new(m, gram)?;
    lowest(eigen_generalized(&q, &g, 1e-10)?, k)
}

fn check_ritz_range(m: usize, k: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= m, got k = {k}, m = {m}"
        )));
    }
    Ok(())
}

fn lowest(mut spec: SpectrumResult, k: usize) -> Result<SpectrumResult> {
    spec.eigenvalues.truncate(k);
    Ok(spec)
}

/// Min-max of `F_n` (symmetric convention, stiffness scaled by `β`) over
/// k-dimensional subspaces of the first `m` sine modes, under the
/// discrete constraint `Σ g(x_i)² dx = 1`: the `k` smallest eigenvalues
/// of `Qα = λGα`.
pub fn minmax_discrete(
    m: usize,
    params: &OperatorParams,
    noise: &NoiseIncrements,
    k: usize,
) -> Result<SpectrumResult> {
    minmax_discrete_basis(&TrialBasis::sine(m)?, params, noise, k)
}

pub fn minmax_discrete_basis(
    basis: &TrialBasis,
    params: &OperatorParams,
    noise: &NoiseIncrements,
    k: usize,
) -> Result<SpectrumResult> {
    let m = basis.m();
    let n = params.n();
    check_len("noise increments", n, noise.n())?;
    if k == 0 || k > m || m > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= m <= n, got k = {k}, m = {m}, n = {n}"
        )));
    }
    let partition = params.partition();
    let dx = partition.dx();
    let e = sample_basis(basis, m, partition);
    let x = noise.values();
    let beta = params.beta();
    let q = DenseSymmetric::from_fn(m, |i, j| {
        let stiffness: f64 = (0..=n)
            .map(|r| (e[i][r + 1] - e[i][r]) * (e[j][r + 1] - e[j][r]))
            .sum::<f64>()
            / dx;
        let potential: f64 = (1..=n).map(|r| e[i][r] * e[j][r] * x[r - 1]).sum();
        beta * stiffness + potential
    });
    let g = gram_matrix(basis, m, partition)?;
    lowest(eigen_generalized(&q, &g, 1e-10)?, k)
}
