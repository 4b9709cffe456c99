//! Monte Carlo drivers and the statistics behind the convergence verdicts.
//!
//! Replica `r` of a study with seed `s` always draws from Gaussian stream
//! `r` of `s` (see [`CounterGaussian`]), so every sample is a pure function
//! of `(s, r)` and the results do not depend on how rayon schedules work.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigen_bisect, SymTridiagonal};
use crate::noise::{
    coarsen, iid_noise_from, nested_increments, BrownianPath, CounterGaussian, NoiseIncrements,
};
use crate::operator::{
    assemble_matrix, weak_form_continuum, weak_form_discrete, OperatorParams, WeakFormVariant,
};
use crate::variational::ritz_spectrum;

/// Relative slack allowed per step when checking that an MSE sequence decreases.
pub const MSE_SLACK: f64 = 0.10;
/// Relative slack allowed per step when checking that eigenvalue gaps shrink.
pub const GAP_SLACK: f64 = 0.20;

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub n: usize,
    pub beta: f64,
    /// 1-based eigenvalue index.
    pub k: usize,
    pub seed: u64,
    /// Replica streams `0..replicas` were used.
    pub replicas: usize,
}

/// Unordered draws of one statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    pub meta: Option<SampleMeta>,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empirical sample is empty".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument(
                "empirical sample contains NaN".into(),
            ));
        }
        Ok(EmpiricalSample { values, meta: None })
    }

    pub fn with_meta(values: Vec<f64>, meta: SampleMeta) -> Result<Self> {
        let mut s = Self::new(values)?;
        s.meta = Some(meta);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance; 0 for a single draw.
    pub fn variance(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (self.len() - 1) as f64
    }

    /// `#{draws ≤ x} / len`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.iter().filter(|&&v| v <= x).count() as f64 / self.len() as f64
    }

    pub fn median(&self) -> f64 {
        quantiles(self, &[0.5]).expect("0.5 is a valid probability")[0]
    }
}

/// A statistic tracked along increasing `n`, with a per-step check
/// `s_{j+1} ≤ (1 + slack)·s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub points: Vec<(usize, f64)>,
    pub slack: f64,
    /// `steps[j]` compares `points[j + 1]` against `points[j]`.
    pub steps: Vec<bool>,
    pub monotone_within_slack: bool,
    /// The statistic at the largest `n`, if any.
    pub final_gap: Option<f64>,
}

impl ConvergenceReport {
    pub fn new(points: Vec<(usize, f64)>, slack: f64) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument(
                "report n values must be strictly increasing".into(),
            ));
        }
        let steps: Vec<bool> = points
            .windows(2)
            .map(|w| w[1].1 <= (1.0 + slack) * w[0].1)
            .collect();
        Ok(ConvergenceReport {
            monotone_within_slack: steps.iter().all(|&b| b),
            final_gap: points.last().map(|p| p.1),
            points,
            slack,
            steps,
        })
    }

    pub fn statistics(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// Sup-distance between the two empirical CDFs, by a merge scan over the
/// sorted draws. Ties across samples are stepped together.
pub fn ks_distance(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (a, b) = (a.sorted(), b.sorted());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Order-statistic quantiles, interpolating linearly between adjacent
/// order statistics at position `p·(len − 1)`.
pub fn quantiles(sample: &EmpiricalSample, probs: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    if probs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "probabilities must be sorted".into(),
        ));
    }
    let s = sample.sorted();
    let last = s.len() - 1;
    Ok(probs
        .iter()
        .map(|p| {
            let mut h = p * last as f64;
            // p = r/(len - 1) should land exactly on order statistic r
            if (h - h.round()).abs() < 1e-9 {
                h = h.round();
            }
            let lo = (h.floor() as usize).min(last);
            let hi = (lo + 1).min(last);
            s[lo] + (h - lo as f64) * (s[hi] - s[lo])
        })
        .collect())
}

/// Ensemble of the `k` smallest eigenvalues of `−A_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub n: usize,
    pub beta: f64,
    pub k: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Multiplies every noise increment; 0 gives the noise-free matrix.
    pub noise_scale: f64,
    pub tol: f64,
}

impl MonteCarloConfig {
    pub fn new(n: usize, beta: f64, k: usize, replicas: usize, seed: u64) -> Self {
        MonteCarloConfig {
            n,
            beta,
            k,
            replicas,
            seed,
            noise_scale: 1.0,
            tol: 1e-9,
        }
    }
}

fn check_ensemble(n: usize, k: usize, replicas: usize) -> Result<()> {
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be >= 1".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

fn lowest_of_neg(
    params: &OperatorParams,
    noise: &NoiseIncrements,
    k: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let neg: SymTridiagonal = assemble_matrix(params, noise)?.negated();
    Ok(eigen_bisect(&neg, 1, k, tol)?.eigenvalues)
}

/// Splits per-replica rows `[r][k]` into one sample per eigenvalue index.
fn transpose(
    rows: Vec<Vec<f64>>,
    k: usize,
    meta: impl Fn(usize) -> SampleMeta,
) -> Result<Vec<EmpiricalSample>> {
    (0..k)
        .map(|j| EmpiricalSample::with_meta(rows.iter().map(|r| r[j]).collect(), meta(j + 1)))
        .collect()
}

/// For each replica `r`, draws i.i.d. noise from stream `r`, assembles
/// `−A_n` and keeps its `k` smallest eigenvalues. Returns one sample per
/// index `1..=k`, with draws in replica order.
pub fn monte_carlo_eigen(cfg: &MonteCarloConfig) -> Result<Vec<EmpiricalSample>> {
    check_ensemble(cfg.n, cfg.k, cfg.replicas)?;
    let params = OperatorParams::new(cfg.beta, cfg.n)?;
    let rows = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = CounterGaussian::new(cfg.seed, r);
            let noise = iid_noise_from(&mut g, cfg.n)?.scaled(cfg.noise_scale);
            lowest_of_neg(&params, &noise, cfg.k, cfg.tol)
        })
        .collect::<Result<Vec<_>>>()?;
    transpose(rows, cfg.k, |k| SampleMeta {
        n: cfg.n,
        beta: cfg.beta,
        k,
        seed: cfg.seed,
        replicas: cfg.replicas,
    })
}

/// How ensembles at different `n` relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// Each `n` runs [`monte_carlo_eigen`] on its own; replica `r` uses
    /// the leading draws of stream `r` at every size.
    Iid,
    /// Replica `r` samples one Brownian path at the union of all grids
    /// (stream `r`) and every `n` takes its increments from it. Marginal
    /// laws are unchanged, but sampling noise largely cancels between sizes.
    #[default]
    SharedPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Strictly ascending sizes; the last one is the KS reference.
    pub ns: Vec<usize>,
    pub beta: f64,
    pub k: usize,
    pub replicas: usize,
    pub seed: u64,
    pub noise_scale: f64,
    pub tol: f64,
    pub coupling: Coupling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStudy {
    pub ns: Vec<usize>,
    /// `samples[i][j]`: λ_{j+1} at `ns[i]`.
    pub samples: Vec<Vec<EmpiricalSample>>,
    /// `ks_to_ref[i][j]`: KS distance of `samples[i][j]` to the sample at the largest n.
    pub ks_to_ref: Vec<Vec<f64>>,
}

pub fn ensemble_study(cfg: &EnsembleConfig) -> Result<EnsembleStudy> {
    check_ascending(&cfg.ns)?;
    check_ensemble(cfg.ns[0], cfg.k, cfg.replicas)?;
    let samples: Vec<Vec<EmpiricalSample>> = match cfg.coupling {
        Coupling::Iid => cfg
            .ns
            .iter()
            .map(|&n| {
                monte_carlo_eigen(&MonteCarloConfig {
                    n,
                    beta: cfg.beta,
                    k: cfg.k,
                    replicas: cfg.replicas,
                    seed: cfg.seed,
                    noise_scale: cfg.noise_scale,
                    tol: cfg.tol,
                })
            })
            .collect::<Result<_>>()?,
        Coupling::SharedPath => {
            let params: Vec<OperatorParams> = cfg
                .ns
                .iter()
                .map(|&n| OperatorParams::new(cfg.beta, n))
                .collect::<Result<_>>()?;
            // rows[r][i] = eigenvalues at ns[i] for replica r
            let rows = (0..cfg.replicas as u64)
                .into_par_iter()
                .map(|r| {
                    let mut g = CounterGaussian::new(cfg.seed, r);
                    nested_increments(&mut g, &cfg.ns)?
                        .iter()
                        .zip(&params)
                        .map(|(x, p)| lowest_of_neg(p, &x.scaled(cfg.noise_scale), cfg.k, cfg.tol))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            (0..cfg.ns.len())
                .map(|i| {
                    let per_n: Vec<Vec<f64>> = rows.iter().map(|r| r[i].clone()).collect();
                    transpose(per_n, cfg.k, |k| SampleMeta {
                        n: cfg.ns[i],
                        beta: cfg.beta,
                        k,
                        seed: cfg.seed,
                        replicas: cfg.replicas,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let reference = samples.last().expect("ns is nonempty");
    let ks_to_ref = samples
        .iter()
        .map(|row| {
            row.iter()
                .zip(reference)
                .map(|(a, b)| ks_distance(a, b))
                .collect()
        })
        .collect();
    Ok(EnsembleStudy {
        ns: cfg.ns.clone(),
        samples,
        ks_to_ref,
    })
}

fn check_ascending(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("n list is empty".into()));
    }
    if ns[0] == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "n list must be strictly ascending, got {ns:?}"
        )));
    }
    Ok(())
}

fn check_divisible(ns: &[usize], fine_n: usize) -> Result<()> {
    // coarsen reports the failing size together with a suggested grid
    let path = BrownianPath::zero(fine_n)?;
    for &n in ns {
        coarsen(&path, n)?;
    }
    Ok(())
}

/// Where the Brownian path of each replica comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PathSupply {
    /// Stream `r` of the study seed, multiplied by `scale`.
    Sampled { scale: f64 },
    /// The same given path for every replica.
    Fixed(BrownianPath),
}

impl Default for PathSupply {
    fn default() -> Self {
        PathSupply::Sampled { scale: 1.0 }
    }
}

impl PathSupply {
    fn path(&self, seed: u64, replica: u64, fine_n: usize) -> Result<BrownianPath> {
        match self {
            PathSupply::Sampled { scale } => {
                let p = BrownianPath::sample(&mut CounterGaussian::new(seed, replica), fine_n)?;
                Ok(if *scale == 1.0 { p } else { p.scaled(*scale) })
            }
            PathSupply::Fixed(p) => {
                if p.fine_n() != fine_n {
                    return Err(Error::LengthMismatch {
                        what: "forced path cells",
                        expected: fine_n,
                        found: p.fine_n(),
                    });
                }
                Ok(p.clone())
            }
        }
    }
}

/// `√2 sin(jπx)` and its derivative at `t_0..t_{fine_n}`.
fn sine_mode_fine(j: usize, fine_n: usize) -> (Vec<f64>, Vec<f64>) {
    let w = j as f64 * std::f64::consts::PI;
    let s = std::f64::consts::SQRT_2;
    let mut u: Vec<f64> = (0..=fine_n)
        .map(|i| s * (w * i as f64 / fine_n as f64).sin())
        .collect();
    let du = (0..=fine_n)
        .map(|i| s * w * (w * i as f64 / fine_n as f64).cos())
        .collect();
    u[0] = 0.0;
    u[fine_n] = 0.0;
    (u, du)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseConfig {
    pub ns: Vec<usize>,
    pub replicas: usize,
    pub fine_n: usize,
    pub seed: u64,
    pub beta: f64,
    /// Sine mode indices (1-based) of `u` and `v`.
    pub u_mode: usize,
    pub v_mode: usize,
    pub paths: PathSupply,
}

impl MseConfig {
    pub fn new(ns: Vec<usize>, replicas: usize, fine_n: usize, seed: u64) -> Self {
        MseConfig {
            ns,
            replicas,
            fine_n,
            seed,
            beta: 1.0,
            u_mode: 1,
            v_mode: 1,
            paths: PathSupply::default(),
        }
    }
}

/// Mean over replicas of `(⟨L_n u, v⟩ − ⟨Lu, v⟩)²`, where each replica
/// owns one path, the continuum form uses its Itô sum and every `n` uses
/// its coarsened increments.
pub fn mse_weakform(cfg: &MseConfig) -> Result<ConvergenceReport> {
    check_ascending(&cfg.ns)?;
    if cfg.replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be >= 1".into()));
    }
    if cfg.u_mode == 0 || cfg.v_mode == 0 {
        return Err(Error::InvalidArgument(
            "sine modes are numbered from 1".into(),
        ));
    }
    check_divisible(&cfg.ns, cfg.fine_n)?;
    let (u, du) = sine_mode_fine(cfg.u_mode, cfg.fine_n);
    let (v, dv) = sine_mode_fine(cfg.v_mode, cfg.fine_n);
    let setups: Vec<(OperatorParams, Vec<f64>, Vec<f64>)> = cfg
        .ns
        .iter()
        .map(|&n| {
            let p = OperatorParams::new(cfg.beta, n)?;
            let step = cfg.fine_n / (n + 1);
            let pick = |f: &[f64]| (0..=n + 1).map(|i| f[i * step]).collect::<Vec<f64>>();
            let (un, vn) = (pick(&u), pick(&v));
            Ok((p, un, vn))
        })
        .collect::<Result<_>>()?;

    let rows = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|r| {
            let path = cfg.paths.path(cfg.seed, r, cfg.fine_n)?;
            let cont =
                weak_form_continuum(&u, &du, &v, &dv, cfg.beta, &path, WeakFormVariant::Ito)?;
            setups
                .iter()
                .map(|(p, un, vn)| {
                    let x = coarsen(&path, p.n())?;
                    Ok((weak_form_discrete(un, vn, p, &x)? - cont).powi(2))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let points = cfg
        .ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            (
                n,
                rows.iter().map(|r| r[i]).sum::<f64>() / cfg.replicas as f64,
            )
        })
        .collect();
    ConvergenceReport::new(points, MSE_SLACK)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledConfig {
    pub ns: Vec<usize>,
    pub fine_n: usize,
    pub seed: u64,
    pub k: usize,
    /// Sine modes in the Ritz reference.
    pub m: usize,
    pub tol: f64,
    pub path: PathSupply,
}

impl CoupledConfig {
    pub fn new(ns: Vec<usize>, fine_n: usize, seed: u64, k: usize) -> Self {
        CoupledConfig {
            ns,
            fine_n,
            seed,
            k,
            m: 64,
            tol: 1e-9,
            path: PathSupply::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledStudy {
    pub ns: Vec<usize>,
    /// `eigenvalues[i][j]`: λ_{j+1} of `−A_{ns[i]}` built from the path.
    pub eigenvalues: Vec<Vec<f64>>,
    /// `reports[j]` tracks `|λ_{j+1}(ns[i+1]) − λ_{j+1}(ns[i])|` at `ns[i+1]`.
    pub reports: Vec<ConvergenceReport>,
    /// Rayleigh–Ritz values on the same path.
    pub ritz_reference: Vec<f64>,
}

impl CoupledStudy {
    /// Gap from the previous size, `None` for the first row.
    pub fn gap(&self, i: usize, j: usize) -> Option<f64> {
        (i > 0).then(|| (self.eigenvalues[i][j] - self.eigenvalues[i - 1][j]).abs())
    }
}

/// One path (stream 0 of the seed), every `n` built from its negated
/// coarsened increments so that the matrix spectra track the continuum
/// functional on that same path. `β = 1` throughout.
pub fn coupled_eigen_study(cfg: &CoupledConfig) -> Result<CoupledStudy> {
    check_ascending(&cfg.ns)?;
    if cfg.k == 0 || cfg.k > cfg.ns[0] || cfg.k > cfg.m {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= min(n, m), got k = {}",
            cfg.k
        )));
    }
    check_divisible(&cfg.ns, cfg.fine_n)?;
    let path = cfg.path.path(cfg.seed, 0, cfg.fine_n)?;
    let eigenvalues = cfg
        .ns
        .par_iter()
        .map(|&n| {
            let p = OperatorParams::new(1.0, n)?;
            let x = coarsen(&path, n)?.negated();
            lowest_of_neg(&p, &x, cfg.k, cfg.tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = (0..cfg.k)
        .map(|j| {
            let points = (1..cfg.ns.len())
                .map(|i| (cfg.ns[i], (eigenvalues[i][j] - eigenvalues[i - 1][j]).abs()))
                .collect();
            ConvergenceReport::new(points, GAP_SLACK)
        })
        .collect::<Result<_>>()?;
    let ritz_reference = ritz_spectrum(cfg.m, &path, cfg.k)?.eigenvalues;
    Ok(CoupledStudy {
        ns: cfg.ns.clone(),
        eigenvalues,
        reports,
        ritz_reference,
    })
}
