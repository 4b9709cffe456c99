//! The random matrix `A_n`, its action on grid functions, the weak forms
//! `⟨Lu, v⟩` (continuum) and `⟨L_n u, v⟩` (discrete), and an explicit
//! stepper for the stochastic heat equation `∂u/∂t = β ∂²u/∂x² + u·w′`.

use crate::error::{check_len, Error, Result};
use crate::grid::{check_boundary, Partition};
use crate::linalg::SymTridiagonal;
use crate::noise::{ito_sum, BrownianPath, CounterGaussian, GaussianSource, NoiseIncrements};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    beta: f64,
    partition: Partition,
}

impl OperatorParams {
    pub fn new(beta: f64, n: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        Ok(OperatorParams {
            beta,
            partition: Partition::new(n)?,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Off-diagonal entry `β(n+1)² = β/dx²`.
    pub fn coupling(&self) -> f64 {
        let m = self.partition.cells() as f64;
        self.beta * m * m
    }
}

/// `A_n` with `diag_i = X_i/dx − 2β(n+1)²` and off-diagonal `β(n+1)²`.
pub fn assemble_matrix(params: &OperatorParams, noise: &NoiseIncrements) -> Result<SymTridiagonal> {
    let n = params.n();
    check_len("noise increments", n, noise.n())?;
    let cells = params.partition.cells() as f64;
    let c = params.coupling();
    let diag = noise.values().iter().map(|x| x * cells - 2.0 * c).collect();
    SymTridiagonal::new(diag, vec![c; n - 1])
}

/// `[A_n u]_i = β(u_{i+1} − 2u_i + u_{i−1})/dx² + u_i X_i/dx` with
/// `u_0 = u_{n+1} = 0`; `u` holds the interior values.
pub fn apply_discrete(
    u: &[f64],
    params: &OperatorParams,
    noise: &NoiseIncrements,
) -> Result<Vec<f64>> {
    let n = params.n();
    check_len("interior samples", n, u.len())?;
    check_len("noise increments", n, noise.n())?;
    let cells = params.partition.cells() as f64;
    let c = params.coupling();
    let x = noise.values();
    Ok((0..n)
        .map(|i| {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] } else { 0.0 };
            c * (right - 2.0 * u[i] + left) + u[i] * x[i] * cells
        })
        .collect())
}

/// Which form of the white-noise term `∫uv dB` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakFormVariant {
    /// Left-endpoint Itô sum of `uv` against the path increments.
    Ito,
    /// `−∫(u′v + uv′)B dx`, the integrated-by-parts form.
    ByParts,
}

/// `⟨Lu, v⟩ = −β∫u′v′ dx + ∫uv dB` on the fine grid of `path`.
///
/// All four arrays hold values at `t_0..t_{fine_n}`; `u` and `v` must
/// vanish at both ends. Every `dx` integral is the left-endpoint sum.
pub fn weak_form_continuum(
    u: &[f64],
    du: &[f64],
    v: &[f64],
    dv: &[f64],
    beta: f64,
    path: &BrownianPath,
    variant: WeakFormVariant,
) -> Result<f64> {
    let nodes = path.fine_n() + 1;
    for (what, arr) in [("u", u), ("u'", du), ("v", v), ("v'", dv)] {
        check_len(what, nodes, arr.len())?;
    }
    check_boundary("u", u)?;
    check_boundary("v", v)?;
    let fine = path.fine_n();
    let dt = path.dt();
    let stiffness: f64 = (0..fine).map(|j| du[j] * dv[j]).sum::<f64>() * dt;
    let noise = match variant {
        WeakFormVariant::Ito => {
            let uv: Vec<f64> = (0..fine).map(|j| u[j] * v[j]).collect();
            ito_sum(&uv, path)?
        }
        WeakFormVariant::ByParts => {
            let b = path.values();
            -(0..fine)
                .map(|j| (du[j] * v[j] + u[j] * dv[j]) * b[j])
                .sum::<f64>()
                * dt
        }
    };
    Ok(-beta * stiffness + noise)
}

/// `⟨L_n u, v⟩ = Σ_i [A_n u]_i v(x_i) dx`, with `u` and `v` given at all
/// `n + 2` points of the partition.
pub fn weak_form_discrete(
    u: &[f64],
    v: &[f64],
    params: &OperatorParams,
    noise: &NoiseIncrements,
) -> Result<f64> {
    let n = params.n();
    check_len("u nodes", n + 2, u.len())?;
    check_len("v nodes", n + 2, v.len())?;
    check_boundary("u", u)?;
    check_boundary("v", v)?;
    let au = apply_discrete(&u[1..=n], params, noise)?;
    Ok(au.iter().zip(&v[1..=n]).map(|(a, b)| a * b).sum::<f64>() * params.partition.dx())
}

/// Snapshot of the heat-equation state; boundary values are implicitly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SheState {
    pub t: f64,
    pub u: Vec<f64>,
}

impl SheState {
    /// Discrete `L²` norm `(Σ u_i² dx)^{1/2}`.
    pub fn l2_norm(&self, partition: &Partition) -> f64 {
        (self.u.iter().map(|v| v * v).sum::<f64>() * partition.dx()).sqrt()
    }
}

/// Largest explicit-Euler step, `dx²/(2β)`.
pub fn max_stable_dt(params: &OperatorParams) -> f64 {
    let dx = params.partition.dx();
    dx * dx / (2.0 * params.beta)
}

/// Explicit Euler for the heat equation with multiplicative space-time
/// noise, returning every state including the initial one.
pub fn simulate_she(
    initial: &[f64],
    params: &OperatorParams,
    dt: f64,
    steps: usize,
    seed: u64,
    noise_on: bool,
) -> Result<Vec<SheState>> {
    simulate_she_strided(initial, params, dt, steps, seed, noise_on, 1)
}

/// As [`simulate_she`], keeping the initial state and every `stride`-th
/// state after it (plus the final one).
///
/// Per step: `u_i ← u_i + dt·β(u_{i+1} − 2u_i + u_{i−1})/dx² + u_i·η_i`
/// with `η_i ~ N(0, dt/dx)` drawn fresh each step from stream 0 of `seed`:
/// the space-time white-noise mass of a cell has variance `dt·dx`, and
/// dividing by the cell width `dx` gives `η_i`.
pub fn simulate_she_strided(
    initial: &[f64],
    params: &OperatorParams,
    dt: f64,
    steps: usize,
    seed: u64,
    noise_on: bool,
    stride: usize,
) -> Result<Vec<SheState>> {
    let n = params.n();
    check_len("initial condition", n, initial.len())?;
    if steps == 0 || stride == 0 {
        return Err(Error::InvalidArgument(
            "steps and stride must be >= 1".into(),
        ));
    }
    let max_dt = max_stable_dt(params);
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Unstable { dt, max_dt });
    }

    let lap = dt * params.coupling();
    let noise_sd = (dt * params.partition.cells() as f64).sqrt();
    let mut source = CounterGaussian::new(seed, 0);
    let mut u = initial.to_vec();
    let mut next = vec![0.0; n];
    let mut out = vec![SheState {
        t: 0.0,
        u: u.clone(),
    }];

    for step in 1..=steps {
        for i in 0..n {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] } else { 0.0 };
            next[i] = u[i] + lap * (right - 2.0 * u[i] + left);
        }
        if noise_on {
            for i in 0..n {
                next[i] += u[i] * noise_sd * source.next_standard();
            }
        }
        std::mem::swap(&mut u, &mut next);
        if step % stride == 0 || step == steps {
            out.push(SheState {
                t: step as f64 * dt,
                u: u.clone(),
            });
        }
    }
    Ok(out)
}
