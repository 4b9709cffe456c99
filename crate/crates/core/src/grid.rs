//! Uniform partitions of `[0, 1]` and the two projections used throughout:
//! the right-continuous step projection `P_n` and piecewise-linear
//! interpolation through node values.

use crate::error::{check_len, Error, Result};

/// Absolute tolerance (relative to the sample scale) under which a
/// boundary value counts as zero. `sin(π)` evaluates to about 1.2e-16.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// The uniform partition `Π_n = {x_0 = 0 < x_1 < … < x_{n+1} = 1}` with
/// `x_k = k/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    n: usize,
    dx: f64,
}

impl Partition {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "partition needs at least one interior point (n >= 1)".into(),
            ));
        }
        Ok(Partition {
            n,
            dx: 1.0 / (n + 1) as f64,
        })
    }

    /// Number of interior points.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells, `n + 1`.
    #[inline]
    pub fn cells(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `x_k = k/(n+1)` for `k = 0..=n+1`; exact at both ends.
    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n + 1);
        k as f64 / (self.n + 1) as f64
    }

    /// All `n + 2` points including both boundaries.
    pub fn points(&self) -> Vec<f64> {
        (0..=self.n + 1).map(|k| self.point(k)).collect()
    }

    /// Interior points `x_1..x_n`.
    pub fn interior(&self) -> Vec<f64> {
        (1..=self.n).map(|k| self.point(k)).collect()
    }

    /// Samples `f` at all `n + 2` points.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..=self.n + 1).map(|k| f(self.point(k))).collect()
    }

    /// Index `i` of the cell `[x_i, x_{i+1})` containing `x`, for `x` in `[0, 1)`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(0.0..1.0).contains(&x) {
            return None;
        }
        let mut i = ((x * self.cells() as f64).floor() as usize).min(self.n);
        // floor can land one cell off when x is a rounded grid point
        if i < self.n && x >= self.point(i + 1) {
            i += 1;
        } else if x < self.point(i) {
            i -= 1;
        }
        Some(i)
    }
}

/// Shorthand for [`Partition::new`].
pub fn make_partition(n: usize) -> Result<Partition> {
    Partition::new(n)
}

/// Right-continuous step function with value `v_i` on `[x_i, x_{i+1})`,
/// `i = 1..n`, and zero on `[0, x_1)` and at `x = 1`.
///
/// Only the interior values are stored, so the Dirichlet conditions hold by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    partition: Partition,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.partition.locate(x) {
            Some(0) | None => 0.0,
            Some(i) => self.values[i - 1],
        }
    }

    /// `‖u_n‖₂ = (Σ v_i² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.partition.dx()).sqrt()
    }
}

/// The projection `P_n`: builds the step function from samples at the
/// interior points `x_1..x_n`.
pub fn project_step(samples: &[f64], partition: &Partition) -> Result<StepFunction> {
    check_len("step samples", partition.n(), samples.len())?;
    Ok(StepFunction {
        partition: *partition,
        values: samples.to_vec(),
    })
}

/// Continuous interpolant through `(x_k, g_k)`, `k = 0..=n+1`, with
/// `g_0 = g_{n+1} = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    partition: Partition,
    nodes: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x == 1.0 {
            return 0.0;
        }
        match self.partition.locate(x) {
            None => 0.0,
            Some(i) => {
                let t = (x - self.partition.point(i)) / self.partition.dx();
                self.nodes[i] + t * (self.nodes[i + 1] - self.nodes[i])
            }
        }
    }

    /// Slope on cell `(x_i, x_{i+1})`, `i = 0..=n`.
    pub fn slope(&self, i: usize) -> f64 {
        (self.nodes[i + 1] - self.nodes[i]) / self.partition.dx()
    }

    /// `∫₀¹ (ĝ′)² dx = Σ_{i=0}^{n} ((g_{i+1} − g_i)/dx)² dx`.
    pub fn dirichlet_energy(&self) -> f64 {
        let dx = self.partition.dx();
        (0..=self.partition.n())
            .map(|i| self.slope(i).powi(2))
            .sum::<f64>()
            * dx
    }
}

pub fn interp_linear(node_values: &[f64], partition: &Partition) -> Result<PiecewiseLinear> {
    check_len("node values", partition.n() + 2, node_values.len())?;
    check_boundary("node values", node_values)?;
    let mut nodes = node_values.to_vec();
    let last = nodes.len() - 1;
    nodes[0] = 0.0;
    nodes[last] = 0.0;
    Ok(PiecewiseLinear {
        partition: *partition,
        nodes,
    })
}

/// Rejects a sample array whose first or last entry is not (numerically) zero.
pub(crate) fn check_boundary(what: &'static str, values: &[f64]) -> Result<()> {
    let (Some(&left), Some(&right)) = (values.first(), values.last()) else {
        return Ok(());
    };
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    if left.abs() > BOUNDARY_TOL * scale || right.abs() > BOUNDARY_TOL * scale {
        return Err(Error::BoundaryViolation { what, left, right });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn partition_points() {
        let p = make_partition(3).unwrap();
        assert_eq!(p.dx(), 0.25);
        assert_eq!(p.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        let p = make_partition(1).unwrap();
        assert_eq!(p.dx(), 0.5);
        assert_eq!(p.points(), vec![0.0, 0.5, 1.0]);

        assert!(make_partition(0).is_err());
    }

    #[test]
    fn partition_spacing_is_uniform() {
        for n in [1, 2, 7, 100, 1023, 4095] {
            let p = Partition::new(n).unwrap();
            let pts = p.points();
            assert_eq!(pts[0], 0.0);
            assert_eq!(pts[n + 1], 1.0);
            for w in pts.windows(2) {
                assert!((w[1] - w[0] - p.dx()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn step_first_cell_is_zero() {
        let p = Partition::new(3).unwrap();
        let s = project_step(&[1.0, 1.0, 1.0], &p).unwrap();
        assert_eq!(s.eval(0.1), 0.0);
        assert_eq!(s.eval(0.25), 1.0);
    }

    #[test]
    fn step_right_continuity_and_boundary() {
        let p = Partition::new(1).unwrap();
        let s = project_step(&[2.0], &p).unwrap();
        assert_eq!(s.eval(0.5), 2.0);
        assert_eq!(s.eval(0.999), 2.0);
        assert_eq!(s.eval(1.0), 0.0);
        assert_eq!(s.eval(0.4999), 0.0);
    }

    #[test]
    fn step_length_mismatch() {
        let p = Partition::new(3).unwrap();
        assert!(matches!(
            project_step(&[1.0, 2.0], &p),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn linear_interpolation() {
        let p = Partition::new(1).unwrap();
        let g = interp_linear(&[0.0, 1.0, 0.0], &p).unwrap();
        assert_eq!(g.eval(0.25), 0.5);
        assert_eq!(g.eval(0.75), 0.5);
        assert_eq!(g.dirichlet_energy(), 4.0);
        assert!(matches!(
            interp_linear(&[0.1, 1.0, 0.0], &p),
            Err(Error::BoundaryViolation { .. })
        ));
        assert!(interp_linear(&[0.0, 1.0], &p).is_err());
    }

    #[test]
    fn step_norm_matches_midpoint_quadrature() {
        let p = Partition::new(9).unwrap();
        let samples: Vec<f64> = p.interior().iter().map(|x| (3.0 * x).sin()).collect();
        let s = project_step(&samples, &p).unwrap();
        // the step function is constant per cell, so a fine midpoint rule is exact per cell
        let fine = 10_000;
        let quad: f64 = (0..fine)
            .map(|j| s.eval((j as f64 + 0.5) / fine as f64).powi(2))
            .sum::<f64>()
            / fine as f64;
        assert!((quad.sqrt() - s.l2_norm()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn step_reproduces_samples(n in 1usize..200, seed in 0.0f64..10.0) {
            let p = Partition::new(n).unwrap();
            let samples: Vec<f64> = p.interior().iter()
                .map(|x| (seed * x).sin() * x * (1.0 - x)).collect();
            let s = project_step(&samples, &p).unwrap();
            for (k, &v) in samples.iter().enumerate() {
                prop_assert_eq!(s.eval(p.point(k + 1)), v);
            }
        }

        #[test]
        fn linear_reproduces_nodes_and_stays_between(n in 1usize..100, freq in 1u32..7, t in 0.0f64..1.0) {
            let p = Partition::new(n).unwrap();
            let nodes = p.sample(|x| (freq as f64 * std::f64::consts::PI * x).sin());
            let g = interp_linear(&nodes, &p).unwrap();
            for k in 0..=n {
                prop_assert!((g.eval(p.point(k)) - g.nodes()[k]).abs() < 1e-15);
                let x = p.point(k) + t * p.dx();
                let y = g.eval(x);
                let (a, b) = (g.nodes()[k], g.nodes()[k + 1]);
                prop_assert!(y >= a.min(b) - 1e-12 && y <= a.max(b) + 1e-12);
            }
        }
    }
}
