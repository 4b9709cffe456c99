//! Seedable Gaussian streams, Brownian paths on a fine grid, and the noise
//! increments `X_i ~ N(0, dx)` that enter the matrix.
//!
//! Every Gaussian draw is a pure function of `(seed, stream, counter)`:
//! the 256-bit ChaCha12 key is expanded from `seed` with SplitMix64, the
//! 64-bit ChaCha stream id selects the replica, and draw `c` is taken from
//! the Box–Muller pair built from 64-bit words `2⌊c/2⌋` and `2⌊c/2⌋ + 1`
//! of that stream (cosine branch for even `c`, sine branch for odd `c`).
//! Replica `r` of any study uses stream `r`; single-shot helpers use stream 0.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{check_len, Error, Result};

/// A source of standard normal draws.
pub trait GaussianSource {
    fn next_standard(&mut self) -> f64;
}

/// SplitMix64 step; used for key expansion only.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chacha_key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

fn box_muller(a: u64, b: u64) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1] keeps the log finite
    let u1 = ((a >> 11) + 1) as f64 * SCALE;
    let u2 = (b >> 11) as f64 * SCALE;
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Counter-based standard normal stream.
#[derive(Debug, Clone)]
pub struct CounterGaussian {
    rng: ChaCha12Rng,
    spare: Option<f64>,
}

impl CounterGaussian {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::from_seed(chacha_key(seed));
        rng.set_stream(stream);
        CounterGaussian { rng, spare: None }
    }

    /// Draw number `counter` of stream `(seed, stream)`, without iterating.
    pub fn at(seed: u64, stream: u64, counter: u64) -> f64 {
        let mut rng = ChaCha12Rng::from_seed(chacha_key(seed));
        rng.set_stream(stream);
        // a pair consumes two u64, i.e. four 32-bit words
        rng.set_word_pos(4 * u128::from(counter / 2));
        let (z0, z1) = box_muller(rng.next_u64(), rng.next_u64());
        if counter.is_multiple_of(2) {
            z0
        } else {
            z1
        }
    }
}

impl GaussianSource for CounterGaussian {
    fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (z0, z1) = box_muller(self.rng.next_u64(), self.rng.next_u64());
        self.spare = Some(z1);
        z0
    }
}

/// Test hook: every draw is the same constant.
#[derive(Debug, Clone, Copy)]
pub struct ConstantGaussian(pub f64);

impl GaussianSource for ConstantGaussian {
    fn next_standard(&mut self) -> f64 {
        self.0
    }
}

/// Brownian motion sampled at `t_j = j/fine_n`, `j = 0..=fine_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    values: Vec<f64>,
}

impl BrownianPath {
    pub fn sample<G: GaussianSource>(source: &mut G, fine_n: usize) -> Result<Self> {
        if fine_n == 0 {
            return Err(Error::InvalidArgument("fine_n must be >= 1".into()));
        }
        let sd = (1.0 / fine_n as f64).sqrt();
        let mut values = Vec::with_capacity(fine_n + 1);
        let mut b = 0.0;
        values.push(b);
        for _ in 0..fine_n {
            b += sd * source.next_standard();
            values.push(b);
        }
        Ok(BrownianPath { values })
    }

    /// Path given explicitly as `B_0..B_{fine_n}` (the forced-path hook).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(
                "a path needs at least two values B_0, B_1".into(),
            ));
        }
        if values[0] != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "a Brownian path starts at 0, got B_0 = {}",
                values[0]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("path values must be finite".into()));
        }
        Ok(BrownianPath { values })
    }

    pub fn zero(fine_n: usize) -> Result<Self> {
        Self::from_values(vec![0.0; fine_n + 1])
    }

    pub fn fine_n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fine_n() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fine node `t_j = j/fine_n`.
    pub fn time(&self, j: usize) -> f64 {
        j as f64 / self.fine_n() as f64
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    /// The path multiplied by `c`, i.e. noise variance scaled by `c²`.
    pub fn scaled(&self, c: f64) -> Self {
        BrownianPath {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Convenience for stream 0 of `seed`.
pub fn sample_path(seed: u64, fine_n: usize) -> Result<BrownianPath> {
    BrownianPath::sample(&mut CounterGaussian::new(seed, 0), fine_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Increments of a Brownian path: `X_i = B(x_{i+1}) − B(x_i)`.
    CoupledToPath,
    /// Independent `√dx·Z_i`.
    Iid,
    /// Supplied directly by the caller.
    Given,
}

/// The noise `X_1..X_n` of one matrix, nominal law `N(0, dx)`, `dx = 1/(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrements {
    values: Vec<f64>,
    provenance: Provenance,
}

impl NoiseIncrements {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("noise needs n >= 1 entries".into()));
        }
        Ok(NoiseIncrements {
            values,
            provenance: Provenance::Given,
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_values(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.n() + 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `ξ_i = X_i/√dx`.
    pub fn standardized(&self) -> Vec<f64> {
        let s = self.dx().sqrt();
        self.values.iter().map(|x| x / s).collect()
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        NoiseIncrements {
            values: self.values.iter().map(|x| c * x).collect(),
            provenance: self.provenance,
        }
    }
}

/// Smallest `(n+1)·2^p` that is at least `fine_n`.
fn suggest_fine(fine_n: usize, cells: usize) -> usize {
    let mut s = cells;
    while s < fine_n {
        s *= 2;
    }
    s
}

/// Forward increments of `path` over the cells of `Π_n`:
/// `X_i = B(x_{i+1}) − B(x_i)`, `i = 1..n`.
pub fn coarsen(path: &BrownianPath, n: usize) -> Result<NoiseIncrements> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let fine_n = path.fine_n();
    let cells = n + 1;
    if !fine_n.is_multiple_of(cells) {
        return Err(Error::Divisibility {
            fine_n,
            cells,
            suggested: suggest_fine(fine_n, cells),
        });
    }
    let step = fine_n / cells;
    let b = path.values();
    let values = (1..=n).map(|i| b[(i + 1) * step] - b[i * step]).collect();
    Ok(NoiseIncrements {
        values,
        provenance: Provenance::CoupledToPath,
    })
}

/// `X_i = √dx·Z_i` with `Z` drawn from stream 0 of `seed`.
pub fn iid_noise(seed: u64, n: usize) -> Result<NoiseIncrements> {
    iid_noise_from(&mut CounterGaussian::new(seed, 0), n)
}

pub fn iid_noise_from<G: GaussianSource>(source: &mut G, n: usize) -> Result<NoiseIncrements> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let sd = (1.0 / (n + 1) as f64).sqrt();
    let values = (0..n).map(|_| sd * source.next_standard()).collect();
    Ok(NoiseIncrements {
        values,
        provenance: Provenance::Iid,
    })
}

/// Left-endpoint Itô sum `Σ_j f(t_j)(B_{j+1} − B_j)`, with `f` given at
/// `t_0..t_{fine_n−1}`.
pub fn ito_sum(f_values: &[f64], path: &BrownianPath) -> Result<f64> {
    check_len("Itô integrand", path.fine_n(), f_values.len())?;
    Ok(f_values
        .iter()
        .zip(path.increments())
        .map(|(f, db)| f * db)
        .sum())
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple of all `n + 1`, or `None` on overflow.
pub fn lcm_of_cells(ns: &[usize]) -> Option<usize> {
    ns.iter().try_fold(1usize, |acc, &n| {
        let c = n + 1;
        (acc / gcd(acc, c)).checked_mul(c)
    })
}

/// Default fine grid for a coupled study: `lcm(n+1)·2^p`, the smallest
/// such value that is at least `min_fine`.
pub fn default_fine_n(ns: &[usize], min_fine: usize) -> Option<usize> {
    let mut fine = lcm_of_cells(ns)?;
    while fine < min_fine {
        fine = fine.checked_mul(2)?;
    }
    Some(fine)
}

/// Increments on several partitions at once, all taken from one Brownian
/// path sampled exactly at the union of the grid points.
///
/// The union is ordered by exact rational comparison of `k/(n+1)`, and the
/// path gets an independent `N(0, Δt)` increment across each gap, so each
/// returned `NoiseIncrements` has exactly the law of [`iid_noise`] while
/// all resolutions share one realization. Unlike [`coarsen`] there is no
/// divisibility requirement.
pub fn nested_increments<G: GaussianSource>(
    source: &mut G,
    ns: &[usize],
) -> Result<Vec<NoiseIncrements>> {
    if ns.contains(&0) {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    // (numerator, denominator) of every grid point, sorted and deduplicated
    let mut points: Vec<(u64, u64)> = ns
        .iter()
        .flat_map(|&n| {
            let d = (n + 1) as u64;
            (0..=d).map(move |k| (k, d))
        })
        .collect();
    let cmp = |a: &(u64, u64), b: &(u64, u64)| {
        (u128::from(a.0) * u128::from(b.1)).cmp(&(u128::from(b.0) * u128::from(a.1)))
    };
    points.sort_by(cmp);
    points.dedup_by(|a, b| cmp(a, b).is_eq());

    let mut b = Vec::with_capacity(points.len());
    b.push(0.0);
    for w in points.windows(2) {
        let (k0, d0) = w[0];
        let (k1, d1) = w[1];
        let num = k1 * d0 - k0 * d1;
        let dt = num as f64 / (d0 as f64 * d1 as f64);
        let last = *b.last().unwrap();
        b.push(last + dt.sqrt() * source.next_standard());
    }

    let index_of = |k: u64, d: u64| {
        points
            .binary_search_by(|p| cmp(p, &(k, d)))
            .expect("grid point is in the union")
    };
    Ok(ns
        .iter()
        .map(|&n| {
            let d = (n + 1) as u64;
            let values = (1..=n as u64)
                .map(|i| b[index_of(i + 1, d)] - b[index_of(i, d)])
                .collect();
            NoiseIncrements {
                values,
                provenance: Provenance::CoupledToPath,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_path(42, 1000).unwrap();
        let b = sample_path(42, 1000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_path(43, 1000).unwrap());
        assert_eq!(iid_noise(7, 50).unwrap(), iid_noise(7, 50).unwrap());
    }

    #[test]
    fn sequential_stream_matches_random_access() {
        let mut g = CounterGaussian::new(99, 5);
        for c in 0..37 {
            assert_eq!(g.next_standard(), CounterGaussian::at(99, 5, c));
        }
        assert_ne!(CounterGaussian::at(99, 5, 0), CounterGaussian::at(99, 6, 0));
    }

    #[test]
    fn zero_draws_give_zero_path() {
        let p = BrownianPath::sample(&mut ConstantGaussian(0.0), 4).unwrap();
        assert_eq!(p.values(), &[0.0; 5]);
    }

    #[test]
    fn endpoint_telescopes() {
        let p = sample_path(3, 512).unwrap();
        let total: f64 = p.increments().sum();
        assert!((total - p.values()[512]).abs() < 1e-12);
    }

    #[test]
    fn coarsen_examples() {
        let p = BrownianPath::from_values(vec![0.0, 0.1, 0.3, 0.2, 0.5]).unwrap();
        let x = coarsen(&p, 1).unwrap();
        assert!((x.values()[0] - 0.2).abs() < 1e-15);
        assert_eq!(x.provenance(), Provenance::CoupledToPath);

        let z = BrownianPath::zero(12).unwrap();
        for n in [1, 2, 3, 5, 11] {
            assert!(coarsen(&z, n).unwrap().values().iter().all(|&v| v == 0.0));
        }

        let p = BrownianPath::zero(10).unwrap();
        assert!(matches!(
            coarsen(&p, 3),
            Err(Error::Divisibility {
                fine_n: 10,
                cells: 4,
                suggested: 16
            })
        ));
    }

    #[test]
    fn iid_scaling() {
        let x = iid_noise_from(&mut ConstantGaussian(1.0), 2).unwrap();
        for v in x.values() {
            assert!((v - 0.577_350_269_189_625_8).abs() < 1e-15);
        }
        assert_eq!(x.provenance(), Provenance::Iid);
    }

    #[test]
    fn iid_mean_within_clt_bound() {
        // X_1 over 1e5 replica streams: sd of the mean is √(dx/1e5)
        let n = 3;
        let reps = 100_000u64;
        let mean: f64 = (0..reps)
            .map(|r| {
                iid_noise_from(&mut CounterGaussian::new(11, r), n)
                    .unwrap()
                    .values()[0]
            })
            .sum::<f64>()
            / reps as f64;
        let bound = 3.0 * (0.25 / reps as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean} bound {bound}");
    }

    #[test]
    fn coarsened_variance_matches_dx() {
        let n = 7;
        let reps = 4000;
        let mut sum_sq = 0.0;
        let mut count = 0.0;
        for r in 0..reps {
            let path = BrownianPath::sample(&mut CounterGaussian::new(5, r), 64).unwrap();
            for x in coarsen(&path, n).unwrap().values() {
                sum_sq += x * x;
                count += 1.0;
            }
        }
        let var = sum_sq / count;
        let dx = 1.0 / 8.0;
        // relative sd of a chi-square mean is √(2/count)
        let tol = 4.0 * dx * (2.0 / count).sqrt();
        assert!((var - dx).abs() < tol, "var {var} vs {dx}");
    }

    #[test]
    fn ito_sum_examples() {
        let p = sample_path(1, 256).unwrap();
        let b1 = p.values()[256];
        assert!((ito_sum(&vec![1.0; 256], &p).unwrap() - b1).abs() < 1e-12);
        assert_eq!(ito_sum(&vec![0.0; 256], &p).unwrap(), 0.0);
        assert!((ito_sum(&vec![2.5; 256], &p).unwrap() - 2.5 * b1).abs() < 1e-12);
        assert!(ito_sum(&[1.0; 3], &p).is_err());
    }

    #[test]
    fn default_fine_grid() {
        assert_eq!(lcm_of_cells(&[15, 31, 63]), Some(64));
        assert_eq!(default_fine_n(&[15, 31, 63], 1 << 16), Some(1 << 16));
        assert_eq!(default_fine_n(&[2, 4], 100), Some(120));
    }

    #[test]
    fn nested_increments_share_one_path() {
        let ns = [1, 3, 7, 32];
        let xs = nested_increments(&mut CounterGaussian::new(8, 0), &ns).unwrap();
        // x_1..x_4 on Π_3 versus the two halves on Π_7: cells nest exactly
        let coarse = &xs[1];
        let fine = &xs[2];
        for i in 1..3 {
            let pair = fine.values()[2 * i - 1] + fine.values()[2 * i];
            assert!((coarse.values()[i - 1] - pair).abs() < 1e-14);
        }
        assert_eq!(xs[3].n(), 32);
    }

    #[test]
    fn nested_single_grid_variance() {
        let n = 32;
        let reps = 3000;
        let mut sum_sq = 0.0;
        for r in 0..reps {
            let xs = nested_increments(&mut CounterGaussian::new(2, r), &[n, 5]).unwrap();
            sum_sq += xs[0].values().iter().map(|x| x * x).sum::<f64>();
        }
        let count = (reps as usize * n) as f64;
        let var = sum_sq / count;
        let dx = 1.0 / 33.0;
        assert!((var - dx).abs() < 4.0 * dx * (2.0 / count).sqrt());
    }

    proptest! {
        #[test]
        fn coupling_consistency(seed in any::<u64>(), p in 0u32..4) {
            let n = (1usize << (p + 1)) - 1;
            let path = sample_path(seed, 256).unwrap();
            let x = coarsen(&path, n).unwrap();
            let step = 256 / (n + 1);
            let expect = path.values()[256] - path.values()[step];
            prop_assert!((x.values().iter().sum::<f64>() - expect).abs() < 1e-12);
        }

        #[test]
        fn ito_sum_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let path = sample_path(seed, 128).unwrap();
            let f: Vec<f64> = (0..128).map(|j| (j as f64 * 0.1).sin()).collect();
            let g: Vec<f64> = (0..128).map(|j| (j as f64 * 0.03).cos()).collect();
            let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
            let lhs = ito_sum(&combo, &path).unwrap();
            let rhs = a * ito_sum(&f, &path).unwrap() + b * ito_sum(&g, &path).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
            prop_assert_eq!(ito_sum(&combo, &BrownianPath::zero(128).unwrap()).unwrap(), 0.0);
        }

        #[test]
        fn summation_by_parts(seed in any::<u64>(), k in 1u32..6) {
            let fine = 200;
            let path = sample_path(seed, fine).unwrap();
            let f: Vec<f64> = (0..=fine)
                .map(|j| (k as f64 * std::f64::consts::PI * j as f64 / fine as f64).sin().powi(2))
                .collect();
            let ito = ito_sum(&f[..fine], &path).unwrap();
            let b = path.values();
            // f_N ≈ 0 up to sin(kπ)² ≈ 1e-32
            let parts: f64 = (0..fine).map(|j| b[j + 1] * (f[j + 1] - f[j])).sum();
            prop_assert!((ito + parts).abs() < 1e-12);
        }
    }
}
