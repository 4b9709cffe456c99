//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each and exits nonzero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::process::{Command, Output};
use std::time::Instant;

use shelab_core::grid::Partition;
use shelab_core::linalg::{
    eigen_bisect, eigen_dense, inverse_iteration, DenseSymmetric, SymTridiagonal,
};
use shelab_core::noise::{
    iid_noise, sample_path, CounterGaussian, GaussianSource, NoiseIncrements,
};
use shelab_core::operator::{
    assemble_matrix, max_stable_dt, simulate_she, weak_form_continuum, OperatorParams,
    WeakFormVariant,
};
use shelab_core::stats::{
    coupled_eigen_study, ensemble_study, monte_carlo_eigen, mse_weakform, CoupledConfig, Coupling,
    EnsembleConfig, MonteCarloConfig, MseConfig, PathSupply,
};
use shelab_core::variational::{f_discrete, gram_matrix, minmax_discrete, Convention, TrialBasis};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn closed_form(beta: f64, n: usize, k: usize) -> f64 {
    let c = (n + 1) as f64;
    4.0 * beta * c * c * (k as f64 * PI / (2.0 * c)).sin().powi(2)
}

fn shelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shelab"))
        .args(args)
        .output()
        .expect("spawn shelab")
}

fn sine_fine(fine: usize, j: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u: Vec<f64> = (0..=fine)
        .map(|i| SQRT_2 * (j * PI * i as f64 / fine as f64).sin())
        .collect();
    u[0] = 0.0;
    u[fine] = 0.0;
    let du = (0..=fine)
        .map(|i| SQRT_2 * j * PI * (j * PI * i as f64 / fine as f64).cos())
        .collect();
    (u, du)
}

fn solver_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    for &n in &[3usize, 63, 1023, 4095] {
        for &beta in &[1.0, 2.5] {
            let k = n.min(10);
            let p = OperatorParams::new(beta, n).unwrap();
            let neg = assemble_matrix(&p, &NoiseIncrements::zeros(n).unwrap())
                .unwrap()
                .negated();
            let s = eigen_bisect(&neg, 1, k, 1e-9).unwrap();
            for (j, v) in s.eigenvalues.iter().enumerate() {
                worst = worst.max((v - closed_form(beta, n, j + 1)).abs());
            }
        }
    }
    let start = Instant::now();
    let out = shelab(&[
        "eig",
        "--n",
        "4095",
        "--k",
        "10",
        "--beta",
        "2.5",
        "--zero-noise",
    ]);
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-9 && secs < 1.0 && out.status.success(),
        format!("max |error| = {worst:.3e}, eig --n 4095 took {secs:.3} s"),
    )
}

fn oracle_equivalence() -> Verdict {
    let mut g = CounterGaussian::new(2, 0);
    let mut worst: f64 = 0.0;
    for case in 0..100u64 {
        let n = 1 + (CounterGaussian::at(3, 0, case).abs() * 1e6) as usize % 200;
        let diag: Vec<f64> = (0..n).map(|_| 10.0 * g.next_standard()).collect();
        let off: Vec<f64> = (0..n.saturating_sub(1))
            .map(|_| 5.0 * g.next_standard())
            .collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone()).unwrap();
        let b = eigen_bisect(&t, 1, n, 1e-11).unwrap();
        let d = DenseSymmetric::from_fn(n, |i, j| match i.abs_diff(j) {
            0 => diag[i],
            1 => off[i.min(j)],
            _ => 0.0,
        });
        let e = eigen_dense(&d, 1e-13).unwrap();
        for (x, y) in b.eigenvalues.iter().zip(&e.eigenvalues) {
            worst = worst.max((x - y).abs());
        }
    }
    check(
        worst < 1e-8,
        format!("100 matrices, max discrepancy {worst:.3e}"),
    )
}

fn pathwise_identity() -> Verdict {
    let n = 64;
    let p = OperatorParams::new(1.0, n).unwrap();
    let sqdx = p.partition().dx().sqrt();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let x = iid_noise(seed, n).unwrap();
        let neg = assemble_matrix(&p, &x).unwrap().negated();
        for &lam in &eigen_bisect(&neg, 1, n, 1e-12).unwrap().eigenvalues {
            let v = inverse_iteration(&neg, lam);
            let mut g = vec![0.0; n + 2];
            for i in 0..n {
                g[i + 1] = v[i] / sqdx;
            }
            let f = f_discrete(&g, &x.negated(), Convention::Symmetric).unwrap();
            worst = worst.max((f - lam).abs());
        }
    }
    check(
        worst < 1e-9,
        format!("20 draws x 64 eigenpairs, max |F_n - lambda| = {worst:.3e}"),
    )
}

fn minmax_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    for &n in &[15usize, 31] {
        let p = OperatorParams::new(1.0, n).unwrap();
        for seed in 0..5 {
            let x = iid_noise(seed, n).unwrap();
            let mm = minmax_discrete(n, &p, &x, n).unwrap();
            let neg = assemble_matrix(&p, &x.negated()).unwrap().negated();
            let b = eigen_bisect(&neg, 1, n, 1e-11).unwrap();
            for (u, v) in mm.eigenvalues.iter().zip(&b.eigenvalues) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    check(
        worst < 1e-6,
        format!("m = n in {{15, 31}}, max discrepancy {worst:.3e}"),
    )
}

fn gram_convergence() -> Verdict {
    let mut sine_worst: f64 = 0.0;
    for k in [1usize, 5, 10] {
        let basis = TrialBasis::sine(k).unwrap();
        for n in k..=300 {
            let g = gram_matrix(&basis, k, &Partition::new(n).unwrap()).unwrap();
            sine_worst = sine_worst.max(g.max_deviation_from_identity());
        }
    }
    let poly = TrialBasis::polynomial(4).unwrap();
    let devs: Vec<f64> = [50usize, 100, 500, 1000]
        .iter()
        .map(|&n| {
            gram_matrix(&poly, 4, &Partition::new(n).unwrap())
                .unwrap()
                .max_deviation_from_identity()
        })
        .collect();
    let monotone = devs.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    check(
        sine_worst < 1e-12 && monotone && devs[3] < 0.02,
        format!(
            "sine max |G - I| = {sine_worst:.2e}; polynomial {}",
            sci(&devs)
        ),
    )
}

fn coupled_spectral_convergence() -> Verdict {
    let ns = vec![127, 255, 511, 1023];
    let mut gaps = vec![Vec::new(); 3];
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let s = coupled_eigen_study(&CoupledConfig::new(ns.clone(), 1 << 16, seed, 1)).unwrap();
        let g = s.reports[0].statistics();
        for (slot, v) in gaps.iter_mut().zip(&g) {
            slot.push(*v);
        }
        ratios.push((s.eigenvalues[3][0] - s.ritz_reference[0]).abs() / g[2]);
    }
    let med: Vec<f64> = gaps.into_iter().map(median).collect();
    let ratio = median(ratios);
    check(
        med.windows(2).all(|w| w[1] <= w[0]) && ratio <= 3.0,
        format!(
            "median gaps {}; median |lambda_1(1023) - ritz|/gap = {ratio:.3}",
            sci(&med)
        ),
    )
}

fn distributional_convergence() -> Verdict {
    let st = ensemble_study(&EnsembleConfig {
        ns: vec![32, 256, 512],
        beta: 1.0,
        k: 3,
        replicas: 1000,
        seed: 2024,
        noise_scale: 1.0,
        tol: 1e-9,
        coupling: Coupling::SharedPath,
    })
    .unwrap();
    let (far, near) = (&st.ks_to_ref[0], &st.ks_to_ref[1]);
    check(
        far.iter().zip(near).all(|(a, b)| a > b),
        format!("KS to n=512: n=32 {far:.3?}, n=256 {near:.3?} (k = 1, 2, 3)"),
    )
}

fn weak_form_mse() -> Verdict {
    let ns = vec![15, 31, 63, 127];
    let noisy = mse_weakform(&MseConfig::new(ns.clone(), 500, 1 << 16, 7)).unwrap();
    let mut zero = MseConfig::new(ns, 1, 1 << 16, 7);
    zero.paths = PathSupply::Sampled { scale: 0.0 };
    let zero = mse_weakform(&zero).unwrap();
    check(
        noisy.monotone_within_slack && zero.strictly_decreasing(),
        format!(
            "mse {}; zero-noise gap {}",
            sci(&noisy.statistics()),
            sci(&zero.statistics())
        ),
    )
}

fn weak_form_variants() -> Verdict {
    let fines = [1usize << 12, 1 << 14, 1 << 16];
    let meds: Vec<f64> = fines
        .iter()
        .map(|&fine| {
            let (u, du) = sine_fine(fine, 1.0);
            median(
                (0..20)
                    .map(|seed| {
                        let path = sample_path(seed, fine).unwrap();
                        let ito =
                            weak_form_continuum(&u, &du, &u, &du, 1.0, &path, WeakFormVariant::Ito)
                                .unwrap();
                        let bp = weak_form_continuum(
                            &u,
                            &du,
                            &u,
                            &du,
                            1.0,
                            &path,
                            WeakFormVariant::ByParts,
                        )
                        .unwrap();
                        (ito - bp).abs()
                    })
                    .collect(),
            )
        })
        .collect();
    // d(N)·√N must stay within a factor 3 of its value at the coarsest grid
    let envelope: Vec<f64> = meds
        .iter()
        .zip(&fines)
        .map(|(d, &f)| d * (f as f64).sqrt())
        .collect();
    let bounded = envelope.iter().all(|e| *e <= 3.0 * envelope[0]);
    let slope = (meds[2] / meds[0]).ln() / ((fines[2] / fines[0]) as f64).ln();
    check(
        meds.windows(2).all(|w| w[1] < w[0]) && bounded && meds[2] < 0.05,
        format!(
            "median |ito - by_parts| {}, observed slope {slope:.2}",
            sci(&meds)
        ),
    )
}

fn she_sanity() -> Verdict {
    let n = 128;
    let mut worst: f64 = 0.0;
    for beta in [1.0, 0.5] {
        let p = OperatorParams::new(beta, n).unwrap();
        let t_end = 0.1;
        let steps = (t_end / (0.5 * max_stable_dt(&p))).ceil() as usize;
        let dt = t_end / steps as f64;
        let u0: Vec<f64> = p
            .partition()
            .interior()
            .iter()
            .map(|x| (PI * x).sin())
            .collect();
        let states = simulate_she(&u0, &p, dt, steps, 0, false).unwrap();
        let ratio =
            states.last().unwrap().l2_norm(p.partition()) / states[0].l2_norm(p.partition());
        let want = (-beta * PI * PI * t_end).exp();
        worst = worst.max((ratio / want - 1.0).abs());
    }
    let rejected = shelab(&["she", "--n", "128", "--dt", "1e-3", "--zero-noise"]);
    let bound = format!("{}", 1.0 / (2.0 * 129.0 * 129.0));
    let stderr = String::from_utf8_lossy(&rejected.stderr);
    let cli_ok = rejected.status.code() == Some(3) && stderr.contains(&bound);
    check(
        worst < 0.02 && cli_ok,
        format!(
            "max relative decay error {worst:.3e}; unstable dt exit {:?}",
            rejected.status.code()
        ),
    )
}

fn reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 6] = [
        &["eig", "--n", "50", "--k", "4", "--seed", "3"],
        &[
            "converge", "--n-list", "31,63", "--k", "2", "--fine", "4096", "--seed", "5",
        ],
        &[
            "mc",
            "--n-list",
            "16,32",
            "--k",
            "2",
            "--replicas",
            "200",
            "--seed",
            "9",
        ],
        &[
            "weakform",
            "--n-list",
            "15,31",
            "--replicas",
            "20",
            "--fine",
            "4096",
            "--format",
            "json",
        ],
        &["she", "--n", "16", "--t-end", "0.01", "--seed", "4"],
        &[
            "mc",
            "--n-list",
            "16,32",
            "--k",
            "2",
            "--replicas",
            "200",
            "--seed",
            "9",
            "--coupling",
            "shared-path",
        ],
    ];
    let mut failures = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let out = dir.path().join(format!("run{i}.out"));
        let out = out.to_str().unwrap();
        let mut bytes = Vec::new();
        for threads in ["4", "4", "1"] {
            let mut a: Vec<&str> = args.to_vec();
            a.extend(["--out", out, "--threads", threads]);
            let status = shelab(&a).status;
            if !status.success() {
                failures.push(format!("{} exit {:?}", args[0], status.code()));
            }
            bytes.push(std::fs::read(out).unwrap_or_default());
        }
        if bytes.iter().any(|b| *b != bytes[0]) || bytes[0].is_empty() {
            failures.push(format!("{} output differs", args[0]));
        }
    }
    let cfg = MonteCarloConfig::new(40, 1.0, 3, 300, 11);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_eigen(&cfg).unwrap())
    };
    let (one, many) = (run(1), run(4));
    let same = one.iter().zip(&many).all(|(a, b)| {
        a.sorted()
            .iter()
            .zip(&b.sorted())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    });
    if !same {
        failures.push("monte_carlo_eigen depends on worker count".into());
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} CLI runs byte-identical across repeats and 1/4 threads",
                runs.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("solver exactness", solver_exactness),
        ("oracle equivalence", oracle_equivalence),
        ("pathwise Rayleigh identity", pathwise_identity),
        ("min-max exactness", minmax_exactness),
        ("Gram convergence", gram_convergence),
        ("coupled spectral convergence", coupled_spectral_convergence),
        ("distributional convergence", distributional_convergence),
        ("weak-form mean-square convergence", weak_form_mse),
        ("weak-form variant agreement", weak_form_variants),
        ("heat equation sanity", she_sanity),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
