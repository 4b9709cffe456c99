use std::path::Path;

use serde_json::{json, Value};
use shelab_core::linalg::eigen_bisect;
use shelab_core::noise::{coarsen, default_fine_n, iid_noise, BrownianPath, NoiseIncrements};
use shelab_core::operator::{assemble_matrix, max_stable_dt, simulate_she_strided, OperatorParams};
use shelab_core::stats::{
    coupled_eigen_study, ensemble_study, mse_weakform, quantiles, CoupledConfig, Coupling,
    EnsembleConfig, MseConfig, PathSupply,
};

use crate::args::{
    Common, ConvergeArgs, CouplingArg, EigArgs, Initial, McArgs, SheArgs, WeakformArgs,
};
use crate::error::{usage, AppError, AppResult};
use crate::table::{Cell, Table};

/// Smallest fine grid used when `--fine` is not given.
pub const MIN_DEFAULT_FINE: usize = 1 << 16;

pub const QUANTILE_PROBS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// The result of one command: its data and the values it derived from
/// the flags (echoed next to the flags in the metadata).
pub struct Outcome {
    pub table: Table,
    pub resolved: Value,
}

/// Flags as given, for the metadata block. `--threads` is left out since
/// it cannot change the data.
pub fn echo_common(command: &str, c: &Common) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "n": c.n,
        "n_list": c.n_list,
        "beta": c.beta,
        "k": c.k,
        "m": c.m,
        "fine": c.fine,
        "replicas": c.replicas,
        "seed": c.seed,
        "tol": c.tol,
        "out": c.out.as_ref().map(|p| p.display().to_string()),
        "format": c.format,
        "zero_noise": c.zero_noise,
        "forced_path": c.forced_path.as_ref().map(|p| p.display().to_string()),
    })
}

fn single_n(c: &Common) -> AppResult<usize> {
    match (c.n, c.n_list.as_deref()) {
        (Some(n), _) => Ok(n),
        (None, Some([n])) => Ok(*n),
        _ => Err(usage("--n is required")),
    }
}

fn size_list(c: &Common) -> AppResult<Vec<usize>> {
    match (&c.n_list, c.n) {
        (Some(ns), _) => Ok(ns.clone()),
        (None, Some(n)) => Ok(vec![n]),
        (None, None) => Err(usage("--n-list (or --n) is required")),
    }
}

fn reject_both_hooks(c: &Common) -> AppResult<()> {
    if c.zero_noise && c.forced_path.is_some() {
        return Err(usage(
            "--zero-noise and --forced-path are mutually exclusive",
        ));
    }
    Ok(())
}

pub fn load_path(file: &Path) -> AppResult<BrownianPath> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| AppError::Io(format!("cannot read {}: {e}", file.display())))?;
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|e| usage(format!("{} line {}: {e}", file.display(), i + 1)))
        })
        .collect::<AppResult<Vec<f64>>>()?;
    Ok(BrownianPath::from_values(values)?)
}

/// The fine grid and the path source shared by the coupled commands.
fn path_supply(c: &Common, ns: &[usize]) -> AppResult<(usize, &'static str, PathSupply)> {
    reject_both_hooks(c)?;
    if let Some(file) = &c.forced_path {
        let path = load_path(file)?;
        if let Some(f) = c.fine.filter(|&f| f != path.fine_n()) {
            return Err(usage(format!(
                "--fine {f} disagrees with the forced path's {} steps",
                path.fine_n()
            )));
        }
        return Ok((path.fine_n(), "forced_path", PathSupply::Fixed(path)));
    }
    let (fine, source) = match c.fine {
        Some(f) => (f, "flag"),
        None => (
            default_fine_n(ns, MIN_DEFAULT_FINE)
                .ok_or_else(|| usage("lcm of n+1 over the n list overflows"))?,
            "default",
        ),
    };
    let scale = if c.zero_noise { 0.0 } else { 1.0 };
    Ok((fine, source, PathSupply::Sampled { scale }))
}

pub fn eig(args: &EigArgs) -> AppResult<Outcome> {
    let c = &args.common;
    reject_both_hooks(c)?;
    let n = single_n(c)?;
    let params = OperatorParams::new(c.beta, n)?;
    if c.k == 0 || c.k > n {
        return Err(usage(format!("--k must lie in 1..={n}")));
    }
    let noise = if let Some(file) = &c.forced_path {
        coarsen(&load_path(file)?, n)?
    } else if c.zero_noise {
        NoiseIncrements::zeros(n)?
    } else {
        iid_noise(c.seed, n)?
    };
    let a = assemble_matrix(&params, &noise)?;
    let neg = eigen_bisect(&a.negated(), 1, c.k, c.tol)?;
    let top = eigen_bisect(&a, n - c.k + 1, n, c.tol)?;
    let mut table = Table::new(&["k_index", "eig_A", "eig_negA"]);
    for j in 0..c.k {
        table.push(vec![
            (j + 1).into(),
            top.eigenvalues[c.k - 1 - j].into(),
            neg.eigenvalues[j].into(),
        ]);
    }
    Ok(Outcome {
        table,
        resolved: json!({
            "n": n,
            "tolerance_achieved": neg.tolerance_achieved.max(top.tolerance_achieved),
        }),
    })
}

pub fn converge(args: &ConvergeArgs) -> AppResult<Outcome> {
    let c = &args.common;
    let ns = size_list(c)?;
    let (fine, fine_source, path) = path_supply(c, &ns)?;
    let study = coupled_eigen_study(&CoupledConfig {
        ns: ns.clone(),
        fine_n: fine,
        seed: c.seed,
        k: c.k,
        m: c.m,
        tol: c.tol,
        path,
    })?;
    let mut table = Table::new(&[
        "n",
        "k_index",
        "eigenvalue",
        "gap_to_prev",
        "ritz_reference",
    ]);
    for (i, &n) in ns.iter().enumerate() {
        for j in 0..c.k {
            table.push(vec![
                n.into(),
                (j + 1).into(),
                study.eigenvalues[i][j].into(),
                study.gap(i, j).into(),
                study.ritz_reference[j].into(),
            ]);
        }
    }
    let verdicts: Vec<bool> = study
        .reports
        .iter()
        .map(|r| r.monotone_within_slack)
        .collect();
    Ok(Outcome {
        table,
        resolved: json!({
            "fine": fine,
            "fine_source": fine_source,
            "gap_slack": shelab_core::stats::GAP_SLACK,
            "gaps_monotone_within_slack": verdicts,
        }),
    })
}

pub fn mc(args: &McArgs) -> AppResult<Outcome> {
    let c = &args.common;
    if c.forced_path.is_some() {
        return Err(usage(
            "mc draws fresh noise per replica; --forced-path is not supported",
        ));
    }
    let ns = size_list(c)?;
    let replicas = c.replicas.unwrap_or(1000);
    let study = ensemble_study(&EnsembleConfig {
        ns: ns.clone(),
        beta: c.beta,
        k: c.k,
        replicas,
        seed: c.seed,
        noise_scale: if c.zero_noise { 0.0 } else { 1.0 },
        tol: c.tol,
        coupling: match args.coupling {
            CouplingArg::Iid => Coupling::Iid,
            CouplingArg::SharedPath => Coupling::SharedPath,
        },
    })?;
    let mut table = Table::new(&[
        "section",
        "n",
        "k_index",
        "q05",
        "q25",
        "q50",
        "q75",
        "q95",
        "ks_to_ref",
    ]);
    for (i, &n) in ns.iter().enumerate() {
        for (j, sample) in study.samples[i].iter().enumerate() {
            let mut row: Vec<Cell> = vec!["quantile".into(), n.into(), (j + 1).into()];
            row.extend(
                quantiles(sample, &QUANTILE_PROBS)?
                    .into_iter()
                    .map(Cell::from),
            );
            row.push(Cell::Empty);
            table.push(row);
        }
    }
    for (i, &n) in ns.iter().enumerate() {
        for (j, d) in study.ks_to_ref[i].iter().enumerate() {
            let mut row: Vec<Cell> = vec!["ks".into(), n.into(), (j + 1).into()];
            row.extend(std::iter::repeat_n(Cell::Empty, QUANTILE_PROBS.len()));
            row.push((*d).into());
            table.push(row);
        }
    }
    Ok(Outcome {
        table,
        resolved: json!({
            "replicas": replicas,
            "coupling": args.coupling,
            "ks_reference_n": ns.last(),
        }),
    })
}

pub fn weakform(args: &WeakformArgs) -> AppResult<Outcome> {
    let c = &args.common;
    let ns = size_list(c)?;
    let replicas = c.replicas.unwrap_or(500);
    let (fine, fine_source, paths) = path_supply(c, &ns)?;
    let report = mse_weakform(&MseConfig {
        ns: ns.clone(),
        replicas,
        fine_n: fine,
        seed: c.seed,
        beta: c.beta,
        u_mode: args.u_mode,
        v_mode: args.v_mode,
        paths,
    })?;
    let mut table = Table::new(&["n", "mse", "monotone_flag"]);
    for (i, &(n, mse)) in report.points.iter().enumerate() {
        let flag = i == 0 || report.steps[i - 1];
        table.push(vec![n.into(), mse.into(), flag.into()]);
    }
    Ok(Outcome {
        table,
        resolved: json!({
            "fine": fine,
            "fine_source": fine_source,
            "replicas": replicas,
            "u_mode": args.u_mode,
            "v_mode": args.v_mode,
            "mse_slack": report.slack,
            "monotone_within_slack": report.monotone_within_slack,
        }),
    })
}

pub fn she(args: &SheArgs) -> AppResult<Outcome> {
    let c = &args.common;
    if c.forced_path.is_some() {
        return Err(usage(
            "she draws space-time noise; --forced-path is not supported",
        ));
    }
    let n = single_n(c)?;
    let params = OperatorParams::new(c.beta, n)?;
    if !(args.t_end > 0.0) {
        return Err(usage("--t-end must be positive"));
    }
    let max_dt = max_stable_dt(&params);
    let (dt, steps) = match (args.dt, args.steps) {
        (Some(dt), Some(steps)) => (dt, steps),
        (Some(dt), None) => (
            dt,
            ((args.t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize,
        ),
        (None, Some(steps)) => (args.t_end / steps.max(1) as f64, steps),
        (None, None) => {
            let steps = (args.t_end / (0.5 * max_dt)).ceil() as usize;
            (args.t_end / steps as f64, steps)
        }
    };
    if steps == 0 {
        return Err(usage("--steps must be >= 1"));
    }
    let stride = args.stride.unwrap_or((steps / 10).max(1));
    let partition = params.partition();
    let initial: Vec<f64> = match args.initial {
        Initial::Sine => partition
            .interior()
            .iter()
            .map(|x| (std::f64::consts::PI * x).sin())
            .collect(),
        Initial::Zero => vec![0.0; n],
    };
    let states = simulate_she_strided(&initial, &params, dt, steps, c.seed, !c.zero_noise, stride)?;
    let xs = partition.interior();
    let mut table = Table::new(&["t", "x", "u", "l2_norm"]);
    for s in &states {
        let norm = s.l2_norm(partition);
        for (x, u) in xs.iter().zip(&s.u) {
            table.push(vec![s.t.into(), (*x).into(), (*u).into(), norm.into()]);
        }
    }
    Ok(Outcome {
        table,
        resolved: json!({
            "n": n,
            "dt": dt,
            "max_stable_dt": max_dt,
            "steps": steps,
            "stride": stride,
            "t_end": args.t_end,
            "initial": args.initial,
            "noise_on": !c.zero_noise,
        }),
    })
}
