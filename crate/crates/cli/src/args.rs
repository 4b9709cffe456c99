use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "shelab",
    version,
    about = "Spectral studies of discretized random Schrödinger operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of A_n and -A_n for one noise draw.
    Eig(EigArgs),
    /// Coupled pathwise convergence of the low spectrum along an n list.
    Converge(ConvergeArgs),
    /// Monte Carlo ensembles of the low spectrum, quantiles and KS distances.
    Mc(McArgs),
    /// Mean-square error of the discrete weak form against the continuum one.
    Weakform(WeakformArgs),
    /// Explicit Euler trajectory of the stochastic heat equation.
    She(SheArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Matrix size (number of interior grid points).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated, strictly ascending sizes.
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Sine modes in the Rayleigh–Ritz reference.
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    /// Steps of the fine Brownian grid; defaults to lcm(n+1)·2^p >= 65536.
    #[arg(long)]
    pub fine: Option<usize>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, hide = true)]
    pub zero_noise: bool,
    /// File of fine-grid Brownian values B_0..B_fine, one per line.
    #[arg(long, hide = true)]
    pub forced_path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingArg {
    /// Every size draws its own i.i.d. noise from the replica stream.
    Iid,
    /// Every size takes its increments from one Brownian path per replica.
    SharedPath,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = CouplingArg::Iid)]
    pub coupling: CouplingArg,
}

#[derive(Debug, Args)]
pub struct WeakformArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sine mode index of u.
    #[arg(long, default_value_t = 1)]
    pub u_mode: usize,
    /// Sine mode index of v.
    #[arg(long, default_value_t = 1)]
    pub v_mode: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Sine,
    Zero,
}

#[derive(Debug, Args)]
pub struct SheArgs {
    #[command(flatten)]
    pub common: Common,
    /// Time step; defaults to half the stability bound, shrunk to divide t-end.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of steps; overrides the step count derived from t-end.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub t_end: f64,
    /// Keep every stride-th state; defaults to steps/10.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum, default_value_t = Initial::Sine)]
    pub initial: Initial,
}
