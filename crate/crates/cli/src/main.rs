//! `comp-pca`: sparse principal subspaces of compositional data.

// `!(x > 0.0)` guards are written that way so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clr_spca::{Penalty, Preprocessing, SparsityMode, TransformTag};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "comp-pca", version, about = "Sparse principal subspace estimation for compositional data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Zero replacement, closure and a transform applied to a count table.
    Transform(TransformArgs),
    /// Fit a sparse subspace at a fixed penalty or with cross-validation.
    Fit(FitArgs),
    /// Run a simulation scenario and tabulate subspace errors per method.
    Simulate(SimulateArgs),
    /// Scores and loadings on the first two components of a fit.
    BiplotData(BiplotArgs),
    /// Identifiability quantities and bound check for a covariance matrix.
    TheoryCheck(TheoryArgs),
    /// Orthonormality defect of the solver output across values of mu.
    MuSweep(MuSweepArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PreprocessArgs {
    /// clr, log, raw, power, or precomputed (input already transformed).
    #[arg(long, default_value = "clr")]
    pub transform: TransformTag,
    /// Value substituted for zero counts.
    #[arg(long, default_value_t = clr_spca::transforms::DEFAULT_PSEUDOCOUNT)]
    pub pseudocount: f64,
    /// Exponent of the power transform, in (0, 1].
    #[arg(long, default_value_t = clr_spca::transforms::DEFAULT_POWER_A)]
    pub power_a: f64,
}

impl PreprocessArgs {
    pub fn preprocessing(&self) -> Preprocessing {
        Preprocessing { transform: self.transform, pseudocount: self.pseudocount, power_a: self.power_a }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TransformArgs {
    /// Labeled count table: header row of variable names, first column of observation ids.
    pub input: PathBuf,
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub pre: PreprocessArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("penalty").required(true).args(["alpha", "cv"])))]
pub struct FitArgs {
    /// Labeled count table (or transformed data with --transform precomputed).
    pub input: PathBuf,
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub pre: PreprocessArgs,
    /// Subspace dimension, 1 <= d < p.
    #[arg(long)]
    pub d: usize,
    /// row or column.
    #[arg(long)]
    pub mode: SparsityMode,
    /// Penalty exponent, exactly one of 0, 1/2, 2/3, 1.
    #[arg(long)]
    pub q: Penalty,
    /// Fixed penalty weight.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Choose the penalty weight by k-fold cross-validation.
    #[arg(long)]
    pub cv: bool,
    /// Comma-separated penalty grid for --cv (default depends on --mode).
    #[arg(long, value_delimiter = ',', requires = "cv")]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = clr_spca::model_selection::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Seed for the fold split.
    #[arg(long, env = "COMP_PCA_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = clr_spca::solver::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = clr_spca::solver::DEFAULT_TOL)]
    pub tol: f64,
    /// Worker threads (0 = one per core, 1 = sequential).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    #[arg(long, short)]
    pub out_dir: PathBuf,
    /// Override the scenario's replicate count.
    #[arg(long, conflicts_with = "full")]
    pub replicates: Option<usize>,
    /// Run 100 replicates.
    #[arg(long)]
    pub full: bool,
    /// Override the scenario's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core, 1 = sequential).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BiplotArgs {
    /// fit.json written by `fit`.
    pub fit: PathBuf,
    /// The table the fit was computed from.
    pub data: PathBuf,
    #[arg(long, short)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TheoryArgs {
    /// Covariance matrix: JSON `{rows, cols, data}` or header-free CSV.
    pub omega: PathBuf,
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub d: usize,
    /// Sparsity class used for the radius R_q.
    #[arg(long)]
    pub mode: SparsityMode,
    #[arg(long)]
    pub q: Penalty,
    /// Sample size entering the statistical rate.
    #[arg(long)]
    pub n: usize,
    /// Sparse p x d basis for R_q (default: leading eigenvectors of the input).
    #[arg(long)]
    pub basis: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "scenario"])))]
pub struct MuSweepArgs {
    /// Labeled data table.
    pub input: Option<PathBuf>,
    /// Use the clr data of one replicate of this scenario instead of a table.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0, requires = "scenario")]
    pub replicate: u64,
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub pre: PreprocessArgs,
    #[arg(long, required_unless_present = "scenario")]
    pub d: Option<usize>,
    #[arg(long, required_unless_present = "scenario")]
    pub mode: Option<SparsityMode>,
    #[arg(long, required_unless_present = "scenario")]
    pub q: Option<Penalty>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10,100,1000,10000")]
    pub mus: Vec<f64>,
    #[arg(long, default_value_t = clr_spca::solver::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = clr_spca::solver::DEFAULT_TOL)]
    pub tol: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Transform(a) => commands::transform(a),
        Command::Fit(a) => commands::fit(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::BiplotData(a) => commands::biplot(a),
        Command::TheoryCheck(a) => commands::theory_check(a),
        Command::MuSweep(a) => commands::mu_sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("comp-pca: {f}");
            f.exit_code()
        }
    }
}
