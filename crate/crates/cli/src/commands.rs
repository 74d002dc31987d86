use std::fs;
use std::path::Path;

use clr_spca::biplot::biplot_data;
use clr_spca::io::{
    dense_csv, labeled_csv, loadings_csv, parse_dense_csv, parse_labeled_csv, LabeledMatrix, MatrixEnvelope,
};
use clr_spca::linalg::{leading_subspace, sample_covariance};
use clr_spca::model_selection::{default_grid, fit_with_cv, CvOptions, CvResult};
use clr_spca::parallel::with_jobs;
use clr_spca::simulation::{
    identifiability_check, mu_sweep as sweep, replicate_sample, run_scenario, IdentifiabilityCheck, ScenarioConfig,
};
use clr_spca::solver::PreparedProblem;
use clr_spca::transforms::clr;
use clr_spca::{Execution, Penalty, Preprocessing, SolverConfig, SparsityMode, SubspaceFit, SymmetricMatrix};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::failure::{at, CmdResult, Failure};
use crate::manifest::{digest_bytes, Recorder};
use crate::{BiplotArgs, FitArgs, MuSweepArgs, SimulateArgs, TheoryArgs, TransformArgs};

const FULL_REPLICATES: usize = 100;

fn read_text(path: &Path, rec: &mut Recorder) -> CmdResult<String> {
    let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    rec.input(digest_bytes(path, &bytes));
    String::from_utf8(bytes).map_err(|_| Failure::Input(format!("{}: not valid UTF-8", path.display())))
}

fn read_table(path: &Path, rec: &mut Recorder) -> CmdResult<LabeledMatrix> {
    parse_labeled_csv(&read_text(path, rec)?).map_err(at(path))
}

/// A matrix from a JSON envelope (`.json`) or header-free CSV (anything else).
fn read_matrix(path: &Path, rec: &mut Recorder) -> CmdResult<DMatrix<f64>> {
    let text = read_text(path, rec)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let env: MatrixEnvelope =
            serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        env.check().map_err(at(path))?;
        Ok(env.data)
    } else {
        parse_dense_csv(&text).map_err(at(path))
    }
}

fn read_scenario(path: &Path, rec: &mut Recorder) -> CmdResult<ScenarioConfig> {
    let text = read_text(path, rec)?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn execution(jobs: usize) -> Execution {
    if jobs == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

pub fn transform(args: &TransformArgs) -> CmdResult<()> {
    let pre = args.pre.preprocessing();
    let mut rec = Recorder::new("transform", &args.out_dir, pre)?;
    let table = read_table(&args.input, &mut rec)?;
    let z = pre.apply(&table.values).map_err(at(&args.input))?;
    let out = LabeledMatrix { values: z.values().clone(), ..table };
    rec.write("transformed.csv", labeled_csv(&out).as_bytes())?;
    rec.finish()
}

/// Contents of `fit.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub preprocessing: Preprocessing,
    pub n: usize,
    /// Variable labels, one per row of `v_hat`.
    pub labels: Vec<String>,
    pub seed: u64,
    pub cv: Option<CvResult>,
    pub fit: SubspaceFit,
}

#[derive(Debug, Serialize)]
struct FitSettings<'a> {
    preprocessing: Preprocessing,
    d: usize,
    mode: SparsityMode,
    q: Penalty,
    alpha: Option<f64>,
    grid: Option<&'a [f64]>,
    folds: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
    jobs: usize,
}

pub fn fit(args: &FitArgs) -> CmdResult<()> {
    let grid = args.cv.then(|| args.grid.clone().unwrap_or_else(|| default_grid(args.mode)));
    let settings = FitSettings {
        preprocessing: args.pre.preprocessing(),
        d: args.d,
        mode: args.mode,
        q: args.q,
        alpha: args.alpha,
        grid: grid.as_deref(),
        folds: args.folds,
        seed: args.seed,
        max_iter: args.max_iter,
        tol: args.tol,
        jobs: args.jobs,
    };
    let mut rec = Recorder::new("fit", &args.out_dir, &settings)?;
    rec.seed("folds", args.seed);
    let table = read_table(&args.input, &mut rec)?;
    let z = settings.preprocessing.apply(&table.values).map_err(at(&args.input))?;
    let p = z.ncols();
    if args.d == 0 || args.d >= p {
        return Err(Failure::Input(format!("--d {} must satisfy 1 <= d < p = {p}", args.d)));
    }

    let (fit, cv) = with_jobs(args.jobs, || -> CmdResult<_> {
        match &grid {
            Some(grid) => {
                if grid.is_empty() {
                    return Err(Failure::Input("--grid is empty".into()));
                }
                let opts = CvOptions {
                    folds: args.folds,
                    seed: args.seed,
                    max_iter: args.max_iter,
                    tol: args.tol,
                    execution: execution(args.jobs),
                };
                let (fit, cv) = fit_with_cv(&z, args.d, args.mode, args.q, grid, &opts)?;
                Ok((fit, Some(cv)))
            }
            None => {
                let problem = PreparedProblem::new(sample_covariance(&z)?, args.d)?;
                let alpha = args.alpha.expect("clap requires --alpha or --cv");
                let mut cfg = SolverConfig::from_hyper(problem.default_hyperparameters()?, args.mode, args.q, alpha);
                cfg.max_iter = args.max_iter;
                cfg.tol = args.tol;
                Ok((problem.fit(&cfg)?, None))
            }
        }
    })?;
    if !fit.diagnostics.converged {
        log::warn!("solver stopped at the iteration limit ({})", fit.diagnostics.iterations);
    }

    let degenerate = fit.degenerate;
    let alpha = fit.alpha;
    rec.write("loadings.csv", loadings_csv(&table.col_ids, &fit.v_hat)?.as_bytes())?;
    let report = FitReport {
        preprocessing: settings.preprocessing,
        n: z.nrows(),
        labels: table.col_ids,
        seed: args.seed,
        cv,
        fit,
    };
    rec.write_json("fit.json", &report)?;
    rec.finish()?;
    if degenerate {
        log::warn!("alpha = {alpha} removed every variable; the estimate is all zero");
        return Err(Failure::Degenerate(format!("alpha = {alpha} gives an all-zero estimate")));
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CmdResult<()> {
    let mut rec = Recorder::new("simulate", &args.out_dir, args)?;
    let mut cfg = read_scenario(&args.scenario, &mut rec)?;
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if args.full {
        cfg.replicates = FULL_REPLICATES;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(at(&args.scenario))?;
    rec.set_config(serde_json::json!({ "args": args, "scenario": &cfg }))?;
    rec.seed("master", cfg.seed);

    let table = with_jobs(args.jobs, || run_scenario(&cfg, execution(args.jobs)))?;
    rec.write("mse_table.csv", table.to_csv().as_bytes())?;
    rec.write_json("records.json", &table)?;
    rec.finish()?;
    if let Some(s) = table.summaries.iter().find(|s| s.count == 0) {
        return Err(Failure::Numerical(format!("every replicate of method {} failed", s.method.name())));
    }
    Ok(())
}

pub fn biplot(args: &BiplotArgs) -> CmdResult<()> {
    let mut rec = Recorder::new("biplot-data", &args.out_dir, args)?;
    let report: FitReport = serde_json::from_str(&read_text(&args.fit, &mut rec)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.fit.display())))?;
    let table = read_table(&args.data, &mut rec)?;
    if table.col_ids != report.labels {
        return Err(Failure::Input(format!(
            "{}: column labels differ from those the fit was computed on",
            args.data.display()
        )));
    }
    let z = report.preprocessing.apply(&table.values).map_err(at(&args.data))?;
    let b = biplot_data(&z, &table.row_ids, &table.col_ids, &report.fit.v_hat)?;
    if b.kept_labels.is_empty() {
        log::warn!("no variable has a nonzero loading on the first two components");
    }
    rec.write("biplot.csv", b.to_csv().as_bytes())?;
    rec.finish()
}

#[derive(Debug, Serialize)]
struct TheoryReport {
    p: usize,
    d: usize,
    mode: SparsityMode,
    q: Penalty,
    n: usize,
    spectral_norm: f64,
    check: IdentifiabilityCheck,
    /// Allowed excess `1e-8·‖Ω‖₂` when comparing eigenvalues.
    interlacing_tolerance: f64,
    interlacing_holds: bool,
}

pub fn theory_check(args: &TheoryArgs) -> CmdResult<()> {
    let mut rec = Recorder::new("theory-check", &args.out_dir, args)?;
    let omega = SymmetricMatrix::new(read_matrix(&args.omega, &mut rec)?).map_err(at(&args.omega))?;
    let p = omega.dim();
    if args.d == 0 || args.d >= p {
        return Err(Failure::Input(format!("--d {} must satisfy 1 <= d < p = {p}", args.d)));
    }
    let basis = match &args.basis {
        Some(path) => {
            let v = read_matrix(path, &mut rec)?;
            if v.shape() != (p, args.d) {
                return Err(Failure::Input(format!(
                    "{}: basis is {:?}, expected ({p}, {})",
                    path.display(),
                    v.shape(),
                    args.d
                )));
            }
            v
        }
        None => leading_subspace(&omega, args.d)?.into_matrix(),
    };
    let check = identifiability_check(&omega, args.d, &basis, args.mode, args.q.q(), args.n)?;
    let spectral_norm = omega.spectral_norm();
    let interlacing_tolerance = 1e-8 * spectral_norm;
    let report = TheoryReport {
        p,
        d: args.d,
        mode: args.mode,
        q: args.q,
        n: args.n,
        spectral_norm,
        interlacing_holds: check.max_interlacing_excess <= interlacing_tolerance,
        interlacing_tolerance,
        check,
    };
    rec.write_json("theory.json", &report)?;
    rec.finish()
}

pub fn mu_sweep(args: &MuSweepArgs) -> CmdResult<()> {
    let mut rec = Recorder::new("mu-sweep", &args.out_dir, args)?;
    let (z, d, mode, q) = match (&args.scenario, &args.input) {
        (Some(path), _) => {
            let cfg = read_scenario(path, &mut rec)?;
            cfg.validate().map_err(at(path))?;
            rec.seed("master", cfg.seed);
            let (_, _, x) = replicate_sample(&cfg, args.replicate)?;
            (clr(&x)?, args.d.unwrap_or(cfg.d), args.mode.unwrap_or(cfg.sparsity), args.q.unwrap_or(cfg.q))
        }
        (None, Some(path)) => {
            let table = read_table(path, &mut rec)?;
            let z = args.pre.preprocessing().apply(&table.values).map_err(at(path))?;
            let missing = || Failure::Input("--d, --mode and --q are required with a data table".into());
            (z, args.d.ok_or_else(missing)?, args.mode.ok_or_else(missing)?, args.q.ok_or_else(missing)?)
        }
        (None, None) => unreachable!("clap requires a data table or --scenario"),
    };
    if let Some(m) = args.mus.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(Failure::Input(format!("mu values must be positive, got {m}")));
    }
    let problem = PreparedProblem::new(sample_covariance(&z)?, d)?;
    let mut cfg = SolverConfig::from_hyper(problem.default_hyperparameters()?, mode, q, args.alpha);
    cfg.max_iter = args.max_iter;
    cfg.tol = args.tol;
    let series = sweep(&problem, &cfg, &args.mus)?;

    let m = DMatrix::from_fn(series.len(), 2, |i, j| if j == 0 { series[i].0 } else { series[i].1 });
    let mut text = String::from("mu,max_dev\n");
    text.push_str(&dense_csv(&m));
    rec.write("mu_sweep.csv", text.as_bytes())?;
    rec.finish()
}
