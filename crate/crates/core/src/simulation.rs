//! Synthetic scenarios with sparse ground-truth subspaces, the method
//! comparison harness, and the identifiability quantities.
//!
//! # Seeding
//!
//! All randomness comes from ChaCha8 generators keyed by the master seed.
//! Replicate `r` draws each ingredient from its own stream,
//! `stream = 8·r + purpose`, so a replicate's data does not depend on which
//! other replicates run, or in what order, or on how many threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::fmt_f64;
use crate::linalg::{
    gamma_from_omega, leading_subspace, orthonormality_defect, projector_distance_sq, sample_covariance, sin_theta_sq,
    spectral_decomposition, OrthonormalBasis, SymmetricMatrix,
};
use crate::model_selection::{default_grid, fit_with_cv, CvOptions, DEFAULT_FOLDS};
use crate::parallel::Execution;
use crate::solver::{Penalty, PreparedProblem, SolverConfig, SparsityMode, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::transforms::{
    closure_values, clr, log_transform, power_transform, raw, CompositionMatrix, TransformTag, TransformedMatrix,
};

const STREAMS_PER_REPLICATE: u64 = 8;

/// What each stream of a replicate is used for.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Basis = 0,
    Wishart = 1,
    Mean = 2,
    Sample = 3,
    Folds = 4,
}

/// The generator for `(seed, replicate, purpose)`.
pub fn stream_rng(seed: u64, replicate: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate * STREAMS_PER_REPLICATE + purpose as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBasisDistribution {
    Normal,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Solver on the covariance of the unobservable log-basis.
    Oracle,
    /// Solver on the clr covariance.
    Proposed,
    /// Solver on the covariance of log compositions.
    Log,
    /// Solver on the covariance of the raw compositions.
    Raw,
    /// Solver on the covariance of power-transformed compositions.
    Power,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Oracle, Method::Proposed, Method::Log, Method::Raw, Method::Power];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "Oracle",
            Method::Proposed => "Proposed",
            Method::Log => "Log",
            Method::Raw => "Raw",
            Method::Power => "Power",
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_folds() -> usize {
    DEFAULT_FOLDS
}
fn default_power_a() -> f64 {
    0.5
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_replicates() -> usize {
    20
}

/// One simulation cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub d: usize,
    pub r0: usize,
    pub sparsity: SparsityMode,
    pub q: Penalty,
    pub distribution: LogBasisDistribution,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Penalty grid; the mode's default `exp(a₀)` grid when absent.
    #[serde(default)]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Exponent of the power-transform comparator.
    #[serde(default = "default_power_a")]
    pub power_a: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d <= self.r0 && self.r0 <= self.p) {
            return Err(invalid(format!("need d <= r0 <= p (d={}, r0={}, p={})", self.d, self.r0, self.p)));
        }
        if self.d < 2 {
            return Err(invalid("d must be at least 2 for the eigenvalue profile"));
        }
        if self.sparsity == SparsityMode::Column && 2 * self.r0 > self.p {
            return Err(invalid(format!("column sparsity needs 2*r0 <= p (r0={}, p={})", self.r0, self.p)));
        }
        if self.n < 10 {
            return Err(invalid(format!("n must be at least 10, got {}", self.n)));
        }
        if self.replicates == 0 {
            return Err(invalid("replicates must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods list is empty"));
        }
        if matches!(&self.alpha_grid, Some(g) if g.is_empty()) {
            return Err(invalid("alpha_grid is empty"));
        }
        if !(self.power_a > 0.0 && self.power_a <= 1.0) {
            return Err(invalid(format!("power_a must lie in (0, 1], got {}", self.power_a)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        self.alpha_grid.clone().unwrap_or_else(|| default_grid(self.sparsity))
    }
}

fn gaussian_orthonormal(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    let mut q = g.qr().q();
    for mut c in q.column_iter_mut() {
        crate::linalg::fix_sign(c.as_mut_slice());
    }
    q
}

/// `V = (V₁; 0)` with `V₁` an `R₀ × d` orthonormalized Gaussian block.
pub fn generate_row_sparse_basis(p: usize, d: usize, r0: usize, rng: &mut impl Rng) -> Result<OrthonormalBasis> {
    if d == 0 || d > r0 || r0 > p {
        return Err(invalid(format!("need 1 <= d <= r0 <= p (d={d}, r0={r0}, p={p})")));
    }
    let top = gaussian_orthonormal(r0, d, rng);
    let mut v = DMatrix::zeros(p, d);
    v.view_mut((0, 0), (r0, d)).copy_from(&top);
    OrthonormalBasis::new(v)
}

/// `V = (blkdiag(V₁₁, V₂₂); 0)` with orthonormalized Gaussian blocks of
/// sizes `R₀ × ⌈d/2⌉` and `R₀ × ⌊d/2⌋` on disjoint rows.
pub fn generate_col_sparse_basis(p: usize, d: usize, r0: usize, rng: &mut impl Rng) -> Result<OrthonormalBasis> {
    let (d1, d2) = (d.div_ceil(2), d / 2);
    if d < 2 || d1 > r0 || 2 * r0 > p {
        return Err(invalid(format!("need 2 <= d, ceil(d/2) <= r0, 2 r0 <= p (d={d}, r0={r0}, p={p})")));
    }
    let b1 = gaussian_orthonormal(r0, d1, rng);
    let b2 = gaussian_orthonormal(r0, d2, rng);
    let mut v = DMatrix::zeros(p, d);
    v.view_mut((0, 0), (r0, d1)).copy_from(&b1);
    v.view_mut((r0, d1), (r0, d2)).copy_from(&b2);
    OrthonormalBasis::new(v)
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub v_true: OrthonormalBasis,
    pub omega: SymmetricMatrix,
    /// `λ₁ … λ_{d+1}`
    pub lambdas: Vec<f64>,
    pub mu: DVector<f64>,
}

/// Eigenvalue profile `λ_i = (3.6 − 2(i−1)/(d−1)) λ_{d+1}`, `i = 1..d`.
pub fn spike_profile(d: usize, lambda_next: f64) -> Result<Vec<f64>> {
    if d < 2 {
        return Err(invalid("the eigenvalue profile divides by d-1; choose d >= 2"));
    }
    Ok((1..=d).map(|i| (3.6 - 2.0 * (i - 1) as f64 / (d - 1) as f64) * lambda_next).collect())
}

/// `Ω = V D Vᵀ + (I − VVᵀ) K (I − VVᵀ)` with `K ~ Wishart(p + 10, I/p)`,
/// `λ_{d+1} = ‖(I − VVᵀ) K (I − VVᵀ)‖₂`, plus a mean vector uniform on `[0, 10]`.
pub fn build_covariance(
    v: &OrthonormalBasis,
    wishart_rng: &mut impl Rng,
    mean_rng: &mut impl Rng,
) -> Result<GroundTruth> {
    let (p, d) = (v.p(), v.d());
    let vm = v.as_matrix();
    let g = DMatrix::<f64>::from_fn(p, p + 10, |_, _| StandardNormal.sample(wishart_rng));
    // (I − VVᵀ) G, then K's projection is (PG)(PG)ᵀ / p.
    let pg = &g - vm * vm.tr_mul(&g);
    let residual = SymmetricMatrix::symmetrize(&pg * pg.transpose() / p as f64);
    let lambda_next = spectral_decomposition(&residual).eigenvalues[0];
    let mut lambdas = spike_profile(d, lambda_next)?;
    let scaled = DMatrix::from_fn(p, d, |i, j| vm[(i, j)] * lambdas[j]);
    let omega = SymmetricMatrix::symmetrize(scaled * vm.transpose() + residual.as_matrix());
    lambdas.push(lambda_next);
    let mu = DVector::from_fn(p, |_, _| mean_rng.random_range(0.0..10.0));
    Ok(GroundTruth { v_true: v.clone(), omega, lambdas, mu })
}

/// Symmetric square root of a PSD matrix; negative round-off eigenvalues are
/// clamped to zero.
pub fn symmetric_sqrt(a: &SymmetricMatrix) -> DMatrix<f64> {
    let sp = spectral_decomposition(a);
    let v = &sp.eigenvectors;
    let roots: Vec<f64> = sp.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * roots[j]);
    scaled * v.transpose()
}

/// `n` log-basis rows: `N(μ, Ω)`, or `μ + F U/√10` with `FFᵀ = Ω` and
/// `U` entries i.i.d. Gamma(shape 10, scale 1), uncentered.
pub fn sample_log_basis(
    n: usize,
    truth: &GroundTruth,
    dist: LogBasisDistribution,
    rng: &mut impl Rng,
) -> Result<TransformedMatrix> {
    let p = truth.mu.len();
    let f = symmetric_sqrt(&truth.omega);
    let noise = match dist {
        LogBasisDistribution::Normal => DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng)),
        LogBasisDistribution::Gamma => {
            let gamma = Gamma::new(10.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
            DMatrix::from_fn(n, p, |_, _| gamma.sample(rng) / 10f64.sqrt())
        }
    };
    // rows are (F u_k)ᵀ = u_kᵀ F
    let mut y = noise * f;
    for mut row in y.row_iter_mut() {
        row += truth.mu.transpose();
    }
    TransformedMatrix::new(y, TransformTag::OracleLogBasis)
}

/// `X = closure(exp(Y))`, with each row shifted by its max before `exp`.
pub fn compose(y: &DMatrix<f64>) -> Result<CompositionMatrix> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("log-basis has non-finite entries"));
    }
    let mut w = y.clone();
    for mut row in w.row_iter_mut() {
        let m = row.max();
        row.apply(|v| *v = (*v - m).exp());
    }
    closure_values(&w)
}

/// `‖V‖_{2,q}^q = Σ_i ‖v_i*‖₂^q`; the number of nonzero rows when `q = 0`.
pub fn row_sparsity_radius(v: &DMatrix<f64>, q: f64) -> f64 {
    v.row_iter().map(|r| lq_term(r.norm(), q)).sum()
}

/// `‖V‖_{*,q}^q = max_j Σ_i |v_ij|^q`; the largest column support when `q = 0`.
pub fn column_sparsity_radius(v: &DMatrix<f64>, q: f64) -> f64 {
    v.column_iter().map(|c| c.iter().map(|x| lq_term(x.abs(), q)).sum::<f64>()).fold(0.0, f64::max)
}

fn lq_term(x: f64, q: f64) -> f64 {
    if q == 0.0 {
        f64::from(u8::from(x != 0.0))
    } else {
        x.powf(q)
    }
}

/// `c(q) = (2−q)/(2(1−q)) · (2(1−q)/q)^{q/(2−q)}` on `(0, 1)`, and 2 at `q ∈ {0, 1}`.
pub fn c_of_q(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("q must lie in [0, 1], got {q}")));
    }
    if q == 0.0 || q == 1.0 {
        return Ok(2.0);
    }
    Ok((2.0 - q) / (2.0 * (1.0 - q)) * (2.0 * (1.0 - q) / q).powf(q / (2.0 - q)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryQuantities {
    /// `λ₁λ_{d+1} / (λ_d − λ_{d+1})²`
    pub sigma1_sq: f64,
    /// `λ₁² / (λ_d − λ_{d+1})²`
    pub sigma2_sq: f64,
    pub c_q: f64,
    /// `9 c(q)² σ₂² d² R_q^{2/(2−q)} / p`
    pub bound_theorem1: f64,
    /// `√2 R_q^{1/2} ((d + log p)/n)^{1/2 − q/4}`
    pub epsilon_n: f64,
}

/// `lambdas` holds at least `λ₁ … λ_{d+1}` in descending order.
pub fn theory_quantities(lambdas: &[f64], d: usize, p: usize, r_q: f64, q: f64, n: usize) -> Result<TheoryQuantities> {
    if d == 0 || lambdas.len() <= d {
        return Err(invalid(format!("need lambda_1..lambda_(d+1) (d={d}, got {})", lambdas.len())));
    }
    let (l1, ld, ld1) = (lambdas[0], lambdas[d - 1], lambdas[d]);
    let gap = ld - ld1;
    if !(gap > 0.0) {
        return Err(invalid(format!("eigengap lambda_d - lambda_(d+1) = {gap} must be positive")));
    }
    let c_q = c_of_q(q)?;
    let sigma1_sq = l1 * ld1 / (gap * gap);
    let sigma2_sq = l1 * l1 / (gap * gap);
    let (df, pf, nf) = (d as f64, p as f64, n as f64);
    let bound_theorem1 = 9.0 * c_q * c_q * sigma2_sq * df * df * r_q.powf(2.0 / (2.0 - q)) / pf;
    let epsilon_n = 2f64.sqrt() * r_q.sqrt() * ((df + pf.ln()) / nf).powf(0.5 - q / 4.0);
    Ok(TheoryQuantities { sigma1_sq, sigma2_sq, c_q, bound_theorem1, epsilon_n })
}

/// The population-level comparison between `Ω` and `Γ = GΩG`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityCheck {
    /// `‖sinΘ(S_Ω, S_Γ)‖²_F`
    pub distance_sq: f64,
    pub quantities: TheoryQuantities,
    pub r_q: f64,
    pub bound_holds: bool,
    /// Largest `λ_j(Γ) − λ_j(Ω)`; nonpositive up to round-off when eigenvalues interlace.
    pub max_interlacing_excess: f64,
}

/// Compares the leading `d`-subspaces of `Ω` and `GΩG` and evaluates the
/// identifiability bound with `R_q` taken from `v_sparse` under `mode`.
pub fn identifiability_check(
    omega: &SymmetricMatrix,
    d: usize,
    v_sparse: &DMatrix<f64>,
    mode: SparsityMode,
    q: f64,
    n: usize,
) -> Result<IdentifiabilityCheck> {
    let p = omega.dim();
    let sp_omega = spectral_decomposition(omega);
    let gamma = gamma_from_omega(omega);
    let sp_gamma = spectral_decomposition(&gamma);
    let distance_sq = sin_theta_sq(&sp_omega.leading(d)?, &sp_gamma.leading(d)?)?;
    let r_q = match mode {
        SparsityMode::Row => row_sparsity_radius(v_sparse, q),
        SparsityMode::Column => column_sparsity_radius(v_sparse, q),
    };
    let quantities = theory_quantities(&sp_omega.eigenvalues, d, p, r_q, q, n)?;
    let max_interlacing_excess =
        sp_gamma.eigenvalues.iter().zip(&sp_omega.eigenvalues).map(|(g, o)| g - o).fold(f64::NEG_INFINITY, f64::max);
    Ok(IdentifiabilityCheck {
        distance_sq,
        bound_holds: distance_sq <= quantities.bound_theorem1,
        quantities,
        r_q,
        max_interlacing_excess,
    })
}

/// Ground truth for replicate `r` of a scenario.
pub fn scenario_truth(cfg: &ScenarioConfig, replicate: u64) -> Result<GroundTruth> {
    let mut basis_rng = stream_rng(cfg.seed, replicate, Stream::Basis);
    let v = match cfg.sparsity {
        SparsityMode::Row => generate_row_sparse_basis(cfg.p, cfg.d, cfg.r0, &mut basis_rng)?,
        SparsityMode::Column => generate_col_sparse_basis(cfg.p, cfg.d, cfg.r0, &mut basis_rng)?,
    };
    build_covariance(
        &v,
        &mut stream_rng(cfg.seed, replicate, Stream::Wishart),
        &mut stream_rng(cfg.seed, replicate, Stream::Mean),
    )
}

/// Ground truth, log-basis sample and compositions for replicate `r`.
pub fn replicate_sample(
    cfg: &ScenarioConfig,
    replicate: u64,
) -> Result<(GroundTruth, TransformedMatrix, CompositionMatrix)> {
    let truth = scenario_truth(cfg, replicate)?;
    let y = sample_log_basis(cfg.n, &truth, cfg.distribution, &mut stream_rng(cfg.seed, replicate, Stream::Sample))?;
    let x = compose(y.values())?;
    Ok((truth, y, x))
}

/// Outcome of one method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub replicate: usize,
    pub method: Method,
    /// `½‖V̂V̂ᵀ − VVᵀ‖²_F` against the true basis.
    pub error: f64,
    pub alpha: f64,
    pub orthonormality_defect: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replicate: usize,
    pub method: Method,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean: f64,
    /// Standard error of the mean across replicates.
    pub se: f64,
    pub count: usize,
}

/// Mean squared subspace error per method, with the per-replicate records
/// behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseTable {
    pub summaries: Vec<MethodSummary>,
    pub records: Vec<MethodRecord>,
    pub failures: Vec<Failure>,
}

impl MseTable {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    /// `method,mean,se,count`, one line per method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,mean,se,count\n");
        for s in &self.summaries {
            out.push_str(&format!("{},{},{},{}\n", s.method.name(), fmt_f64(s.mean), fmt_f64(s.se), s.count));
        }
        out
    }
}

/// Pairwise summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / m as f64;
    if m == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (m - 1) as f64;
    (mean, (var / m as f64).sqrt())
}

/// The data matrix a method works on, from the log-basis sample `y` and
/// its compositions `x`.
pub fn method_data(
    method: Method,
    y: &TransformedMatrix,
    x: &CompositionMatrix,
    power_a: f64,
) -> Result<TransformedMatrix> {
    match method {
        Method::Oracle => Ok(y.clone()),
        Method::Proposed => clr(x),
        Method::Log => log_transform(x),
        Method::Raw => Ok(raw(x)),
        Method::Power => power_transform(x, power_a),
    }
}

fn run_replicate(
    cfg: &ScenarioConfig,
    replicate: usize,
    exec: Execution,
) -> Vec<std::result::Result<MethodRecord, Failure>> {
    let fail_all = |e: Error| {
        cfg.methods.iter().map(|&method| Err(Failure { replicate, method, message: e.to_string() })).collect::<Vec<_>>()
    };
    let r = replicate as u64;
    let (truth, y, x) = match replicate_sample(cfg, r) {
        Ok(t) => t,
        Err(e) => return fail_all(e),
    };
    let fold_seed: u64 = stream_rng(cfg.seed, r, Stream::Folds).random();
    let grid = cfg.grid();
    let opts = CvOptions { folds: cfg.folds, seed: fold_seed, max_iter: cfg.max_iter, tol: cfg.tol, execution: exec };

    exec.map(cfg.methods.clone(), |method| {
        let run = || -> Result<MethodRecord> {
            let z = method_data(method, &y, &x, cfg.power_a)?;
            let (fit, cv) = fit_with_cv(&z, cfg.d, cfg.sparsity, cfg.q, &grid, &opts)?;
            Ok(MethodRecord {
                replicate,
                method,
                error: projector_distance_sq(&fit.v_hat, truth.v_true.as_matrix())?,
                alpha: cv.best_alpha,
                orthonormality_defect: fit.diagnostics.orthonormality_defect,
                iterations: fit.diagnostics.iterations,
                converged: fit.diagnostics.converged,
                degenerate: fit.degenerate,
            })
        };
        run().map_err(|e| Failure { replicate, method, message: e.to_string() })
    })
}

/// Runs every replicate and method of the scenario and aggregates the errors.
pub fn run_scenario(cfg: &ScenarioConfig, exec: Execution) -> Result<MseTable> {
    cfg.validate()?;
    let per_rep = exec.map((0..cfg.replicates).collect(), |r| run_replicate(cfg, r, exec));
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for outcome in per_rep.into_iter().flatten() {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(f) => {
                log::warn!("replicate {} method {} excluded: {}", f.replicate, f.method.name(), f.message);
                failures.push(f);
            }
        }
    }
    let summaries = cfg
        .methods
        .iter()
        .map(|&method| {
            let errs: Vec<f64> = records.iter().filter(|r| r.method == method).map(|r| r.error).collect();
            let (mean, se) = mean_and_se(&errs);
            MethodSummary { method, mean, se, count: errs.len() }
        })
        .collect();
    Ok(MseTable { summaries, records, failures })
}

/// `‖V̂ᵀV̂ − I‖_max` of the fit at each `μ`, other settings fixed.
pub fn mu_sweep(problem: &PreparedProblem, base: &SolverConfig, mus: &[f64]) -> Result<Vec<(f64, f64)>> {
    mus.iter()
        .map(|&mu| {
            let cfg = SolverConfig { mu, ..base.clone() };
            let fit = problem.fit(&cfg)?;
            Ok((mu, orthonormality_defect(&fit.v_hat)))
        })
        .collect()
}

/// Leading `d`-subspace of the plain eigendecomposition (no sparsity).
pub fn standard_pca(z: &TransformedMatrix, d: usize) -> Result<OrthonormalBasis> {
    leading_subspace(&sample_covariance(z)?, d)
}
