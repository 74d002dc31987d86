//! K-fold cross-validation of the penalty weight.
//!
//! For every `α` and fold `u` the solver is fit on the other folds and scored
//! by the variance it captures on the held-out fold, `⟨S^{(u)}, V̂V̂ᵀ⟩`. The
//! selected `α` maximizes the score summed over folds.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{covariance_of, sample_covariance};
use crate::parallel::Execution;
use crate::solver::{Penalty, PreparedProblem, SolverConfig, SparsityMode, SubspaceFit, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::transforms::TransformedMatrix;

pub const DEFAULT_FOLDS: usize = 5;

/// `exp(a)` for `a` from `start` to `end` inclusive in steps of 0.5.
pub fn exp_grid(start: f64, end: f64) -> Vec<f64> {
    let steps = ((end - start) / 0.5).round() as i64;
    (0..=steps).map(|k| (start + 0.5 * k as f64).exp()).collect()
}

/// Default grid: `exp(a₀)`, `a₀ ∈ {−1.5, −1, …, 3}` for row sparsity and
/// `a₀ ∈ {0.5, 1, …, 5}` for column sparsity.
pub fn default_grid(mode: SparsityMode) -> Vec<f64> {
    match mode {
        SparsityMode::Row => exp_grid(-1.5, 3.0),
        SparsityMode::Column => exp_grid(0.5, 5.0),
    }
}

/// Fold index in `0..folds` for each of `n` observations: a seeded random
/// permutation cut into contiguous blocks, the first `n % folds` blocks one
/// larger than the rest.
pub fn make_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds == 0 || folds > n {
        return Err(invalid(format!("cannot split {n} observations into {folds} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut assignment = vec![0; n];
    let mut pos = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        for &obs in &perm[pos..pos + size] {
            assignment[obs] = f;
        }
        pos += size;
    }
    Ok(assignment)
}

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub execution: Execution,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: DEFAULT_FOLDS,
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub grid: Vec<f64>,
    /// Held-out score summed over folds, one per grid entry.
    pub scores: Vec<f64>,
    /// `fold_scores[a][u]`: score of grid entry `a` on fold `u`.
    pub fold_scores: Vec<Vec<f64>>,
    pub best_index: usize,
    pub best_alpha: f64,
    pub fold_assignment: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
}

pub fn cross_validate(
    z: &TransformedMatrix,
    d: usize,
    mode: SparsityMode,
    q: Penalty,
    grid: &[f64],
    opts: &CvOptions,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(invalid("penalty grid is empty"));
    }
    if let Some(a) = grid.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
        return Err(invalid(format!("grid value {a} is not a nonnegative number")));
    }
    let n = z.nrows();
    if opts.folds < 2 || n < opts.folds {
        return Err(invalid(format!("need n >= folds >= 2 (n={n}, folds={})", opts.folds)));
    }
    let assignment = make_folds(n, opts.folds, opts.seed)?;
    let mut members = vec![Vec::new(); opts.folds];
    for (obs, &f) in assignment.iter().enumerate() {
        members[f].push(obs);
    }
    if let Some((u, m)) = members.iter().enumerate().find(|(_, m)| m.len() < 2) {
        return Err(invalid(format!("fold {u} has {} observation(s); need at least 2", m.len())));
    }

    let fold_ids: Vec<usize> = (0..opts.folds).collect();
    let per_fold: Vec<Result<Vec<f64>>> = opts.execution.map(fold_ids, |u| {
        let train: Vec<usize> = (0..n).filter(|&i| assignment[i] != u).collect();
        let x = z.values();
        let s_train = covariance_of(&x.select_rows(&train))?;
        let s_test = covariance_of(&x.select_rows(&members[u]))?;
        let problem = PreparedProblem::new(s_train, d)?;
        let hyper = problem.default_hyperparameters()?;
        let scores: Vec<Result<f64>> = opts.execution.map(grid.to_vec(), |alpha| {
            let mut cfg = SolverConfig::from_hyper(hyper, mode, q, alpha);
            cfg.max_iter = opts.max_iter;
            cfg.tol = opts.tol;
            let fit = problem.fit(&cfg)?;
            Ok(s_test.quadratic_trace(&fit.v_hat))
        });
        scores.into_iter().collect()
    });
    let per_fold: Vec<Vec<f64>> = per_fold.into_iter().collect::<Result<_>>()?;

    let fold_scores: Vec<Vec<f64>> = (0..grid.len()).map(|a| per_fold.iter().map(|f| f[a]).collect()).collect();
    let scores: Vec<f64> = fold_scores.iter().map(|f| f.iter().sum()).collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(crate::Error::Numerical("non-finite cross-validation score".into()));
    }
    let best_index = select_best(grid, &scores);
    Ok(CvResult {
        grid: grid.to_vec(),
        scores,
        fold_scores,
        best_index,
        best_alpha: grid[best_index],
        fold_assignment: assignment,
        folds: opts.folds,
        seed: opts.seed,
    })
}

/// Cross-validates `α` on `z`, refits on all of `z`, and returns the fit.
pub fn fit_with_cv(
    z: &TransformedMatrix,
    d: usize,
    mode: SparsityMode,
    q: Penalty,
    grid: &[f64],
    opts: &CvOptions,
) -> Result<(SubspaceFit, CvResult)> {
    let cv = cross_validate(z, d, mode, q, grid, opts)?;
    let problem = PreparedProblem::new(sample_covariance(z)?, d)?;
    let mut cfg = SolverConfig::from_hyper(problem.default_hyperparameters()?, mode, q, cv.best_alpha);
    cfg.max_iter = opts.max_iter;
    cfg.tol = opts.tol;
    Ok((problem.fit(&cfg)?, cv))
}

/// Argmax of `scores`; exact ties go to the smallest `α`, then the earliest
/// position.
fn select_best(grid: &[f64], scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] || (scores[i] == scores[best] && grid[i] < grid[best]) {
            best = i;
        }
    }
    best
}
