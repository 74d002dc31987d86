//! Linearized proximal ADMM for sparse principal subspace estimation.
//!
//! The penalized problem
//!
//! ```text
//! minimize  −⟨S, UUᵀ⟩ + α pen(V) + μ/2 ‖Y‖²_F
//! s.t.      UᵀU = I_d,  U − V − Y = 0
//! ```
//!
//! is solved by alternating a linearized Procrustes step in `U`, an exact
//! proximal step in `V`, an exact minimization in `Y`, and a dual ascent step
//! in the multiplier `Λ`. Row mode penalizes `Σ_i ‖v_i*‖₂^q` (whole variables
//! drop out); column mode penalizes `Σ_j α_j ‖v_*j‖_q^q` entrywise.

mod procrustes;
mod prox;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use procrustes::procrustes_update;
pub use prox::{magnitude_objective, prox_magnitude, prox_row, prox_scalar, Penalty};

use crate::error::{invalid, Error, Result};
use crate::linalg::{orthonormality_defect, spectral_decomposition, OrthonormalBasis, SpectralPair, SymmetricMatrix};
use crate::matrix_serde;

/// Multiplier of `‖S‖₂` for the ADMM penalty `β`.
pub const BETA_SCALE: f64 = 5.8;
/// Multiplier of `‖S‖₂` for the proximal weight `ρ`.
pub const RHO_SCALE: f64 = 6.14;
/// Weight on `‖Y‖²` keeping `V` close to the orthonormal `U`.
pub const DEFAULT_MU: f64 = 1000.0;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparsityMode {
    Row,
    Column,
}

impl std::fmt::Display for SparsityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SparsityMode::Row => "row",
            SparsityMode::Column => "column",
        })
    }
}

impl std::str::FromStr for SparsityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(SparsityMode::Row),
            "column" | "col" => Ok(SparsityMode::Column),
            other => Err(invalid(format!("mode must be row or column (got {other:?})"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub beta: f64,
    pub rho: f64,
    pub mu: f64,
}

/// `β = 5.8‖S‖₂`, `ρ = 6.14‖S‖₂`, `μ = 1000`.
pub fn default_hyperparameters(s: &SymmetricMatrix) -> Result<Hyperparameters> {
    hyperparameters_for_norm(s.spectral_norm())
}

fn hyperparameters_for_norm(norm: f64) -> Result<Hyperparameters> {
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid(format!("covariance has spectral norm {norm}; cannot scale beta and rho")));
    }
    Ok(Hyperparameters { beta: BETA_SCALE * norm, rho: RHO_SCALE * norm, mu: DEFAULT_MU })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SparsityMode,
    pub q: Penalty,
    /// Row mode: the penalty weight. Column mode: the base weight `α` from
    /// which `α_j = α / ‖v⁰_*j‖₁`.
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub mu: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl SolverConfig {
    /// Default `β, ρ, μ` for `s`, with the stated mode, `q` and `α`.
    pub fn with_defaults(s: &SymmetricMatrix, mode: SparsityMode, q: Penalty, alpha: f64) -> Result<Self> {
        Ok(Self::from_hyper(default_hyperparameters(s)?, mode, q, alpha))
    }

    pub fn from_hyper(h: Hyperparameters, mode: SparsityMode, q: Penalty, alpha: f64) -> Self {
        Self { mode, q, alpha, beta: h.beta, rho: h.rho, mu: h.mu, max_iter: DEFAULT_MAX_ITER, tol: DEFAULT_TOL }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be nonnegative and finite, got {}", self.alpha)));
        }
        if !ok(self.beta) || !ok(self.rho) || !ok(self.mu) || !ok(self.tol) {
            return Err(invalid("beta, rho, mu and tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Iterates and per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub u: OrthonormalBasis,
    pub v: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub lambda: DMatrix<f64>,
    pub iter: usize,
    /// `‖V − U + Y‖_F`
    pub primal_residual: f64,
    /// `max(‖U − U_prev‖_F, ‖V − V_prev‖_F)`
    pub step_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub first_primal_residual: f64,
    pub step_delta: f64,
    /// `‖V̂ᵀV̂ − I_d‖_max`
    pub orthonormality_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    /// Indices of nonzero rows of `V̂`.
    Rows(Vec<usize>),
    /// Per column, indices of nonzero entries.
    Columns(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFit {
    pub p: usize,
    pub d: usize,
    pub mode: SparsityMode,
    pub q: Penalty,
    pub alpha: f64,
    /// Effective per-column weights (all equal to `alpha` in row mode).
    pub column_alphas: Vec<f64>,
    pub beta: f64,
    pub rho: f64,
    pub mu: f64,
    /// `⟨S, V̂V̂ᵀ⟩`
    pub objective: f64,
    pub support: Support,
    /// All of `V̂` is zero; the penalty removed every variable.
    pub degenerate: bool,
    pub diagnostics: Diagnostics,
    #[serde(with = "matrix_serde")]
    pub v_hat: DMatrix<f64>,
    #[serde(with = "matrix_serde")]
    pub u_hat: DMatrix<f64>,
}

impl SubspaceFit {
    pub fn u_basis(&self) -> OrthonormalBasis {
        OrthonormalBasis::new_unchecked(self.u_hat.clone())
    }
}

/// `α_j = α / ‖v⁰_*j‖₁` for each column of the initial basis.
pub fn column_alpha_vector(alpha: f64, v0: &OrthonormalBasis) -> Result<Vec<f64>> {
    v0.as_matrix()
        .column_iter()
        .enumerate()
        .map(|(j, c)| {
            let l1 = c.lp_norm(1);
            if l1 > 0.0 {
                Ok(alpha / l1)
            } else {
                Err(invalid(format!("initial basis column {j} is zero")))
            }
        })
        .collect()
}

/// A covariance with its spectral data computed once, reusable across many
/// penalty weights.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    s: SymmetricMatrix,
    d: usize,
    spectral: SpectralPair,
    init: OrthonormalBasis,
}

impl PreparedProblem {
    pub fn new(s: SymmetricMatrix, d: usize) -> Result<Self> {
        let p = s.dim();
        if d == 0 || d >= p {
            return Err(invalid(format!("subspace dimension {d} must satisfy 1 <= d < p = {p}")));
        }
        let spectral = spectral_decomposition(&s);
        let init = spectral.leading(d)?;
        Ok(Self { s, d, spectral, init })
    }

    pub fn covariance(&self) -> &SymmetricMatrix {
        &self.s
    }

    pub fn spectral(&self) -> &SpectralPair {
        &self.spectral
    }

    /// First `d` eigenvectors of `S`, the starting point for `U` and `V`.
    pub fn initial_basis(&self) -> &OrthonormalBasis {
        &self.init
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectral.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn default_hyperparameters(&self) -> Result<Hyperparameters> {
        hyperparameters_for_norm(self.spectral_norm())
    }

    pub fn fit(&self, cfg: &SolverConfig) -> Result<SubspaceFit> {
        self.fit_traced(cfg, |_| {})
    }

    /// Runs the solver, calling `observe` after every iteration.
    pub fn fit_traced(&self, cfg: &SolverConfig, mut observe: impl FnMut(&AdmmState)) -> Result<SubspaceFit> {
        cfg.validate()?;
        let (p, d) = (self.s.dim(), self.d);
        let column_alphas = match cfg.mode {
            SparsityMode::Row => vec![cfg.alpha; d],
            SparsityMode::Column => column_alpha_vector(cfg.alpha, &self.init)?,
        };
        let k1 = cfg.beta + cfg.rho;
        let s = self.s.as_matrix();

        let mut u = self.init.as_matrix().clone();
        let mut v = u.clone();
        let mut y = DMatrix::<f64>::zeros(p, d);
        let mut lambda = DMatrix::<f64>::zeros(p, d);
        let mut b = DMatrix::<f64>::zeros(p, d);
        let mut row_b = vec![0.0; d];
        let mut row_v = vec![0.0; d];

        let mut first_residual = f64::NAN;
        let mut residual = f64::NAN;
        let mut step = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;

        for k in 1..=cfg.max_iter {
            // U-update: Procrustes on the linearized augmented Lagrangian.
            let mut a = s * &u;
            a += (&lambda + (&v + &y) * cfg.beta + &u * cfg.rho) * 0.5;
            let u_next = procrustes_update(&a).into_matrix();

            // V-update: B = Λ + β(Y − U⁺) − ρV, then the proximal map.
            b.copy_from(&lambda);
            b += (&y - &u_next) * cfg.beta - &v * cfg.rho;
            let mut v_next = DMatrix::<f64>::zeros(p, d);
            match cfg.mode {
                SparsityMode::Row => {
                    for i in 0..p {
                        for j in 0..d {
                            row_b[j] = b[(i, j)];
                        }
                        prox::prox_row_into(&row_b, cfg.q, cfg.alpha, k1, &mut row_v);
                        for j in 0..d {
                            v_next[(i, j)] = row_v[j];
                        }
                    }
                }
                SparsityMode::Column => {
                    for j in 0..d {
                        let aj = column_alphas[j];
                        for i in 0..p {
                            v_next[(i, j)] = prox::prox_scalar_k1(b[(i, j)], cfg.q, aj, k1);
                        }
                    }
                }
            }

            // Y-update: exact minimizer given (U⁺, V⁺, Λ).
            let y_next = ((&u_next - &v_next) * cfg.beta - &lambda) / (cfg.mu + cfg.beta);
            let r = &v_next - &u_next + &y_next;
            lambda += &r * cfg.beta;

            residual = r.norm();
            step = (&u_next - &u).norm().max((&v_next - &v).norm());
            if k == 1 {
                first_residual = residual;
            }
            u = u_next;
            v = v_next;
            y = y_next;
            iterations = k;

            if !residual.is_finite() || !step.is_finite() || !lambda.iter().all(|x| x.is_finite()) {
                return Err(Error::Numerical(format!("non-finite iterate at iteration {k}")));
            }
            observe(&AdmmState {
                u: OrthonormalBasis::new_unchecked(u.clone()),
                v: v.clone(),
                y: y.clone(),
                lambda: lambda.clone(),
                iter: k,
                primal_residual: residual,
                step_delta: step,
            });
            if step <= cfg.tol {
                converged = true;
                break;
            }
        }

        let support = support_of(&v, cfg.mode);
        let degenerate = v.iter().all(|x| *x == 0.0);
        if degenerate {
            log::debug!("penalty alpha={} removed every variable; the estimate is zero", cfg.alpha);
        }
        let objective = self.s.quadratic_trace(&v);
        Ok(SubspaceFit {
            p,
            d,
            mode: cfg.mode,
            q: cfg.q,
            alpha: cfg.alpha,
            column_alphas,
            beta: cfg.beta,
            rho: cfg.rho,
            mu: cfg.mu,
            objective,
            support,
            degenerate,
            diagnostics: Diagnostics {
                iterations,
                converged,
                primal_residual: residual,
                first_primal_residual: first_residual,
                step_delta: step,
                orthonormality_defect: orthonormality_defect(&v),
            },
            v_hat: v,
            u_hat: u,
        })
    }
}

fn support_of(v: &DMatrix<f64>, mode: SparsityMode) -> Support {
    match mode {
        SparsityMode::Row => Support::Rows(
            v.row_iter().enumerate().filter(|(_, r)| r.iter().any(|x| *x != 0.0)).map(|(i, _)| i).collect(),
        ),
        SparsityMode::Column => Support::Columns(
            v.column_iter()
                .map(|c| c.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, _)| i).collect())
                .collect(),
        ),
    }
}

/// One-shot fit: eigendecomposes `s`, initializes at its leading `d`
/// eigenvectors and runs the solver.
pub fn admm_fit(s: &SymmetricMatrix, d: usize, cfg: &SolverConfig) -> Result<SubspaceFit> {
    PreparedProblem::new(s.clone(), d)?.fit(cfg)
}
