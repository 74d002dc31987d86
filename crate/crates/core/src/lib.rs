//! Sparse principal subspace estimation for compositional data.
//!
//! Observed compositions are mapped through the centered log-ratio (clr)
//! transform, whose covariance `Γ = GΩG` approximates the covariance `Ω` of
//! the unobserved log-basis. Sparse leading subspaces of the clr covariance
//! are estimated with a linearized proximal ADMM under row (`‖·‖_{2,q}`) or
//! column (`‖·‖_{*,q}`) sparsity, `q ∈ {0, 1/2, 2/3, 1}`, with the penalty
//! weight chosen by cross-validation.
//!
//! Modules:
//! - [`transforms`]: zero replacement, closure, clr / log / power transforms.
//! - [`linalg`]: covariance, eigendecomposition, subspaces, sin-theta distance.
//! - [`solver`]: proximal maps, Procrustes step, the ADMM loop.
//! - [`model_selection`]: k-fold cross-validation over a penalty grid.
//! - [`simulation`]: synthetic scenarios, comparison harness, theory checks.
//! - [`io`]: CSV/JSON formats and atomic writes.
//! - [`biplot`]: scores and loadings on the first two components.

// `!(x > 0.0)` guards are written that way so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biplot;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix_serde;
pub mod model_selection;
pub mod parallel;
pub mod simulation;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};
pub use linalg::{OrthonormalBasis, SpectralPair, SymmetricMatrix};
pub use parallel::Execution;
pub use solver::{Penalty, SolverConfig, SparsityMode, SubspaceFit};
pub use transforms::{CompositionMatrix, CountMatrix, Preprocessing, TransformTag, TransformedMatrix};
