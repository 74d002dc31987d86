//! Covariances, symmetric eigendecomposition, principal subspaces and the
//! sin-theta subspace distance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::transforms::TransformedMatrix;

/// Relative symmetry tolerance used when wrapping a matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Orthonormality tolerance for [`OrthonormalBasis`].
pub const ORTHONORMAL_TOL: f64 = 1e-8;
/// Two eigenvalues closer than this are treated as tied at the subspace boundary.
pub const EIGENGAP_TOL: f64 = 1e-12;

/// Dense square symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Wraps `a` after checking `|a_ij - a_ji| <= 1e-10 (1 + |a_ij|)`, then
    /// symmetrizes exactly.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("matrix has non-finite entries".into()));
        }
        let n = a.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in (j + 1)..n {
                let diff = (a[(i, j)] - a[(j, i)]).abs();
                if diff > SYMMETRY_TOL * (1.0 + a[(i, j)].abs()) {
                    worst = worst.max(diff);
                }
            }
        }
        if worst > 0.0 {
            return Err(Error::NotSymmetric(worst));
        }
        Ok(Self::symmetrize(a))
    }

    pub(crate) fn symmetrize(a: DMatrix<f64>) -> Self {
        let t = a.transpose();
        Self((a + t) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Largest singular value, i.e. the largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let ev = SymmetricEigen::new(self.0.clone()).eigenvalues;
        ev.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius inner product `<self, V V^T> = tr(V^T self V)`.
    pub fn quadratic_trace(&self, v: &DMatrix<f64>) -> f64 {
        let sv = &self.0 * v;
        v.dot(&sv)
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralPair {
    /// `lambda_d - lambda_{d+1}` for a 1-based subspace dimension `d`.
    pub fn eigengap(&self, d: usize) -> Option<f64> {
        if d == 0 || d >= self.eigenvalues.len() {
            return None;
        }
        Some(self.eigenvalues[d - 1] - self.eigenvalues[d])
    }

    pub fn leading(&self, d: usize) -> Result<OrthonormalBasis> {
        let p = self.eigenvalues.len();
        if d == 0 || d > p {
            return Err(invalid(format!("subspace dimension {d} out of range 1..={p}")));
        }
        if let Some(gap) = self.eigengap(d) {
            if gap.abs() <= EIGENGAP_TOL * (1.0 + self.eigenvalues[0].abs()) {
                log::warn!("eigengap at d={d} is {gap:e}; the leading subspace is not unique");
            }
        }
        Ok(OrthonormalBasis(self.eigenvectors.columns(0, d).into_owned()))
    }
}

/// `p × d` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis(DMatrix<f64>);

impl OrthonormalBasis {
    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        if v.ncols() > v.nrows() || v.ncols() == 0 {
            return Err(Error::Dimension(format!("{}x{} cannot have orthonormal columns", v.nrows(), v.ncols())));
        }
        let dev = orthonormality_defect(&v);
        if !(dev <= ORTHONORMAL_TOL) {
            return Err(Error::Numerical(format!("columns are not orthonormal (defect {dev:e})")));
        }
        Ok(Self(v))
    }

    /// Wraps without checking; callers guarantee orthonormality by construction.
    pub(crate) fn new_unchecked(v: DMatrix<f64>) -> Self {
        Self(v)
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn p(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }
}

/// `max |V^T V - I|`.
pub fn orthonormality_defect(v: &DMatrix<f64>) -> f64 {
    let g = v.transpose() * v;
    let d = g.nrows();
    (g - DMatrix::<f64>::identity(d, d)).amax()
}

/// `(1/n) sum_k (z_k - mean)(z_k - mean)^T`.
pub fn sample_covariance(data: &TransformedMatrix) -> Result<SymmetricMatrix> {
    covariance_of(data.values())
}

pub(crate) fn covariance_of(x: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(invalid(format!("covariance needs at least 2 observations, got {n}")));
    }
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let s = centered.tr_mul(&centered) / n as f64;
    Ok(SymmetricMatrix::symmetrize(s))
}

/// Descending eigenpairs with each eigenvector's largest-magnitude entry made
/// positive (ties go to the lowest index).
pub fn spectral_decomposition(a: &SymmetricMatrix) -> SpectralPair {
    let eig = SymmetricEigen::new(a.0.clone());
    let p = a.dim();
    let mut order: Vec<usize> = (0..p).collect();
    // Stable sort keeps the solver's order among exact ties.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(p, p);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        fix_sign(col.as_mut_slice());
        vecs.set_column(k, &col);
    }
    SpectralPair { eigenvalues, eigenvectors: vecs }
}

pub(crate) fn fix_sign(col: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.iter_mut().for_each(|v| *v = -*v);
    }
}

/// The first `d` eigenvectors of `a`, `1 <= d < p`.
pub fn leading_subspace(a: &SymmetricMatrix, d: usize) -> Result<OrthonormalBasis> {
    let p = a.dim();
    if d == 0 || d >= p {
        return Err(invalid(format!("subspace dimension {d} must satisfy 1 <= d < p = {p}")));
    }
    spectral_decomposition(a).leading(d)
}

/// Squared Frobenius sin-theta distance `½‖EEᵀ − FFᵀ‖²_F` between two
/// orthonormal bases.
pub fn sin_theta_sq(e: &OrthonormalBasis, f: &OrthonormalBasis) -> Result<f64> {
    if e.p() != f.p() || e.d() != f.d() {
        return Err(Error::Dimension(format!("bases are {}x{} and {}x{}", e.p(), e.d(), f.p(), f.d())));
    }
    projector_distance_sq(e.as_matrix(), f.as_matrix())
}

/// `½‖AAᵀ − BBᵀ‖²_F` for arbitrary `p × d` matrices. Agrees with
/// [`sin_theta_sq`] on orthonormal inputs; a zero estimate scores `d/2`
/// against an orthonormal truth.
pub fn projector_distance_sq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!("{} rows vs {} rows", a.nrows(), b.nrows())));
    }
    let aa = a.tr_mul(a).norm_squared();
    let bb = b.tr_mul(b).norm_squared();
    let ab = a.tr_mul(b).norm_squared();
    Ok((0.5 * (aa + bb) - ab).max(0.0))
}

/// `Γ = G Ω G` with `G = I − J/p`, computed by double-centering rows and columns.
pub fn gamma_from_omega(omega: &SymmetricMatrix) -> SymmetricMatrix {
    let mut g = omega.0.clone();
    let col_means = g.row_mean();
    for mut row in g.row_iter_mut() {
        row -= &col_means;
    }
    let row_means = g.column_mean();
    for mut col in g.column_iter_mut() {
        col -= &row_means;
    }
    SymmetricMatrix::symmetrize(g)
}
