use nalgebra::DMatrix;

use crate::linalg::OrthonormalBasis;

/// Orthonormal polar factor `U = Q Pᵀ` of `A = Q D Pᵀ`, the maximizer of
/// `⟨A, U⟩` over `p × d` matrices with orthonormal columns.
///
/// Computed as thin Householder QR `A = Q₁R` followed by the SVD of the small
/// `d × d` factor `R = Q₂ D Pᵀ`, so `U = Q₁Q₂Pᵀ`. Both orthogonal factors are
/// complete even when `A` is rank deficient, so the result stays orthonormal
/// and is a deterministic function of `A`.
pub fn procrustes_update(a: &DMatrix<f64>) -> OrthonormalBasis {
    assert!(a.ncols() <= a.nrows(), "procrustes needs d <= p");
    let qr = a.clone().qr();
    let q1 = qr.q();
    let r = qr.r();
    let svd = r.svd(true, true);
    let q2 = svd.u.expect("requested U");
    let pt = svd.v_t.expect("requested V^T");
    OrthonormalBasis::new_unchecked(q1 * (q2 * pt))
}
