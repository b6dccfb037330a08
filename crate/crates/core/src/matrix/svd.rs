//! Thin singular value decomposition, backed by `faer`.
//!
//! `nalgebra`'s own SVD can lose accuracy on rank-deficient input (the
//! recomposed product drifting far from the matrix), which breaks the
//! orthogonal consistency every pseudoinverse here relies on.

use faer::Mat;
use nalgebra::DMatrix;

/// `m = u · diag(s) · vᵀ` with `s` sorted in non-increasing order and
/// `min(rows, cols)` columns in `u` and `v`.
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn thin_svd(m: &DMatrix<f64>) -> Svd {
    let k = m.nrows().min(m.ncols());
    let svd = to_faer(m)
        .thin_svd()
        .expect("SVD of a finite matrix converges");
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    Svd {
        u: DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, order[j])]),
        s: order.iter().map(|&j| s[j]).collect(),
        v: DMatrix::from_fn(m.ncols(), k, |i, j| v[(i, order[j])]),
    }
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s = to_faer(m)
        .singular_values()
        .expect("SVD of a finite matrix converges");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
