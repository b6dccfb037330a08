use nalgebra::DMatrix;

use crate::matrix::svd::thin_svd;
use crate::matrix::DenseMatrix;

/// Default relative rank cutoff for [`mp_inverse`].
pub const DEFAULT_RTOL: f64 = 1e-12;

/// Moore-Penrose pseudoinverse via SVD.
///
/// Singular values at or below `rtol * σ_max * max(rows, cols)` are treated
/// as zero. The zero matrix maps to the zero matrix of transposed shape.
pub fn mp_inverse(m: &DenseMatrix, rtol: f64) -> DenseMatrix {
    let (rows, cols) = m.shape();
    let svd = thin_svd(m.as_nalgebra());
    let sigma_max = svd.s.first().copied().unwrap_or(0.0);
    let cutoff = rtol * sigma_max * rows.max(cols) as f64;
    let mut out = DMatrix::zeros(cols, rows);
    if sigma_max == 0.0 {
        return DenseMatrix::from_nalgebra(out);
    }
    for (k, &s) in svd.s.iter().enumerate() {
        if s > cutoff {
            out += (svd.v.column(k) / s) * svd.u.column(k).transpose();
        }
    }
    DenseMatrix::from_nalgebra(out)
}
