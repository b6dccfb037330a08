use super::mp::{mp_inverse, DEFAULT_RTOL};
use crate::matrix::DenseMatrix;

/// Relative cutoff used when comparing ranks of successive powers.
pub const INDEX_RANK_TOL: f64 = 1e-10;

/// Drazin inverse together with the index used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct DrazinResult {
    pub inverse: DenseMatrix,
    pub index: u32,
}

fn power_rank(p: &DenseMatrix, scale: f64) -> usize {
    if scale == 0.0 {
        return 0;
    }
    p.rank_above(INDEX_RANK_TOL * scale)
}

/// Index of a square matrix: the smallest `k` with
/// `rank(M^k) = rank(M^(k+1))`. Ranks of `M^j` are taken relative to
/// `‖M‖₂^j`.
pub fn drazin_index(m: &DenseMatrix) -> u32 {
    let n = m.rows();
    let norm = m.singular_values()[0];
    let mut prev_rank = n;
    let mut power = m.clone();
    for k in 0..=n as u32 {
        let rank = power_rank(&power, norm.powi(k as i32 + 1));
        if rank == prev_rank {
            return k;
        }
        prev_rank = rank;
        power = &power * m;
    }
    n as u32
}

/// `M^k · (M^(2k+1))⁺ · M^k` with `k` the index of `M`.
pub fn drazin(m: &DenseMatrix) -> DrazinResult {
    let k = drazin_index(m);
    let mk = m.pow(k);
    let core = mp_inverse(&m.pow(2 * k + 1), DEFAULT_RTOL);
    DrazinResult {
        inverse: &(&mk * &core) * &mk,
        index: k,
    }
}

pub fn drazin_inverse(m: &DenseMatrix) -> DenseMatrix {
    drazin(m).inverse
}
