//! Unit-consistent inverse: balance the matrix with positive diagonal
//! scalings, invert the balanced matrix with the MP inverse, then undo the
//! scaling.

use super::mp::{mp_inverse, DEFAULT_RTOL};
use crate::error::{GinvError, Result};
use crate::matrix::DenseMatrix;

pub const DEFAULT_SCALE_TOL: f64 = 1e-13;
pub const DEFAULT_MAX_SWEEPS: usize = 1000;

/// Output of [`uc_scale`]: `left · M · right = scaled` where `left`, `right`
/// are positive diagonals stored as vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDecomposition {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub scaled: DenseMatrix,
    pub sweeps: usize,
    /// Largest |mean log-magnitude| over rows and columns that carry a nonzero.
    pub residual: f64,
}

struct Support {
    /// (row, col, ln|m_ij|) for every nonzero entry.
    entries: Vec<(usize, usize, f64)>,
    row_count: Vec<usize>,
    col_count: Vec<usize>,
}

impl Support {
    fn of(m: &DenseMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut entries = Vec::new();
        let mut row_count = vec![0; rows];
        let mut col_count = vec![0; cols];
        for (i, rc) in row_count.iter_mut().enumerate() {
            for (j, cc) in col_count.iter_mut().enumerate() {
                let v = m.get(i, j);
                if v != 0.0 {
                    entries.push((i, j, v.abs().ln()));
                    *rc += 1;
                    *cc += 1;
                }
            }
        }
        Support {
            entries,
            row_count,
            col_count,
        }
    }

    /// Row and column means of `ln|m_ij| + r_i + c_j` over the support.
    fn means(&self, r: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rs = vec![0.0; r.len()];
        let mut cs = vec![0.0; c.len()];
        for &(i, j, l) in &self.entries {
            let v = l + r[i] + c[j];
            rs[i] += v;
            cs[j] += v;
        }
        for (s, &n) in rs.iter_mut().zip(&self.row_count) {
            if n > 0 {
                *s /= n as f64;
            }
        }
        for (s, &n) in cs.iter_mut().zip(&self.col_count) {
            if n > 0 {
                *s /= n as f64;
            }
        }
        (rs, cs)
    }

    fn residual(&self, r: &[f64], c: &[f64]) -> f64 {
        let (rs, cs) = self.means(r, c);
        rs.iter().chain(&cs).fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Connected components of the bipartite row/column support graph.
    /// Returns a component label per row and per column; rows and columns
    /// without nonzeros get `None`.
    fn components(&self) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let rows = self.row_count.len();
        let cols = self.col_count.len();
        let mut parent: Vec<usize> = (0..rows + cols).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j, _) in &self.entries {
            let (a, b) = (find(&mut parent, i), find(&mut parent, rows + j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut labels = std::collections::BTreeMap::new();
        let mut label = |parent: &mut [usize], x: usize| {
            let root = find(parent, x);
            let next = labels.len();
            *labels.entry(root).or_insert(next)
        };
        let row_lab = (0..rows)
            .map(|i| (self.row_count[i] > 0).then(|| label(&mut parent, i)))
            .collect();
        let col_lab = (0..cols)
            .map(|j| (self.col_count[j] > 0).then(|| label(&mut parent, rows + j)))
            .collect();
        (row_lab, col_lab)
    }
}

/// Balances `m` so every row and column carrying a nonzero has unit
/// geometric mean of nonzero magnitudes.
///
/// Works on log-magnitudes of the nonzero entries with alternating row and
/// column mean removal. Signs pass through. Within each connected component
/// of the support the free scalar shared between the row and column scales
/// is fixed by making the geometric means of the active left and right
/// entries equal. Empty rows and columns get scale 1.
pub fn uc_scale(m: &DenseMatrix, tol: f64, max_sweeps: usize) -> Result<ScalingDecomposition> {
    if !m.is_finite() {
        return Err(GinvError::input("uc_scale: non-finite entry"));
    }
    let (rows, cols) = m.shape();
    let support = Support::of(m);
    let mut r = vec![0.0; rows];
    let mut c = vec![0.0; cols];
    let mut residual = support.residual(&r, &c);
    let mut sweeps = 0;
    while residual > tol {
        if sweeps == max_sweeps {
            return Err(GinvError::Scaling { sweeps, residual });
        }
        let (rs, _) = support.means(&r, &c);
        for (ri, m) in r.iter_mut().zip(rs) {
            *ri -= m;
        }
        let (_, cs) = support.means(&r, &c);
        for (cj, m) in c.iter_mut().zip(cs) {
            *cj -= m;
        }
        sweeps += 1;
        residual = support.residual(&r, &c);
    }

    // Gauge: shift r up and c down by the same amount per component.
    let (row_lab, col_lab) = support.components();
    let ncomp = row_lab
        .iter()
        .chain(&col_lab)
        .flatten()
        .max()
        .map_or(0, |&x| x + 1);
    let mut sums = vec![(0.0, 0usize, 0.0, 0usize); ncomp];
    for (i, lab) in row_lab.iter().enumerate() {
        if let Some(k) = lab {
            sums[*k].0 += r[i];
            sums[*k].1 += 1;
        }
    }
    for (j, lab) in col_lab.iter().enumerate() {
        if let Some(k) = lab {
            sums[*k].2 += c[j];
            sums[*k].3 += 1;
        }
    }
    let shift: Vec<f64> = sums
        .iter()
        .map(|&(rs, rn, cs, cn)| (cs / cn as f64 - rs / rn as f64) / 2.0)
        .collect();
    for (i, lab) in row_lab.iter().enumerate() {
        r[i] = lab.map_or(0.0, |k| r[i] + shift[k]);
    }
    for (j, lab) in col_lab.iter().enumerate() {
        c[j] = lab.map_or(0.0, |k| c[j] - shift[k]);
    }

    let left: Vec<f64> = r.iter().map(|v| v.exp()).collect();
    let right: Vec<f64> = c.iter().map(|v| v.exp()).collect();
    let mut scaled = m.clone();
    for (i, l) in left.iter().enumerate() {
        for (j, r) in right.iter().enumerate() {
            scaled.set(i, j, l * m.get(i, j) * r);
        }
    }
    Ok(ScalingDecomposition {
        left,
        right,
        scaled,
        sweeps,
        residual,
    })
}

/// `E · mp_inverse(D M E) · D` with `D`, `E` from [`uc_scale`].
pub fn uc_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let sd = uc_scale(m, DEFAULT_SCALE_TOL, DEFAULT_MAX_SWEEPS)?;
    let core = mp_inverse(&sd.scaled, DEFAULT_RTOL);
    let mut out = core;
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            out.set(i, j, sd.right[i] * out.get(i, j) * sd.left[j]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_matrix, rel_err};
    use rand::{Rng, SeedableRng};

    fn default_scale(m: &DenseMatrix) -> ScalingDecomposition {
        uc_scale(m, DEFAULT_SCALE_TOL, DEFAULT_MAX_SWEEPS).unwrap()
    }

    #[test]
    fn balanced_input_is_untouched() {
        let ones = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        let sd = default_scale(&ones);
        assert_eq!(sd.left, vec![1.0, 1.0]);
        assert_eq!(sd.right, vec![1.0, 1.0]);
        assert_eq!(sd.scaled, ones);
        let sd = default_scale(&DenseMatrix::identity(2));
        assert_eq!(sd.left, vec![1.0, 1.0]);
        assert_eq!(sd.scaled, DenseMatrix::identity(2));
    }

    #[test]
    fn rank_one_balances_to_ones() {
        // log|m_ij| = a_i + b_j exactly, so the balanced matrix is all ones
        // with D = E = diag(1, 1/2) after gauge equalization.
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        let sd = default_scale(&m);
        let ones = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(rel_err(&sd.scaled, &ones).unwrap() < 1e-14);
        for (d, e) in [
            (sd.left[0], 1.0),
            (sd.left[1], 0.5),
            (sd.right[0], 1.0),
            (sd.right[1], 0.5),
        ] {
            assert!((d - e).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rows_and_columns_get_unit_scale() {
        let m = DenseMatrix::from_rows(&[[0.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 0.0]]);
        let sd = default_scale(&m);
        assert_eq!(sd.left[0], 1.0);
        assert_eq!(sd.left[2], 1.0);
        assert_eq!(sd.right[0], 1.0);
        assert!((sd.scaled.get(1, 1).abs() - 1.0).abs() < 1e-14);
        let g = uc_inverse(&m).unwrap();
        assert!((g.get(1, 1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn signs_pass_through() {
        let m = DenseMatrix::from_rows(&[[-3.0, 6.0], [1.0, -2.0]]);
        let sd = default_scale(&m);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(sd.scaled.get(i, j).signum(), m.get(i, j).signum());
                assert!((sd.scaled.get(i, j).abs() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn balanced_geometric_means_and_reconstruction() {
        for seed in 0..20 {
            let mut m = gen_matrix(seed, 5, 3, 1.0).unwrap();
            m.set(0, 1, 0.0);
            m.set(3, 3, 0.0);
            let sd = default_scale(&m);
            assert!(sd.residual <= DEFAULT_SCALE_TOL);
            for i in 0..5 {
                let logs: Vec<f64> = (0..5)
                    .map(|j| sd.scaled.get(i, j).abs())
                    .filter(|&v| v > 0.0)
                    .map(f64::ln)
                    .collect();
                let mean = logs.iter().sum::<f64>() / logs.len() as f64;
                assert!(mean.abs() <= 1e-10);
            }
            let d = DenseMatrix::from_diagonal(&sd.left);
            let e = DenseMatrix::from_diagonal(&sd.right);
            assert!(rel_err(&(&(&d * &m) * &e), &sd.scaled).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn non_convergence_reports_residual() {
        // A sparse chain converges slowly; one sweep is not enough.
        let m = DenseMatrix::from_rows(&[[1.0, 10.0, 0.0], [0.0, 1.0, 100.0], [3.0, 0.0, 1.0]]);
        match uc_scale(&m, 1e-13, 1) {
            Err(GinvError::Scaling { sweeps, residual }) => {
                assert_eq!(sweeps, 1);
                assert!(residual > 1e-13);
            }
            other => panic!("expected scaling error, got {other:?}"),
        }
        assert!(uc_scale(&m, 1e-13, 1000).is_ok());
    }

    #[test]
    fn inverse_examples() {
        let g = uc_inverse(&DenseMatrix::from_diagonal(&[2.0, 5.0])).unwrap();
        assert!(rel_err(&g, &DenseMatrix::from_diagonal(&[0.5, 0.2])).unwrap() < 1e-15);
        let g = uc_inverse(&DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]])).unwrap();
        let expect = DenseMatrix::from_rows(&[[-2.0, 1.0], [1.5, -0.5]]);
        assert!(rel_err(&g, &expect).unwrap() < 1e-14);
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        let g = uc_inverse(&m).unwrap();
        let expect = DenseMatrix::from_rows(&[[0.25, 0.125], [0.125, 0.0625]]);
        assert!(rel_err(&g, &expect).unwrap() < 1e-12);
        assert!(rel_err(&(&(&m * &g) * &m), &m).unwrap() < 1e-14);
    }

    #[test]
    fn diagonal_consistency() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for seed in 0..30 {
            let m = gen_matrix(seed, 5, 3 + (seed as usize % 3), 2.0).unwrap();
            let d1: Vec<f64> = (0..5)
                .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
                .collect();
            let d2: Vec<f64> = (0..5)
                .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
                .collect();
            let dm = DenseMatrix::from_diagonal(&d1);
            let em = DenseMatrix::from_diagonal(&d2);
            let lhs = uc_inverse(&(&(&dm * &m) * &em)).unwrap();
            let inv = |v: &[f64]| {
                DenseMatrix::from_diagonal(&v.iter().map(|x| 1.0 / x).collect::<Vec<_>>())
            };
            let rhs = &(&inv(&d2) * &uc_inverse(&m).unwrap()) * &inv(&d1);
            assert!(rel_err(&lhs, &rhs).unwrap() <= 1e-8);
        }
    }
}
