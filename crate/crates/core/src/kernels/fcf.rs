//! Frobenius (rational) canonical form by Krylov chains, and the
//! similarity-consistent inverse built on it.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mp::{mp_inverse, DEFAULT_RTOL};
use crate::error::{GinvError, Result};
use crate::matrix::DenseMatrix;

pub const DEFAULT_DEP_TOL: f64 = 1e-10;
/// Largest accepted condition number of the chain basis `F`.
pub const MAX_BASIS_CONDITION: f64 = 1e12;
const RECONSTRUCTION_TOL: f64 = 1e-8;

/// `M = F · C · F⁻¹` with `C` block diagonal in companion blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FcfDecomposition {
    pub f: DenseMatrix,
    pub f_inv: DenseMatrix,
    pub c: DenseMatrix,
    pub degrees: Vec<usize>,
}

/// Companion matrix with ones on the subdiagonal and `coeffs` in the last
/// column: the matrix of `x ↦ λ x` on `K[λ]/(λ^d − Σ coeffs_j λ^j)`.
pub fn companion(coeffs: &[f64]) -> DenseMatrix {
    let d = coeffs.len();
    let mut c = DenseMatrix::zeros(d, d);
    for j in 0..d.saturating_sub(1) {
        c.set(j + 1, j, 1.0);
    }
    for (i, &a) in coeffs.iter().enumerate() {
        c.set(i, d - 1, a);
    }
    c
}

/// Incrementally maintained orthonormal basis used for dependence tests.
#[derive(Clone, Default)]
struct OrthoBasis {
    q: Vec<DVector<f64>>,
}

impl OrthoBasis {
    /// Orthogonal residual of `w` against the basis (two passes of
    /// Gram-Schmidt).
    fn residual(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut r = w.clone();
        for _ in 0..2 {
            for q in &self.q {
                let proj = q.dot(&r);
                r.axpy(-proj, q, 1.0);
            }
        }
        r
    }

    /// Adds `w` if it is independent beyond `tol` relative to its own norm.
    fn try_push(&mut self, w: &DVector<f64>, tol: f64) -> bool {
        let norm = w.norm();
        if norm == 0.0 {
            return false;
        }
        let r = self.residual(w);
        let rn = r.norm();
        if rn <= tol * norm {
            return false;
        }
        self.q.push(r / rn);
        true
    }
}

fn chain_length(m: &DMatrix<f64>, v: &DVector<f64>, basis: &OrthoBasis, tol: f64) -> usize {
    let mut local = basis.clone();
    let mut w = v.clone();
    let mut len = 0;
    while local.try_push(&w, tol) {
        len += 1;
        w = m * &w;
    }
    len
}

fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let g = mp_inverse(&DenseMatrix::from_nalgebra(a.clone()), DEFAULT_RTOL);
    g.as_nalgebra() * b
}

/// Least squares for a full-column-rank system via Householder QR, with
/// columns equilibrated first (Krylov columns differ in norm by orders of
/// magnitude) and one step of refinement. QR keeps the residual at rounding
/// level, which is what the reconstruction `F·C·F⁻¹` is sensitive to.
fn lstsq_full_rank(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let scales: Vec<f64> = a
        .column_iter()
        .map(|c| {
            let n = c.norm();
            if n > 0.0 {
                1.0 / n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    let qr = scaled.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let solve = |rhs: &DVector<f64>| r.solve_upper_triangular(&(q.transpose() * rhs));
    let Some(mut y) = solve(b) else {
        return lstsq(a, b);
    };
    if let Some(dy) = solve(&(b - &scaled * &y)) {
        y += dy;
    }
    DVector::from_fn(y.len(), |i, _| y[i] * scales[i])
}

fn hcat(cols: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

fn krylov(m: &DMatrix<f64>, v: &DVector<f64>, len: usize) -> (Vec<DVector<f64>>, DVector<f64>) {
    let mut chain = Vec::with_capacity(len);
    let mut w = v.clone();
    for _ in 0..len {
        let next = m * &w;
        chain.push(w);
        w = next;
    }
    (chain, w)
}

/// Fixed vector with no special structure; its Krylov chain attains the
/// maximal length for every matrix outside a measure-zero set.
fn generic_vector(n: usize) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6672_6f62);
    DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
}

/// Frobenius canonical form of a square matrix.
///
/// Each stage picks, among `e_1, …, e_n`, the all-ones vector and a fixed
/// generic vector (in that order), the first one whose Krylov chain modulo
/// the subspace found so far is longest. If the resulting basis is too
/// ill-conditioned to reconstruct `M`, the next maximal candidate of the
/// first stage is tried. The chain is then shifted by a
/// vector of the earlier subspace so it closes without coupling back into
/// it, which keeps `C` block diagonal. Blocks therefore appear with
/// non-increasing degree.
pub fn fcf(m: &DenseMatrix, dep_tol: f64) -> Result<FcfDecomposition> {
    let mut first_err = None;
    for first in 0.. {
        match fcf_from(m, dep_tol, first) {
            Ok(Some(d)) => return Ok(d),
            Ok(None) => break,
            Err(e @ GinvError::DecompositionUnreliable(_)) => {
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(first_err.expect("at least one candidate is tried"))
}

/// One decomposition attempt, starting from the `first`-th candidate of
/// maximal chain length. `None` once the candidates are exhausted.
fn fcf_from(m: &DenseMatrix, dep_tol: f64, first: usize) -> Result<Option<FcfDecomposition>> {
    if !m.is_square() {
        return Err(GinvError::input(format!(
            "fcf needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(GinvError::input("fcf: non-finite entry"));
    }
    let n = m.rows();
    let a = m.as_nalgebra();
    let mut candidates: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            e
        })
        .collect();
    candidates.push(DVector::from_element(n, 1.0));
    candidates.push(generic_vector(n));

    let mut basis = OrthoBasis::default();
    let mut f_cols: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut blocks: Vec<DenseMatrix> = Vec::new();
    let mut degrees = Vec::new();
    // Invariant factors come out largest first, and exactly the first
    // `nullity` of them are divisible by λ. Their constant coefficient is
    // zero in exact arithmetic; pin it so C is singular exactly as M is.
    let nullity = n - m.rank_above(mp_cutoff(m));

    while f_cols.len() < n {
        let lengths: Vec<usize> = candidates
            .iter()
            .map(|v| chain_length(a, v, &basis, dep_tol))
            .collect();
        let best = *lengths.iter().max().expect("candidates are nonempty");
        if best == 0 {
            return Err(GinvError::DecompositionUnreliable(format!(
                "no candidate vector extends the {}-dimensional invariant subspace",
                f_cols.len()
            )));
        }
        let skip = if f_cols.is_empty() { first } else { 0 };
        let Some(pick) = lengths
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == best)
            .map(|(i, _)| i)
            .nth(skip)
        else {
            return Ok(None);
        };
        let d = best.min(n - f_cols.len());
        let mut v = candidates[pick].clone();

        if !f_cols.is_empty() {
            // Remove the component of M^d v − p(M) v that lies in the earlier
            // subspace by solving p(C_prev) z = x_prev there.
            let (chain, tail) = krylov(a, &v, d);
            let mut all = f_cols.clone();
            all.extend(chain);
            let x = lstsq_full_rank(&hcat(&all, n), &tail);
            let k = f_cols.len();
            let x_prev = x.rows(0, k).into_owned();
            let coeffs: Vec<f64> = x.rows(k, d).iter().copied().collect();
            let c_prev = DenseMatrix::block_diagonal(&blocks);
            let cp = c_prev.as_nalgebra();
            let mut p_of_c = cp.pow(d as u32);
            let mut power = DMatrix::identity(k, k);
            for &aj in &coeffs {
                p_of_c -= aj * &power;
                power = cp * power;
            }
            let z = lstsq(&p_of_c, &x_prev);
            v -= hcat(&f_cols, n) * z;
        }

        let (chain, tail) = krylov(a, &v, d);
        let mut all = f_cols.clone();
        all.extend(chain.iter().cloned());
        let x = lstsq_full_rank(&hcat(&all, n), &tail);
        let mut coeffs: Vec<f64> = x.rows(f_cols.len(), d).iter().copied().collect();
        if blocks.len() < nullity {
            coeffs[0] = 0.0;
        }
        for w in &chain {
            basis.try_push(w, 0.0);
        }
        f_cols.extend(chain);
        blocks.push(companion(&coeffs));
        degrees.push(d);
    }

    let f = DenseMatrix::from_nalgebra(hcat(&f_cols, n));
    let cond = f.condition();
    if cond.is_nan() || cond > MAX_BASIS_CONDITION {
        return Err(GinvError::DecompositionUnreliable(format!(
            "chain basis condition {cond:.3e} exceeds {MAX_BASIS_CONDITION:.0e}"
        )));
    }
    let f_inv = f
        .as_nalgebra()
        .clone()
        .try_inverse()
        .map(DenseMatrix::from_nalgebra)
        .ok_or_else(|| GinvError::DecompositionUnreliable("chain basis is singular".into()))?;
    let c = DenseMatrix::block_diagonal(&blocks);
    // F·C·F⁻¹ − M evaluated as (F·C − M·F)·F⁻¹: the difference is formed
    // before the ill-conditioned factor multiplies it.
    let residual = &(&(&f * &c) - &(m * &f)) * &f_inv;
    let recon = residual.frobenius_norm() / m.frobenius_norm().max(1.0);
    if recon > RECONSTRUCTION_TOL {
        return Err(GinvError::DecompositionUnreliable(format!(
            "reconstruction error {recon:.3e} exceeds {RECONSTRUCTION_TOL:.0e}"
        )));
    }
    Ok(Some(FcfDecomposition {
        f,
        f_inv,
        c,
        degrees,
    }))
}

/// Similarity-consistent inverse `F · C⁺ · F⁻¹` from the canonical [`fcf`].
///
/// `C⁺` is formed block by block. A companion block with a nonzero constant
/// coefficient is inverted directly: such blocks can be far worse
/// conditioned than `M`, and a relative singular-value cutoff would wrongly
/// truncate them.
pub fn sc_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let d = fcf(m, DEFAULT_DEP_TOL)?;
    let n = m.rows();
    if m.rank_above(mp_cutoff(m)) == n {
        // C is then nonsingular and F·C⁻¹·F⁻¹ = M⁻¹ identically; forming the
        // product would only add the conditioning of F to the error.
        if let Some(inv) = m.as_nalgebra().clone().try_inverse() {
            return Ok(DenseMatrix::from_nalgebra(inv));
        }
    }
    let mut parts = Vec::with_capacity(d.degrees.len());
    let mut off = 0;
    for &deg in &d.degrees {
        let block = d.c.submatrix(off, off, deg, deg);
        let inv = if block.get(0, deg - 1) == 0.0 {
            None
        } else {
            block.as_nalgebra().clone().try_inverse()
        };
        parts.push(match inv {
            Some(g) => DenseMatrix::from_nalgebra(g),
            None => mp_inverse(&block, DEFAULT_RTOL),
        });
        off += deg;
    }
    let c_pinv = DenseMatrix::block_diagonal(&parts);
    Ok(&(&d.f * &c_pinv) * &d.f_inv)
}

fn mp_cutoff(m: &DenseMatrix) -> f64 {
    let s = m.singular_values();
    DEFAULT_RTOL * s.first().copied().unwrap_or(0.0) * m.rows().max(m.cols()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_matrix, rel_err};

    fn decompose(m: &DenseMatrix) -> FcfDecomposition {
        fcf(m, DEFAULT_DEP_TOL).unwrap()
    }

    fn assert_companion_structure(d: &FcfDecomposition) {
        let mut off = 0;
        for &deg in &d.degrees {
            for i in 0..d.c.rows() {
                for j in off..off + deg {
                    let v = d.c.get(i, j);
                    let inside = i >= off && i < off + deg;
                    if !inside {
                        assert_eq!(v, 0.0);
                    } else if j + 1 < off + deg {
                        assert_eq!(v, if i == j + 1 { 1.0 } else { 0.0 });
                    }
                }
            }
            off += deg;
        }
        assert_eq!(off, d.c.rows());
    }

    #[test]
    fn companion_input_is_its_own_form() {
        let c = companion(&[2.0, -1.0, 3.0]);
        let d = decompose(&c);
        assert_eq!(d.f, DenseMatrix::identity(3));
        assert_eq!(d.degrees, vec![3]);
        assert!(rel_err(&d.c, &c).unwrap() < 1e-12);
    }

    #[test]
    fn distinct_diagonal_is_cyclic() {
        // Characteristic polynomial of diag(1, 2): x² − 3x + 2.
        let d = decompose(&DenseMatrix::from_diagonal(&[1.0, 2.0]));
        assert_eq!(d.degrees, vec![2]);
        let expect = DenseMatrix::from_rows(&[[0.0, -2.0], [1.0, 3.0]]);
        assert!(rel_err(&d.c, &expect).unwrap() < 1e-12);
    }

    #[test]
    fn nilpotent_jordan_block_uses_second_basis_vector() {
        let d = decompose(&DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]));
        assert_eq!(d.degrees, vec![2]);
        assert_eq!(d.f, DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]));
        assert!(rel_err(&d.c, &DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]])).unwrap() < 1e-15);
    }

    #[test]
    fn identity_is_derogatory() {
        let d = decompose(&DenseMatrix::identity(2));
        assert_eq!(d.degrees, vec![1, 1]);
        assert_eq!(d.c, DenseMatrix::identity(2));
    }

    #[test]
    fn derogatory_matrix_decouples() {
        // diag(2, 2, 3): minimal polynomial (x−2)(x−3), invariant factors
        // (x−2)(x−3) and (x−2).
        let d = decompose(&DenseMatrix::from_diagonal(&[2.0, 2.0, 3.0]));
        assert_eq!(d.degrees, vec![2, 1]);
        assert_companion_structure(&d);
        assert!((d.c.get(2, 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_matrices_satisfy_invariants() {
        for seed in 0..30 {
            let dim = 2 + (seed as usize % 5);
            let rank = if seed % 3 == 0 { dim - 1 } else { dim };
            let m = gen_matrix(seed, dim, rank, 1.0).unwrap();
            let d = decompose(&m);
            assert_companion_structure(&d);
            let recon = &(&d.f * &d.c) * &d.f_inv;
            assert!(rel_err(&recon, &m).unwrap() <= 1e-8);
            let ff = &d.f * &d.f_inv;
            assert!((&ff - &DenseMatrix::identity(dim)).frobenius_norm() <= 1e-8);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            fcf(&DenseMatrix::zeros(2, 3), DEFAULT_DEP_TOL),
            Err(GinvError::Input(_))
        ));
    }

    #[test]
    fn sc_inverse_examples() {
        let g = sc_inverse(&DenseMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
        assert!(rel_err(&g, &DenseMatrix::from_diagonal(&[0.5, 0.25])).unwrap() < 1e-12);
        let g = sc_inverse(&DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]])).unwrap();
        assert!(rel_err(&g, &DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]])).unwrap() < 1e-15);
        for seed in 0..20 {
            let m = gen_matrix(seed, 4, 4, 1.0).unwrap();
            let g = sc_inverse(&m).unwrap();
            assert!(rel_err(&(&g * &m), &DenseMatrix::identity(4)).unwrap() <= 1e-8);
        }
    }
}
