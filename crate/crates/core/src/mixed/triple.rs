use super::{dual_with_operators, InverseOperator, Method, MixedInverseResult};
use crate::error::Result;
use crate::kernels::{apply_kind, GinvKind};
use crate::matrix::{assemble3, split2, Block2, Block3, BlockSpec, DenseMatrix};

fn hcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.rows(), a.cols() + b.cols());
    out.set_submatrix(0, 0, a);
    out.set_submatrix(0, a.cols(), b);
    out
}

fn vcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.rows() + b.rows(), a.cols());
    out.set_submatrix(0, 0, a);
    out.set_submatrix(a.rows(), 0, b);
    out
}

/// Three-set mixed inverse from the closed-form block expressions.
///
/// With `Rᵃ = inv_a(R)` and
///
/// ```text
/// P  = V − U Rᵃ S            Pᵇ = inv_b(P)
/// W̃  = W − U Rᵃ T            Ỹ  = Y − X Rᵃ S
/// Q  = Z − X Rᵃ T − Ỹ Pᵇ W̃   Qᶜ = inv_c(Q)
/// H  = Pᵇ + Pᵇ W̃ Qᶜ Ỹ Pᵇ
/// ```
///
/// the blocks are
///
/// ```text
/// J11 = ((Rᵃ S H − Rᵃ T Qᶜ Ỹ Pᵇ) U + (−Rᵃ S Pᵇ W̃ Qᶜ + Rᵃ T Qᶜ) X) Rᵃ + Rᵃ
/// J12 = −Rᵃ S H + Rᵃ T Qᶜ Ỹ Pᵇ
/// J13 = Rᵃ S Pᵇ W̃ Qᶜ − Rᵃ T Qᶜ
/// J21 = −(H U − Pᵇ W̃ Qᶜ X) Rᵃ
/// J22 = H
/// J23 = −Pᵇ W̃ Qᶜ
/// J31 = −(−Qᶜ Ỹ Pᵇ U + Qᶜ X) Rᵃ
/// J32 = −Qᶜ Ỹ Pᵇ
/// J33 = Qᶜ
/// ```
///
/// Each of `Rᵃ`, `Pᵇ`, `Qᶜ` is evaluated once; kernels are deterministic so
/// this equals evaluating every occurrence separately.
pub fn triple_block_explicit(
    b: &Block3,
    kind_a: GinvKind,
    kind_b: GinvKind,
    kind_c: GinvKind,
) -> Result<MixedInverseResult> {
    let (a, bk, c) = (
        kind_a.short_name(),
        kind_b.short_name(),
        kind_c.short_name(),
    );
    let ra = apply_kind(kind_a, &b.r).map_err(|e| e.within(format!("{a}(R)")))?;
    let ra_s = &ra * &b.s;
    let ra_t = &ra * &b.t;
    let p = &b.v - &(&b.u * &ra_s);
    let pb = apply_kind(kind_b, &p).map_err(|e| e.within(format!("{bk}(V - U {a}(R) S)")))?;
    let w_t = &b.w - &(&b.u * &ra_t);
    let y_t = &b.y - &(&b.x * &ra_s);
    let q = &(&b.z - &(&b.x * &ra_t)) - &(&(&y_t * &pb) * &w_t);
    let qc = apply_kind(kind_c, &q).map_err(|e| {
        e.within(format!(
            "{c}(Z - X {a}(R) T - (Y - X {a}(R) S) {bk}(V - U {a}(R) S) (W - U {a}(R) T))"
        ))
    })?;

    let pb_wt_qc = &(&pb * &w_t) * &qc; // Pᵇ W̃ Qᶜ
    let qc_yt_pb = &(&qc * &y_t) * &pb; // Qᶜ Ỹ Pᵇ
    let h = &pb + &(&pb_wt_qc * &(&y_t * &pb));

    let j12 = &(-(&ra_s * &h)) + &(&ra_t * &qc_yt_pb);
    let j13 = &(&ra_s * &pb_wt_qc) - &(&ra_t * &qc);
    let coeff_u = &(&ra_s * &h) - &(&ra_t * &qc_yt_pb);
    let coeff_x = &(-(&ra_s * &pb_wt_qc)) + &(&ra_t * &qc);
    let j11 = &(&(&(&coeff_u * &b.u) + &(&coeff_x * &b.x)) * &ra) + &ra;
    let j21 = -(&(&(&h * &b.u) - &(&pb_wt_qc * &b.x)) * &ra);
    let j23 = -&pb_wt_qc;
    let j31 = -(&(&(-(&qc_yt_pb * &b.u)) + &(&qc * &b.x)) * &ra);
    let j32 = -&qc_yt_pb;

    let value = assemble3(&Block3::new([j11, j12, j13, j21, h, j23, j31, j32, qc])?)?;
    let (m, n, pp) = b.sizes();
    Ok(MixedInverseResult {
        value,
        method: Method::TripleExplicit,
        spec: BlockSpec::from_pairs(&[(m, kind_a), (n, kind_b), (pp, kind_c)])?,
    })
}

/// Three-set mixed inverse built from two dual-block steps: the `(V, W; Y, Z)`
/// sets are merged into one set whose inverse operator is the
/// `(kind_b, kind_c)` dual-block inverse, and that set is paired with `R`
/// under `kind_a`.
pub fn triple_block_recursive(
    b: &Block3,
    kind_a: GinvKind,
    kind_b: GinvKind,
    kind_c: GinvKind,
) -> Result<MixedInverseResult> {
    let (m, n, p) = b.sizes();
    let outer = Block2::new(b.r.clone(), hcat(&b.s, &b.t), vcat(&b.u, &b.x), {
        let lower = Block2::new(b.v.clone(), b.w.clone(), b.y.clone(), b.z.clone())?;
        crate::matrix::assemble2(&lower)?
    })?;
    let inner = InverseOperator::mixed(
        InverseOperator::Kernel(kind_b),
        n,
        InverseOperator::Kernel(kind_c),
        p,
    );
    let value = dual_with_operators(&outer, &InverseOperator::Kernel(kind_a), &inner)?;
    Ok(MixedInverseResult {
        value,
        method: Method::TripleRecursive,
        spec: BlockSpec::from_pairs(&[(m, kind_a), (n, kind_b), (p, kind_c)])?,
    })
}

/// Splits `m` and runs [`triple_block_explicit`].
pub fn triple_explicit_of(m: &DenseMatrix, spec: &BlockSpec) -> Result<MixedInverseResult> {
    let (b, k) = split_spec3(m, spec)?;
    triple_block_explicit(&b, k[0], k[1], k[2])
}

/// Splits `m` and runs [`triple_block_recursive`].
pub fn triple_recursive_of(m: &DenseMatrix, spec: &BlockSpec) -> Result<MixedInverseResult> {
    let (b, k) = split_spec3(m, spec)?;
    triple_block_recursive(&b, k[0], k[1], k[2])
}

fn split_spec3(m: &DenseMatrix, spec: &BlockSpec) -> Result<(Block3, Vec<GinvKind>)> {
    if spec.len() != 3 {
        return Err(crate::error::GinvError::input(format!(
            "three-set method needs 3 blocks, spec has {}",
            spec.len()
        )));
    }
    let s = spec.sizes();
    Ok((crate::matrix::split3(m, s[0], s[1], s[2])?, spec.kinds()))
}

/// Splits `m` and runs the dual-block inverse.
pub fn dual_of(m: &DenseMatrix, spec: &BlockSpec) -> Result<MixedInverseResult> {
    if spec.len() != 2 {
        return Err(crate::error::GinvError::input(format!(
            "dual-block method needs 2 blocks, spec has {}",
            spec.len()
        )));
    }
    let s = spec.sizes();
    let k = spec.kinds();
    super::dual_block_inverse(&split2(m, s[0], s[1])?, k[0], k[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GinvError;
    use crate::kernels::exact_inverse;
    use crate::matrix::{gen_matrix, gen_well_conditioned, rel_err, split3};
    use GinvKind::*;

    fn block_diag3(sizes: (usize, usize, usize), seed: u64) -> (Block3, [DenseMatrix; 3]) {
        let (m, n, p) = sizes;
        let r = gen_matrix(seed, m, m.max(2) - 1, 1.0).unwrap();
        let v = gen_matrix(seed + 1, n, n, 1.0).unwrap();
        let z = gen_matrix(seed + 2, p, p.max(2) - 1, 1.0).unwrap();
        let full = DenseMatrix::block_diagonal(&[r.clone(), v.clone(), z.clone()]);
        (split3(&full, m, n, p).unwrap(), [r, v, z])
    }

    #[test]
    fn zero_off_diagonals_collapse_for_both_methods() {
        let (b, [r, v, z]) = block_diag3((2, 3, 2), 10);
        for kinds in [
            (MoorePenrose, UnitConsistent, MoorePenrose),
            (UnitConsistent, MoorePenrose, Drazin),
        ] {
            let expect = DenseMatrix::block_diagonal(&[
                apply_kind(kinds.0, &r).unwrap(),
                apply_kind(kinds.1, &v).unwrap(),
                apply_kind(kinds.2, &z).unwrap(),
            ]);
            let e = triple_block_explicit(&b, kinds.0, kinds.1, kinds.2).unwrap();
            let c = triple_block_recursive(&b, kinds.0, kinds.1, kinds.2).unwrap();
            assert_eq!(e.value, expect);
            assert_eq!(c.value, expect);
        }
    }

    #[test]
    fn diagonal_scalars() {
        let m = DenseMatrix::from_diagonal(&[2.0, 3.0, 4.0]);
        let b = split3(&m, 1, 1, 1).unwrap();
        let e = triple_block_explicit(&b, Exact, Exact, Exact).unwrap();
        let expect = DenseMatrix::from_diagonal(&[0.5, 1.0 / 3.0, 0.25]);
        assert!(rel_err(&e.value, &expect).unwrap() < 1e-16);
    }

    #[test]
    fn scalar_blocks_match_inverse() {
        let m = DenseMatrix::from_rows(&[[4.0, 1.0, 2.0], [1.0, 3.0, 0.5], [0.0, 1.0, 5.0]]);
        let inv = exact_inverse(&m).unwrap();
        let b = split3(&m, 1, 1, 1).unwrap();
        for f in [triple_block_explicit, triple_block_recursive] {
            let j = f(&b, Exact, Exact, Exact).unwrap();
            assert!(rel_err(&j.value, &inv).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn nine_by_nine_exact_reduction() {
        for seed in 0..5 {
            let m = gen_well_conditioned(seed, &[3, 3, 3], 1e3).unwrap();
            let inv = exact_inverse(&m).unwrap();
            let b = split3(&m, 3, 3, 3).unwrap();
            let e = triple_block_explicit(&b, Exact, Exact, Exact).unwrap();
            assert!(rel_err(&e.value, &inv).unwrap() <= 1e-8);
            let r = triple_block_recursive(&b, MoorePenrose, UnitConsistent, MoorePenrose).unwrap();
            assert!(rel_err(&r.value, &inv).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn failure_names_nested_complement() {
        // V − U R⁻¹ S = 0 for this matrix, so the second complement is singular.
        let m = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let err =
            triple_block_explicit(&split3(&m, 1, 1, 1).unwrap(), Exact, Exact, Exact).unwrap_err();
        match err {
            GinvError::SubExpression { expr, .. } => assert_eq!(expr, "exact(V - U exact(R) S)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spec_wrappers_check_block_count() {
        let m = DenseMatrix::identity(3);
        let two = BlockSpec::from_pairs(&[(1, Exact), (2, Exact)]).unwrap();
        assert!(triple_explicit_of(&m, &two).is_err());
        assert!(dual_of(&m, &two).is_ok());
        let three = BlockSpec::from_pairs(&[(1, Exact), (1, Exact), (1, Exact)]).unwrap();
        assert!(dual_of(&m, &three).is_err());
        assert_eq!(triple_recursive_of(&m, &three).unwrap().value, m);
    }
}
