//! Block-partitioned mixed inverses.
//!
//! Every diagonal set of variables gets its own inverse operator. The
//! two-set form
//!
//! ```text
//! J = [ (W − X Z⁻ᵇ Y)⁻ᵃ             −W⁻ᵃ X (Z − Y W⁻ᵃ X)⁻ᵇ ]
//!     [ −Z⁻ᵇ Y (W − X Z⁻ᵇ Y)⁻ᵃ       (Z − Y W⁻ᵃ X)⁻ᵇ      ]
//! ```
//!
//! is the building block: a dual-block inverse is itself an inverse
//! operator on the merged set, so any number of sets can be handled by
//! nesting ([`InverseOperator::Mixed`]). The three-set case is also
//! available as explicit closed-form blocks ([`triple_block_explicit`]).

mod listing;
mod triple;

pub use listing::{errata, evaluate_listing, Erratum};
pub use triple::{
    dual_of, triple_block_explicit, triple_block_recursive, triple_explicit_of, triple_recursive_of,
};

use serde::{Deserialize, Serialize};

use crate::error::{GinvError, Result};
use crate::kernels::{apply_kind, GinvKind};
use crate::matrix::{assemble2, split2, Block2, BlockSpec, DenseMatrix};

/// How a mixed inverse was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dual,
    TripleExplicit,
    TripleRecursive,
    KFold,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dual => "dual",
            Method::TripleExplicit => "triple_explicit",
            Method::TripleRecursive => "triple_recursive",
            Method::KFold => "k_fold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedInverseResult {
    pub value: DenseMatrix,
    pub method: Method,
    pub spec: BlockSpec,
}

/// Inverse operator for one set of variables: either a single kernel or a
/// dual-block mixed inverse over a nested split of the set.
#[derive(Debug, Clone, PartialEq)]
pub enum InverseOperator {
    Kernel(GinvKind),
    Mixed {
        first: Box<InverseOperator>,
        first_size: usize,
        second: Box<InverseOperator>,
        second_size: usize,
    },
}

impl InverseOperator {
    pub fn mixed(
        first: InverseOperator,
        first_size: usize,
        second: InverseOperator,
        second_size: usize,
    ) -> Self {
        InverseOperator::Mixed {
            first: Box::new(first),
            first_size,
            second: Box::new(second),
            second_size,
        }
    }

    /// Dimension the operator is bound to; kernels accept any size.
    pub fn size(&self) -> Option<usize> {
        match self {
            InverseOperator::Kernel(_) => None,
            InverseOperator::Mixed {
                first_size,
                second_size,
                ..
            } => Some(first_size + second_size),
        }
    }

    pub fn apply(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            InverseOperator::Kernel(kind) => apply_kind(*kind, m),
            InverseOperator::Mixed {
                first,
                first_size,
                second,
                second_size,
            } => {
                let b = split2(m, *first_size, *second_size)?;
                dual_with_operators(&b, first, second)
            }
        }
    }

    fn label(&self) -> String {
        match self {
            InverseOperator::Kernel(k) => k.short_name().to_string(),
            InverseOperator::Mixed { first, second, .. } => {
                format!("({}|{})", first.label(), second.label())
            }
        }
    }
}

/// Dual-block mixed inverse with arbitrary operators on the two sets.
pub fn dual_with_operators(
    b: &Block2,
    op_a: &InverseOperator,
    op_b: &InverseOperator,
) -> Result<DenseMatrix> {
    let (la, lb) = (op_a.label(), op_b.label());
    let w_inv = op_a.apply(&b.w).map_err(|e| e.within(format!("{la}(W)")))?;
    let z_inv = op_b.apply(&b.z).map_err(|e| e.within(format!("{lb}(Z)")))?;
    let w_schur = &b.w - &(&(&b.x * &z_inv) * &b.y);
    let z_schur = &b.z - &(&(&b.y * &w_inv) * &b.x);
    let w_schur_inv = op_a
        .apply(&w_schur)
        .map_err(|e| e.within(format!("{la}(W - X {lb}(Z) Y)")))?;
    let z_schur_inv = op_b
        .apply(&z_schur)
        .map_err(|e| e.within(format!("{lb}(Z - Y {la}(W) X)")))?;
    let top_right = -(&(&w_inv * &b.x) * &z_schur_inv);
    let bottom_left = -(&(&z_inv * &b.y) * &w_schur_inv);
    assemble2(&Block2 {
        w: w_schur_inv,
        x: top_right,
        y: bottom_left,
        z: z_schur_inv,
    })
}

/// Dual-block mixed inverse with `kind_a` on the `W` set and `kind_b` on the
/// `Z` set.
pub fn dual_block_inverse(
    b: &Block2,
    kind_a: GinvKind,
    kind_b: GinvKind,
) -> Result<MixedInverseResult> {
    let value = dual_with_operators(
        b,
        &InverseOperator::Kernel(kind_a),
        &InverseOperator::Kernel(kind_b),
    )?;
    Ok(MixedInverseResult {
        value,
        method: Method::Dual,
        spec: BlockSpec::from_pairs(&[(b.m(), kind_a), (b.n(), kind_b)])?,
    })
}

/// Runs `method` on `m` partitioned by `spec`.
pub fn mixed_inverse(
    m: &DenseMatrix,
    spec: &BlockSpec,
    method: Method,
) -> Result<MixedInverseResult> {
    match method {
        Method::Dual => dual_of(m, spec),
        Method::TripleExplicit => triple_explicit_of(m, spec),
        Method::TripleRecursive => triple_recursive_of(m, spec),
        Method::KFold => k_block_inverse(m, spec),
    }
}

/// Operator obtained by merging the sets of `spec` left to right: the first
/// two become one mixed set, which is merged with the third, and so on.
pub fn left_fold_operator(spec: &BlockSpec) -> InverseOperator {
    let blocks = spec.blocks();
    let mut op = InverseOperator::Kernel(blocks[0].kind);
    let mut size = blocks[0].size;
    for b in &blocks[1..] {
        op = InverseOperator::mixed(op, size, InverseOperator::Kernel(b.kind), b.size);
        size += b.size;
    }
    op
}

/// Mixed inverse for any number of sets.
///
/// One set applies its kernel directly. Otherwise all sets but the last are
/// merged left to right into one composite operator and the dual-block
/// form is applied against the last set, so two sets reduce to
/// [`dual_block_inverse`].
pub fn k_block_inverse(m: &DenseMatrix, spec: &BlockSpec) -> Result<MixedInverseResult> {
    if !m.is_square() {
        return Err(GinvError::input(format!(
            "mixed inverse needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    spec.check_dim(m.rows())?;
    let blocks = spec.blocks();
    let value = if blocks.len() == 1 {
        apply_kind(blocks[0].kind, m)?
    } else {
        let (head, last) = blocks.split_at(blocks.len() - 1);
        let head_spec = BlockSpec::new(head.to_vec())?;
        let head_op = left_fold_operator(&head_spec);
        let b = split2(m, head_spec.dim(), last[0].size)?;
        dual_with_operators(&b, &head_op, &InverseOperator::Kernel(last[0].kind))?
    };
    Ok(MixedInverseResult {
        value,
        method: Method::KFold,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::exact_inverse;
    use crate::matrix::{gen_matrix, gen_well_conditioned, rel_err, split3};
    use GinvKind::*;

    #[test]
    fn zero_off_diagonals_collapse() {
        let w = gen_matrix(1, 2, 1, 0.0).unwrap();
        let z = gen_matrix(2, 3, 2, 1.0).unwrap();
        let b = Block2::new(
            w.clone(),
            DenseMatrix::zeros(2, 3),
            DenseMatrix::zeros(3, 2),
            z.clone(),
        )
        .unwrap();
        for (ka, kb) in [
            (UnitConsistent, MoorePenrose),
            (MoorePenrose, Drazin),
            (SimilarityConsistent, UnitConsistent),
        ] {
            let j = dual_block_inverse(&b, ka, kb).unwrap();
            let expect = DenseMatrix::block_diagonal(&[
                apply_kind(ka, &w).unwrap(),
                apply_kind(kb, &z).unwrap(),
            ]);
            assert_eq!(j.value, expect);
        }
    }

    #[test]
    fn scalar_blocks_give_two_by_two_inverse() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let j = dual_block_inverse(&split2(&m, 1, 1).unwrap(), Exact, Exact).unwrap();
        let expect = DenseMatrix::from_rows(&[[-2.0, 1.0], [1.5, -0.5]]);
        assert!(rel_err(&j.value, &expect).unwrap() < 1e-15);
        assert_eq!(j.method, Method::Dual);
    }

    #[test]
    fn nonsingular_mixed_matches_direct_inverse() {
        for seed in 0..10 {
            let m = gen_well_conditioned(seed, &[3, 3], 1e3).unwrap();
            let j = dual_block_inverse(&split2(&m, 3, 3).unwrap(), MoorePenrose, UnitConsistent)
                .unwrap();
            assert!(rel_err(&j.value, &exact_inverse(&m).unwrap()).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn kernel_failure_names_the_sub_expression() {
        let m = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let err = dual_block_inverse(&split2(&m, 2, 1).unwrap(), Exact, Exact).unwrap_err();
        match &err {
            GinvError::SubExpression { expr, .. } => assert_eq!(expr, "exact(W)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(err.root(), GinvError::Singular { .. }));
    }

    #[test]
    fn fold_degenerate_cases() {
        let m = gen_matrix(3, 4, 3, 1.0).unwrap();
        let spec = BlockSpec::from_pairs(&[(4, MoorePenrose)]).unwrap();
        assert_eq!(
            k_block_inverse(&m, &spec).unwrap().value,
            crate::kernels::mp_inverse(&m, crate::kernels::DEFAULT_RTOL)
        );
        let spec = BlockSpec::from_pairs(&[(2, UnitConsistent), (2, MoorePenrose)]).unwrap();
        let fold = k_block_inverse(&m, &spec).unwrap();
        let dual =
            dual_block_inverse(&split2(&m, 2, 2).unwrap(), UnitConsistent, MoorePenrose).unwrap();
        assert_eq!(fold.value, dual.value);
        let bad = BlockSpec::from_pairs(&[(2, MoorePenrose), (3, MoorePenrose)]).unwrap();
        assert!(matches!(
            k_block_inverse(&m, &bad),
            Err(GinvError::Input(_))
        ));
    }

    #[test]
    fn fold_of_three_matches_recursive_on_nonsingular() {
        for seed in 0..5 {
            let m = gen_well_conditioned(seed, &[2, 3, 2], 1e3).unwrap();
            let spec =
                BlockSpec::from_pairs(&[(2, MoorePenrose), (3, UnitConsistent), (2, MoorePenrose)])
                    .unwrap();
            let fold = k_block_inverse(&m, &spec).unwrap();
            let rec = triple_block_recursive(
                &split3(&m, 2, 3, 2).unwrap(),
                MoorePenrose,
                UnitConsistent,
                MoorePenrose,
            )
            .unwrap();
            assert!(rel_err(&fold.value, &rec.value).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn five_way_fold_inverts() {
        let sizes = [1, 2, 1, 2, 1];
        let m = gen_well_conditioned(8, &sizes, 1e3).unwrap();
        let kinds = [
            MoorePenrose,
            UnitConsistent,
            Exact,
            SimilarityConsistent,
            Drazin,
        ];
        let pairs: Vec<_> = sizes.iter().copied().zip(kinds).collect();
        let j = k_block_inverse(&m, &BlockSpec::from_pairs(&pairs).unwrap()).unwrap();
        assert!(rel_err(&(&j.value * &m), &DenseMatrix::identity(7)).unwrap() <= 1e-8);
    }

    #[test]
    fn operator_size() {
        let op = left_fold_operator(
            &BlockSpec::from_pairs(&[(1, Exact), (2, Exact), (3, Exact)]).unwrap(),
        );
        assert_eq!(op.size(), Some(6));
        assert_eq!(InverseOperator::Kernel(Exact).size(), None);
    }
}
