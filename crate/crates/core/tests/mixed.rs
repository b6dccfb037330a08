use mixinv::kernels::{exact_inverse, mp_inverse, GinvKind::*, DEFAULT_RTOL};
use mixinv::matrix::{gen_matrix, gen_well_conditioned, split2, split3, Block2};
use mixinv::mixed::{
    dual_block_inverse, errata, k_block_inverse, mixed_inverse, triple_block_explicit,
    triple_block_recursive, Method,
};
use mixinv::{rel_err, BlockSpec, DenseMatrix};

fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
    let e = (a - b).max_abs();
    assert!(e <= tol, "max abs diff {e:e}");
}

#[test]
fn dual_with_zero_coupling_is_block_diagonal() {
    let w = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
    let z = DenseMatrix::from_rows(&[[3.0]]);
    let b = Block2::new(
        w.clone(),
        DenseMatrix::zeros(2, 1),
        DenseMatrix::zeros(1, 2),
        z.clone(),
    )
    .unwrap();
    let j = dual_block_inverse(&b, MoorePenrose, UnitConsistent).unwrap();
    let expected = DenseMatrix::block_diagonal(&[
        mp_inverse(&w, DEFAULT_RTOL),
        DenseMatrix::from_rows(&[[1.0 / 3.0]]),
    ]);
    close(&j.value, &expected, 1e-14);
    assert_eq!(j.method, Method::Dual);
}

#[test]
fn dual_exact_matches_inverse() {
    let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
    let b = split2(&m, 1, 1).unwrap();
    let j = dual_block_inverse(&b, Exact, Exact).unwrap();
    close(
        &j.value,
        &DenseMatrix::from_rows(&[[-2.0, 1.0], [1.5, -0.5]]),
        1e-14,
    );
}

#[test]
fn triple_on_diagonal() {
    let m = DenseMatrix::from_diagonal(&[2.0, 3.0, 4.0]);
    let b = split3(&m, 1, 1, 1).unwrap();
    let expected = DenseMatrix::from_diagonal(&[0.5, 1.0 / 3.0, 0.25]);
    for kinds in [[Exact; 3], [MoorePenrose, UnitConsistent, MoorePenrose]] {
        let e = triple_block_explicit(&b, kinds[0], kinds[1], kinds[2]).unwrap();
        let r = triple_block_recursive(&b, kinds[0], kinds[1], kinds[2]).unwrap();
        close(&e.value, &expected, 1e-15);
        close(&r.value, &expected, 1e-15);
    }
}

#[test]
fn triple_recursive_with_zero_coupling_collapses() {
    let blocks = [
        gen_matrix(1, 2, 1, 1.0).unwrap(),
        gen_matrix(2, 3, 2, 1.0).unwrap(),
        gen_matrix(3, 2, 2, 1.0).unwrap(),
    ];
    let m = DenseMatrix::block_diagonal(&blocks);
    let b = split3(&m, 2, 3, 2).unwrap();
    let r = triple_block_recursive(&b, MoorePenrose, UnitConsistent, MoorePenrose).unwrap();
    let expected = DenseMatrix::block_diagonal(&[
        mp_inverse(&blocks[0], DEFAULT_RTOL),
        mixinv::kernels::uc_inverse(&blocks[1]).unwrap(),
        mp_inverse(&blocks[2], DEFAULT_RTOL),
    ]);
    assert!(rel_err(&r.value, &expected).unwrap() <= 1e-12);
}

#[test]
fn explicit_agrees_with_recursive_on_well_conditioned() {
    for seed in 0..30 {
        let m = gen_well_conditioned(seed, &[2, 3, 2], 1e3).unwrap();
        let b = split3(&m, 2, 3, 2).unwrap();
        let e = triple_block_explicit(&b, MoorePenrose, UnitConsistent, MoorePenrose).unwrap();
        let r = triple_block_recursive(&b, MoorePenrose, UnitConsistent, MoorePenrose).unwrap();
        assert!(rel_err(&e.value, &r.value).unwrap() <= 1e-8);
    }
}

#[test]
fn single_block_fold_is_the_kernel() {
    let m = gen_matrix(7, 5, 3, 2.0).unwrap();
    let spec = BlockSpec::from_pairs(&[(5, MoorePenrose)]).unwrap();
    assert_eq!(
        k_block_inverse(&m, &spec).unwrap().value,
        mp_inverse(&m, DEFAULT_RTOL)
    );
}

#[test]
fn every_method_reduces_to_exact_inverse() {
    for seed in 0..20 {
        let m = gen_well_conditioned(seed, &[2, 2, 3], 1e2).unwrap();
        let inv = exact_inverse(&m).unwrap();
        let triple: BlockSpec = "2:mp,2:uc,3:sc".parse().unwrap();
        let dual: BlockSpec = "4:uc,3:mp".parse().unwrap();
        for (spec, method) in [
            (&dual, Method::Dual),
            (&triple, Method::TripleExplicit),
            (&triple, Method::TripleRecursive),
            (&triple, Method::KFold),
        ] {
            let j = mixed_inverse(&m, spec, method).unwrap();
            assert!(
                rel_err(&j.value, &inv).unwrap() <= 1e-8,
                "{method:?} seed {seed}"
            );
        }
    }
}

#[test]
fn fold_of_two_is_dual() {
    for seed in 0..20 {
        let m = gen_matrix(seed, 5, 3, 1.0).unwrap();
        let spec: BlockSpec = "2:uc,3:mp".parse().unwrap();
        let fold = k_block_inverse(&m, &spec).unwrap();
        let dual = mixed_inverse(&m, &spec, Method::Dual).unwrap();
        assert!(rel_err(&fold.value, &dual.value).unwrap() <= 1e-12);
    }
}

#[test]
fn method_block_count_is_checked() {
    let m = DenseMatrix::identity(4);
    let two: BlockSpec = "2:mp,2:mp".parse().unwrap();
    let three: BlockSpec = "1:mp,1:mp,2:mp".parse().unwrap();
    assert!(mixed_inverse(&m, &two, Method::TripleExplicit).is_err());
    assert!(mixed_inverse(&m, &three, Method::Dual).is_err());
    let wrong: BlockSpec = "2:mp,3:mp".parse().unwrap();
    assert!(mixed_inverse(&m, &wrong, Method::Dual).is_err());
}

#[test]
fn errata_ledger_is_complete() {
    let e = errata();
    assert_eq!(e.len(), 11);
    for entry in &e {
        assert!(!entry.listing_location.is_empty());
        assert_ne!(entry.listing_text, entry.canonical_text);
    }
}
