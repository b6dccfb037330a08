//! The three-set formulas also circulate as a functional-form listing
//! (`Mi11 = …`, using `InvA`, `InvB`, `InvC` and a generic `Inverse`).
//! That listing disagrees with the closed-form blocks in eleven places. This
//! module records each disagreement and can evaluate the listing literally
//! so the effect of the discrepancies can be measured.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{apply_kind, GinvKind};
use crate::matrix::{assemble3, Block3, DenseMatrix};

/// One place where the functional listing departs from the closed-form
/// block expressions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erratum {
    /// Listing entry and which occurrence within it.
    pub listing_location: String,
    /// Sub-expression as written in the listing.
    pub listing_text: String,
    /// Sub-expression demanded by the closed-form blocks.
    pub canonical_text: String,
}

const P_ARG: &str = "-U*InvA[R]*S+V";
const Q_ARG: &str = "-(-X*InvA[R]*S+Y)*InvB[-U*InvA[R]*S+V]*(-U*InvA[R]*T+W)-X*InvA[R]*T+Z";

fn erratum(location: &str, listing: String, canonical: String) -> Erratum {
    Erratum {
        listing_location: location.to_string(),
        listing_text: listing,
        canonical_text: canonical,
    }
}

/// All discrepancies between the listing and the closed-form blocks, in
/// listing order.
pub fn errata() -> Vec<Erratum> {
    let generic_b = || (format!("Inverse[{P_ARG}]"), format!("InvB[{P_ARG}]"));
    let generic_c = || (format!("Inverse[{Q_ARG}]"), format!("InvC[{Q_ARG}]"));
    let mut out = Vec::new();
    let mut push = |loc: &str, (l, c): (String, String)| out.push(erratum(loc, l, c));
    push(
        "Mi11, occurrence 1 (second term of the sum multiplying InvA[R]*S)",
        generic_b(),
    );
    push(
        "Mi11, occurrence 2 (inside the sum multiplying InvA[R]*S)",
        generic_c(),
    );
    push("Mi11, occurrence 3 (coefficient of X)", generic_c());
    push("Mi13, occurrence 1 (term starting InvA[R]*S)", generic_c());
    push("Mi13, occurrence 2 (term starting InvA[R]*T)", generic_c());
    push(
        "Mi21, occurrence 1 (first term of the sum multiplying U)",
        generic_b(),
    );
    push(
        "Mi23, occurrence 1 (inside the InvC argument)",
        (
            format!("InvC[-(-X*InvA[R]*S+Y)*Inverse[{P_ARG}]*(-U*InvA[R]*T+W)-X*InvA[R]*T+Z]"),
            format!("InvC[{Q_ARG}]"),
        ),
    );
    push(
        "Mi31, occurrence 1 (factor before U)",
        (format!("InvC[{P_ARG}]"), format!("InvB[{P_ARG}]")),
    );
    push("Mi31, occurrence 2 (coefficient of X)", generic_c());
    push("Mi32, occurrence 1", generic_c());
    push("Mi33, occurrence 1", generic_c());
    out
}

/// Evaluates the functional listing exactly as written, with `generic` used
/// wherever the listing says `Inverse`.
pub fn evaluate_listing(
    b: &Block3,
    kind_a: GinvKind,
    kind_b: GinvKind,
    kind_c: GinvKind,
    generic: GinvKind,
) -> Result<DenseMatrix> {
    let ra = apply_kind(kind_a, &b.r).map_err(|e| e.within("InvA[R]"))?;
    let p = &b.v - &(&(&b.u * &ra) * &b.s);
    let w_t = &b.w - &(&(&b.u * &ra) * &b.t);
    let y_t = &b.y - &(&(&b.x * &ra) * &b.s);
    let xrt = &(&b.x * &ra) * &b.t;
    let inv = |kind: GinvKind, m: &DenseMatrix, name: &str| {
        apply_kind(kind, m).map_err(|e| e.within(name.to_string()))
    };
    let pb = inv(kind_b, &p, "InvB[P]")?;
    let pg = inv(generic, &p, "Inverse[P]")?;
    let pc = inv(kind_c, &p, "InvC[P]")?;
    let q_b = &(&b.z - &xrt) - &(&(&y_t * &pb) * &w_t);
    let q_g = &(&b.z - &xrt) - &(&(&y_t * &pg) * &w_t);
    let qc = inv(kind_c, &q_b, "InvC[Q]")?;
    let qg = inv(generic, &q_b, "Inverse[Q]")?;
    let qc_of_qg = inv(kind_c, &q_g, "InvC[Q with Inverse[P]]")?;

    let ra_s = &ra * &b.s;
    let ra_t = &ra * &b.t;
    let prod = |ms: &[&DenseMatrix]| {
        let mut acc = ms[0].clone();
        for m in &ms[1..] {
            acc = &acc * m;
        }
        acc
    };

    // Mi11
    let sum_s = &pb + &prod(&[&pg, &w_t, &qg, &y_t, &pb]);
    let u_coeff = &prod(&[&ra_s, &sum_s]) - &prod(&[&ra_t, &qc, &y_t, &pb]);
    let x_coeff = &(-prod(&[&ra_s, &pb, &w_t, &qg])) + &prod(&[&ra_t, &qc]);
    let mi11 = &prod(&[&(&prod(&[&u_coeff, &b.u]) + &prod(&[&x_coeff, &b.x])), &ra]) + &ra;
    // Mi12
    let h = &pb + &prod(&[&pb, &w_t, &qc, &y_t, &pb]);
    let mi12 = &(-prod(&[&ra_s, &h])) + &prod(&[&ra_t, &qc, &y_t, &pb]);
    // Mi13
    let mi13 = &prod(&[&ra_s, &pb, &w_t, &qg]) - &prod(&[&ra_t, &qg]);
    // Mi21
    let sum_u = &pg + &prod(&[&pb, &w_t, &qc, &y_t, &pb]);
    let mi21 = -prod(&[
        &(&prod(&[&sum_u, &b.u]) - &prod(&[&pb, &w_t, &qc, &b.x])),
        &ra,
    ]);
    // Mi22
    let mi22 = h;
    // Mi23
    let mi23 = -prod(&[&pb, &w_t, &qc_of_qg]);
    // Mi31
    let mi31 = -prod(&[
        &(&(-prod(&[&qc, &y_t, &pc, &b.u])) + &prod(&[&qg, &b.x])),
        &ra,
    ]);
    // Mi32
    let mi32 = -prod(&[&qg, &y_t, &pb]);
    // Mi33
    let mi33 = qg;

    assemble3(&Block3::new([
        mi11, mi12, mi13, mi21, mi22, mi23, mi31, mi32, mi33,
    ])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gen_matrix, gen_well_conditioned, rel_err, split3};
    use crate::mixed::triple_block_explicit;
    use GinvKind::*;

    #[test]
    fn eleven_discrepancies_in_listing_order() {
        let e = errata();
        assert_eq!(e.len(), 11);
        let entries: Vec<&str> = e.iter().map(|x| &x.listing_location[..4]).collect();
        assert_eq!(
            entries,
            [
                "Mi11", "Mi11", "Mi11", "Mi13", "Mi13", "Mi21", "Mi23", "Mi31", "Mi31", "Mi32",
                "Mi33"
            ]
        );
        for x in &e {
            assert_ne!(x.listing_text, x.canonical_text);
            assert!(!x.canonical_text.contains("Inverse["));
        }
    }

    #[test]
    fn listing_agrees_when_all_inverses_coincide() {
        for seed in 0..5 {
            let m = gen_well_conditioned(seed, &[2, 2, 3], 1e3).unwrap();
            let b = split3(&m, 2, 2, 3).unwrap();
            let canon =
                triple_block_explicit(&b, MoorePenrose, UnitConsistent, MoorePenrose).unwrap();
            let lit =
                evaluate_listing(&b, MoorePenrose, UnitConsistent, MoorePenrose, Exact).unwrap();
            assert!(rel_err(&lit, &canon.value).unwrap() <= 1e-8);
            // Singular-capable kinds everywhere: the listing collapses onto the
            // canonical blocks when InvB = InvC = Inverse.
            let canon =
                triple_block_explicit(&b, MoorePenrose, MoorePenrose, MoorePenrose).unwrap();
            let lit = evaluate_listing(&b, MoorePenrose, MoorePenrose, MoorePenrose, MoorePenrose)
                .unwrap();
            assert!(rel_err(&lit, &canon.value).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn listing_departs_on_singular_complement() {
        // Rank-deficient input with UC on the third set: the generic
        // occurrences of Inverse[Q] pick MP where the blocks demand UC.
        let m = gen_matrix(3, 9, 7, 1.0).unwrap();
        let b = split3(&m, 3, 3, 3).unwrap();
        let canon = triple_block_explicit(&b, MoorePenrose, MoorePenrose, UnitConsistent).unwrap();
        let lit =
            evaluate_listing(&b, MoorePenrose, MoorePenrose, UnitConsistent, MoorePenrose).unwrap();
        assert!(rel_err(&lit, &canon.value).unwrap() > 1e-6);
    }
}
