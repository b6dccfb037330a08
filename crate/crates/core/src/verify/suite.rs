use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    check_exact_reduction, check_explicit_vs_recursive, check_transform_consistency,
    invariance_residual, Check, VerificationCase,
};
use crate::error::{GinvError, Result};
use crate::kernels::{apply_kind, drazin, exact_inverse, penrose_residuals, GinvKind};
use crate::matrix::{
    gen_matrix, gen_matrix_rect, gen_transforms, gen_transforms_for_classes, gen_well_conditioned,
    rel_err, split3, BlockSpec, DenseMatrix, TransformClass,
};
use crate::mixed::{
    errata, evaluate_listing, k_block_inverse, mixed_inverse, triple_block_explicit, Erratum,
    Method,
};

use GinvKind::*;

pub const SUITE_NAME: &str = "mixinv-verify";

/// Case families, in the order they appear in a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Penrose,
    MpUnitary,
    UcDiagonal,
    KindAxioms,
    Drazin,
    ExactReduction,
    ExplicitVsRecursive,
    TransformConsistency,
    FoldOrder,
    NegativeControl,
    ScRecorded,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Penrose,
        Family::MpUnitary,
        Family::UcDiagonal,
        Family::KindAxioms,
        Family::Drazin,
        Family::ExactReduction,
        Family::ExplicitVsRecursive,
        Family::TransformConsistency,
        Family::FoldOrder,
        Family::NegativeControl,
        Family::ScRecorded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Penrose => "penrose",
            Family::MpUnitary => "mp_unitary",
            Family::UcDiagonal => "uc_diagonal",
            Family::KindAxioms => "kind_axioms",
            Family::Drazin => "drazin",
            Family::ExactReduction => "exact_reduction",
            Family::ExplicitVsRecursive => "explicit_vs_recursive",
            Family::TransformConsistency => "transform_consistency",
            Family::FoldOrder => "fold_order",
            Family::NegativeControl => "negative_control",
            Family::ScRecorded => "sc_recorded",
        }
    }

    /// Seeds per variant when no count is configured.
    pub fn default_count(self) -> usize {
        match self {
            Family::Penrose => 200,
            Family::UcDiagonal | Family::NegativeControl => 100,
            Family::KindAxioms | Family::ScRecorded => 20,
            _ => 50,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GinvError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
                GinvError::input(format!(
                    "unknown family {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub mp: f64,
    pub uc: f64,
    pub axioms: f64,
    pub drazin: f64,
    pub exact_reduction: f64,
    pub explicit_vs_recursive: f64,
    /// Mixed invariance on full-rank matrices with the dual-block form.
    pub invariance_full_rank: f64,
    /// Mixed invariance for the recursive form and for rank-deficient input.
    pub invariance: f64,
    pub fold_dual: f64,
    pub fold_recursive: f64,
    pub sc: f64,
    pub negative_floor: f64,
    /// Fraction of negative controls that must exceed the floor.
    pub negative_min_rate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            mp: 1e-10,
            uc: 1e-8,
            axioms: 1e-8,
            drazin: 1e-8,
            exact_reduction: 1e-8,
            explicit_vs_recursive: 1e-8,
            invariance_full_rank: 1e-8,
            invariance: 1e-7,
            fold_dual: 1e-12,
            fold_recursive: 1e-8,
            sc: 1e-7,
            negative_floor: 1e-2,
            negative_min_rate: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub base_seed: u64,
    /// Families to run; reports always list them in [`Family::ALL`] order.
    pub families: Vec<Family>,
    /// Per-family seed counts overriding [`Family::default_count`].
    pub counts: Vec<(Family, usize)>,
    pub thresholds: Thresholds,
    /// Assert the similarity-consistency cases that are otherwise recorded.
    pub promote_sc: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            base_seed: 0,
            families: Family::ALL.to_vec(),
            counts: Vec::new(),
            thresholds: Thresholds::default(),
            promote_sc: false,
        }
    }
}

impl SuiteConfig {
    pub fn count(&self, family: Family) -> usize {
        self.counts
            .iter()
            .rev()
            .find(|(f, _)| *f == family)
            .map_or(family.default_count(), |&(_, n)| n)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.thresholds;
        let all = [
            ("mp", t.mp),
            ("uc", t.uc),
            ("axioms", t.axioms),
            ("drazin", t.drazin),
            ("exact_reduction", t.exact_reduction),
            ("explicit_vs_recursive", t.explicit_vs_recursive),
            ("invariance_full_rank", t.invariance_full_rank),
            ("invariance", t.invariance),
            ("fold_dual", t.fold_dual),
            ("fold_recursive", t.fold_recursive),
            ("sc", t.sc),
            ("negative_floor", t.negative_floor),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(GinvError::input(format!(
                    "threshold {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&t.negative_min_rate) {
            return Err(GinvError::input(format!(
                "negative_min_rate must lie in [0, 1], got {}",
                t.negative_min_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub asserted: usize,
    pub passed: usize,
    pub failed: usize,
    pub recorded: usize,
    /// Cases whose computation failed, asserted or not.
    pub errored: usize,
    pub controls: usize,
    pub controls_detected: usize,
    pub controls_ok: bool,
    pub all_passed: bool,
}

/// Wall-clock per family. Kept out of the content hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTiming {
    pub family: Family,
    pub cases: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite_name: String,
    pub artifact_version: String,
    pub base_seed: u64,
    pub config: SuiteConfig,
    pub cases: Vec<VerificationCase>,
    pub errata: Vec<Erratum>,
    pub summary: Summary,
    /// SHA-256 of the canonical serialization of every field above.
    pub content_hash: String,
    pub timings: Vec<FamilyTiming>,
}

#[derive(Serialize)]
struct HashedContent<'a> {
    suite_name: &'a str,
    artifact_version: &'a str,
    base_seed: u64,
    config: &'a SuiteConfig,
    cases: &'a [VerificationCase],
    errata: &'a [Erratum],
    summary: &'a Summary,
}

impl VerificationReport {
    fn hashed(&self) -> HashedContent<'_> {
        HashedContent {
            suite_name: &self.suite_name,
            artifact_version: &self.artifact_version,
            base_seed: self.base_seed,
            config: &self.config,
            cases: &self.cases,
            errata: &self.errata,
            summary: &self.summary,
        }
    }

    pub fn compute_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.hashed()).expect("report serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// 0 when every asserted case passed and the controls fired, else 1.
    pub fn exit_status(&self) -> i32 {
        if self.summary.all_passed {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationCase> {
        self.cases
            .iter()
            .filter(|c| c.is_asserted() && c.passed == Some(false))
    }
}

fn summarize(cases: &[VerificationCase], t: &Thresholds) -> Summary {
    let asserted = cases.iter().filter(|c| c.is_asserted()).count();
    let passed = cases
        .iter()
        .filter(|c| c.is_asserted() && c.passed == Some(true))
        .count();
    let controls = cases.iter().filter(|c| c.is_control()).count();
    let controls_detected = cases
        .iter()
        .filter(|c| c.is_control() && c.passed == Some(true))
        .count();
    let controls_ok =
        controls == 0 || controls_detected as f64 >= t.negative_min_rate * controls as f64;
    let failed = asserted - passed;
    Summary {
        total: cases.len(),
        asserted,
        passed,
        failed,
        recorded: cases.iter().filter(|c| c.passed.is_none()).count(),
        errored: cases.iter().filter(|c| c.error.is_some()).count(),
        controls,
        controls_detected,
        controls_ok,
        all_passed: failed == 0 && controls_ok,
    }
}

type CaseFn = Arc<dyn Fn(u64, usize) -> VerificationCase + Send + Sync>;

struct Variant {
    name: String,
    count: usize,
    run: CaseFn,
}

fn variant(
    name: impl Into<String>,
    count: usize,
    f: impl Fn(u64, usize) -> VerificationCase + Send + Sync + 'static,
) -> Variant {
    Variant {
        name: name.into(),
        count,
        run: Arc::new(f),
    }
}

/// Independent stream for transforms drawn alongside a case matrix.
fn aux_seed(seed: u64) -> u64 {
    seed ^ 0x7472_616e_7366_6f72
}

fn spec(pairs: &[(usize, GinvKind)]) -> BlockSpec {
    BlockSpec::from_pairs(pairs).expect("static spec is valid")
}

fn with_kinds(sizes: &[usize], kinds: &[GinvKind]) -> BlockSpec {
    let pairs: Vec<(usize, GinvKind)> = sizes.iter().copied().zip(kinds.iter().copied()).collect();
    spec(&pairs)
}

fn sc_gate(case: VerificationCase, promote: bool, threshold: f64) -> VerificationCase {
    if promote {
        case.asserted(threshold)
    } else {
        case.recorded()
    }
}

const TRIPLE_SIZES: [[usize; 3]; 10] = [
    [1, 1, 1],
    [2, 1, 1],
    [1, 2, 2],
    [2, 2, 2],
    [3, 2, 1],
    [2, 3, 3],
    [3, 3, 3],
    [4, 2, 3],
    [3, 4, 2],
    [4, 3, 5],
];
/// Every block at least 3 wide, so no Schur complement of a rank-(dim−2)
/// matrix vanishes identically.
const RANK_DEFICIENT_TRIPLES: [[usize; 3]; 3] = [[3, 3, 3], [3, 4, 3], [4, 3, 3]];
const RANK_DEFICIENT_PAIRS: [[usize; 2]; 3] = [[3, 3], [3, 4], [4, 3]];

fn family_variants(family: Family, n: usize, cfg: &SuiteConfig) -> Vec<Variant> {
    let t = cfg.thresholds.clone();
    let promote = cfg.promote_sc;
    match family {
        Family::Penrose => vec![variant("mp", n, move |seed, i| {
            let rows = 1 + i % 12;
            let cols = 1 + (i / 12) % 12;
            let rank = 1 + (i / 3) % rows.min(cols);
            let residual = gen_matrix_rect(seed, rows, cols, rank, 3.0).and_then(|m| {
                penrose_residuals(&m, &apply_kind(MoorePenrose, &m)?).map(|r| r.max())
            });
            VerificationCase::new(Check::Penrose, "mp", vec![rows, cols], None)
                .with_residual(residual)
                .asserted(t.mp)
        })],
        Family::MpUnitary => vec![variant("mp", n, move |seed, i| {
            kernel_consistency(seed, i, MoorePenrose, TransformClass::Orthogonal).asserted(t.mp)
        })],
        Family::UcDiagonal => vec![variant("uc", n, move |seed, i| {
            kernel_consistency(seed, i, UnitConsistent, TransformClass::Diagonal).asserted(t.uc)
        })],
        Family::KindAxioms => GinvKind::ALL
            .into_iter()
            .map(|kind| {
                let t = t.clone();
                variant(kind.short_name(), n, move |seed, i| {
                    let dim = 2 + i % 4;
                    let rank = if kind == Exact || i % 2 == 0 {
                        dim
                    } else {
                        dim - 1
                    };
                    let residual = gen_matrix(seed, dim, rank, 1.0).and_then(|m| {
                        let g = apply_kind(kind, &m)?;
                        let r1 = rel_err(&(&(&m * &g) * &m), &m)?;
                        let r2 = rel_err(&(&(&g * &m) * &g), &g)?;
                        Ok(r1.max(r2))
                    });
                    let case = VerificationCase::new(
                        Check::KindAxioms,
                        kind.short_name(),
                        vec![dim, dim],
                        None,
                    )
                    .with_residual(residual);
                    if kind == SimilarityConsistent && rank < dim {
                        sc_gate(case, promote, t.axioms)
                    } else {
                        case.asserted(t.axioms)
                    }
                })
            })
            .collect(),
        Family::Drazin => vec![variant("identities", n, move |seed, i| {
            let dim = 2 + i % 7;
            let index = (1 + i % 3).min(dim - 1);
            let residual = drazin_identities(seed, dim, index);
            VerificationCase::new(Check::KindAxioms, "drazin", vec![dim, dim], None)
                .with_residual(residual)
                .asserted(t.drazin)
        })],
        Family::ExactReduction => {
            let mut v = Vec::new();
            for kind in GinvKind::ALL {
                let t = t.clone();
                v.push(variant(
                    format!("kernel_{}", kind.short_name()),
                    n,
                    move |seed, i| {
                        let dim = 1 + i % 6;
                        let residual = gen_matrix(seed, dim, dim, 3.0)
                            .and_then(|m| rel_err(&apply_kind(kind, &m)?, &exact_inverse(&m)?));
                        let case = VerificationCase::new(
                            Check::ExactReduction,
                            kind.short_name(),
                            vec![dim, dim],
                            None,
                        )
                        .with_residual(residual);
                        case.asserted(if kind == SimilarityConsistent {
                            t.sc
                        } else {
                            t.exact_reduction
                        })
                    },
                ));
            }
            let mixed: [(&str, Method, Vec<usize>, Vec<GinvKind>); 6] = [
                (
                    "dual_uc_mp",
                    Method::Dual,
                    vec![3, 3],
                    vec![UnitConsistent, MoorePenrose],
                ),
                (
                    "explicit_exact",
                    Method::TripleExplicit,
                    vec![3, 3, 3],
                    vec![Exact, Exact, Exact],
                ),
                (
                    "explicit_mp_uc_mp",
                    Method::TripleExplicit,
                    vec![3, 3, 3],
                    vec![MoorePenrose, UnitConsistent, MoorePenrose],
                ),
                (
                    "recursive_mp_uc_mp",
                    Method::TripleRecursive,
                    vec![3, 3, 3],
                    vec![MoorePenrose, UnitConsistent, MoorePenrose],
                ),
                (
                    "fold_mp_uc_mp",
                    Method::KFold,
                    vec![3, 3, 3],
                    vec![MoorePenrose, UnitConsistent, MoorePenrose],
                ),
                (
                    "fold_4",
                    Method::KFold,
                    vec![2, 2, 2, 2],
                    vec![MoorePenrose, UnitConsistent, MoorePenrose, UnitConsistent],
                ),
            ];
            for (name, method, sizes, kinds) in mixed {
                let t = t.clone();
                let s = with_kinds(&sizes, &kinds);
                v.push(variant(name, n, move |seed, _| {
                    match gen_well_conditioned(seed, &sizes, 1e3) {
                        Ok(m) => check_exact_reduction(&m, &s, method),
                        Err(e) => VerificationCase::new(
                            Check::ExactReduction,
                            method.name(),
                            sizes.clone(),
                            Some(s.clone()),
                        )
                        .with_residual(Err(e)),
                    }
                    .asserted(t.exact_reduction)
                }));
            }
            v
        }
        Family::ExplicitVsRecursive => {
            let mut v = Vec::new();
            let assignments: [(&str, [GinvKind; 3]); 3] = [
                ("exact_exact_exact", [Exact, Exact, Exact]),
                ("mp_uc_mp", [MoorePenrose, UnitConsistent, MoorePenrose]),
                ("mp_uc_uc", [MoorePenrose, UnitConsistent, UnitConsistent]),
            ];
            for (name, kinds) in assignments {
                let t = t.clone();
                v.push(variant(name, n, move |seed, i| {
                    let sizes = TRIPLE_SIZES[i % TRIPLE_SIZES.len()];
                    match gen_well_conditioned(seed, &sizes, 1e3)
                        .and_then(|m| split3(&m, sizes[0], sizes[1], sizes[2]))
                    {
                        Ok(b) => check_explicit_vs_recursive(&b, kinds),
                        Err(e) => VerificationCase::new(
                            Check::ExplicitVsRecursive,
                            "triple_explicit_vs_recursive",
                            sizes.to_vec(),
                            None,
                        )
                        .with_residual(Err(e)),
                    }
                    .asserted(t.explicit_vs_recursive)
                }));
            }
            v.push(variant("rank_deficient_mp_uc_mp", n, move |seed, i| {
                let sizes = RANK_DEFICIENT_TRIPLES[i % RANK_DEFICIENT_TRIPLES.len()];
                let dim: usize = sizes.iter().sum();
                match gen_matrix(seed, dim, dim - 2, 2.0)
                    .and_then(|m| split3(&m, sizes[0], sizes[1], sizes[2]))
                {
                    Ok(b) => check_explicit_vs_recursive(
                        &b,
                        [MoorePenrose, UnitConsistent, MoorePenrose],
                    ),
                    Err(e) => VerificationCase::new(
                        Check::ExplicitVsRecursive,
                        "triple_explicit_vs_recursive",
                        sizes.to_vec(),
                        None,
                    )
                    .with_residual(Err(e)),
                }
                .recorded()
            }));
            v.push(variant("listing_literal_mp_mp_uc", n, move |seed, i| {
                let sizes = RANK_DEFICIENT_TRIPLES[i % RANK_DEFICIENT_TRIPLES.len()];
                let dim: usize = sizes.iter().sum();
                let kinds = [MoorePenrose, MoorePenrose, UnitConsistent];
                let residual = gen_matrix(seed, dim, dim - 2, 2.0)
                    .and_then(|m| split3(&m, sizes[0], sizes[1], sizes[2]))
                    .and_then(|b| {
                        let canon = triple_block_explicit(&b, kinds[0], kinds[1], kinds[2])?;
                        let lit = evaluate_listing(&b, kinds[0], kinds[1], kinds[2], MoorePenrose)?;
                        rel_err(&lit, &canon.value)
                    });
                VerificationCase::new(
                    Check::ExplicitVsRecursive,
                    "listing_vs_explicit",
                    sizes.to_vec(),
                    Some(with_kinds(&sizes, &kinds)),
                )
                .with_residual(residual)
                .recorded()
            }));
            v
        }
        Family::TransformConsistency => {
            let mut v = Vec::new();
            let runs: [(&str, Method, bool, f64); 4] = [
                (
                    "recursive_mp_uc_mp_full_rank",
                    Method::TripleRecursive,
                    false,
                    t.invariance,
                ),
                (
                    "recursive_mp_uc_mp_rank_deficient",
                    Method::TripleRecursive,
                    true,
                    t.invariance,
                ),
                (
                    "dual_uc_mp_full_rank",
                    Method::Dual,
                    false,
                    t.invariance_full_rank,
                ),
                (
                    "dual_uc_mp_rank_deficient",
                    Method::Dual,
                    true,
                    t.invariance,
                ),
            ];
            for (name, method, deficient, threshold) in runs {
                v.push(variant(name, n, move |seed, i| {
                    let (sizes, kinds): (Vec<usize>, Vec<GinvKind>) = if method == Method::Dual {
                        (
                            RANK_DEFICIENT_PAIRS[i % RANK_DEFICIENT_PAIRS.len()].to_vec(),
                            vec![UnitConsistent, MoorePenrose],
                        )
                    } else {
                        (
                            RANK_DEFICIENT_TRIPLES[i % RANK_DEFICIENT_TRIPLES.len()].to_vec(),
                            vec![MoorePenrose, UnitConsistent, MoorePenrose],
                        )
                    };
                    let s = with_kinds(&sizes, &kinds);
                    mixed_invariance(seed, &s, method, deficient, None).asserted(threshold)
                }));
            }
            v
        }
        Family::FoldOrder => {
            let t2 = t.clone();
            let pairs: [[GinvKind; 2]; 4] = [
                [UnitConsistent, MoorePenrose],
                [MoorePenrose, UnitConsistent],
                [MoorePenrose, MoorePenrose],
                [UnitConsistent, UnitConsistent],
            ];
            let t3 = t.clone();
            vec![
                variant("k2_vs_dual", n, move |seed, i| {
                    let sizes = RANK_DEFICIENT_PAIRS[i % RANK_DEFICIENT_PAIRS.len()];
                    let kinds = pairs[i % pairs.len()];
                    let s = with_kinds(&sizes, &kinds);
                    let dim = sizes[0] + sizes[1];
                    let rank = if i % 2 == 0 { dim } else { dim - 2 };
                    let residual = gen_matrix(seed, dim, rank, 2.0).and_then(|m| {
                        let fold = k_block_inverse(&m, &s)?;
                        let dual = mixed_inverse(&m, &s, Method::Dual)?;
                        rel_err(&fold.value, &dual.value)
                    });
                    VerificationCase::new(
                        Check::FoldOrder,
                        "k_fold_vs_dual",
                        sizes.to_vec(),
                        Some(s),
                    )
                    .with_residual(residual)
                    .asserted(t2.fold_dual)
                }),
                variant("k3_vs_recursive_well_conditioned", n, move |seed, i| {
                    let sizes = TRIPLE_SIZES[i % TRIPLE_SIZES.len()];
                    let s = with_kinds(&sizes, &[MoorePenrose, UnitConsistent, MoorePenrose]);
                    let residual = gen_well_conditioned(seed, &sizes, 1e3)
                        .and_then(|m| fold_vs_recursive(&m, &s));
                    VerificationCase::new(
                        Check::FoldOrder,
                        "k_fold_vs_triple_recursive",
                        sizes.to_vec(),
                        Some(s),
                    )
                    .with_residual(residual)
                    .asserted(t3.fold_recursive)
                }),
                variant("k3_vs_recursive_rank_deficient", n, move |seed, i| {
                    let sizes = RANK_DEFICIENT_TRIPLES[i % RANK_DEFICIENT_TRIPLES.len()];
                    let dim: usize = sizes.iter().sum();
                    let s = with_kinds(&sizes, &[MoorePenrose, UnitConsistent, MoorePenrose]);
                    let residual =
                        gen_matrix(seed, dim, dim - 2, 2.0).and_then(|m| fold_vs_recursive(&m, &s));
                    VerificationCase::new(
                        Check::FoldOrder,
                        "k_fold_vs_triple_recursive",
                        sizes.to_vec(),
                        Some(s),
                    )
                    .with_residual(residual)
                    .recorded()
                }),
            ]
        }
        Family::NegativeControl => {
            let floor = t.negative_floor;
            vec![variant("swapped_classes", n, move |seed, i| {
                let (sizes, kinds, method): (Vec<usize>, Vec<GinvKind>, Method) = if i % 2 == 0 {
                    (
                        RANK_DEFICIENT_PAIRS[(i / 2) % RANK_DEFICIENT_PAIRS.len()].to_vec(),
                        vec![MoorePenrose, UnitConsistent],
                        Method::Dual,
                    )
                } else {
                    (
                        RANK_DEFICIENT_TRIPLES[(i / 2) % RANK_DEFICIENT_TRIPLES.len()].to_vec(),
                        vec![MoorePenrose, UnitConsistent, MoorePenrose],
                        Method::TripleRecursive,
                    )
                };
                // Diagonal transforms on MP blocks, orthogonal ones on UC blocks.
                let swapped: Vec<TransformClass> = kinds
                    .iter()
                    .map(|k| match k {
                        UnitConsistent => TransformClass::Orthogonal,
                        _ => TransformClass::Diagonal,
                    })
                    .collect();
                let s = with_kinds(&sizes, &kinds);
                let mut case = mixed_invariance(seed, &s, method, true, Some(&swapped));
                case.check = Check::NegativeControl;
                case.control(floor)
            })]
        }
        Family::ScRecorded => {
            let (ta, tb, tc) = (t.clone(), t.clone(), t.clone());
            vec![
                variant("similarity_nonsingular", n, move |seed, i| {
                    let mut case = kernel_consistency_with(
                        seed,
                        i,
                        SimilarityConsistent,
                        TransformClass::Similarity,
                        false,
                    );
                    case.check = Check::ScRecorded;
                    case.asserted(ta.sc)
                }),
                variant("similarity_singular", n, move |seed, i| {
                    let mut case = kernel_consistency_with(
                        seed,
                        i,
                        SimilarityConsistent,
                        TransformClass::Similarity,
                        true,
                    );
                    case.check = Check::ScRecorded;
                    sc_gate(case, promote, tb.sc)
                }),
                variant("mixed_mp_uc_sc_recursive", n, move |seed, i| {
                    let sizes = RANK_DEFICIENT_TRIPLES[i % RANK_DEFICIENT_TRIPLES.len()];
                    let s = with_kinds(
                        &sizes,
                        &[MoorePenrose, UnitConsistent, SimilarityConsistent],
                    );
                    let mut case = mixed_invariance(seed, &s, Method::TripleRecursive, true, None);
                    case.check = Check::ScRecorded;
                    sc_gate(case, promote, tc.invariance)
                }),
            ]
        }
    }
}

/// Consistency of a single kernel under the transform class it promises.
fn kernel_consistency(
    seed: u64,
    i: usize,
    kind: GinvKind,
    class: TransformClass,
) -> VerificationCase {
    kernel_consistency_with(seed, i, kind, class, i % 2 == 1)
}

fn kernel_consistency_with(
    seed: u64,
    i: usize,
    kind: GinvKind,
    class: TransformClass,
    deficient: bool,
) -> VerificationCase {
    let dim = 2 + i % 7;
    let rank = if deficient {
        (dim - 1 - (i / 2) % 2).max(1)
    } else {
        dim
    };
    let s = spec(&[(dim, kind)]);
    let case = VerificationCase::new(
        Check::TransformConsistency,
        kind.short_name(),
        vec![dim, dim],
        Some(s.clone()),
    );
    let residual = gen_matrix(seed, dim, rank, 2.0).and_then(|m| {
        let t = gen_transforms_for_classes(aux_seed(seed), &[dim], &[class])?;
        invariance_residual(&m, &s, &t, Method::KFold)
    });
    case.with_residual(residual)
}

/// Mixed-inverse invariance on a seeded matrix; full rank or rank dim−2
/// with condition 1e2 on the nonzero spectrum.
fn mixed_invariance(
    seed: u64,
    s: &BlockSpec,
    method: Method,
    deficient: bool,
    classes: Option<&[TransformClass]>,
) -> VerificationCase {
    let dim = s.dim();
    let rank = if deficient { dim - 2 } else { dim };
    let result = gen_matrix(seed, dim, rank, 2.0).and_then(|m| {
        let t = match classes {
            Some(c) => gen_transforms_for_classes(aux_seed(seed), &s.sizes(), c)?,
            None => gen_transforms(aux_seed(seed), s)?,
        };
        Ok((m, t))
    });
    match result {
        Ok((m, t)) => check_transform_consistency(&m, s, &t, method),
        Err(e) => VerificationCase::new(
            Check::TransformConsistency,
            method.name(),
            s.sizes(),
            Some(s.clone()),
        )
        .with_residual(Err(e)),
    }
}

fn fold_vs_recursive(m: &DenseMatrix, s: &BlockSpec) -> Result<f64> {
    let fold = k_block_inverse(m, s)?;
    let rec = mixed_inverse(m, s, Method::TripleRecursive)?;
    rel_err(&fold.value, &rec.value)
}

/// Largest relative residual of `MD = DM`, `DMD = D` and `M^{k+1} D = M^k` on
/// `P · diag(N, A) · P⁻¹` with `N` a nilpotent Jordan block of size `index`.
fn drazin_identities(seed: u64, dim: usize, index: usize) -> Result<f64> {
    let p = gen_matrix(seed, dim, dim, 1.0)?;
    let p_inv = exact_inverse(&p)?;
    let mut nil = DenseMatrix::zeros(index, index);
    for j in 0..index.saturating_sub(1) {
        nil.set(j + 1, j, 1.0);
    }
    let core = gen_matrix(aux_seed(seed), dim - index, dim - index, 1.0)?;
    let m = &(&p * &DenseMatrix::block_diagonal(&[nil, core])) * &p_inv;
    let d = drazin(&m);
    let k = d.index;
    let g = &d.inverse;
    let r1 = rel_err(&(&m * g), &(g * &m))?;
    let r2 = rel_err(&(&(g * &m) * g), g)?;
    let r3 = rel_err(&(&m.pow(k + 1) * g), &m.pow(k))?;
    Ok(r1.max(r2).max(r3))
}

/// Runs the configured families and assembles the report.
///
/// Cases are numbered in report order; case `i` uses seed `base_seed + i`, so
/// the residuals do not depend on how the parallel runs are scheduled.
pub fn run_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    config.validate()?;
    let mut families: Vec<Family> = config.families.clone();
    families.sort();
    families.dedup();

    let mut cases = Vec::new();
    let mut timings = Vec::new();
    let mut next_index: u64 = 0;
    for family in families {
        let variants = family_variants(family, config.count(family), config);
        let mut plans = Vec::new();
        for v in &variants {
            for i in 0..v.count {
                let seed = config.base_seed.wrapping_add(next_index);
                next_index += 1;
                plans.push((
                    format!("{}/{}/{:03}", family.name(), v.name, i),
                    seed,
                    i,
                    v.run.clone(),
                ));
            }
        }
        let start = Instant::now();
        let done: Vec<VerificationCase> = plans
            .into_par_iter()
            .map(|(id, seed, i, run)| run(seed, i).identified(id, seed))
            .collect();
        timings.push(FamilyTiming {
            family,
            cases: done.len(),
            seconds: start.elapsed().as_secs_f64(),
        });
        cases.extend(done);
    }

    let summary = summarize(&cases, &config.thresholds);
    let mut report = VerificationReport {
        suite_name: SUITE_NAME.to_string(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        base_seed: config.base_seed,
        config: config.clone(),
        cases,
        errata: errata(),
        summary,
        content_hash: String::new(),
        timings,
    };
    report.content_hash = report.compute_hash();
    Ok(report)
}
