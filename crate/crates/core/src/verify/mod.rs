//! Verification harness: oracle checks, invariance checks, negative
//! controls, and a deterministic machine-readable report.
//!
//! Each check produces a [`VerificationCase`]. A case with a threshold is
//! asserted; a case without one only records its residual. Negative-control
//! cases carry a floor instead, and count as detected when the residual
//! exceeds it.

mod suite;

pub use suite::{run_suite, Family, FamilyTiming, SuiteConfig, Thresholds, VerificationReport};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::GinvKind;
use crate::matrix::{rel_err, Block3, BlockSpec, DenseMatrix, TransformSet};
use crate::mixed::{mixed_inverse, triple_block_explicit, triple_block_recursive, Method};

/// What a case measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    ExactReduction,
    ExplicitVsRecursive,
    TransformConsistency,
    FoldOrder,
    Penrose,
    KindAxioms,
    NegativeControl,
    ScRecorded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub case_id: String,
    pub seed: u64,
    /// Block sizes for mixed checks, matrix shape for single-kernel checks.
    pub dims: Vec<usize>,
    pub spec: Option<BlockSpec>,
    pub method: String,
    pub check: Check,
    /// `None` when the computation failed; see `error`.
    pub residual: Option<f64>,
    pub threshold: Option<f64>,
    /// Negative controls only: the residual must exceed this.
    pub floor: Option<f64>,
    /// `None` for recorded-only cases.
    pub passed: Option<bool>,
    pub error: Option<String>,
}

impl VerificationCase {
    pub fn new(
        check: Check,
        method: impl Into<String>,
        dims: Vec<usize>,
        spec: Option<BlockSpec>,
    ) -> Self {
        VerificationCase {
            case_id: String::new(),
            seed: 0,
            dims,
            spec,
            method: method.into(),
            check,
            residual: None,
            threshold: None,
            floor: None,
            passed: None,
            error: None,
        }
    }

    /// Stores the outcome of a residual computation. Non-finite residuals
    /// are treated as failures of the computation.
    pub fn with_residual(mut self, r: Result<f64>) -> Self {
        match r {
            Ok(v) if v.is_finite() => {
                self.residual = Some(v);
                self.error = None;
            }
            Ok(v) => {
                self.residual = None;
                self.error = Some(format!("non-finite residual ({v})"));
            }
            Err(e) => {
                self.residual = None;
                self.error = Some(e.to_string());
            }
        }
        self.refresh();
        self
    }

    /// Asserts `residual ≤ threshold`.
    pub fn asserted(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self.floor = None;
        self.refresh();
        self
    }

    /// Records the residual without asserting anything.
    pub fn recorded(mut self) -> Self {
        self.threshold = None;
        self.floor = None;
        self.refresh();
        self
    }

    /// Negative control: detected when `residual > floor`.
    pub fn control(mut self, floor: f64) -> Self {
        self.threshold = None;
        self.floor = Some(floor);
        self.refresh();
        self
    }

    pub fn identified(mut self, case_id: String, seed: u64) -> Self {
        self.case_id = case_id;
        self.seed = seed;
        self
    }

    fn refresh(&mut self) {
        self.passed = match (self.threshold, self.floor) {
            (Some(t), _) => Some(self.residual.is_some_and(|r| r <= t)),
            (None, Some(f)) => Some(self.residual.is_some_and(|r| r > f)),
            (None, None) => None,
        };
    }

    pub fn is_asserted(&self) -> bool {
        self.threshold.is_some()
    }

    pub fn is_control(&self) -> bool {
        self.floor.is_some()
    }
}

/// `rel_err(J(G_l M G_r), G_r⁻¹ J(M) G_l⁻¹)` for the mixed inverse `J`
/// computed by `method`.
pub fn invariance_residual(
    m: &DenseMatrix,
    spec: &BlockSpec,
    t: &TransformSet,
    method: Method,
) -> Result<f64> {
    let transformed = &(&t.left() * m) * &t.right();
    let lhs = mixed_inverse(&transformed, spec, method)?.value;
    let j = mixed_inverse(m, spec, method)?.value;
    let rhs = &(&t.right_inverse() * &j) * &t.left_inverse();
    rel_err(&lhs, &rhs)
}

/// Invariance of the mixed inverse under block transforms. Returned
/// recorded-only; callers attach a threshold or floor.
pub fn check_transform_consistency(
    m: &DenseMatrix,
    spec: &BlockSpec,
    t: &TransformSet,
    method: Method,
) -> VerificationCase {
    VerificationCase::new(
        Check::TransformConsistency,
        method.name(),
        spec.sizes(),
        Some(spec.clone()),
    )
    .with_residual(invariance_residual(m, spec, t, method))
}

/// `rel_err(J(M), M⁻¹)` for nonsingular `M`.
pub fn check_exact_reduction(
    m: &DenseMatrix,
    spec: &BlockSpec,
    method: Method,
) -> VerificationCase {
    let residual = (|| {
        let j = mixed_inverse(m, spec, method)?.value;
        rel_err(&j, &crate::kernels::exact_inverse(m)?)
    })();
    VerificationCase::new(
        Check::ExactReduction,
        method.name(),
        spec.sizes(),
        Some(spec.clone()),
    )
    .with_residual(residual)
}

/// `rel_err(explicit, recursive)` for the three-set closed form against the
/// nested dual-block construction.
pub fn check_explicit_vs_recursive(b: &Block3, kinds: [GinvKind; 3]) -> VerificationCase {
    let (p, q, r) = b.sizes();
    let spec = BlockSpec::from_pairs(&[(p, kinds[0]), (q, kinds[1]), (r, kinds[2])]).ok();
    let residual = (|| {
        let e = triple_block_explicit(b, kinds[0], kinds[1], kinds[2])?;
        let rec = triple_block_recursive(b, kinds[0], kinds[1], kinds[2])?;
        rel_err(&e.value, &rec.value)
    })();
    VerificationCase::new(
        Check::ExplicitVsRecursive,
        "triple_explicit_vs_recursive",
        vec![p, q, r],
        spec,
    )
    .with_residual(residual)
}
