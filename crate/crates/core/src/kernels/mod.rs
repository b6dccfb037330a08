//! Generalized-inverse kernels.
//!
//! | kind | consistent under |
//! |------|------------------|
//! | [`GinvKind::MoorePenrose`] | `M → Q₁ M Q₂`, orthogonal `Q₁`, `Q₂` |
//! | [`GinvKind::UnitConsistent`] | `M → D₁ M D₂`, positive diagonal `D₁`, `D₂` |
//! | [`GinvKind::SimilarityConsistent`] | `M → S M S⁻¹`, nonsingular `S` |
//! | [`GinvKind::Drazin`] | `M → S M S⁻¹` |
//! | [`GinvKind::Exact`] | everything, but only defined for nonsingular `M` |

mod drazin;
mod fcf;
mod mp;
mod residuals;
mod uc;

pub use drazin::{drazin, drazin_index, drazin_inverse, DrazinResult, INDEX_RANK_TOL};
pub use fcf::{companion, fcf, sc_inverse, FcfDecomposition, DEFAULT_DEP_TOL, MAX_BASIS_CONDITION};
pub use mp::{mp_inverse, DEFAULT_RTOL};
pub use residuals::{penrose_residuals, PenroseResiduals};
pub use uc::{uc_inverse, uc_scale, ScalingDecomposition, DEFAULT_MAX_SWEEPS, DEFAULT_SCALE_TOL};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GinvError, Result};
use crate::matrix::DenseMatrix;

/// Condition bound above which [`GinvKind::Exact`] refuses to invert.
pub const EXACT_MAX_CONDITION: f64 = 1e12;

/// Which generalized inverse to apply to a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GinvKind {
    Exact,
    MoorePenrose,
    UnitConsistent,
    SimilarityConsistent,
    Drazin,
}

impl GinvKind {
    pub const ALL: [GinvKind; 5] = [
        GinvKind::Exact,
        GinvKind::MoorePenrose,
        GinvKind::UnitConsistent,
        GinvKind::SimilarityConsistent,
        GinvKind::Drazin,
    ];

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            GinvKind::Exact => "exact",
            GinvKind::MoorePenrose => "mp",
            GinvKind::UnitConsistent => "uc",
            GinvKind::SimilarityConsistent => "sc",
            GinvKind::Drazin => "drazin",
        }
    }

    /// Whether the kind is only defined for square inputs.
    pub fn requires_square(self) -> bool {
        matches!(
            self,
            GinvKind::Exact | GinvKind::SimilarityConsistent | GinvKind::Drazin
        )
    }
}

impl fmt::Display for GinvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GinvKind {
    type Err = GinvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "inv" => Ok(GinvKind::Exact),
            "mp" | "moore_penrose" | "moorepenrose" | "pinv" => Ok(GinvKind::MoorePenrose),
            "uc" | "unit_consistent" | "unitconsistent" => Ok(GinvKind::UnitConsistent),
            "sc" | "similarity_consistent" | "similarityconsistent" => {
                Ok(GinvKind::SimilarityConsistent)
            }
            "drazin" => Ok(GinvKind::Drazin),
            other => Err(GinvError::input(format!(
                "unknown inverse kind {other:?} (expected exact, mp, uc, sc or drazin)"
            ))),
        }
    }
}

/// Exact inverse, refusing matrices with condition above [`EXACT_MAX_CONDITION`].
pub fn exact_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(GinvError::input("exact inverse needs a square matrix"));
    }
    let condition = m.condition();
    if condition.is_nan() || condition > EXACT_MAX_CONDITION {
        return Err(GinvError::Singular {
            condition,
            limit: EXACT_MAX_CONDITION,
        });
    }
    m.as_nalgebra()
        .clone()
        .try_inverse()
        .map(DenseMatrix::from_nalgebra)
        .ok_or(GinvError::Singular {
            condition,
            limit: EXACT_MAX_CONDITION,
        })
}

/// Applies the inverse of the given kind to `m`.
pub fn apply_kind(kind: GinvKind, m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_finite() {
        return Err(GinvError::input(format!(
            "{kind} inverse of a non-finite matrix"
        )));
    }
    if kind.requires_square() && !m.is_square() {
        return Err(GinvError::input(format!(
            "{kind} inverse needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    match kind {
        GinvKind::Exact => exact_inverse(m),
        GinvKind::MoorePenrose => Ok(mp_inverse(m, DEFAULT_RTOL)),
        GinvKind::UnitConsistent => uc_inverse(m),
        GinvKind::SimilarityConsistent => sc_inverse(m),
        GinvKind::Drazin => Ok(drazin_inverse(m)),
    }
}
