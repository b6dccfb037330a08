use serde::{Deserialize, Serialize};

use crate::error::{GinvError, Result};
use crate::matrix::{rel_err, DenseMatrix};

/// Relative residuals of the four Penrose conditions for a candidate
/// inverse `G` of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenroseResiduals {
    /// ‖MGM − M‖
    pub r1: f64,
    /// ‖GMG − G‖
    pub r2: f64,
    /// ‖(MG)ᵀ − MG‖
    pub r3: f64,
    /// ‖(GM)ᵀ − GM‖
    pub r4: f64,
}

impl PenroseResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3).max(self.r4)
    }
}

pub fn penrose_residuals(m: &DenseMatrix, g: &DenseMatrix) -> Result<PenroseResiduals> {
    if g.shape() != (m.cols(), m.rows()) {
        return Err(GinvError::input(format!(
            "candidate inverse shape {:?} does not match {:?}ᵀ",
            g.shape(),
            m.shape()
        )));
    }
    let mg = m * g;
    let gm = g * m;
    Ok(PenroseResiduals {
        r1: rel_err(&(&mg * m), m)?,
        r2: rel_err(&(&gm * g), g)?,
        r3: rel_err(&mg.transpose(), &mg)?,
        r4: rel_err(&gm.transpose(), &gm)?,
    })
}
