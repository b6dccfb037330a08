//! Dense real matrices, block partitions, the shared text format and seeded
//! generators for test matrices and transform sets.

mod blocks;
mod generate;
pub(crate) mod svd;
mod text;

pub use blocks::{assemble2, assemble3, split2, split3, Block2, Block3, BlockEntry, BlockSpec};
pub use generate::{
    gen_matrix, gen_matrix_rect, gen_transforms, gen_transforms_for_classes, gen_well_conditioned,
    random_orthogonal, BlockTransform, TransformClass, TransformSet,
};
pub use text::{format_matrix, parse_matrix};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{GinvError, Result};

/// Real dense matrix with `f64` entries.
///
/// Constructors reject empty shapes and non-finite entries. Arithmetic
/// operators panic on shape mismatch, the same way `nalgebra` does.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(GinvError::input(format!(
                "matrix shape {rows}x{cols} has a zero dimension"
            )));
        }
        if entries.len() != rows * cols {
            return Err(GinvError::input(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(GinvError::input(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(DenseMatrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Convenience constructor from fixed-width rows. Panics on invalid input.
    pub fn from_rows<const C: usize>(rows: &[[f64; C]]) -> Self {
        let entries = rows.iter().flat_map(|r| r.iter().copied()).collect();
        DenseMatrix::new(rows.len(), C, entries).expect("invalid matrix literal")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        DenseMatrix(DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { diag[i] } else { 0.0 },
        ))
    }

    /// Wraps an `nalgebra` matrix without validation.
    pub fn from_nalgebra(m: DMatrix<f64>) -> Self {
        DenseMatrix(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.0[(i, j)] = value;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix(self.0.transpose())
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseMatrix(&self.0 * factor)
    }

    pub fn frobenius_norm(&self) -> f64 {
        scaled_norm(&self.0)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Contiguous `rows x cols` submatrix starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        DenseMatrix(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        self.0
            .view_mut((r0, c0), (block.rows(), block.cols()))
            .copy_from(&block.0);
    }

    /// Block-diagonal matrix built from square or rectangular pieces.
    pub fn block_diagonal(pieces: &[DenseMatrix]) -> Self {
        let rows: usize = pieces.iter().map(DenseMatrix::rows).sum();
        let cols: usize = pieces.iter().map(DenseMatrix::cols).sum();
        let mut out = DenseMatrix::zeros(rows, cols);
        let (mut r, mut c) = (0, 0);
        for p in pieces {
            out.set_submatrix(r, c, p);
            r += p.rows();
            c += p.cols();
        }
        out
    }

    /// Integer power of a square matrix; `pow(0)` is the identity.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = DenseMatrix::identity(self.rows());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        svd::singular_values(&self.0)
    }

    /// Number of singular values above `cutoff`.
    pub fn rank_above(&self, cutoff: f64) -> usize {
        self.singular_values()
            .iter()
            .filter(|&&s| s > cutoff)
            .count()
    }

    /// Spectral condition number `σ_max / σ_min`; infinite for singular input.
    pub fn condition(&self) -> f64 {
        let s = self.singular_values();
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    }
}

/// `‖a − b‖_F / max(1, ‖b‖_F)`.
/// Frobenius norm computed on entries divided by the largest magnitude, so
/// tiny and huge entries neither underflow nor overflow when squared.
fn scaled_norm(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * m.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn rel_err(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(GinvError::input(format!(
            "rel_err shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let diff = scaled_norm(&(&a.0 - &b.0));
    Ok(diff / b.frobenius_norm().max(1.0))
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.0[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl From<DMatrix<f64>> for DenseMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        DenseMatrix(m)
    }
}

impl Mul<&DenseMatrix> for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 * &rhs.0)
    }
}

impl Add<&DenseMatrix> for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 + &rhs.0)
    }
}

impl Sub<&DenseMatrix> for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        DenseMatrix(-&self.0)
    }
}

impl Neg for DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        DenseMatrix(-self.0)
    }
}
