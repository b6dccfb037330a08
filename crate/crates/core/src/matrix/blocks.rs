use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DenseMatrix;
use crate::error::{GinvError, Result};
use crate::kernels::GinvKind;

/// Two-way partition of a square matrix:
///
/// ```text
/// [ W  X ]  m
/// [ Y  Z ]  n
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Block2 {
    pub w: DenseMatrix,
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub z: DenseMatrix,
}

impl Block2 {
    /// Validates conformal shapes.
    pub fn new(w: DenseMatrix, x: DenseMatrix, y: DenseMatrix, z: DenseMatrix) -> Result<Self> {
        let (m, n) = (w.rows(), z.rows());
        let ok = w.shape() == (m, m)
            && z.shape() == (n, n)
            && x.shape() == (m, n)
            && y.shape() == (n, m);
        if !ok {
            return Err(GinvError::input(format!(
                "non-conformal 2x2 blocks: W {:?}, X {:?}, Y {:?}, Z {:?}",
                w.shape(),
                x.shape(),
                y.shape(),
                z.shape()
            )));
        }
        Ok(Block2 { w, x, y, z })
    }

    pub fn m(&self) -> usize {
        self.w.rows()
    }

    pub fn n(&self) -> usize {
        self.z.rows()
    }
}

/// Three-way partition of a square matrix:
///
/// ```text
/// [ R  S  T ]  m
/// [ U  V  W ]  n
/// [ X  Y  Z ]  p
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Block3 {
    pub r: DenseMatrix,
    pub s: DenseMatrix,
    pub t: DenseMatrix,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub w: DenseMatrix,
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub z: DenseMatrix,
}

impl Block3 {
    /// Validates conformal shapes. Blocks are given in row-major block order.
    pub fn new(blocks: [DenseMatrix; 9]) -> Result<Self> {
        let [r, s, t, u, v, w, x, y, z] = blocks;
        let (m, n, p) = (r.rows(), v.rows(), z.rows());
        let sizes = [m, n, p];
        let grid = [[&r, &s, &t], [&u, &v, &w], [&x, &y, &z]];
        for (i, row) in grid.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if b.shape() != (sizes[i], sizes[j]) {
                    return Err(GinvError::input(format!(
                        "block ({}, {}) has shape {:?}, expected {:?}",
                        i + 1,
                        j + 1,
                        b.shape(),
                        (sizes[i], sizes[j])
                    )));
                }
            }
        }
        Ok(Block3 {
            r,
            s,
            t,
            u,
            v,
            w,
            x,
            y,
            z,
        })
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.r.rows(), self.v.rows(), self.z.rows())
    }
}

fn check_partition(m: &DenseMatrix, sizes: &[usize]) -> Result<()> {
    if !m.is_square() {
        return Err(GinvError::input(format!(
            "cannot partition non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if sizes.contains(&0) {
        return Err(GinvError::input(format!("zero-size block in {sizes:?}")));
    }
    let total: usize = sizes.iter().sum();
    if total != m.rows() {
        return Err(GinvError::input(format!(
            "block sizes {sizes:?} sum to {total}, matrix dimension is {}",
            m.rows()
        )));
    }
    Ok(())
}

pub fn split2(m: &DenseMatrix, rows_a: usize, rows_b: usize) -> Result<Block2> {
    check_partition(m, &[rows_a, rows_b])?;
    let (a, b) = (rows_a, rows_b);
    Ok(Block2 {
        w: m.submatrix(0, 0, a, a),
        x: m.submatrix(0, a, a, b),
        y: m.submatrix(a, 0, b, a),
        z: m.submatrix(a, a, b, b),
    })
}

pub fn split3(m: &DenseMatrix, size_a: usize, size_b: usize, size_c: usize) -> Result<Block3> {
    check_partition(m, &[size_a, size_b, size_c])?;
    let offs = [0, size_a, size_a + size_b];
    let sz = [size_a, size_b, size_c];
    let blk = |i: usize, j: usize| m.submatrix(offs[i], offs[j], sz[i], sz[j]);
    Ok(Block3 {
        r: blk(0, 0),
        s: blk(0, 1),
        t: blk(0, 2),
        u: blk(1, 0),
        v: blk(1, 1),
        w: blk(1, 2),
        x: blk(2, 0),
        y: blk(2, 1),
        z: blk(2, 2),
    })
}

pub fn assemble2(b: &Block2) -> Result<DenseMatrix> {
    let b = Block2::new(b.w.clone(), b.x.clone(), b.y.clone(), b.z.clone())?;
    let (m, n) = (b.m(), b.n());
    let mut out = DenseMatrix::zeros(m + n, m + n);
    out.set_submatrix(0, 0, &b.w);
    out.set_submatrix(0, m, &b.x);
    out.set_submatrix(m, 0, &b.y);
    out.set_submatrix(m, m, &b.z);
    Ok(out)
}

pub fn assemble3(b: &Block3) -> Result<DenseMatrix> {
    let b = Block3::new([
        b.r.clone(),
        b.s.clone(),
        b.t.clone(),
        b.u.clone(),
        b.v.clone(),
        b.w.clone(),
        b.x.clone(),
        b.y.clone(),
        b.z.clone(),
    ])?;
    let (m, n, p) = b.sizes();
    let offs = [0, m, m + n];
    let grid = [[&b.r, &b.s, &b.t], [&b.u, &b.v, &b.w], [&b.x, &b.y, &b.z]];
    let mut out = DenseMatrix::zeros(m + n + p, m + n + p);
    for (i, row) in grid.iter().enumerate() {
        for (j, blk) in row.iter().enumerate() {
            out.set_submatrix(offs[i], offs[j], blk);
        }
    }
    Ok(out)
}

/// One diagonal block of a [`BlockSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub size: usize,
    pub kind: GinvKind,
}

/// Ordered diagonal block sizes, each with the inverse kind applied to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    blocks: Vec<BlockEntry>,
}

impl BlockSpec {
    pub fn new(blocks: Vec<BlockEntry>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(GinvError::input("block spec needs at least one block"));
        }
        if blocks.iter().any(|b| b.size == 0) {
            return Err(GinvError::input("block sizes must be positive"));
        }
        Ok(BlockSpec { blocks })
    }

    /// Builds a spec from `(size, kind)` pairs.
    pub fn from_pairs(pairs: &[(usize, GinvKind)]) -> Result<Self> {
        BlockSpec::new(
            pairs
                .iter()
                .map(|&(size, kind)| BlockEntry { size, kind })
                .collect(),
        )
    }

    pub fn blocks(&self) -> &[BlockEntry] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    pub fn kinds(&self) -> Vec<GinvKind> {
        self.blocks.iter().map(|b| b.kind).collect()
    }

    /// Errors unless the spec partitions an `n x n` matrix.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(GinvError::input(format!(
                "block sizes {:?} sum to {}, matrix dimension is {n}",
                self.sizes(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Parses `"3:mp,3:uc,3:mp"`: comma-separated `size:kind` pairs, kind names
/// case-insensitive.
impl FromStr for BlockSpec {
    type Err = GinvError;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in s.split(',') {
            let (size, kind) = item.split_once(':').ok_or_else(|| {
                GinvError::input(format!(
                    "block {:?} is not of the form size:kind",
                    item.trim()
                ))
            })?;
            let size: usize = size
                .trim()
                .parse()
                .map_err(|_| GinvError::input(format!("invalid block size {:?}", size.trim())))?;
            pairs.push((size, kind.parse::<GinvKind>()?));
        }
        BlockSpec::from_pairs(&pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting(n: usize) -> DenseMatrix {
        DenseMatrix::new(n, n, (0..n * n).map(|v| v as f64).collect()).unwrap()
    }

    #[test]
    fn split2_scalar_blocks() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = split2(&m, 1, 1).unwrap();
        assert_eq!(b.w.get(0, 0), 1.0);
        assert_eq!(b.x.get(0, 0), 2.0);
        assert_eq!(b.y.get(0, 0), 3.0);
        assert_eq!(b.z.get(0, 0), 4.0);
    }

    #[test]
    fn split2_identity() {
        let b = split2(&DenseMatrix::identity(4), 2, 2).unwrap();
        assert_eq!(b.w, DenseMatrix::identity(2));
        assert_eq!(b.z, DenseMatrix::identity(2));
        assert_eq!(b.x, DenseMatrix::zeros(2, 2));
        assert_eq!(b.y, DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn split2_shapes() {
        let b = split2(&counting(4), 1, 3).unwrap();
        assert_eq!(b.w.shape(), (1, 1));
        assert_eq!(b.x.shape(), (1, 3));
        assert_eq!(b.y.shape(), (3, 1));
        assert_eq!(b.z.shape(), (3, 3));
    }

    #[test]
    fn split3_identity_and_shapes() {
        let b = split3(&DenseMatrix::identity(3), 1, 1, 1).unwrap();
        for d in [&b.r, &b.v, &b.z] {
            assert_eq!(d.get(0, 0), 1.0);
        }
        for o in [&b.s, &b.t, &b.u, &b.w, &b.x, &b.y] {
            assert_eq!(o.get(0, 0), 0.0);
        }
        let b = split3(&counting(9), 3, 3, 3).unwrap();
        assert!([&b.r, &b.s, &b.t, &b.u, &b.v, &b.w, &b.x, &b.y, &b.z]
            .iter()
            .all(|x| x.shape() == (3, 3)));
        let b = split3(&counting(6), 1, 2, 3).unwrap();
        assert_eq!(b.sizes(), (1, 2, 3));
        assert_eq!(b.t.shape(), (1, 3));
        assert_eq!(b.y.shape(), (3, 2));
    }

    #[test]
    fn split_errors() {
        assert!(split2(&counting(4), 2, 1).is_err());
        assert!(split2(&counting(4), 0, 4).is_err());
        assert!(split3(&counting(4), 1, 1, 1).is_err());
        let rect = DenseMatrix::zeros(2, 3);
        assert!(split2(&rect, 1, 1).is_err());
    }

    #[test]
    fn assemble_examples() {
        let m = counting(2);
        assert_eq!(assemble2(&split2(&m, 1, 1).unwrap()).unwrap(), m);
        let zero = split3(&DenseMatrix::zeros(6, 6), 1, 2, 3).unwrap();
        assert_eq!(assemble3(&zero).unwrap(), DenseMatrix::zeros(6, 6));
        let b = Block2::new(
            DenseMatrix::from_diagonal(&[1.0, 2.0]),
            DenseMatrix::zeros(2, 1),
            DenseMatrix::zeros(1, 2),
            DenseMatrix::from_diagonal(&[3.0]),
        )
        .unwrap();
        assert_eq!(
            assemble2(&b).unwrap(),
            DenseMatrix::from_diagonal(&[1.0, 2.0, 3.0])
        );
    }

    #[test]
    fn assemble_rejects_non_conformal() {
        let bad = Block2 {
            w: DenseMatrix::identity(2),
            x: DenseMatrix::zeros(2, 2),
            y: DenseMatrix::zeros(1, 2),
            z: DenseMatrix::identity(1),
        };
        assert!(assemble2(&bad).is_err());
    }

    #[test]
    fn block_spec_validation() {
        assert!(BlockSpec::new(vec![]).is_err());
        assert!(BlockSpec::from_pairs(&[(0, GinvKind::Exact)]).is_err());
        let s =
            BlockSpec::from_pairs(&[(2, GinvKind::MoorePenrose), (3, GinvKind::UnitConsistent)])
                .unwrap();
        assert_eq!(s.dim(), 5);
        assert!(s.check_dim(5).is_ok());
        assert!(s.check_dim(4).is_err());
    }

    #[test]
    fn block_spec_from_str() {
        let s: BlockSpec = "3:mp, 2:UC,1:sc".parse().unwrap();
        assert_eq!(s.sizes(), vec![3, 2, 1]);
        assert_eq!(
            s.kinds(),
            vec![
                GinvKind::MoorePenrose,
                GinvKind::UnitConsistent,
                GinvKind::SimilarityConsistent
            ]
        );
        for bad in ["", "3", "0:mp", "x:mp", "3:foo", "3:mp,"] {
            assert!(bad.parse::<BlockSpec>().is_err(), "{bad:?}");
        }
    }
}
