//! Seeded generators. Every generator draws from a `ChaCha8Rng` seeded with
//! the caller's seed, so output is a pure function of the arguments.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{BlockSpec, DenseMatrix};
use crate::error::{GinvError, Result};
use crate::kernels::GinvKind;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Filled row by row so the draw order does not depend on storage order.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Haar-like random orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DenseMatrix {
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    DenseMatrix::from_nalgebra(q)
}

/// Seeded `dim x dim` matrix with exactly `rank` nonzero singular values
/// spread log-uniformly between `1` and `10^-log10_cond` (both endpoints
/// included when `rank >= 2`).
pub fn gen_matrix(seed: u64, dim: usize, rank: usize, log10_cond: f64) -> Result<DenseMatrix> {
    gen_matrix_rect(seed, dim, dim, rank, log10_cond)
}

/// Rectangular counterpart of [`gen_matrix`].
pub fn gen_matrix_rect(
    seed: u64,
    rows: usize,
    cols: usize,
    rank: usize,
    log10_cond: f64,
) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(GinvError::input("gen_matrix: dimension must be positive"));
    }
    if rank > rows.min(cols) {
        return Err(GinvError::input(format!(
            "gen_matrix: rank {rank} exceeds the smaller dimension of {rows}x{cols}"
        )));
    }
    if !(log10_cond.is_finite() && log10_cond >= 0.0) {
        return Err(GinvError::input(
            "gen_matrix: log10_cond must be finite and >= 0",
        ));
    }
    let mut rng = rng_for(seed);
    let u = random_orthogonal(&mut rng, rows).into_nalgebra();
    let v = random_orthogonal(&mut rng, cols).into_nalgebra();
    let mut exps: Vec<f64> = (0..rank)
        .map(|i| match i {
            0 => 0.0,
            i if i + 1 == rank => -log10_cond,
            _ => -rng.random_range(0.0..=log10_cond),
        })
        .collect();
    exps.sort_by(|a, b| b.total_cmp(a));
    let mut out = DMatrix::zeros(rows, cols);
    for (k, e) in exps.iter().enumerate() {
        let sigma = 10f64.powf(*e);
        out += sigma * u.column(k) * v.column(k).transpose();
    }
    Ok(DenseMatrix::from_nalgebra(out))
}

/// Schur complement `M[I,I] − M[I,J] M[J,J]⁻¹ M[J,I]` over index sets.
fn schur_complement(m: &DMatrix<f64>, keep: &[usize], elim: &[usize]) -> Option<DMatrix<f64>> {
    let pick = |rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let base = pick(keep, keep);
    if elim.is_empty() {
        return Some(base);
    }
    let inv = pick(elim, elim).try_inverse()?;
    Some(base - pick(keep, elim) * inv * pick(elim, keep))
}

fn cond(m: &DMatrix<f64>) -> f64 {
    DenseMatrix::from_nalgebra(m.clone()).condition()
}

/// Seeded nonsingular matrix partitioned by `sizes` in which every Schur
/// complement formed from unions of whole blocks (including the diagonal
/// blocks themselves and the full matrix) has condition at most `max_cond`.
///
/// Diagonal blocks are drawn well conditioned and coupled through modest
/// off-diagonal blocks; draws are rejected until the bound holds.
pub fn gen_well_conditioned(seed: u64, sizes: &[usize], max_cond: f64) -> Result<DenseMatrix> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(GinvError::input(
            "gen_well_conditioned: sizes must be positive",
        ));
    }
    let dim: usize = sizes.iter().sum();
    let k = sizes.len();
    let mut offsets = vec![0; k];
    for i in 1..k {
        offsets[i] = offsets[i - 1] + sizes[i - 1];
    }
    let block_idx = |b: usize| (offsets[b]..offsets[b] + sizes[b]).collect::<Vec<_>>();
    let mut rng = rng_for(seed);
    for _attempt in 0..1000 {
        let mut m = gaussian(&mut rng, dim, dim) * (0.3 / (dim as f64).sqrt());
        for b in 0..k {
            let sub_seed: u64 = rng.random();
            let diag = gen_matrix(sub_seed, sizes[b], sizes[b], 0.5)?.into_nalgebra();
            m.view_mut((offsets[b], offsets[b]), (sizes[b], sizes[b]))
                .copy_from(&diag);
        }
        // Each block is assigned to: kept (0), eliminated (1) or ignored (2).
        let mut ok = true;
        let combos = 3usize.pow(k as u32);
        'outer: for code in 0..combos {
            let (mut keep, mut elim) = (Vec::new(), Vec::new());
            let mut c = code;
            for b in 0..k {
                match c % 3 {
                    0 => keep.extend(block_idx(b)),
                    1 => elim.extend(block_idx(b)),
                    _ => {}
                }
                c /= 3;
            }
            if keep.is_empty() {
                continue;
            }
            match schur_complement(&m, &keep, &elim) {
                Some(s) if cond(&s) <= max_cond => {}
                _ => {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Ok(DenseMatrix::from_nalgebra(m));
        }
    }
    Err(GinvError::input(format!(
        "gen_well_conditioned: no draw met condition bound {max_cond:e} for sizes {sizes:?}"
    )))
}

/// Transform class attached to a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformClass {
    Orthogonal,
    Diagonal,
    Similarity,
}

impl TransformClass {
    /// The class under which a kind is expected to be consistent.
    pub fn for_kind(kind: GinvKind) -> Self {
        match kind {
            GinvKind::Exact | GinvKind::MoorePenrose => TransformClass::Orthogonal,
            GinvKind::UnitConsistent => TransformClass::Diagonal,
            GinvKind::SimilarityConsistent | GinvKind::Drazin => TransformClass::Similarity,
        }
    }
}

/// Left/right transform pair for one diagonal block.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockTransform {
    Orthogonal {
        left: DenseMatrix,
        right: DenseMatrix,
    },
    /// Positive diagonal entries.
    Diagonal { left: Vec<f64>, right: Vec<f64> },
    /// Tied pair: left factor `s`, right factor `s_inv`.
    Similarity { s: DenseMatrix, s_inv: DenseMatrix },
}

impl BlockTransform {
    pub fn size(&self) -> usize {
        match self {
            BlockTransform::Orthogonal { left, .. } => left.rows(),
            BlockTransform::Diagonal { left, .. } => left.len(),
            BlockTransform::Similarity { s, .. } => s.rows(),
        }
    }

    pub fn class(&self) -> TransformClass {
        match self {
            BlockTransform::Orthogonal { .. } => TransformClass::Orthogonal,
            BlockTransform::Diagonal { .. } => TransformClass::Diagonal,
            BlockTransform::Similarity { .. } => TransformClass::Similarity,
        }
    }

    fn left(&self) -> DenseMatrix {
        match self {
            BlockTransform::Orthogonal { left, .. } => left.clone(),
            BlockTransform::Diagonal { left, .. } => DenseMatrix::from_diagonal(left),
            BlockTransform::Similarity { s, .. } => s.clone(),
        }
    }

    fn right(&self) -> DenseMatrix {
        match self {
            BlockTransform::Orthogonal { right, .. } => right.clone(),
            BlockTransform::Diagonal { right, .. } => DenseMatrix::from_diagonal(right),
            BlockTransform::Similarity { s_inv, .. } => s_inv.clone(),
        }
    }

    fn left_inverse(&self) -> DenseMatrix {
        match self {
            BlockTransform::Orthogonal { left, .. } => left.transpose(),
            BlockTransform::Diagonal { left, .. } => {
                DenseMatrix::from_diagonal(&left.iter().map(|d| 1.0 / d).collect::<Vec<_>>())
            }
            BlockTransform::Similarity { s_inv, .. } => s_inv.clone(),
        }
    }

    fn right_inverse(&self) -> DenseMatrix {
        match self {
            BlockTransform::Orthogonal { right, .. } => right.transpose(),
            BlockTransform::Diagonal { right, .. } => {
                DenseMatrix::from_diagonal(&right.iter().map(|d| 1.0 / d).collect::<Vec<_>>())
            }
            BlockTransform::Similarity { s, .. } => s.clone(),
        }
    }
}

/// Per-block transforms; the full left and right factors are block diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSet {
    pub blocks: Vec<BlockTransform>,
}

impl TransformSet {
    pub fn identity(spec: &BlockSpec) -> Self {
        TransformSet {
            blocks: spec
                .sizes()
                .into_iter()
                .map(|n| BlockTransform::Orthogonal {
                    left: DenseMatrix::identity(n),
                    right: DenseMatrix::identity(n),
                })
                .collect(),
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(BlockTransform::size).collect()
    }

    fn assemble(&self, f: impl Fn(&BlockTransform) -> DenseMatrix) -> DenseMatrix {
        DenseMatrix::block_diagonal(&self.blocks.iter().map(f).collect::<Vec<_>>())
    }

    /// `G_l`
    pub fn left(&self) -> DenseMatrix {
        self.assemble(BlockTransform::left)
    }

    /// `G_r`
    pub fn right(&self) -> DenseMatrix {
        self.assemble(BlockTransform::right)
    }

    /// `G_l⁻¹`
    pub fn left_inverse(&self) -> DenseMatrix {
        self.assemble(BlockTransform::left_inverse)
    }

    /// `G_r⁻¹`
    pub fn right_inverse(&self) -> DenseMatrix {
        self.assemble(BlockTransform::right_inverse)
    }
}

fn log_uniform_diagonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| 10f64.powf(rng.random_range(-3.0..=3.0)))
        .collect()
}

/// Nonsingular `n x n` matrix with singular values in `[1, 100]` and its
/// computed inverse.
fn similarity_pair(rng: &mut ChaCha8Rng, n: usize) -> (DenseMatrix, DenseMatrix) {
    let u = random_orthogonal(rng, n).into_nalgebra();
    let v = random_orthogonal(rng, n).into_nalgebra();
    let sig: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(rng.random_range(0.0..=2.0)))
        .collect();
    let s = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sig.clone())) * v.transpose();
    let inv_sig: Vec<f64> = sig.iter().map(|x| 1.0 / x).collect();
    let s_inv = &v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(inv_sig)) * u.transpose();
    (
        DenseMatrix::from_nalgebra(s),
        DenseMatrix::from_nalgebra(s_inv),
    )
}

/// Transforms with an explicit class per block, regardless of block kinds.
pub fn gen_transforms_for_classes(
    seed: u64,
    sizes: &[usize],
    classes: &[TransformClass],
) -> Result<TransformSet> {
    if sizes.len() != classes.len() {
        return Err(GinvError::input(
            "one transform class per block is required",
        ));
    }
    if sizes.contains(&0) {
        return Err(GinvError::input("block sizes must be positive"));
    }
    let mut rng = rng_for(seed);
    let blocks = sizes
        .iter()
        .zip(classes)
        .map(|(&n, class)| match class {
            TransformClass::Orthogonal => BlockTransform::Orthogonal {
                left: random_orthogonal(&mut rng, n),
                right: random_orthogonal(&mut rng, n),
            },
            TransformClass::Diagonal => BlockTransform::Diagonal {
                left: log_uniform_diagonal(&mut rng, n),
                right: log_uniform_diagonal(&mut rng, n),
            },
            TransformClass::Similarity => {
                let (s, s_inv) = similarity_pair(&mut rng, n);
                BlockTransform::Similarity { s, s_inv }
            }
        })
        .collect();
    Ok(TransformSet { blocks })
}

/// Transforms matching each block's kind: orthogonal pairs for MP (and
/// exact), positive diagonals for UC, tied similarity pairs for SC (and
/// Drazin).
pub fn gen_transforms(seed: u64, spec: &BlockSpec) -> Result<TransformSet> {
    let classes: Vec<TransformClass> = spec
        .kinds()
        .into_iter()
        .map(TransformClass::for_kind)
        .collect();
    gen_transforms_for_classes(seed, &spec.sizes(), &classes)
}
