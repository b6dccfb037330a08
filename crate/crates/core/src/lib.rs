//! Mixed-consistency generalized inverses.
//!
//! A system matrix is partitioned into diagonal blocks of variables, each
//! with its own consistency requirement (rotations, changes of units,
//! similarity transforms). [`kernels`] provides one generalized inverse per
//! requirement and [`mixed`] assembles them into a single block-structured
//! inverse. [`verify`] checks the assemblies against each other, against
//! exact inverses, and against the transform invariances they promise.

pub mod error;
pub mod kernels;
pub mod matrix;
pub mod mixed;
pub mod verify;

pub use error::{GinvError, Result};
pub use kernels::{apply_kind, GinvKind};
pub use matrix::{rel_err, BlockSpec, DenseMatrix};
