//! Compressed sparse row storage, dense-vector kernels and the elliptic
//! model problems used as tuning targets.

mod csr;
pub(crate) mod kernels;
mod problems;

pub use csr::CsrMatrix;
pub use kernels::{axpy, dot, norm2, spmv};
pub use problems::{build_cube, build_jumps, jumps_coefficient, LinearSystem, RhsKind};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("index ({row}, {col}) outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("grid_n = {grid_n} is below the minimum of {min}")]
    GridTooSmall { grid_n: usize, min: usize },
    #[error("grid_n = {grid_n} does not fit in addressable memory")]
    GridTooLarge { grid_n: usize },
}
