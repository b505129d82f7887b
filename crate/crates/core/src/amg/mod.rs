//! BiCGStab with a classical algebraic multigrid preconditioner and
//! Chebyshev smoothing: the tunable solver whose cost is being minimized.

mod bicgstab;
mod chebyshev;
mod coarsen;
mod config;
mod cycle;
mod dense;
mod galerkin;
mod hierarchy;
mod interp;
mod strength;

pub use bicgstab::{bicgstab_solve, SolveFailure, SolveLimits, SolveOutcome, BREAKDOWN_TOL};
pub use chebyshev::{chebyshev_smooth, ChebyshevBounds};
pub use coarsen::{coarsen, pmis_measure, PointKind};
pub use config::{Coarsening, ConfigError, CycleType, Interpolation, SolverConfig};
pub use cycle::{apply_preconditioner, CycleStats};
pub use dense::DenseLu;
pub use galerkin::galerkin_product;
pub use hierarchy::{build_hierarchy, AmgHierarchy, Level, MAX_DENSE_COARSE, MAX_LEVELS};
pub use interp::{build_interpolation, truncate_row};
pub use strength::{strength_graph, StrengthGraph};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AmgError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("coarsest operator on level {level} is singular")]
    SingularCoarse { level: usize },
    #[error("coarsest operator on level {level} has {size} rows, above the dense limit {limit}")]
    CoarseTooLarge {
        level: usize,
        size: usize,
        limit: usize,
    },
    #[error("zero diagonal in row {row} of level {level}")]
    ZeroDiagonal { level: usize, row: usize },
    #[error("non-finite value produced while building level {level}")]
    NonFinite { level: usize },
    #[error("invalid spectrum bounds: {0}")]
    InvalidBounds(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
