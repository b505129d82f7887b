//! Problem spec strings: `cube:N`, `jumps:N`, `mm:path.mtx`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use amgtune_core::sparse::{build_cube, build_jumps, RhsKind, SparseError};
use amgtune_core::LinearSystem;

use crate::mtx::{self, MtxError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemKind {
    Cube(usize),
    Jumps(usize),
    MatrixMarket(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsSpec {
    Ones,
    Random(u64),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub rhs: RhsSpec,
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("bad problem spec `{0}`: expected cube:N, jumps:N or mm:PATH")]
    BadSpec(String),
    #[error("bad right-hand side `{0}`: expected ones, random:SEED or file:PATH")]
    BadRhs(String),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Mtx(#[from] MtxError),
}

impl ProblemError {
    pub fn is_io(&self) -> bool {
        matches!(self, ProblemError::Mtx(MtxError::Io { .. }))
    }
}

impl FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, ProblemError> {
        let bad = || ProblemError::BadSpec(s.to_string());
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "cube" => Ok(ProblemKind::Cube(arg.trim().parse().map_err(|_| bad())?)),
            "jumps" => Ok(ProblemKind::Jumps(arg.trim().parse().map_err(|_| bad())?)),
            "mm" if !arg.is_empty() => Ok(ProblemKind::MatrixMarket(PathBuf::from(arg))),
            _ => Err(bad()),
        }
    }
}

impl FromStr for RhsSpec {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, ProblemError> {
        let bad = || ProblemError::BadRhs(s.to_string());
        match s.split_once(':') {
            None if s == "ones" => Ok(RhsSpec::Ones),
            Some(("random", seed)) => Ok(RhsSpec::Random(seed.parse().map_err(|_| bad())?)),
            Some(("file", p)) if !p.is_empty() => Ok(RhsSpec::File(PathBuf::from(p))),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::Cube(n) => write!(f, "cube:{n}"),
            ProblemKind::Jumps(n) => write!(f, "jumps:{n}"),
            ProblemKind::MatrixMarket(p) => write!(f, "mm:{}", p.display()),
        }
    }
}

impl fmt::Display for RhsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhsSpec::Ones => f.write_str("ones"),
            RhsSpec::Random(s) => write!(f, "random:{s}"),
            RhsSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl ProblemSpec {
    pub fn parse(kind: &str, rhs: Option<&str>) -> Result<Self, ProblemError> {
        Ok(ProblemSpec {
            kind: kind.parse()?,
            rhs: rhs.map(str::parse).transpose()?.unwrap_or(RhsSpec::Ones),
        })
    }

    pub fn load(&self) -> Result<LinearSystem, ProblemError> {
        let system = match &self.kind {
            ProblemKind::Cube(n) => build_cube(*n)?,
            ProblemKind::Jumps(n) => build_jumps(*n)?,
            ProblemKind::MatrixMarket(p) => LinearSystem::with_unit_rhs(mtx::read_matrix(p)?),
        };
        Ok(match &self.rhs {
            RhsSpec::Ones => system.with_rhs(RhsKind::Ones),
            RhsSpec::Random(seed) => system.with_rhs(RhsKind::DivergenceFreeRandom { seed: *seed }),
            RhsSpec::File(p) => LinearSystem::new(system.matrix, mtx::read_vector(p)?)?,
        })
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rhs {})", self.kind, self.rhs)
    }
}

/// Companion right-hand-side path written next to a matrix file.
pub fn rhs_path(matrix_path: &Path) -> PathBuf {
    matrix_path.with_extension("rhs.mtx")
}
