use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{CsrMatrix, SparseError};

/// A matrix together with a right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Result<Self, SparseError> {
        if rhs.len() != matrix.n_rows() {
            return Err(SparseError::DimensionMismatch {
                expected: matrix.n_rows(),
                found: rhs.len(),
            });
        }
        Ok(LinearSystem { matrix, rhs })
    }

    /// `b = 1`, the default for generated and Matrix Market systems.
    pub fn with_unit_rhs(matrix: CsrMatrix) -> Self {
        let rhs = vec![1.0; matrix.n_rows()];
        LinearSystem { matrix, rhs }
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn with_rhs(mut self, kind: RhsKind) -> Self {
        self.rhs = kind.build(self.n());
        self
    }
}

/// Built-in right-hand side generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsKind {
    Ones,
    /// Uniform in [-1, 1] with the mean removed, so the entries sum to zero
    /// (compatible with pure-Neumann pressure systems).
    DivergenceFreeRandom { seed: u64 },
}

impl RhsKind {
    pub fn build(self, n: usize) -> Vec<f64> {
        match self {
            RhsKind::Ones => vec![1.0; n],
            RhsKind::DivergenceFreeRandom { seed } => {
                let mut rng = crate::seeded_rng(seed);
                let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if n > 0 {
                    let mean = b.iter().sum::<f64>() / n as f64;
                    b.iter_mut().for_each(|x| *x -= mean);
                }
                b
            }
        }
    }
}

fn grid_size(grid_n: usize, min: usize) -> Result<usize, SparseError> {
    if grid_n < min {
        return Err(SparseError::GridTooSmall { grid_n, min });
    }
    let too_large = SparseError::GridTooLarge { grid_n };
    let n = grid_n
        .checked_mul(grid_n)
        .and_then(|v| v.checked_mul(grid_n))
        .ok_or(too_large.clone())?;
    // 7 entries per row, each an index and a value, plus offsets
    let bytes = n
        .checked_mul(7)
        .and_then(|nnz| nnz.checked_mul(16))
        .and_then(|b| b.checked_add(n.checked_mul(8)?))
        .ok_or(too_large.clone())?;
    if bytes > isize::MAX as usize {
        return Err(too_large);
    }
    Ok(n)
}

/// Assembles a 7-point flux stencil on a `grid_n³` lattice of interior nodes
/// with Dirichlet walls eliminated. `face(p, q)` is the coefficient between
/// node `p` and neighbor `q`; `wall(p)` the coefficient towards an eliminated
/// boundary node. The stencil is unscaled (h² absorbed).
fn assemble_7pt(
    grid_n: usize,
    n: usize,
    face: impl Fn(usize, usize) -> f64,
    wall: impl Fn(usize) -> f64,
) -> CsrMatrix {
    let idx = |i: usize, j: usize, k: usize| i + grid_n * (j + grid_n * k);
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(7 * n);
    let mut vals = Vec::with_capacity(7 * n);
    row_offsets.push(0);
    for k in 0..grid_n {
        for j in 0..grid_n {
            for i in 0..grid_n {
                let p = idx(i, j, k);
                let mut diag = 0.0;
                let mut nbrs: [(usize, bool); 6] = [(0, false); 6];
                // ordered by increasing column index
                nbrs[0] = if k > 0 { (idx(i, j, k - 1), true) } else { (0, false) };
                nbrs[1] = if j > 0 { (idx(i, j - 1, k), true) } else { (0, false) };
                nbrs[2] = if i > 0 { (idx(i - 1, j, k), true) } else { (0, false) };
                nbrs[3] = if i + 1 < grid_n { (idx(i + 1, j, k), true) } else { (0, false) };
                nbrs[4] = if j + 1 < grid_n { (idx(i, j + 1, k), true) } else { (0, false) };
                nbrs[5] = if k + 1 < grid_n { (idx(i, j, k + 1), true) } else { (0, false) };
                let mut off = [0.0f64; 6];
                for (s, &(q, present)) in nbrs.iter().enumerate() {
                    let c = if present { face(p, q) } else { wall(p) };
                    diag += c;
                    off[s] = c;
                }
                for s in 0..3 {
                    if nbrs[s].1 {
                        cols.push(nbrs[s].0);
                        vals.push(-off[s]);
                    }
                }
                cols.push(p);
                vals.push(diag);
                for s in 3..6 {
                    if nbrs[s].1 {
                        cols.push(nbrs[s].0);
                        vals.push(-off[s]);
                    }
                }
                row_offsets.push(cols.len());
            }
        }
    }
    CsrMatrix::from_parts_unchecked(n, n, row_offsets, cols, vals)
}

/// Constant-coefficient 7-point Laplacian on `grid_n³` nodes, `b = 1`.
pub fn build_cube(grid_n: usize) -> Result<LinearSystem, SparseError> {
    let n = grid_size(grid_n, 2)?;
    let a = assemble_7pt(grid_n, n, |_, _| 1.0, |_| 1.0);
    Ok(LinearSystem::with_unit_rhs(a))
}

/// Piecewise-constant diffusion coefficient of the `jumps` problem on the
/// unit cube: 1000 in the central block, 0.1 in the corner cubes of edge
/// 0.1, and 1 elsewhere. Region tests are closed and applied in that order.
pub fn jumps_coefficient(x: [f64; 3]) -> f64 {
    let inner = x.iter().all(|&c| (0.1..=0.9).contains(&c));
    if inner {
        return 1000.0;
    }
    let corner = x.iter().all(|&c| c <= 0.1 || c >= 0.9);
    if corner {
        0.1
    } else {
        1.0
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Variable-coefficient diffusion with the `jumps` coefficient sampled at the
/// nodes `x = (i + 1) h`, `h = 1 / (grid_n + 1)`; face coefficients are
/// harmonic means of the two adjacent node values.
pub fn build_jumps(grid_n: usize) -> Result<LinearSystem, SparseError> {
    let n = grid_size(grid_n, 10)?;
    let h = 1.0 / (grid_n as f64 + 1.0);
    let mut kappa = vec![0.0; n];
    for k in 0..grid_n {
        for j in 0..grid_n {
            for i in 0..grid_n {
                let x = [
                    (i as f64 + 1.0) * h,
                    (j as f64 + 1.0) * h,
                    (k as f64 + 1.0) * h,
                ];
                kappa[i + grid_n * (j + grid_n * k)] = jumps_coefficient(x);
            }
        }
    }
    let a = assemble_7pt(
        grid_n,
        n,
        |p, q| harmonic_mean(kappa[p], kappa[q]),
        |p| kappa[p],
    );
    Ok(LinearSystem::with_unit_rhs(a))
}
