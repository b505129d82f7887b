use alloc::vec::Vec;

use super::chebyshev::{estimate_lambda_max, inverse_diagonal, ChebyshevBounds};
use super::coarsen::{coarsen, PointKind};
use super::dense::DenseLu;
use super::galerkin::galerkin_product;
use super::interp::build_interpolation;
use super::strength::strength_graph;
use super::{AmgError, SolverConfig};
use crate::sparse::CsrMatrix;

/// Largest coarsest-level operator factored densely.
pub const MAX_DENSE_COARSE: usize = 2000;
/// Hard cap on hierarchy depth.
pub const MAX_LEVELS: usize = 25;
/// Power iterations for the λ_max estimate.
pub const POWER_ITERS: usize = 10;
/// Margin applied to the power-method estimate, which approaches λ_max from below.
pub const LAMBDA_SAFETY: f64 = 1.1;
/// A coarsening that keeps more than this fraction of points has stalled.
pub const STALL_RATIO: f64 = 0.9;

/// One multigrid level. Every level but the coarsest carries the
/// prolongation to the next level and its smoother data.
#[derive(Debug, Clone)]
pub struct Level {
    pub a: CsrMatrix,
    pub p: Option<CsrMatrix>,
    pub(crate) r: Option<CsrMatrix>,
    pub(crate) inv_diag: Vec<f64>,
    pub lambda_max: f64,
    pub pre_bounds: Option<ChebyshevBounds>,
    pub post_bounds: Option<ChebyshevBounds>,
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    pub levels: Vec<Level>,
    pub coarse: DenseLu,
}

impl AmgHierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.n_rows()).collect()
    }

    /// Sum of operator nonzeros over all levels divided by the fine nonzeros.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum();
        total as f64 / self.levels[0].a.nnz().max(1) as f64
    }
}

/// Builds the classical AMG hierarchy for `a` under `cfg`.
///
/// Coarsening stops once a level has at most `coarse_matrix_size` rows, when
/// a split produces no coarse points, or when it keeps more than
/// `STALL_RATIO` of the points. The last level is factored densely.
pub fn build_hierarchy(a: &CsrMatrix, cfg: &SolverConfig) -> Result<AmgHierarchy, AmgError> {
    if !a.is_square() {
        return Err(AmgError::NotSquare(a.n_rows(), a.n_cols()));
    }
    let mut levels: Vec<Level> = Vec::new();
    let mut current = a.clone();
    loop {
        let l = levels.len();
        let n = current.n_rows();
        if n <= cfg.coarse_matrix_size || l + 1 >= MAX_LEVELS {
            break;
        }
        let s = strength_graph(&current, cfg.strength_threshold, cfg.max_row_sum);
        let split = coarsen(&s, cfg.coarsening);
        let n_c = split.iter().filter(|&&k| k == PointKind::Coarse).count();
        if n_c == 0 || n_c as f64 > STALL_RATIO * n as f64 {
            break;
        }
        let p = build_interpolation(
            &current,
            &s,
            &split,
            cfg.interpolation,
            cfg.trunc_factor,
            cfg.p_max_elements,
        );
        if p.values().iter().any(|v| !v.is_finite()) {
            return Err(AmgError::NonFinite { level: l });
        }
        let coarse = galerkin_product(&current, &p);
        if coarse.values().iter().any(|v| !v.is_finite()) {
            return Err(AmgError::NonFinite { level: l + 1 });
        }
        let inv_diag = inverse_diagonal(&current, l)?;
        let lambda_max = LAMBDA_SAFETY * estimate_lambda_max(&current, &inv_diag, POWER_ITERS);
        let pre = ChebyshevBounds::from_fraction(lambda_max, cfg.pre_spectrum_fraction)?;
        let post = ChebyshevBounds::from_fraction(lambda_max, cfg.post_spectrum_fraction)?;
        let r = p.transpose();
        levels.push(Level {
            a: current,
            p: Some(p),
            r: Some(r),
            inv_diag,
            lambda_max,
            pre_bounds: Some(pre),
            post_bounds: Some(post),
        });
        current = coarse;
    }

    let level = levels.len();
    let size = current.n_rows();
    if size > MAX_DENSE_COARSE {
        return Err(AmgError::CoarseTooLarge {
            level,
            size,
            limit: MAX_DENSE_COARSE,
        });
    }
    let coarse = DenseLu::factor(&current).ok_or(AmgError::SingularCoarse { level })?;
    levels.push(Level {
        a: current,
        p: None,
        r: None,
        inv_diag: Vec::new(),
        lambda_max: 0.0,
        pre_bounds: None,
        post_bounds: None,
    });
    Ok(AmgHierarchy { levels, coarse })
}
