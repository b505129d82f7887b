use alloc::vec;
use alloc::vec::Vec;

use super::chebyshev::{smooth_in_place, ChebyshevWork};
use super::hierarchy::AmgHierarchy;
use super::{AmgError, CycleType, SolverConfig};

/// Cost accounting for preconditioner applications.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CycleStats {
    /// Σ nnz of every operator applied (dense coarse solves count n²).
    pub work_units: f64,
    pub coarse_solves: usize,
}

#[derive(Debug, Clone)]
struct LevelWork {
    x: Vec<f64>,
    b: Vec<f64>,
    r: Vec<f64>,
    cheb: ChebyshevWork,
}

/// Multigrid cycle with reusable per-level scratch space.
#[derive(Debug, Clone)]
pub(crate) struct Preconditioner<'a> {
    h: &'a AmgHierarchy,
    cfg: &'a SolverConfig,
    work: Vec<LevelWork>,
}

impl<'a> Preconditioner<'a> {
    pub(crate) fn new(h: &'a AmgHierarchy, cfg: &'a SolverConfig) -> Self {
        let work = h
            .levels
            .iter()
            .map(|l| {
                let n = l.a.n_rows();
                LevelWork {
                    x: vec![0.0; n],
                    b: vec![0.0; n],
                    r: vec![0.0; n],
                    cheb: ChebyshevWork::new(n),
                }
            })
            .collect();
        Preconditioner { h, cfg, work }
    }

    /// `z ≈ A⁻¹ r` by `precond_iters` cycles from a zero initial guess.
    pub(crate) fn apply(&mut self, r: &[f64], z: &mut [f64], stats: &mut CycleStats) {
        let top = &mut self.work[0];
        top.b.copy_from_slice(r);
        top.x.iter_mut().for_each(|v| *v = 0.0);
        for it in 0..self.cfg.precond_iters {
            cycle(self.h, self.cfg, &mut self.work, 0, self.cfg.cycle, it == 0, stats);
        }
        z.copy_from_slice(&self.work[0].x);
    }
}

fn cycle(
    h: &AmgHierarchy,
    cfg: &SolverConfig,
    work: &mut [LevelWork],
    l: usize,
    kind: CycleType,
    x_is_zero: bool,
    stats: &mut CycleStats,
) {
    let level = &h.levels[l];
    let (cur, rest) = work.split_first_mut().expect("level workspace");
    if l + 1 == h.levels.len() {
        // exact solve; any incoming guess is superseded
        h.coarse.solve_into(&cur.b, &mut cur.x);
        let n = level.a.n_rows() as f64;
        stats.work_units += n * n;
        stats.coarse_solves += 1;
        return;
    }
    let a = &level.a;
    let nnz = a.nnz() as f64;
    let p = level.p.as_ref().expect("prolongation");
    let r = level.r.as_ref().expect("restriction");

    let apps = smooth_in_place(
        a,
        &level.inv_diag,
        level.pre_bounds.expect("bounds"),
        cfg.pre_cheby_order,
        &mut cur.x,
        &cur.b,
        x_is_zero,
        &mut cur.cheb,
    );
    stats.work_units += apps as f64 * nnz;

    a.residual_into(&cur.x, &cur.b, &mut cur.r);
    stats.work_units += nnz;
    {
        let next = &mut rest[0];
        r.mul_vec_into(&cur.r, &mut next.b);
        next.x.iter_mut().for_each(|v| *v = 0.0);
    }
    stats.work_units += p.nnz() as f64;

    let next_is_coarsest = l + 2 == h.levels.len();
    if next_is_coarsest {
        cycle(h, cfg, rest, l + 1, kind, true, stats);
    } else {
        match kind {
            CycleType::V => cycle(h, cfg, rest, l + 1, CycleType::V, true, stats),
            CycleType::W => {
                cycle(h, cfg, rest, l + 1, CycleType::W, true, stats);
                cycle(h, cfg, rest, l + 1, CycleType::W, false, stats);
            }
            CycleType::F => {
                cycle(h, cfg, rest, l + 1, CycleType::F, true, stats);
                cycle(h, cfg, rest, l + 1, CycleType::V, false, stats);
            }
        }
    }

    p.mul_vec_add(&rest[0].x, &mut cur.x);
    stats.work_units += p.nnz() as f64;

    let apps = smooth_in_place(
        a,
        &level.inv_diag,
        level.post_bounds.expect("bounds"),
        cfg.post_cheby_order,
        &mut cur.x,
        &cur.b,
        false,
        &mut cur.cheb,
    );
    stats.work_units += apps as f64 * nnz;
}

/// One preconditioner application `z = M⁻¹ r`.
pub fn apply_preconditioner(
    h: &AmgHierarchy,
    cfg: &SolverConfig,
    r: &[f64],
) -> Result<(Vec<f64>, CycleStats), AmgError> {
    let n = h.levels[0].a.n_rows();
    if r.len() != n {
        return Err(AmgError::DimensionMismatch {
            expected: n,
            found: r.len(),
        });
    }
    let mut pc = Preconditioner::new(h, cfg);
    let mut z = vec![0.0; n];
    let mut stats = CycleStats::default();
    pc.apply(r, &mut z, &mut stats);
    Ok((z, stats))
}
