use alloc::vec;
use alloc::vec::Vec;

use super::cycle::{CycleStats, Preconditioner};
use super::hierarchy::AmgHierarchy;
use super::{AmgError, SolverConfig};
use crate::clock::Clock;
use crate::sparse::kernels::dot_unchecked;
use crate::sparse::{norm2, CsrMatrix};

/// Scalars below this magnitude are treated as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure {
    MaxIterations,
    Breakdown,
    NonFinite,
    WorkLimit,
    Timeout,
    Setup(alloc::string::String),
}

/// Result of one preconditioned solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub wall_time: f64,
    pub work_units: f64,
    pub setup_time: f64,
    pub failure: Option<SolveFailure>,
}

impl SolveOutcome {
    pub(crate) fn failed(reason: SolveFailure) -> Self {
        SolveOutcome {
            converged: false,
            iterations: 0,
            final_relative_residual: f64::INFINITY,
            wall_time: 0.0,
            work_units: 0.0,
            setup_time: 0.0,
            failure: Some(reason),
        }
    }
}

/// Optional caps checked once per iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveLimits {
    /// Abort once accumulated work units exceed this.
    pub max_work: Option<f64>,
    /// Absolute clock reading after which the solve is abandoned.
    pub deadline: Option<f64>,
}

/// Right-preconditioned BiCGStab from a zero initial guess.
///
/// Stops with `converged = true` once `‖r‖₂ ≤ outer_rel_tol · ‖b‖₂` (using
/// the recurrence residual), otherwise on the iteration budget, a breakdown,
/// a non-finite iterate, or a limit.
pub fn bicgstab_solve(
    a: &CsrMatrix,
    b: &[f64],
    h: &AmgHierarchy,
    cfg: &SolverConfig,
    limits: &SolveLimits,
    clock: &dyn Clock,
) -> Result<(Vec<f64>, SolveOutcome), AmgError> {
    let n = a.n_rows();
    if b.len() != n || a.n_cols() != n || h.levels[0].a.n_rows() != n {
        return Err(AmgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let start = clock.now();
    let mut x = vec![0.0; n];
    let mut stats = CycleStats::default();
    let nnz = a.nnz() as f64;
    let bnorm = norm2(b);

    let mut outcome = SolveOutcome {
        converged: false,
        iterations: 0,
        final_relative_residual: 1.0,
        wall_time: 0.0,
        work_units: 0.0,
        setup_time: 0.0,
        failure: None,
    };
    if bnorm == 0.0 {
        outcome.converged = true;
        outcome.final_relative_residual = 0.0;
        return Ok((x, outcome));
    }
    if !bnorm.is_finite() {
        outcome.failure = Some(SolveFailure::NonFinite);
        return Ok((x, outcome));
    }
    let tol = cfg.outer_rel_tol * bnorm;

    let mut pc = Preconditioner::new(h, cfg);
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);

    let failure = 'iterate: {
        for it in 1..=cfg.outer_max_iters {
            if let Some(cap) = limits.max_work {
                if stats.work_units > cap {
                    break 'iterate Some(SolveFailure::WorkLimit);
                }
            }
            if let Some(deadline) = limits.deadline {
                if clock.now() > deadline {
                    break 'iterate Some(SolveFailure::Timeout);
                }
            }

            let rho_next = dot_unchecked(&r_hat, &r);
            if !rho_next.is_finite() {
                break 'iterate Some(SolveFailure::NonFinite);
            }
            if rho_next.abs() < BREAKDOWN_TOL {
                break 'iterate Some(SolveFailure::Breakdown);
            }
            if it == 1 {
                p.copy_from_slice(&r);
            } else {
                let beta = (rho_next / rho) * (alpha / omega);
                for i in 0..n {
                    p[i] = r[i] + beta * (p[i] - omega * v[i]);
                }
            }
            pc.apply(&p, &mut p_hat, &mut stats);
            a.mul_vec_into(&p_hat, &mut v);
            stats.work_units += nnz;

            let denom = dot_unchecked(&r_hat, &v);
            if !denom.is_finite() {
                break 'iterate Some(SolveFailure::NonFinite);
            }
            if denom.abs() < BREAKDOWN_TOL {
                break 'iterate Some(SolveFailure::Breakdown);
            }
            alpha = rho_next / denom;
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            let s_norm = norm2(&s);
            if !s_norm.is_finite() {
                break 'iterate Some(SolveFailure::NonFinite);
            }
            outcome.iterations = it;
            if s_norm <= tol {
                for i in 0..n {
                    x[i] += alpha * p_hat[i];
                }
                outcome.converged = true;
                outcome.final_relative_residual = s_norm / bnorm;
                break 'iterate None;
            }

            pc.apply(&s, &mut s_hat, &mut stats);
            a.mul_vec_into(&s_hat, &mut t);
            stats.work_units += nnz;
            let tt = dot_unchecked(&t, &t);
            if !tt.is_finite() {
                break 'iterate Some(SolveFailure::NonFinite);
            }
            if tt < BREAKDOWN_TOL {
                break 'iterate Some(SolveFailure::Breakdown);
            }
            omega = dot_unchecked(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] = s[i] - omega * t[i];
            }
            let r_norm = norm2(&r);
            if !r_norm.is_finite() {
                break 'iterate Some(SolveFailure::NonFinite);
            }
            outcome.final_relative_residual = r_norm / bnorm;
            if r_norm <= tol {
                outcome.converged = true;
                break 'iterate None;
            }
            if omega.abs() < BREAKDOWN_TOL {
                break 'iterate Some(SolveFailure::Breakdown);
            }
            rho = rho_next;
        }
        Some(SolveFailure::MaxIterations)
    };

    outcome.failure = failure;
    outcome.work_units = stats.work_units;
    outcome.wall_time = clock.now() - start;
    Ok((x, outcome))
}
