use std::collections::BTreeMap;

use amgtune_core::amg::{
    apply_preconditioner, bicgstab_solve, build_hierarchy, chebyshev_smooth, galerkin_product,
    ChebyshevBounds, Coarsening, CycleType, Interpolation, SolveLimits, SolverConfig,
};
use amgtune_core::sparse::{build_cube, build_jumps, norm2, CsrMatrix};
use amgtune_core::NullClock;
use rand::{Rng, SeedableRng};

fn solve(a: &CsrMatrix, b: &[f64], cfg: &SolverConfig) -> (Vec<f64>, amgtune_core::SolveOutcome) {
    let h = build_hierarchy(a, cfg).unwrap();
    bicgstab_solve(a, b, &h, cfg, &SolveLimits::default(), &NullClock).unwrap()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; b.len()];
    a.residual_into(x, b, &mut r);
    norm2(&r) / norm2(b)
}

#[test]
fn identity_converges_at_once() {
    let a = CsrMatrix::identity(50);
    let b: Vec<f64> = (0..50).map(|i| i as f64 - 7.5).collect();
    let (x, out) = solve(&a, &b, &SolverConfig::default());
    assert!(out.converged);
    assert!(out.iterations <= 1);
    assert_eq!(out.final_relative_residual, 0.0);
    assert_eq!(x, b);
}

#[test]
fn cube20_default_converges() {
    let sys = build_cube(20).unwrap();
    let cfg = SolverConfig::default();
    let (x, out) = solve(&sys.matrix, &sys.rhs, &cfg);
    assert!(out.converged, "{out:?}");
    assert_eq!(out.iterations, 4);
    assert!(relative_residual(&sys.matrix, &x, &sys.rhs) <= 2.0 * cfg.outer_rel_tol);
}

#[test]
fn zero_iteration_budget() {
    let sys = build_cube(6).unwrap();
    let cfg = SolverConfig {
        outer_max_iters: 0,
        ..SolverConfig::default()
    };
    let (_, out) = solve(&sys.matrix, &sys.rhs, &cfg);
    assert!(!out.converged);
    assert_eq!(out.iterations, 0);
}

#[test]
fn work_limit_stops_the_solve() {
    let sys = build_cube(12).unwrap();
    let cfg = SolverConfig {
        outer_rel_tol: 1e-14,
        ..SolverConfig::default()
    };
    let h = build_hierarchy(&sys.matrix, &cfg).unwrap();
    let limits = SolveLimits {
        max_work: Some(1.0),
        deadline: None,
    };
    let (_, out) = bicgstab_solve(&sys.matrix, &sys.rhs, &h, &cfg, &limits, &NullClock).unwrap();
    assert!(!out.converged);
    assert!(out.failure.is_some());
}

fn variants() -> Vec<SolverConfig> {
    let mut out = Vec::new();
    for coarsening in [Coarsening::ClassicalRs, Coarsening::PmisLike] {
        for interpolation in [Interpolation::Direct, Interpolation::Classical] {
            for cycle in [CycleType::V, CycleType::W, CycleType::F] {
                out.push(SolverConfig {
                    coarsening,
                    interpolation,
                    cycle,
                    coarse_matrix_size: 40,
                    ..SolverConfig::default()
                });
            }
        }
    }
    out
}

/// Reference triple product summed in the same (i, j) order as the fused kernel.
fn explicit_rap(a: &CsrMatrix, p: &CsrMatrix) -> BTreeMap<(usize, usize), f64> {
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, j, aij) in a.triplets() {
        let (pic, piv) = p.row(i);
        let (pjc, pjv) = p.row(j);
        for (&ci, &vi) in pic.iter().zip(piv) {
            for (&cj, &vj) in pjc.iter().zip(pjv) {
                *acc.entry((ci, cj)).or_insert(0.0) += (vi * aij) * vj;
            }
        }
    }
    acc
}

#[test]
fn galerkin_identity_is_exact_on_every_level() {
    for grid in [8usize, 16] {
        for cfg in variants().into_iter().step_by(3) {
            for sys in [build_cube(grid).unwrap(), build_jumps(grid.max(10)).unwrap()] {
                let h = build_hierarchy(&sys.matrix, &cfg).unwrap();
                for w in h.levels.windows(2) {
                    let p = w[0].p.as_ref().unwrap();
                    let coarse = &w[1].a;
                    assert_eq!(*coarse, galerkin_product(&w[0].a, p));
                    let reference = explicit_rap(&w[0].a, p);
                    let mut max_diff = 0.0f64;
                    for (i, j, v) in coarse.triplets() {
                        let r = reference.get(&(i, j)).copied().unwrap_or(0.0);
                        max_diff = max_diff.max((v - r).abs());
                    }
                    for (&(i, j), &r) in &reference {
                        max_diff = max_diff.max((coarse.get(i, j) - r).abs());
                    }
                    assert_eq!(max_diff, 0.0);
                    let scale = coarse.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    assert!(coarse.max_asymmetry() <= 1e-13 * scale);
                }
            }
        }
    }
}

#[test]
fn all_variants_converge_and_respect_the_residual_contract() {
    for sys in [build_cube(12).unwrap(), build_jumps(12).unwrap()] {
        for cfg in variants() {
            let (x, out) = solve(&sys.matrix, &sys.rhs, &cfg);
            if out.converged {
                let rr = relative_residual(&sys.matrix, &x, &sys.rhs);
                assert!(rr <= 2.0 * cfg.outer_rel_tol, "{cfg:?}: {rr}");
            }
            assert!(out.converged, "{cfg:?} {out:?}");
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let sys = build_jumps(14).unwrap();
    for cfg in variants() {
        let (x1, o1) = solve(&sys.matrix, &sys.rhs, &cfg);
        let (x2, o2) = solve(&sys.matrix, &sys.rhs, &cfg);
        assert_eq!(x1, x2);
        assert_eq!(o1, o2);
    }
}

#[test]
fn coarse_solve_counts_per_cycle() {
    let sys = build_cube(16).unwrap();
    let base = SolverConfig {
        coarse_matrix_size: 400,
        ..SolverConfig::default()
    };
    let h = build_hierarchy(&sys.matrix, &base).unwrap();
    assert_eq!(h.n_levels(), 3, "{:?}", h.level_sizes());
    let count = |cycle| {
        let cfg = SolverConfig { cycle, ..base.clone() };
        apply_preconditioner(&h, &cfg, &sys.rhs).unwrap().1.coarse_solves
    };
    assert_eq!(count(CycleType::V), 1);
    assert_eq!(count(CycleType::W), 2);
    assert_eq!(count(CycleType::F), 2);
}

#[test]
fn w_cycle_costs_at_least_v_cycle() {
    let sys = build_cube(16).unwrap();
    let base = SolverConfig {
        coarse_matrix_size: 50,
        ..SolverConfig::default()
    };
    let h = build_hierarchy(&sys.matrix, &base).unwrap();
    let work = |cycle| {
        let cfg = SolverConfig { cycle, ..base.clone() };
        apply_preconditioner(&h, &cfg, &sys.rhs).unwrap().1.work_units
    };
    assert!(work(CycleType::W) >= work(CycleType::V));
}

#[test]
fn preconditioner_is_linear_at_zero() {
    let sys = build_cube(10).unwrap();
    let cfg = SolverConfig {
        coarse_matrix_size: 50,
        ..SolverConfig::default()
    };
    let h = build_hierarchy(&sys.matrix, &cfg).unwrap();
    let (z, _) = apply_preconditioner(&h, &cfg, &vec![0.0; 1000]).unwrap();
    assert!(z.iter().all(|&v| v == 0.0));
}

#[test]
fn single_level_preconditioner_is_exact() {
    let sys = build_cube(5).unwrap();
    let cfg = SolverConfig::default();
    let h = build_hierarchy(&sys.matrix, &cfg).unwrap();
    assert_eq!(h.n_levels(), 1);
    let (z, _) = apply_preconditioner(&h, &cfg, &sys.rhs).unwrap();
    assert!(relative_residual(&sys.matrix, &z, &sys.rhs) < 1e-12);
}

fn energy_norm_error(a: &CsrMatrix, x: &[f64], x_star: &[f64]) -> f64 {
    let e: Vec<f64> = x.iter().zip(x_star).map(|(a, b)| a - b).collect();
    let mut ae = vec![0.0; e.len()];
    a.mul_vec_into(&e, &mut ae);
    e.iter().zip(&ae).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

#[test]
fn chebyshev_energy_error_is_non_increasing() {
    let sys = build_cube(8).unwrap();
    let a = &sys.matrix;
    let cfg = SolverConfig::default();
    let h = build_hierarchy(a, &SolverConfig { coarse_matrix_size: 50, ..cfg }).unwrap();
    let lmax = h.levels[0].lambda_max;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let x_star: Vec<f64> = (0..a.n_rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b = vec![0.0; a.n_rows()];
        a.mul_vec_into(&x_star, &mut b);
        let x0: Vec<f64> = (0..a.n_rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let order = 1 + trial % 4;
        let frac = [0.1, 0.3, 0.5, 0.9][trial % 4 / 1 % 4];
        let bounds = ChebyshevBounds::from_fraction(lmax, frac).unwrap();
        let x1 = chebyshev_smooth(a, bounds, order, &x0, &b).unwrap();
        let before = energy_norm_error(a, &x0, &x_star);
        let after = energy_norm_error(a, &x1, &x_star);
        assert!(after <= before, "trial {trial}: {before} -> {after}");
    }
}

#[test]
fn chebyshev_fixed_point_and_identity() {
    let sys = build_cube(6).unwrap();
    let a = &sys.matrix;
    let x_star: Vec<f64> = (0..a.n_rows()).map(|i| (i % 7) as f64).collect();
    let mut b = vec![0.0; a.n_rows()];
    a.mul_vec_into(&x_star, &mut b);
    let bounds = ChebyshevBounds::from_fraction(2.0, 0.3).unwrap();
    let x = chebyshev_smooth(a, bounds, 3, &x_star, &b).unwrap();
    let drift = x.iter().zip(&x_star).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-12);

    let i = CsrMatrix::identity(4);
    let b = [1.0, -2.0, 3.0, 0.5];
    let bounds = ChebyshevBounds::from_fraction(1.0, 1e-3).unwrap();
    let x = chebyshev_smooth(&i, bounds, 1, &[0.0; 4], &b).unwrap();
    let r_after: f64 = x.iter().zip(&b).map(|(x, b)| (b - x).powi(2)).sum::<f64>().sqrt();
    assert!(r_after < norm2(&b));
    let scale = x[0] / b[0];
    for k in 0..4 {
        assert!((x[k] - scale * b[k]).abs() < 1e-14);
    }
    assert!(ChebyshevBounds::from_fraction(-1.0, 0.3).is_err());
}
