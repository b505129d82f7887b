//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset: `cargo test --test acceptance -- 2 7`.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use amgtune::builtin;
use amgtune::cli::calibrated_budget;
use amgtune::experiments::{
    balancing_comparison, f_alpha_resplits, heavy_tailed_dataset, mean, noisy_ranking, std_dev,
    synthetic_space, train_surrogate, trial_seeds, tuning_trials,
};
use amgtune::oracle::ParallelOracle;
use amgtune::space_io::parse_space;
use amgtune_core::amg::{bicgstab_solve, build_hierarchy, SolveLimits};
use amgtune_core::evaluator::{evaluate_config, FitnessOracle};
use amgtune_core::hes;
use amgtune_core::nn::{epochs_for, f_alpha, r_squared, TrainConfig};
use amgtune_core::space::ParameterSpec;
use amgtune_core::sparse::{build_cube, build_jumps, norm2};
use amgtune_core::{
    seeded_rng, CsrMatrix, EsConfig, FitnessMode, LinearSystem, MlpModel, NullClock, SearchSpace,
    SolverConfig,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn work_budget(problem: &LinearSystem) -> amgtune_core::EvalBudget {
    calibrated_budget(FitnessMode::WorkUnits, problem, &SolverConfig::default())
}

// 1 -------------------------------------------------------------------

fn formula_fidelity() -> Outcome {
    let mut notes = Vec::new();
    let epochs = epochs_for(50000);
    notes.push(format!("epochs(50000)={epochs}"));

    let truth = [0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 1.00, 1.10];
    let pred = [0.15, 0.25, 0.35, 0.90, 0.55, 0.30, 0.75, 0.85, 0.95, 1.05, 1.15];
    let f = f_alpha(&truth, &pred, 4.0 / 11.0).map_err(|e| e.to_string())?;
    notes.push(format!("F(N_v=11, alpha=4/11)={f}"));

    let t = [1.0, 2.0, 3.0, 4.0, 5.0];
    let r_perfect = r_squared(&t, &t).unwrap();
    let r_mean = r_squared(&t, &[3.0; 5]).unwrap();
    let r_anti = r_squared(&t, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
    notes.push(format!("R2 perfect/mean/anti={r_perfect}/{r_mean}/{r_anti}"));

    // Domain sizes of a classic seven-parameter BoomerAMG space: paths,
    // coarsening, interpolation, aggressive levels, aggressive
    // interpolation, smoother orders.
    let ks = [4usize, 4, 9, 11, 4, 4, 4];
    let reference = SearchSpace::new(
        ks.iter()
            .enumerate()
            .map(|(j, &k)| ParameterSpec::ints(&format!("p{j}"), 1, k as i64).unwrap())
            .collect(),
        BTreeMap::new(),
    )
    .unwrap();
    let product: u64 = ks.iter().map(|&k| k as u64).product();
    let card = reference.cardinality();
    let shipped = builtin::space7();
    let shipped_product: u64 = shipped.cardinalities().iter().map(|&k| k as u64).product();
    notes.push(format!(
        "|P| reference={card} (product {product}), shipped space7={} (product {shipped_product})",
        shipped.cardinality()
    ));

    check(
        epochs == 1050
            && f == 0.75
            && r_perfect == 1.0
            && r_mean == 0.0
            && r_anti < 0.0
            && card.to_string() == product.to_string()
            && shipped.cardinality().to_string() == shipped_product.to_string(),
        notes.join("; "),
    )
}

// 2 -------------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let problem = build_cube(16).unwrap();
    let space = builtin::tiny();
    let mut oracle = ParallelOracle::new(&problem, &space, work_budget(&problem), 1);
    let all: Vec<_> = space.enumerate().collect();
    let optimum = oracle
        .evaluate_batch(&all)
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    let (_, model) = train_surrogate(&space, &mut oracle, 1500, 11).map_err(|e| e.to_string())?;
    let finals = tuning_trials(&space, &EsConfig::default(), &mut oracle, Some(&model), None, &trial_seeds(2, 20))
        .map_err(|e| e.to_string())?;
    let hits = finals.iter().filter(|&&f| f <= 1.1 * optimum).count();
    let worst = finals.iter().copied().fold(0.0, f64::max);
    check(
        hits >= 16,
        format!(
            "|P|={} global optimum {optimum}; {hits}/20 runs within 10% (worst {:.3}x optimum)",
            all.len(),
            worst / optimum
        ),
    )
}

// 3 -------------------------------------------------------------------

/// The shipped seven-parameter space with the remaining fields at their
/// defaults, so the default configuration lies on the grid.
fn space7_at_defaults() -> SearchSpace {
    let text: String = builtin::SPACE7
        .lines()
        .filter(|l| !l.contains("frozen("))
        .map(|l| format!("{l}\n"))
        .collect();
    parse_space(&text).unwrap()
}

fn monotonicity() -> Outcome {
    let space = space7_at_defaults();
    let default = SolverConfig::default();
    let start = space.encode_exact(&default).ok_or("default configuration is off the grid")?;
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, problem) in [("cube:16", build_cube(16).unwrap()), ("jumps:16", build_jumps(16).unwrap())] {
        let budget = work_budget(&problem);
        let default_fitness = evaluate_config(&problem, &default, &budget, &NullClock).value;
        let mut oracle = ParallelOracle::new(&problem, &space, budget, 1);
        let mut violations = 0;
        let mut improved = 0;
        for seed in trial_seeds(3, 50) {
            let cfg = EsConfig {
                seed,
                ..EsConfig::default()
            };
            let trace = hes::run(&space, &cfg, &mut oracle, None, Some(&start), &NullClock).map_err(|e| e.to_string())?;
            let seq = trace.best_sequence();
            let injected = trace.generations[0].individuals[0].vector == start;
            let last = *seq.last().unwrap();
            if !injected || seq.windows(2).any(|w| w[1] > w[0]) || !(last <= default_fitness) {
                violations += 1;
            }
            if last < default_fitness {
                improved += 1;
            }
        }
        ok &= violations == 0;
        notes.push(format!(
            "{name}: 50 runs, {violations} violations, {improved} strictly better than default {default_fitness}"
        ));
    }
    check(ok, notes.join("; "))
}

// 4 and 5 ---------------------------------------------------------------

struct FilterStudy {
    with_filter: Vec<f64>,
    without_filter: Vec<f64>,
    alpha_02: Vec<f64>,
}

fn filter_study() -> &'static FilterStudy {
    static STUDY: OnceLock<FilterStudy> = OnceLock::new();
    STUDY.get_or_init(|| {
        let problem = build_cube(16).unwrap();
        let space = builtin::space13();
        let mut oracle = ParallelOracle::new(&problem, &space, work_budget(&problem), 1);
        let (_, model) = train_surrogate(&space, &mut oracle, 2000, 5).unwrap();
        let seeds = trial_seeds(4, 20);
        let base = EsConfig::default();
        let run = |oracle: &mut ParallelOracle<'_>, model: Option<&MlpModel>, alpha: f64| {
            let cfg = EsConfig { alpha, ..base.clone() };
            tuning_trials(&space, &cfg, oracle, model, None, &seeds).unwrap()
        };
        FilterStudy {
            with_filter: run(&mut oracle, Some(&model), 0.002),
            without_filter: run(&mut oracle, None, 0.002),
            alpha_02: run(&mut oracle, Some(&model), 0.2),
        }
    })
}

fn nn_filter_benefit() -> Outcome {
    let s = filter_study();
    let (mw, mo) = (mean(&s.with_filter), mean(&s.without_filter));
    let (sw, so) = (std_dev(&s.with_filter), std_dev(&s.without_filter));
    check(
        mw <= mo && sw <= so,
        format!("cube:16 space13, 20 runs each: with filter mean {mw:.0} sd {sw:.0}; without mean {mo:.0} sd {so:.0}"),
    )
}

fn alpha_trend() -> Outcome {
    let s = filter_study();
    let (a, b) = (mean(&s.with_filter), mean(&s.alpha_02));
    check(a <= b, format!("cube:16 space13, 20 runs each: mean at alpha 0.002 {a:.0}, at alpha 0.2 {b:.0}"))
}

// 6 -------------------------------------------------------------------

fn balancing_effect() -> Outcome {
    let space = synthetic_space(7);
    let raw = heavy_tailed_dataset(&space, 2000, &mut seeded_rng(6));
    let cfg = TrainConfig {
        seed: 6,
        ..TrainConfig::default()
    };
    let (u, b) = balancing_comparison(&space, &raw, 0.25, &cfg).map_err(|e| e.to_string())?;
    let fu = u.metrics.f(0.05).unwrap();
    let fb = b.metrics.f(0.05).unwrap();
    let ru = u.metrics.r_squared.unwrap_or(f64::NAN);
    let rb = b.metrics.r_squared.unwrap_or(f64::NAN);
    check(
        fb > fu,
        format!(
            "{:.0}% infinite; unbalanced F_0.05={fu:.3} R2={ru:.3}; balanced F_0.05={fb:.3} R2={rb:.3}",
            100.0 * raw.non_converged_fraction()
        ),
    )
}

// 7 -------------------------------------------------------------------

fn max_gradient_error(model: &MlpModel, x: &[f64], y: &[f64], indices: impl Iterator<Item = usize>) -> (f64, usize) {
    let (_, grad) = model.loss_and_gradient(x, y);
    let base = model.parameters();
    let mut probe = model.clone();
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in indices {
        let mut p = base.clone();
        p[i] = base[i] + h;
        probe.set_parameters(&p);
        let up = probe.loss_and_gradient(x, y).0;
        p[i] = base[i] - h;
        probe.set_parameters(&p);
        let down = probe.loss_and_gradient(x, y).0;
        let numeric = (up - down) / (2.0 * h);
        let scale = grad[i].abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((grad[i] - numeric).abs() / scale);
        count += 1;
    }
    (worst, count)
}

fn random_batch(rows: usize, cols: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = seeded_rng(seed);
    let x = (0..rows * cols).map(|_| rng.gen::<f64>()).collect();
    let y = (0..rows).map(|_| rng.gen_range(-2.0..2.0)).collect();
    (x, y)
}

/// Triple product accumulated entry by entry in the fused kernel's order.
fn explicit_rap(a: &CsrMatrix, p: &CsrMatrix) -> BTreeMap<(usize, usize), f64> {
    let mut acc = BTreeMap::new();
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

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_amgtune"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if status.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))
    }
}

fn pipeline(dir: &Path, jobs: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let common = ["--seed", "9", "--mode", "work-units", "--jobs", jobs];
    let steps: [&[&str]; 6] = [
        &["gen-problem", "cube:10", "--out", "c10.mtx"],
        &["sample", "--problem", "mm:c10.mtx", "--rhs", "file:c10.rhs.mtx", "--space", "tiny", "--count", "300", "--chunk", "50", "--out", "raw.txt"],
        &["balance", "raw.txt", "--out", "bal.txt"],
        &["train", "bal.txt", "--space", "tiny", "--validation", "0.2", "--out", "m.bin"],
        &["tune", "--problem", "cube:10", "--space", "tiny", "--model", "m.bin", "--pool", "2500", "--out", "best.cfg"],
        &["solve", "--problem", "cube:10", "--config", "best.cfg", "--out", "x.mtx"],
    ];
    for step in steps {
        let mut args: Vec<&str> = step.to_vec();
        args.extend(common);
        run_cli(dir, &args)?;
    }
    let mut files = Vec::new();
    for name in [
        "c10.mtx", "c10.rhs.mtx", "raw.txt", "bal.txt", "m.bin", "m.bin.report.json", "best.cfg", "best.cfg.trace",
        "best.cfg.summary.txt", "x.mtx",
    ] {
        files.push((name.to_string(), std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?));
    }
    Ok(files)
}

fn numerical_core() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let small = MlpModel::new(&[7, 24, 16, 8, 1], 0.25, 0, 1);
    let (x, y) = random_batch(6, 7, 1);
    let (e_small, n_small) = max_gradient_error(&small, &x, &y, 0..small.n_params());
    let standard = MlpModel::standard(7, 0, 2);
    let (x, y) = random_batch(4, 7, 2);
    let (e_std, n_std) = max_gradient_error(&standard, &x, &y, (0..standard.n_params()).step_by(211));
    ok &= e_small <= 1e-4 && e_std <= 1e-4;
    notes.push(format!(
        "gradient rel err {e_small:.1e} over all {n_small} params of [7,24,16,8,1], {e_std:.1e} over {n_std} of the standard net"
    ));

    let mut levels = 0;
    let mut galerkin_diff = 0.0f64;
    let variants = [
        SolverConfig::default(),
        parse_cfg("coarsening = pmis_like\ninterpolation = direct\np_max_elements = 2\n"),
        parse_cfg("strength_threshold = 0.6\ntrunc_factor = 0\nmax_row_sum = 0.5\n"),
    ];
    for sys in [build_cube(4), build_cube(8), build_cube(16), build_jumps(12), build_jumps(16)] {
        let sys = sys.unwrap();
        for cfg in &variants {
            let h = build_hierarchy(&sys.matrix, cfg).map_err(|e| e.to_string())?;
            for w in h.levels.windows(2) {
                let reference = explicit_rap(&w[0].a, w[0].p.as_ref().unwrap());
                let coarse = &w[1].a;
                for (i, j, v) in coarse.triplets() {
                    galerkin_diff = galerkin_diff.max((v - reference.get(&(i, j)).copied().unwrap_or(0.0)).abs());
                }
                for (&(i, j), &r) in &reference {
                    galerkin_diff = galerkin_diff.max((coarse.get(i, j) - r).abs());
                }
                levels += 1;
            }
        }
    }
    ok &= galerkin_diff == 0.0;
    notes.push(format!("Galerkin max |RAP - explicit| = {galerkin_diff} over {levels} level pairs"));

    let space = builtin::space13();
    let mut rng = seeded_rng(7);
    let (mut converged, mut worst) = (0, 0.0f64);
    for sys in [build_cube(12).unwrap(), build_jumps(12).unwrap()] {
        for _ in 0..40 {
            let cfg = space.decode(&space.random_vector(&mut rng)).unwrap();
            let Ok(h) = build_hierarchy(&sys.matrix, &cfg) else { continue };
            let (x, out) = bicgstab_solve(&sys.matrix, &sys.rhs, &h, &cfg, &SolveLimits::default(), &NullClock)
                .map_err(|e| e.to_string())?;
            if out.converged {
                let mut r = vec![0.0; sys.n()];
                sys.matrix.residual_into(&x, &sys.rhs, &mut r);
                worst = worst.max(norm2(&r) / norm2(&sys.rhs) / cfg.outer_rel_tol);
                converged += 1;
            }
        }
    }
    ok &= worst <= 2.0 && converged > 0;
    notes.push(format!("{converged} converged solves, max recomputed residual {worst:.3} x tol"));

    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    let first = pipeline(&a, "1")?;
    let second = pipeline(&b, "2")?;
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x.1 != y.1)
        .map(|(x, _)| x.0.as_str())
        .collect();
    ok &= differing.is_empty();
    notes.push(format!(
        "pipeline rerun (jobs 1 vs 2): {} artifacts, differing {:?}",
        first.len(),
        differing
    ));
    check(ok, notes.join("; "))
}

fn parse_cfg(text: &str) -> SolverConfig {
    amgtune::config_io::parse_config(text).unwrap()
}

// 8 -------------------------------------------------------------------

fn f_alpha_reliability() -> Outcome {
    let mut rng = seeded_rng(8);
    let (truth, pred) = noisy_ranking(20000, 0.5, &mut rng);
    let small = f_alpha_resplits(&truth, &pred, 100, 5, 0.05, &mut rng);
    let large = f_alpha_resplits(&truth, &pred, 2000, 5, 0.05, &mut rng);
    let (s, l) = (std_dev(&small), std_dev(&large));
    check(
        l < s,
        format!("sd of F_0.05 over 5 re-splits: N_v=100 {s:.4} (mean {:.3}), N_v=2000 {l:.4} (mean {:.3})", mean(&small), mean(&large)),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 8] = [
        (1, "formula fidelity", formula_fidelity),
        (2, "oracle equivalence", oracle_equivalence),
        (3, "monotonicity", monotonicity),
        (4, "filter benefit", nn_filter_benefit),
        (5, "alpha trend", alpha_trend),
        (6, "balancing effect", balancing_effect),
        (7, "numerical core", numerical_core),
        (8, "F_alpha reliability", f_alpha_reliability),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("criterion {n} PASS {name}: {d} ({secs:.1} s)"),
            Err(d) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {d} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
