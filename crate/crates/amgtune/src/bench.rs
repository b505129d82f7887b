//! Methodological experiments at desk scale. Each writes a plain-text table
//! `<name>.txt` and plot data `<name>.csv` into the output directory.
//!
//! | experiment | default sizes |
//! |------------|---------------|
//! | `f-alpha-vs-nv` | 20000 synthetic noisy-ranking pairs, N_v from 100 to 5000, 5 re-splits |
//! | `balancing` | 2000 heavy-tailed synthetic samples over 7 parameters, 25% hold-out |
//! | `nn-filter` | `cube:16`, `space13`, 2000 training samples, S5/R10, alpha 0.05, 20 trials per arm |
//! | `mutation-ratio` | as `nn-filter`, S5/R5, S5/R10, S10/R5, S10/R10, 10 trials each |
//! | `alpha-sweep` | as `nn-filter`, S5/R5, alpha 0.002, 0.01, 0.05, 0.2 and no filter, 20 trials each |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use amgtune_core::nn::{self, TrainConfig};
use amgtune_core::{seeded_rng, EsConfig, MlpModel, ParameterVector, SearchSpace, SolverConfig};
use clap::Args;

use crate::cli::{calibrated_budget, load_problem, load_space, Context, ProblemArgs};
use crate::dataset_io;
use crate::error::CliError;
use crate::experiments::{
    balancing_comparison, f_alpha_resplits, heavy_tailed_dataset, mean, noisy_ranking, std_dev,
    synthetic_space, train_surrogate, trial_seeds, tuning_trials,
};
use crate::manifest::RunManifest;
use crate::model_io;
use crate::oracle::ParallelOracle;

pub const EXPERIMENTS: [&str; 5] = ["f-alpha-vs-nv", "balancing", "nn-filter", "mutation-ratio", "alpha-sweep"];

#[derive(Debug, Clone, Default, Args)]
pub struct BenchOptions {
    /// Tuning runs per arm.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Training samples (or synthetic pool size).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Problem for the tuning experiments [default: cube:16]; for
    /// `balancing`, sample this problem instead of synthetic data.
    #[arg(long)]
    pub problem: Option<String>,
    /// Space file or shipped space name [default: space13].
    #[arg(long)]
    pub space: Option<String>,
    /// Use this filtered dataset with `--model` in `f-alpha-vs-nv`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Pre-trained model instead of training one.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Generation limit of each tuning run.
    #[arg(long)]
    pub max_generations: Option<usize>,
}

struct Report {
    text: String,
    csv: String,
}

pub fn run(name: &str, opts: &BenchOptions, ctx: &Context, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let report = match name {
        "f-alpha-vs-nv" => f_alpha_vs_nv(opts, ctx)?,
        "balancing" => balancing(opts, ctx)?,
        "nn-filter" => nn_filter(opts, ctx)?,
        "mutation-ratio" => mutation_ratio(opts, ctx)?,
        "alpha-sweep" => alpha_sweep(opts, ctx)?,
        _ => {
            return Err(CliError::Config(format!(
                "unknown experiment `{name}`; expected one of {}",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let txt = out_dir.join(format!("{name}.txt"));
    let csv = out_dir.join(format!("{name}.csv"));
    fs::write(&txt, &report.text)?;
    fs::write(&csv, &report.csv)?;
    let mut m = RunManifest::start(&format!("bench {name}"), ctx.mode.as_str());
    m.seed("seed", ctx.seed);
    m.output(&txt);
    m.output(&csv);
    m.finish(&txt)?;
    print!("{}", report.text);
    Ok(vec![txt, csv])
}

const ALPHAS: [f64; 4] = [0.002, 0.01, 0.05, 0.2];

fn f_alpha_vs_nv(opts: &BenchOptions, ctx: &Context) -> Result<Report, CliError> {
    let mut rng = seeded_rng(ctx.seed);
    let (truth, pred, source) = match (&opts.dataset, &opts.model) {
        (Some(d), Some(m)) => {
            let (_, data) = dataset_io::read_dataset(d)?;
            let model = model_io::read_model(m)?;
            let space = load_space(opts.space.as_deref().unwrap_or("space13"))?;
            let vectors: Vec<ParameterVector> = data.samples.iter().map(|s| s.vector.clone()).collect();
            let pred = nn::predict(&model, &space, &vectors).map_err(CliError::config)?;
            (data.values(), pred, format!("dataset {}", d.display()))
        }
        (None, None) => {
            let n = opts.samples.unwrap_or(20000);
            let (t, p) = noisy_ranking(n, 0.5, &mut rng);
            (t, p, format!("{n} synthetic noisy-ranking pairs"))
        }
        _ => return Err(CliError::Config("--dataset and --model go together".into())),
    };
    let mut text = format!("F_alpha spread over 5 re-splits vs validation size ({source})\n");
    let _ = writeln!(text, "{:>8} {:>7} {:>10} {:>10}", "alpha", "N_v", "mean F", "stddev");
    let mut csv = String::from("alpha,n_v,mean_f_alpha,stddev_f_alpha\n");
    for alpha in ALPHAS {
        for n_v in [100, 200, 500, 1000, 2000, 5000] {
            if n_v > truth.len() || nn::n_alpha(alpha, n_v) == 0 {
                continue;
            }
            let f = f_alpha_resplits(&truth, &pred, n_v, 5, alpha, &mut rng);
            let _ = writeln!(text, "{alpha:>8} {n_v:>7} {:>10.4} {:>10.4}", mean(&f), std_dev(&f));
            let _ = writeln!(csv, "{alpha},{n_v},{},{}", mean(&f), std_dev(&f));
        }
    }
    Ok(Report { text, csv })
}

fn balancing(opts: &BenchOptions, ctx: &Context) -> Result<Report, CliError> {
    let n = opts.samples.unwrap_or(2000);
    let (space, raw, test) = match &opts.problem {
        None => {
            let space = synthetic_space(7);
            let raw = heavy_tailed_dataset(&space, n, &mut seeded_rng(ctx.seed));
            (space, raw, "synthetic".to_string())
        }
        Some(p) => {
            let args = ProblemArgs {
                problem: p.clone(),
                rhs: None,
            };
            let (_, problem) = load_problem(&args)?;
            let space = load_space(opts.space.as_deref().unwrap_or("space13"))?;
            let budget = calibrated_budget(ctx.mode, &problem, &SolverConfig::default());
            let mut oracle = ParallelOracle::new(&problem, &space, budget, ctx.jobs);
            let raw = amgtune_core::evaluator::sample_dataset(&space, n, &mut seeded_rng(ctx.seed), &mut oracle);
            (space, raw, p.clone())
        }
    };
    let cfg = TrainConfig {
        seed: ctx.seed,
        ..TrainConfig::default()
    };
    let (u, b) = balancing_comparison(&space, &raw, 0.25, &cfg).map_err(CliError::config)?;
    let f = |h: &crate::experiments::HoldOut| h.metrics.f(0.05).unwrap_or(f64::NAN);
    let r2 = |h: &crate::experiments::HoldOut| h.metrics.r_squared.unwrap_or(f64::NAN);
    let improvement = 100.0 * (f(&b) - f(&u)) / f(&u);
    let mut text = format!(
        "Prediction quality, unbalanced vs balanced training ({n} samples, {:.1}% non-converged)\n",
        100.0 * raw.non_converged_fraction()
    );
    let _ = writeln!(
        text,
        "{:<12} | {:>10} {:>8} | {:>10} {:>8} | {:>13}",
        "test", "unbal F005", "R2", "bal F005", "R2", "improvement %"
    );
    let _ = writeln!(
        text,
        "{test:<12} | {:>10.3} {:>8.3} | {:>10.3} {:>8.3} | {improvement:>13.1}",
        f(&u),
        r2(&u),
        f(&b),
        r2(&b)
    );
    let csv = format!(
        "test,unbalanced_f005,unbalanced_r2,balanced_f005,balanced_r2,improvement_percent\n{test},{},{},{},{},{improvement}\n",
        f(&u),
        r2(&u),
        f(&b),
        r2(&b)
    );
    Ok(Report { text, csv })
}

/// Problem, space, oracle and model shared by the tuning experiments.
fn with_study<T>(
    opts: &BenchOptions,
    ctx: &Context,
    body: impl FnOnce(&SearchSpace, &mut ParallelOracle<'_>, &MlpModel, Option<&ParameterVector>) -> Result<T, CliError>,
) -> Result<T, CliError> {
    let args = ProblemArgs {
        problem: opts.problem.clone().unwrap_or_else(|| "cube:16".into()),
        rhs: None,
    };
    let (_, problem) = load_problem(&args)?;
    let space = load_space(opts.space.as_deref().unwrap_or("space13"))?;
    let reference = SolverConfig::default();
    let budget = calibrated_budget(ctx.mode, &problem, &reference);
    let mut oracle = ParallelOracle::new(&problem, &space, budget, ctx.jobs);
    let model = match &opts.model {
        Some(p) => model_io::read_model(p)?,
        None => {
            train_surrogate(&space, &mut oracle, opts.samples.unwrap_or(2000), ctx.seed)
                .map_err(CliError::config)?
                .1
        }
    };
    let initial = space.encode_exact(&reference);
    body(&space, &mut oracle, &model, initial.as_ref())
}

fn es_template(opts: &BenchOptions, lambda_s: usize, lambda_r: usize, alpha: f64) -> EsConfig {
    EsConfig {
        lambda_s,
        lambda_r,
        alpha,
        max_generations: opts.max_generations.unwrap_or(50),
        ..EsConfig::default()
    }
}

fn summarize(text: &mut String, label: &str, v: &[f64]) {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let _ = writeln!(text, "{label:<16} {:>14.1} {:>12.1} {:>14.1}", mean(v), std_dev(v), min);
}

fn table_header(title: String) -> String {
    let mut text = title;
    let _ = writeln!(text, "{:<16} {:>14} {:>12} {:>14}", "arm", "mean fitness", "stddev", "best");
    text
}

fn es_error(e: amgtune_core::hes::EsError) -> CliError {
    match e {
        amgtune_core::hes::EsError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
        e => CliError::config(e),
    }
}

fn nn_filter(opts: &BenchOptions, ctx: &Context) -> Result<Report, CliError> {
    let trials = opts.trials.unwrap_or(20);
    let seeds = trial_seeds(ctx.seed, trials);
    with_study(opts, ctx, |space, oracle, model, initial| {
        let es = es_template(opts, 5, 10, 0.05);
        let with = tuning_trials(space, &es, oracle, Some(model), initial, &seeds).map_err(es_error)?;
        let without = tuning_trials(space, &es, oracle, None, initial, &seeds).map_err(es_error)?;
        let mut text = table_header(format!("Optimized {} fitness with and without the filter, S5/R10, {trials} trials\n", ctx.mode.as_str()));
        summarize(&mut text, "with filter", &with);
        summarize(&mut text, "without filter", &without);
        let mut csv = String::from("trial,with_filter,without_filter\n");
        for (i, (a, b)) in with.iter().zip(&without).enumerate() {
            let _ = writeln!(csv, "{i},{a},{b}");
        }
        Ok(Report { text, csv })
    })
}

fn mutation_ratio(opts: &BenchOptions, ctx: &Context) -> Result<Report, CliError> {
    let trials = opts.trials.unwrap_or(10);
    let seeds = trial_seeds(ctx.seed, trials);
    with_study(opts, ctx, |space, oracle, model, initial| {
        let mut text = table_header(format!("Soft/random mutation counts, filtered, alpha 0.05, {trials} trials\n"));
        let mut csv = String::from("config,trial,fitness\n");
        for (s, r) in [(5, 5), (5, 10), (10, 5), (10, 10)] {
            let es = es_template(opts, s, r, 0.05);
            let v = tuning_trials(space, &es, oracle, Some(model), initial, &seeds).map_err(es_error)?;
            let label = format!("S{s}/R{r}");
            summarize(&mut text, &label, &v);
            for (i, f) in v.iter().enumerate() {
                let _ = writeln!(csv, "{label},{i},{f}");
            }
        }
        Ok(Report { text, csv })
    })
}

fn alpha_sweep(opts: &BenchOptions, ctx: &Context) -> Result<Report, CliError> {
    let trials = opts.trials.unwrap_or(20);
    let seeds = trial_seeds(ctx.seed, trials);
    with_study(opts, ctx, |space, oracle, model, initial| {
        let mut text = table_header(format!("Filter fraction alpha, S5/R5, {trials} trials\n"));
        let mut csv = String::from("alpha,trial,fitness\n");
        let mut arms: Vec<(String, Option<f64>)> = ALPHAS.iter().map(|a| (format!("{a}"), Some(*a))).collect();
        arms.push(("none".into(), None));
        for (label, alpha) in arms {
            let es = es_template(opts, 5, 5, alpha.unwrap_or(0.002));
            let m = alpha.map(|_| model);
            let v = tuning_trials(space, &es, oracle, m, initial, &seeds).map_err(es_error)?;
            summarize(&mut text, &format!("alpha {label}"), &v);
            for (i, f) in v.iter().enumerate() {
                let _ = writeln!(csv, "{label},{i},{f}");
            }
        }
        Ok(Report { text, csv })
    })
}
