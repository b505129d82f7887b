//! Command-line surface.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use amgtune_core::amg::{bicgstab_solve, build_hierarchy, SolveLimits};
use amgtune_core::evaluator::{evaluate_config, sample_vectors, FitnessOracle, Stage};
use amgtune_core::hes::{self, EsError, ModelSurrogate, Surrogate};
use amgtune_core::nn::{self, TrainConfig, F005_WARNING};
use amgtune_core::sparse::norm2;
use amgtune_core::{
    seeded_rng, Clock, Dataset, EsConfig, EvalBudget, FitnessMode, FitnessSample, LinearSystem,
    NullClock, SearchSpace, SolverConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bench::{self, BenchOptions};
use crate::clock::StdClock;
use crate::config_io::{format_config, parse_config};
use crate::dataset_io::{self, CheckpointWriter, DatasetHeader};
use crate::error::CliError;
use crate::manifest::{sidecar, RunManifest};
use crate::model_io;
use crate::mtx;
use crate::oracle::ParallelOracle;
use crate::problem::{rhs_path, ProblemKind, ProblemSpec};
use crate::space_io::parse_space;
use crate::builtin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    WallTime,
    WorkUnits,
}

impl From<ModeArg> for FitnessMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::WallTime => FitnessMode::WallTime,
            ModeArg::WorkUnits => FitnessMode::WorkUnits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    Unbalanced,
    Balanced,
}

#[derive(Debug, Parser)]
#[command(name = "amgtune", version, about = "AMG solver autotuning with a surrogate-filtered evolution strategy")]
pub struct Cli {
    /// Seed for every random choice of the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Fitness measure.
    #[arg(long, global = true, value_enum, default_value = "work-units")]
    pub mode: ModeArg,
    /// Output artifact path (a directory for `bench`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for work-unit evaluations [default: available cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// `cube:N`, `jumps:N` or `mm:PATH`.
    #[arg(long)]
    pub problem: String,
    /// `ones`, `random:SEED` or `file:PATH` [default: ones].
    #[arg(long)]
    pub rhs: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a model problem as a Matrix Market matrix plus right-hand side.
    GenProblem {
        /// `cube:N` or `jumps:N`.
        spec: String,
        #[arg(long)]
        rhs: Option<String>,
    },
    /// Evaluate uniformly random configurations into a raw dataset.
    Sample {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Space file, or one of `space7`, `space13`, `tiny`.
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Continue an interrupted run writing to the same `--out`.
        #[arg(long)]
        resume: bool,
        /// Samples evaluated between checkpoints.
        #[arg(long, default_value_t = 64)]
        chunk: usize,
    },
    /// Print N, non-converged %, Q3, min and median of a dataset.
    Stats { dataset: PathBuf },
    /// Replace infinite (unbalanced) or all above-Q3 (balanced) values by Q3.
    Balance {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "balanced")]
        stage: StageArg,
    },
    /// Train the surrogate network on a filtered dataset.
    Train {
        dataset: PathBuf,
        #[arg(long)]
        space: String,
        /// Hold-out fraction.
        #[arg(long, default_value_t = 0.1)]
        validation: f64,
        /// Override the size-dependent epoch count.
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Optimize the solver configuration for one problem.
    Tune {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        space: String,
        /// Trained model enabling the filtered random mutation.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Reference configuration [default: the built-in default].
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        lambda_s: usize,
        #[arg(long, default_value_t = 5)]
        lambda_r: usize,
        #[arg(long, default_value_t = 0.002)]
        alpha: f64,
        /// Random candidates screened by the model per generation.
        #[arg(long, default_value_t = 5000)]
        pool: usize,
        #[arg(long, default_value_t = 50)]
        max_generations: usize,
        /// Do not seed generation 0 with the reference configuration.
        #[arg(long)]
        no_inject: bool,
    },
    /// Solve once and report the outcome.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Configuration file [default: the built-in default].
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a methodological experiment: f-alpha-vs-nv, balancing, nn-filter,
    /// mutation-ratio or alpha-sweep.
    Bench {
        experiment: String,
        #[command(flatten)]
        options: BenchOptions,
    },
}

pub struct Context {
    pub seed: u64,
    pub mode: FitnessMode,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

impl Context {
    fn out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Config("--out is required for this command".into()))
    }

    fn manifest(&self, command: &str) -> RunManifest {
        let mut m = RunManifest::start(command, self.mode.as_str());
        m.seed("seed", self.seed);
        m
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { crate::error::EXIT_CONFIG } else { 0 };
        }
    };
    let ctx = Context {
        seed: cli.seed,
        mode: cli.mode.into(),
        out: cli.out,
        jobs: cli
            .jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    match run(&ctx, cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(ctx: &Context, command: Command) -> Result<(), CliError> {
    match command {
        Command::GenProblem { spec, rhs } => gen_problem(ctx, &spec, rhs.as_deref()),
        Command::Sample {
            problem,
            space,
            count,
            resume,
            chunk,
        } => sample(ctx, &problem, &space, count, resume, chunk),
        Command::Stats { dataset } => stats(ctx, &dataset),
        Command::Balance { dataset, stage } => balance(ctx, &dataset, stage),
        Command::Train {
            dataset,
            space,
            validation,
            epochs,
        } => train(ctx, &dataset, &space, validation, epochs),
        Command::Tune {
            problem,
            space,
            model,
            config,
            lambda_s,
            lambda_r,
            alpha,
            pool,
            max_generations,
            no_inject,
        } => {
            let es = EsConfig {
                lambda_s,
                lambda_r,
                alpha,
                trial_pool: pool,
                max_generations,
                use_nn_filter: model.is_some(),
                seed: ctx.seed,
                ..EsConfig::default()
            };
            tune(ctx, &problem, &space, model.as_deref(), config.as_deref(), es, !no_inject)
        }
        Command::Solve { problem, config } => solve(ctx, &problem, config.as_deref()),
        Command::Bench { experiment, options } => {
            let out = ctx.out()?;
            let files = bench::run(&experiment, &options, ctx, out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

pub fn load_problem(args: &ProblemArgs) -> Result<(ProblemSpec, LinearSystem), CliError> {
    let spec = ProblemSpec::parse(&args.problem, args.rhs.as_deref())?;
    let system = spec.load()?;
    Ok((spec, system))
}

/// A space file path, or the name of a shipped space.
pub fn load_space(arg: &str) -> Result<SearchSpace, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{arg}: {e}")))?;
        return parse_space(&text).map_err(|e| CliError::Config(format!("{arg}: {e}")));
    }
    builtin::named_space(arg).ok_or_else(|| CliError::Io(format!("space file {arg} not found")))
}

pub fn load_config(path: Option<&Path>) -> Result<SolverConfig, CliError> {
    match path {
        None => Ok(SolverConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Budget cut off at a multiple of the reference configuration's cost.
/// Work-unit runs read no clock, so their results are reproducible.
pub fn calibrated_budget(mode: FitnessMode, problem: &LinearSystem, reference: &SolverConfig) -> EvalBudget {
    let clock: Box<dyn Clock> = match mode {
        FitnessMode::WorkUnits => Box::new(NullClock),
        FitnessMode::WallTime => Box::new(StdClock::new()),
    };
    EvalBudget::new(mode).calibrated(problem, reference, clock.as_ref())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn gen_problem(ctx: &Context, spec: &str, rhs: Option<&str>) -> Result<(), CliError> {
    let out = ctx.out()?;
    let p = ProblemSpec::parse(spec, rhs)?;
    if matches!(p.kind, ProblemKind::MatrixMarket(_)) {
        return Err(CliError::Config("gen-problem takes cube:N or jumps:N".into()));
    }
    let system = p.load()?;
    let rhs_file = rhs_path(out);
    mtx::write_matrix(out, &system.matrix)?;
    mtx::write_vector(&rhs_file, &system.rhs)?;
    let mut m = ctx.manifest("gen-problem");
    m.input(&p.to_string(), 0);
    m.output(out);
    m.output(&rhs_file);
    m.finish(out)?;
    println!(
        "{}: {} rows, {} nonzeros -> {} and {}",
        p,
        system.n(),
        system.matrix.nnz(),
        out.display(),
        rhs_file.display()
    );
    Ok(())
}

fn sample(
    ctx: &Context,
    args: &ProblemArgs,
    space_arg: &str,
    count: usize,
    resume: bool,
    chunk: usize,
) -> Result<(), CliError> {
    let out = ctx.out()?;
    let (spec, problem) = load_problem(args)?;
    let space = load_space(space_arg)?;
    let budget = calibrated_budget(ctx.mode, &problem, &SolverConfig::default());
    let vectors = sample_vectors(&space, count, &mut seeded_rng(ctx.seed));
    let header = DatasetHeader {
        fingerprint: space.fingerprint(),
        stage: Stage::Raw,
        q3: None,
        dims: space.dims(),
    };
    let (mut writer, mut samples) = if resume && out.exists() {
        let (w, done) = CheckpointWriter::resume(out, &header)?;
        if done.len() > count || done.iter().zip(&vectors).any(|(s, v)| &s.vector != v) {
            return Err(CliError::Config(format!(
                "{} was written by a different sampling run",
                out.display()
            )));
        }
        (w, done)
    } else {
        (CheckpointWriter::create(out, &header)?, Vec::new())
    };
    let mut oracle = ParallelOracle::new(&problem, &space, budget, ctx.jobs);
    for batch in vectors[samples.len()..].chunks(chunk.max(1)) {
        let results = oracle.evaluate_batch(batch);
        let new: Vec<FitnessSample> = batch
            .iter()
            .zip(&results)
            .map(|(v, r)| FitnessSample::from_result(v.clone(), r))
            .collect();
        writer.append(&new)?;
        samples.extend(new);
    }
    let d = Dataset::raw(space.fingerprint(), samples);
    let mut m = ctx.manifest("sample");
    m.input(&spec.to_string(), 0);
    m.input(&format!("space {space_arg}"), space.fingerprint());
    m.output(out);
    m.finish(out)?;
    println!("{} {}", out.display(), d.stats().summary());
    Ok(())
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    Ok(dataset_io::read_dataset(path)?.1)
}

fn stats(ctx: &Context, path: &Path) -> Result<(), CliError> {
    let d = read_dataset(path)?;
    let line = format!("{} stage={} fingerprint={:016x}", d.stats().summary(), d.stage.as_str(), d.fingerprint);
    println!("{line}");
    if let Some(out) = &ctx.out {
        write_text(out, &(line + "\n"))?;
        let mut m = ctx.manifest("stats");
        m.input_file(path)?;
        m.output(out);
        m.finish(out)?;
    }
    Ok(())
}

fn balance(ctx: &Context, path: &Path, stage: StageArg) -> Result<(), CliError> {
    let out = ctx.out()?;
    let (header, d) = dataset_io::read_dataset(path)?;
    let filtered = match stage {
        StageArg::Unbalanced if d.stage == Stage::Balanced => {
            return Err(CliError::Config("a balanced dataset cannot be unbalanced".into()))
        }
        StageArg::Unbalanced => d.unbalance(),
        StageArg::Balanced => d.balance(),
    }
    .map_err(CliError::config)?;
    dataset_io::write_dataset(out, &filtered, header.dims)?;
    let mut m = ctx.manifest("balance");
    m.input_file(path)?;
    m.output(out);
    m.finish(out)?;
    println!("{} {}", out.display(), filtered.stats().summary());
    Ok(())
}

fn train(
    ctx: &Context,
    path: &Path,
    space_arg: &str,
    validation: f64,
    epochs: Option<usize>,
) -> Result<(), CliError> {
    let out = ctx.out()?;
    let d = read_dataset(path)?;
    let space = load_space(space_arg)?;
    d.check_fingerprint(&space).map_err(CliError::config)?;
    if d.stage == Stage::Raw {
        return Err(CliError::Config(
            "raw datasets must be filtered with `balance` before training".into(),
        ));
    }
    let (train_set, val_set) = d.split(validation, &mut seeded_rng(ctx.seed)).map_err(CliError::config)?;
    let cfg = TrainConfig {
        seed: ctx.seed,
        epochs,
        ..TrainConfig::default()
    };
    let model = nn::train(&space, &train_set, &cfg).map_err(CliError::config)?;
    let metrics = nn::evaluate_model(&model, &space, &val_set).map_err(CliError::config)?;
    model_io::write_model(out, &model)?;

    let f_alpha: serde_json::Map<String, serde_json::Value> = metrics
        .f_alpha
        .iter()
        .map(|(a, f)| (format!("{a}"), json!(f)))
        .collect();
    let report = json!({
        "n_train": train_set.len(),
        "n_validation": val_set.len(),
        "epochs": epochs.unwrap_or_else(|| nn::epochs_for(train_set.len())),
        "train_mse": model.train_mse,
        "validation_mse": metrics.mse,
        "r2": metrics.r_squared,
        "f_alpha": f_alpha,
        "weak_filter": metrics.weak_filter(),
    });
    let line = report.to_string();
    println!("{line}");
    if metrics.weak_filter() {
        eprintln!(
            "warning: F_0.05 = {:.3} is below {F005_WARNING}; the model is a weak filter even if R2 looks good",
            metrics.f(0.05).unwrap_or(0.0)
        );
    }
    let report_path = sidecar(out, ".report.json");
    write_text(&report_path, &(line + "\n"))?;
    let mut m = ctx.manifest("train");
    m.input_file(path)?;
    m.input(&format!("space {space_arg}"), space.fingerprint());
    m.output(out);
    m.output(&report_path);
    m.finish(out)?;
    Ok(())
}

/// Everything `tune` writes, kept separate for reuse in tests.
pub struct TuneReport {
    pub trace: hes::OptimizationTrace,
    pub best: SolverConfig,
    pub default_fitness: f64,
    pub best_fitness: f64,
}

impl TuneReport {
    pub fn trace_text(&self) -> String {
        let mut s = String::from("# generation best_fitness evaluations\n");
        for g in &self.trace.generations {
            let _ = writeln!(s, "{} {:?} {}", g.index, g.best.fitness.value, g.evaluations);
        }
        s
    }

    pub fn summary_text(&self, problem: &str, mode: FitnessMode) -> String {
        let speedup = if self.default_fitness.is_finite() {
            format!("{:.3}", self.default_fitness / self.best_fitness)
        } else {
            "n/a (default configuration did not converge)".into()
        };
        format!(
            "problem: {problem}\nmode: {}\ngenerations: {}\nevaluations: {}\nstop: {}\ndefault fitness: {:?}\nbest fitness: {:?}\nspeedup vs default: {speedup}\n",
            mode.as_str(),
            self.trace.generations.len(),
            self.trace.evaluations,
            self.trace.stop_reason.map_or("none", |r| r.as_str()),
            self.default_fitness,
            self.best_fitness,
        )
    }
}

#[allow(clippy::too_many_arguments)]
pub fn tune_system(
    problem: &LinearSystem,
    space: &SearchSpace,
    model: Option<&amgtune_core::MlpModel>,
    reference: &SolverConfig,
    es: &EsConfig,
    inject: bool,
    mode: FitnessMode,
    jobs: usize,
) -> Result<TuneReport, CliError> {
    let budget = calibrated_budget(mode, problem, reference);
    let default_fitness = match mode {
        FitnessMode::WorkUnits => evaluate_config(problem, reference, &budget, &NullClock).value,
        FitnessMode::WallTime => evaluate_config(problem, reference, &budget, &StdClock::new()).value,
    };
    let mut oracle = ParallelOracle::new(problem, space, budget, jobs);
    let mut surrogate = match model {
        Some(m) => Some(ModelSurrogate::new(m, space).map_err(CliError::config)?),
        None => None,
    };
    let initial = if inject { space.encode_exact(reference) } else { None };
    let clock = StdClock::new();
    let result = hes::run(
        space,
        es,
        &mut oracle,
        surrogate.as_mut().map(|s| s as &mut dyn Surrogate),
        initial.as_ref(),
        &clock,
    );
    let trace = match result {
        Ok(t) => t,
        Err(EsError::Infeasible { trace }) => {
            return Err(CliError::Infeasible(format!(
                "no configuration converged in {} evaluations",
                trace.evaluations
            )))
        }
        Err(e) => return Err(CliError::config(e)),
    };
    let best_ind = trace.best().expect("non-empty trace").clone();
    let best = space.decode(&best_ind.vector).map_err(CliError::config)?;
    Ok(TuneReport {
        best,
        default_fitness,
        best_fitness: best_ind.fitness.value,
        trace,
    })
}

fn tune(
    ctx: &Context,
    args: &ProblemArgs,
    space_arg: &str,
    model_path: Option<&Path>,
    config: Option<&Path>,
    es: EsConfig,
    inject: bool,
) -> Result<(), CliError> {
    let out = ctx.out()?;
    let (spec, problem) = load_problem(args)?;
    let space = load_space(space_arg)?;
    let reference = load_config(config)?;
    let model = model_path.map(model_io::read_model).transpose()?;
    if let Some(m) = &model {
        if m.fingerprint != space.fingerprint() {
            return Err(CliError::Config(format!(
                "model fingerprint {:016x} does not match space {:016x}",
                m.fingerprint,
                space.fingerprint()
            )));
        }
    }
    let report = tune_system(&problem, &space, model.as_ref(), &reference, &es, inject, ctx.mode, ctx.jobs)?;
    let trace_path = sidecar(out, ".trace");
    let summary_path = sidecar(out, ".summary.txt");
    let summary = report.summary_text(&spec.to_string(), ctx.mode);
    write_text(out, &format_config(&report.best))?;
    write_text(&trace_path, &report.trace_text())?;
    write_text(&summary_path, &summary)?;
    let mut m = ctx.manifest("tune");
    m.input(&spec.to_string(), 0);
    m.input(&format!("space {space_arg}"), space.fingerprint());
    if let Some(p) = model_path {
        m.input_file(p)?;
    }
    if let Some(p) = config {
        m.input_file(p)?;
    }
    m.output(out);
    m.output(&trace_path);
    m.output(&summary_path);
    m.finish(out)?;
    print!("{summary}");
    println!("elapsed: {:.2} s", report.trace.elapsed);
    Ok(())
}

fn solve(ctx: &Context, args: &ProblemArgs, config: Option<&Path>) -> Result<(), CliError> {
    let (spec, problem) = load_problem(args)?;
    let cfg = load_config(config)?;
    let clock = StdClock::new();
    let t0 = clock.now();
    let h = build_hierarchy(&problem.matrix, &cfg)
        .map_err(|e| CliError::Infeasible(format!("hierarchy setup failed: {e}")))?;
    let setup = clock.now() - t0;
    let (x, outcome) = bicgstab_solve(&problem.matrix, &problem.rhs, &h, &cfg, &SolveLimits::default(), &clock)
        .map_err(CliError::config)?;
    let mut r = vec![0.0; problem.n()];
    problem.matrix.residual_into(&x, &problem.rhs, &mut r);
    let bnorm = norm2(&problem.rhs);
    let recomputed = if bnorm > 0.0 { norm2(&r) / bnorm } else { norm2(&r) };
    println!(
        "problem={} converged={} iterations={} relative_residual={:e} recomputed_residual={:e} work_units={} setup_time={:.6} solve_time={:.6} levels={:?}{}",
        spec.kind,
        outcome.converged,
        outcome.iterations,
        outcome.final_relative_residual,
        recomputed,
        outcome.work_units,
        setup,
        outcome.wall_time,
        h.level_sizes(),
        outcome.failure.as_ref().map_or(String::new(), |f| format!(" failure={f:?}")),
    );
    if let Some(out) = &ctx.out {
        mtx::write_vector(out, &x)?;
        let mut m = ctx.manifest("solve");
        m.input(&spec.to_string(), 0);
        if let Some(p) = config {
            m.input_file(p)?;
        }
        m.output(out);
        m.finish(out)?;
    }
    if !outcome.converged {
        return Err(CliError::Infeasible("solve did not converge".into()));
    }
    Ok(())
}
