//! Fitness measurement, random-sampling datasets and Q₃ balancing.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::amg::{bicgstab_solve, build_hierarchy, SolveFailure, SolveLimits, SolveOutcome};
use crate::clock::Clock;
use crate::space::{ParameterVector, SearchSpace};
use crate::sparse::LinearSystem;
use crate::SolverConfig;

/// What the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitnessMode {
    /// Median wall-clock solve time, setup excluded.
    WallTime,
    /// Deterministic operator-application cost of the solve.
    WorkUnits,
}

impl FitnessMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FitnessMode::WallTime => "wall-time",
            FitnessMode::WorkUnits => "work-units",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "wall-time" | "wall_time" => Some(FitnessMode::WallTime),
            "work-units" | "work_units" => Some(FitnessMode::WorkUnits),
            _ => None,
        }
    }
}

/// Limits and measurement settings for one fitness evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalBudget {
    pub mode: FitnessMode,
    /// Per-solve wall-clock limit in seconds (wall-time mode only).
    pub timeout: Option<f64>,
    /// Per-solve work-unit limit.
    pub work_limit: Option<f64>,
    /// Overrides the configuration's outer iteration cap.
    pub outer_max_iters: Option<usize>,
    /// Timed repeats in wall-time mode; the median is reported.
    pub repeats: usize,
}

/// Multiple of the default configuration's cost used as the cut-off.
pub const TIMEOUT_FACTOR: f64 = 20.0;

impl EvalBudget {
    pub fn new(mode: FitnessMode) -> Self {
        EvalBudget {
            mode,
            timeout: None,
            work_limit: None,
            outer_max_iters: None,
            repeats: 3,
        }
    }

    /// Sets the cut-off to [`TIMEOUT_FACTOR`] times the cost of solving
    /// `problem` with `reference`. Leaves the budget unlimited when that
    /// solve itself fails.
    pub fn calibrated(
        mut self,
        problem: &LinearSystem,
        reference: &SolverConfig,
        clock: &dyn Clock,
    ) -> Self {
        let probe = EvalBudget {
            timeout: None,
            work_limit: None,
            ..self.clone()
        };
        let r = evaluate_config(problem, reference, &probe, clock);
        if r.converged {
            match self.mode {
                FitnessMode::WorkUnits => self.work_limit = Some(TIMEOUT_FACTOR * r.outcome.work_units),
                FitnessMode::WallTime => {
                    self.timeout = Some(TIMEOUT_FACTOR * r.outcome.wall_time.max(1e-6));
                    self.work_limit = Some(TIMEOUT_FACTOR * r.outcome.work_units);
                }
            }
        }
        self
    }
}

/// Measured T(p).
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessResult {
    /// `+∞` whenever `converged` is false.
    pub value: f64,
    pub converged: bool,
    pub outcome: SolveOutcome,
    pub mode: FitnessMode,
}

impl FitnessResult {
    fn infeasible(outcome: SolveOutcome, mode: FitnessMode) -> Self {
        FitnessResult {
            value: f64::INFINITY,
            converged: false,
            outcome,
            mode,
        }
    }
}

/// Fitness of an explicit configuration. Never fails: setup errors,
/// breakdowns, limits and non-convergence all give `+∞`.
pub fn evaluate_config(
    problem: &LinearSystem,
    cfg: &SolverConfig,
    budget: &EvalBudget,
    clock: &dyn Clock,
) -> FitnessResult {
    let mut cfg = cfg.clone();
    if let Some(m) = budget.outer_max_iters {
        cfg.outer_max_iters = m;
    }
    let t0 = clock.now();
    let h = match build_hierarchy(&problem.matrix, &cfg) {
        Ok(h) => h,
        Err(e) => {
            return FitnessResult::infeasible(
                SolveOutcome::failed(SolveFailure::Setup(e.to_string())),
                budget.mode,
            )
        }
    };
    let setup_time = clock.now() - t0;

    let repeats = match budget.mode {
        FitnessMode::WorkUnits => 1,
        FitnessMode::WallTime => budget.repeats.max(1),
    };
    let mut outcomes = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let limits = SolveLimits {
            max_work: budget.work_limit,
            deadline: match budget.mode {
                FitnessMode::WallTime => budget.timeout.map(|t| clock.now() + t),
                FitnessMode::WorkUnits => None,
            },
        };
        let outcome = match bicgstab_solve(&problem.matrix, &problem.rhs, &h, &cfg, &limits, clock) {
            Ok((_, o)) => o,
            Err(e) => SolveOutcome::failed(SolveFailure::Setup(e.to_string())),
        };
        let stop = !outcome.converged;
        outcomes.push(outcome);
        if stop {
            break;
        }
    }

    let mut last = outcomes.last().cloned().expect("at least one solve");
    last.setup_time = setup_time;
    if !last.converged {
        return FitnessResult::infeasible(last, budget.mode);
    }
    if let (FitnessMode::WallTime, Some(t)) = (budget.mode, budget.timeout) {
        if outcomes.iter().any(|o| o.wall_time > t) {
            last.converged = false;
            last.failure = Some(SolveFailure::Timeout);
            return FitnessResult::infeasible(last, budget.mode);
        }
    }
    let value = match budget.mode {
        FitnessMode::WorkUnits => last.work_units,
        FitnessMode::WallTime => {
            let mut times: Vec<f64> = outcomes.iter().map(|o| o.wall_time).collect();
            times.sort_by(f64::total_cmp);
            let median = times[times.len() / 2];
            last.wall_time = median;
            median
        }
    };
    FitnessResult {
        value,
        converged: true,
        outcome: last,
        mode: budget.mode,
    }
}

/// Fitness of a point of `space`; a vector that fails to decode is infeasible.
pub fn evaluate(
    problem: &LinearSystem,
    space: &SearchSpace,
    v: &ParameterVector,
    budget: &EvalBudget,
    clock: &dyn Clock,
) -> FitnessResult {
    match space.decode(v) {
        Ok(cfg) => evaluate_config(problem, &cfg, budget, clock),
        Err(e) => FitnessResult::infeasible(
            SolveOutcome::failed(SolveFailure::Setup(e.to_string())),
            budget.mode,
        ),
    }
}

/// Batch fitness evaluation, in input order.
pub trait FitnessOracle {
    fn evaluate_batch(&mut self, vectors: &[ParameterVector]) -> Vec<FitnessResult>;

    /// Number of distinct solver runs performed so far.
    fn solves(&self) -> usize;
}

/// Serial oracle over one problem, with a per-vector cache.
pub struct SolverOracle<'a> {
    problem: &'a LinearSystem,
    space: &'a SearchSpace,
    budget: EvalBudget,
    clock: &'a dyn Clock,
    cache: BTreeMap<ParameterVector, FitnessResult>,
    solves: usize,
}

impl<'a> SolverOracle<'a> {
    pub fn new(
        problem: &'a LinearSystem,
        space: &'a SearchSpace,
        budget: EvalBudget,
        clock: &'a dyn Clock,
    ) -> Self {
        SolverOracle {
            problem,
            space,
            budget,
            clock,
            cache: BTreeMap::new(),
            solves: 0,
        }
    }

    pub fn budget(&self) -> &EvalBudget {
        &self.budget
    }
}

impl FitnessOracle for SolverOracle<'_> {
    fn evaluate_batch(&mut self, vectors: &[ParameterVector]) -> Vec<FitnessResult> {
        vectors
            .iter()
            .map(|v| {
                if let Some(r) = self.cache.get(v) {
                    return r.clone();
                }
                let r = evaluate(self.problem, self.space, v, &self.budget, self.clock);
                self.solves += 1;
                self.cache.insert(v.clone(), r.clone());
                r
            })
            .collect()
    }

    fn solves(&self) -> usize {
        self.solves
    }
}

/// Processing stage of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// As measured; may contain `+∞`.
    Raw,
    /// Infinite values replaced by Q₃.
    Unbalanced,
    /// Every value above Q₃ (infinite included) replaced by Q₃.
    Balanced,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Unbalanced => "unbalanced",
            Stage::Balanced => "balanced",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Stage::Raw),
            "unbalanced" => Some(Stage::Unbalanced),
            "balanced" => Some(Stage::Balanced),
            _ => None,
        }
    }
}

/// One observation (p, T(p)).
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessSample {
    pub vector: ParameterVector,
    /// Current value; `+∞` for a non-converged raw sample.
    pub value: f64,
    /// Whether the solve converged; kept through balancing.
    pub converged: bool,
}

impl FitnessSample {
    pub fn from_result(vector: ParameterVector, r: &FitnessResult) -> Self {
        FitnessSample {
            vector,
            value: r.value,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("{found} finite samples, at least {needed} required")]
    TooFewFinite { found: usize, needed: usize },
    #[error("validation fraction {0} must lie in (0, 1)")]
    BadFraction(f64),
    #[error("split of {n} samples with fraction {fraction} leaves one side empty")]
    EmptySide { n: usize, fraction: f64 },
    #[error("dataset is {found}, {needed} required")]
    WrongStage { found: &'static str, needed: &'static str },
    #[error("space fingerprint {found:016x} does not match {expected:016x}")]
    FingerprintMismatch { expected: u64, found: u64 },
    #[error("{0}")]
    Invalid(String),
}

/// A collection of samples over one search space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub fingerprint: u64,
    pub samples: Vec<FitnessSample>,
    pub stage: Stage,
    /// Upper quartile of the raw finite values, once filtered.
    pub q3: Option<f64>,
}

/// Linear-interpolation quantile of sorted data (R's type 7).
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = crate::math::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Dataset {
    pub fn raw(fingerprint: u64, samples: Vec<FitnessSample>) -> Self {
        Dataset {
            fingerprint,
            samples,
            stage: Stage::Raw,
            q3: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    /// `1 − converged / total`.
    pub fn non_converged_fraction(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let ok = self.samples.iter().filter(|s| s.converged).count();
        1.0 - ok as f64 / self.samples.len() as f64
    }

    /// Sorted finite values.
    pub fn finite_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .samples
            .iter()
            .map(|s| s.value)
            .filter(|v| v.is_finite())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn upper_quartile(&self) -> Result<f64, DatasetError> {
        if let Some(q) = self.q3 {
            return Ok(q);
        }
        let finite = self.finite_sorted();
        if finite.len() < 4 {
            return Err(DatasetError::TooFewFinite {
                found: finite.len(),
                needed: 4,
            });
        }
        Ok(quantile_type7(&finite, 0.75))
    }

    /// Replaces infinite values by Q₃, leaving finite values untouched.
    pub fn unbalance(&self) -> Result<Dataset, DatasetError> {
        if self.stage != Stage::Raw {
            return Ok(self.clone());
        }
        let q3 = self.upper_quartile()?;
        let mut out = self.clone();
        for s in &mut out.samples {
            if !s.value.is_finite() {
                s.value = q3;
            }
        }
        out.stage = Stage::Unbalanced;
        out.q3 = Some(q3);
        Ok(out)
    }

    /// Clips every value above Q₃ (infinite included) to Q₃. Q₃ is the
    /// upper quartile of the raw finite values; a balanced dataset is
    /// returned unchanged.
    pub fn balance(&self) -> Result<Dataset, DatasetError> {
        if self.stage == Stage::Balanced {
            return Ok(self.clone());
        }
        let q3 = self.upper_quartile()?;
        let mut out = self.clone();
        for s in &mut out.samples {
            if !(s.value <= q3) {
                s.value = q3;
            }
        }
        out.stage = Stage::Balanced;
        out.q3 = Some(q3);
        Ok(out)
    }

    /// Random hold-out split: the validation side gets `round(n · fraction)`
    /// samples of a seeded permutation.
    pub fn split<R: rand::Rng + ?Sized>(
        &self,
        validation_fraction: f64,
        rng: &mut R,
    ) -> Result<(Dataset, Dataset), DatasetError> {
        if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
            return Err(DatasetError::BadFraction(validation_fraction));
        }
        let n = self.samples.len();
        let n_val = crate::math::round(n as f64 * validation_fraction) as usize;
        if n_val == 0 || n_val >= n {
            return Err(DatasetError::EmptySide {
                n,
                fraction: validation_fraction,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let pick = |idx: &[usize]| Dataset {
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            ..self.clone_header()
        };
        let (val, train) = order.split_at(n_val);
        Ok((pick(train), pick(val)))
    }

    fn clone_header(&self) -> Dataset {
        Dataset {
            fingerprint: self.fingerprint,
            samples: Vec::new(),
            stage: self.stage,
            q3: self.q3,
        }
    }

    pub fn check_fingerprint(&self, space: &SearchSpace) -> Result<(), DatasetError> {
        if self.fingerprint != space.fingerprint() {
            return Err(DatasetError::FingerprintMismatch {
                expected: space.fingerprint(),
                found: self.fingerprint,
            });
        }
        Ok(())
    }

    /// Summary line values: N, non-converged fraction, Q₃, min, median.
    pub fn stats(&self) -> DatasetStats {
        let finite = self.finite_sorted();
        let q3 = self.q3.or_else(|| {
            (finite.len() >= 4).then(|| quantile_type7(&finite, 0.75))
        });
        DatasetStats {
            n: self.samples.len(),
            non_converged_fraction: self.non_converged_fraction(),
            q3,
            min: finite.first().copied(),
            median: (!finite.is_empty()).then(|| quantile_type7(&finite, 0.5)),
            max: finite.last().copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub n: usize,
    pub non_converged_fraction: f64,
    pub q3: Option<f64>,
    pub min: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<f64>,
}

impl DatasetStats {
    pub fn summary(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x}"));
        format!(
            "N={} non_converged={:.2}% Q3={} min={} median={} max={}",
            self.n,
            100.0 * self.non_converged_fraction,
            opt(self.q3),
            opt(self.min),
            opt(self.median),
            opt(self.max)
        )
    }
}

/// The `count` i.i.d. uniform vectors a sampling run evaluates, in order.
pub fn sample_vectors<R: rand::Rng + ?Sized>(
    space: &SearchSpace,
    count: usize,
    rng: &mut R,
) -> Vec<ParameterVector> {
    (0..count).map(|_| space.random_vector(rng)).collect()
}

/// Raw dataset of `count` uniform samples evaluated by `oracle`.
pub fn sample_dataset<R: rand::Rng + ?Sized>(
    space: &SearchSpace,
    count: usize,
    rng: &mut R,
    oracle: &mut dyn FitnessOracle,
) -> Dataset {
    let vectors = sample_vectors(space, count, rng);
    let results = oracle.evaluate_batch(&vectors);
    let samples = vectors
        .into_iter()
        .zip(&results)
        .map(|(v, r)| FitnessSample::from_result(v, r))
        .collect();
    Dataset::raw(space.fingerprint(), samples)
}
