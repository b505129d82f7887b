//! Hybrid (1+λ) evolution strategy: plus selection over soft (local) and
//! random mutations, the random ones optionally pre-filtered by a surrogate.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::clock::Clock;
use crate::evaluator::{FitnessOracle, FitnessResult};
use crate::math;
use crate::nn::{predict, MlpModel, NnError};
use crate::space::{ParameterVector, SearchSpace, SoftMutation};

/// Strategy settings. The default is S5/R5 with α = 0.002 and L = 5000.
#[derive(Debug, Clone, PartialEq)]
pub struct EsConfig {
    /// Soft mutations per generation, λ_S.
    pub lambda_s: usize,
    /// Random mutations per generation, λ_R.
    pub lambda_r: usize,
    /// Fraction of least-predicted trial vectors kept by the filter.
    pub alpha: f64,
    /// Trial pool size L of the filter.
    pub trial_pool: usize,
    pub use_nn_filter: bool,
    pub stall_window: usize,
    pub max_generations: usize,
    /// Relative improvement needed to count as progress.
    pub stall_rel_tol: f64,
    /// Fresh generation-0 attempts when every individual is infeasible.
    pub init_retries: usize,
    pub soft: SoftMutation,
    pub seed: u64,
}

impl Default for EsConfig {
    fn default() -> Self {
        EsConfig {
            lambda_s: 5,
            lambda_r: 5,
            alpha: 0.002,
            trial_pool: 5000,
            use_nn_filter: false,
            stall_window: 5,
            max_generations: 50,
            stall_rel_tol: 1e-12,
            init_retries: 3,
            soft: SoftMutation::default(),
            seed: 0,
        }
    }
}

impl EsConfig {
    /// λ = λ_S + λ_R.
    pub fn lambda(&self) -> usize {
        self.lambda_s + self.lambda_r
    }

    /// L_α = ⌈α L⌉.
    pub fn pool_kept(&self) -> usize {
        math::ceil(self.alpha * self.trial_pool as f64 - 1e-9) as usize
    }

    pub fn validate(&self) -> Result<(), EsError> {
        let bad = |m: String| Err(EsError::InvalidConfig(m));
        if self.lambda() == 0 {
            return bad("lambda_s + lambda_r must be at least 1".into());
        }
        if self.max_generations == 0 {
            return bad("max_generations must be at least 1".into());
        }
        if self.stall_window == 0 {
            return bad("stall_window must be at least 1".into());
        }
        if !(self.soft.p_stay >= 0.0 && self.soft.p_stay <= 1.0) {
            return bad(format!("p_stay {} outside [0, 1]", self.soft.p_stay));
        }
        if self.use_nn_filter {
            if !(self.alpha > 0.0 && self.alpha <= 1.0) {
                return bad(format!("alpha {} outside (0, 1]", self.alpha));
            }
            if self.lambda_r > self.pool_kept() {
                return bad(format!(
                    "lambda_r = {} exceeds the filtered pool ceil(alpha * L) = {}",
                    self.lambda_r,
                    self.pool_kept()
                ));
            }
        }
        Ok(())
    }
}

/// Fitness predictor used to filter random mutations.
pub trait Surrogate {
    /// Fingerprint of the space the predictor was trained on.
    fn fingerprint(&self) -> u64;
    fn predict(&mut self, vectors: &[ParameterVector]) -> Vec<f64>;
}

/// [`Surrogate`] over a trained network with a per-vector memo.
pub struct ModelSurrogate<'a> {
    model: &'a MlpModel,
    space: &'a SearchSpace,
    memo: BTreeMap<ParameterVector, f64>,
}

impl<'a> ModelSurrogate<'a> {
    pub fn new(model: &'a MlpModel, space: &'a SearchSpace) -> Result<Self, NnError> {
        if model.fingerprint != space.fingerprint() {
            return Err(NnError::FingerprintMismatch {
                expected: space.fingerprint(),
                found: model.fingerprint,
            });
        }
        Ok(ModelSurrogate {
            model,
            space,
            memo: BTreeMap::new(),
        })
    }
}

impl Surrogate for ModelSurrogate<'_> {
    fn fingerprint(&self) -> u64 {
        self.model.fingerprint
    }

    fn predict(&mut self, vectors: &[ParameterVector]) -> Vec<f64> {
        let mut seen = BTreeSet::new();
        let missing: Vec<ParameterVector> = vectors
            .iter()
            .filter(|v| !self.memo.contains_key(*v) && seen.insert(*v))
            .cloned()
            .collect();
        if !missing.is_empty() {
            let pred = predict(self.model, self.space, &missing).expect("fingerprint checked");
            for (v, p) in missing.into_iter().zip(pred) {
                self.memo.insert(v, p);
            }
        }
        vectors.iter().map(|v| self.memo[v]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Stall,
    MaxGenerations,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Stall => "stall",
            StopReason::MaxGenerations => "max_generations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub vector: ParameterVector,
    pub fitness: FitnessResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub index: usize,
    /// Individuals evaluated in this generation, in creation order.
    pub individuals: Vec<Individual>,
    /// Best of this generation and the previous best.
    pub best: Individual,
    /// Distinct solver runs so far, this generation included.
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub generations: Vec<Generation>,
    pub evaluations: usize,
    pub stop_reason: Option<StopReason>,
    pub elapsed: f64,
    /// Generation-0 restarts caused by an all-infeasible population.
    pub restarts: usize,
}

impl OptimizationTrace {
    pub fn best_sequence(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best.fitness.value).collect()
    }

    pub fn best(&self) -> Option<&Individual> {
        self.generations.last().map(|g| &g.best)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EsError {
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error("surrogate fingerprint {found:016x} does not match space {expected:016x}")]
    FingerprintMismatch { expected: u64, found: u64 },
    #[error("no feasible configuration found")]
    Infeasible { trace: Box<OptimizationTrace> },
}

/// Stop rule over the best-fitness history `best[0..=l]`: stall when the
/// last `window` generations brought no strict relative improvement, hard
/// stop after `max_generations` generations.
pub fn stopping(
    best: &[f64],
    stall_window: usize,
    max_generations: usize,
    rel_tol: f64,
) -> Option<StopReason> {
    let l = best.len().checked_sub(1)?;
    if l >= stall_window {
        let old = best[l - stall_window];
        let improved = best[l] < old - rel_tol * old.abs();
        if !improved {
            return Some(StopReason::Stall);
        }
    }
    if best.len() >= max_generations {
        return Some(StopReason::MaxGenerations);
    }
    None
}

/// λ_R new vectors: uniform, or drawn without replacement from the
/// ⌈αL⌉ least-predicted of L uniform trial vectors.
pub fn random_mutation<'s, R: rand::Rng + ?Sized>(
    space: &SearchSpace,
    cfg: &EsConfig,
    surrogate: Option<&mut (dyn Surrogate + 's)>,
    rng: &mut R,
) -> Vec<ParameterVector> {
    match surrogate {
        Some(s) if cfg.use_nn_filter => {
            let trial: Vec<ParameterVector> =
                (0..cfg.trial_pool).map(|_| space.random_vector(rng)).collect();
            let pred = s.predict(&trial);
            let mut order: Vec<usize> = (0..trial.len()).collect();
            order.sort_by(|&a, &b| pred[a].total_cmp(&pred[b]));
            order.truncate(cfg.pool_kept().min(trial.len()));
            let take = cfg.lambda_r.min(order.len());
            rand::seq::index::sample(rng, order.len(), take)
                .into_iter()
                .map(|k| trial[order[k]].clone())
                .collect()
        }
        _ => (0..cfg.lambda_r).map(|_| space.random_vector(rng)).collect(),
    }
}

/// Soft-mutated copy of `parent`.
pub fn soft_offspring<R: rand::Rng + ?Sized>(
    space: &SearchSpace,
    parent: &ParameterVector,
    cfg: &EsConfig,
    rng: &mut R,
) -> ParameterVector {
    space.soft_mutate(parent, rng, &cfg.soft)
}

/// Earliest individual of minimal fitness; `None` for an empty list.
fn select(individuals: &[Individual]) -> Option<&Individual> {
    let mut best: Option<&Individual> = None;
    for ind in individuals {
        if best.map_or(true, |b| ind.fitness.value < b.fitness.value) {
            best = Some(ind);
        }
    }
    best
}

fn evaluate(oracle: &mut dyn FitnessOracle, vectors: Vec<ParameterVector>) -> Vec<Individual> {
    let results = oracle.evaluate_batch(&vectors);
    vectors
        .into_iter()
        .zip(results)
        .map(|(vector, fitness)| Individual { vector, fitness })
        .collect()
}

/// Runs the strategy to its stop rule. `initial`, when on the grid, is
/// placed first in generation 0.
pub fn run<'s>(
    space: &SearchSpace,
    cfg: &EsConfig,
    oracle: &mut dyn FitnessOracle,
    mut surrogate: Option<&mut (dyn Surrogate + 's)>,
    initial: Option<&ParameterVector>,
    clock: &dyn Clock,
) -> Result<OptimizationTrace, EsError> {
    cfg.validate()?;
    if cfg.use_nn_filter {
        match surrogate.as_deref() {
            None => {
                return Err(EsError::InvalidConfig(
                    "the random-mutation filter requires a model".into(),
                ))
            }
            Some(s) if s.fingerprint() != space.fingerprint() => {
                return Err(EsError::FingerprintMismatch {
                    expected: space.fingerprint(),
                    found: s.fingerprint(),
                })
            }
            _ => {}
        }
    }
    let start = clock.now();
    let solves0 = oracle.solves();
    let mut rng = crate::seeded_rng(cfg.seed);
    let mut trace = OptimizationTrace {
        generations: Vec::new(),
        evaluations: 0,
        stop_reason: None,
        elapsed: 0.0,
        restarts: 0,
    };

    let initial = initial.filter(|v| space.check(v).is_ok());
    let mut gen0 = None;
    for attempt in 0..=cfg.init_retries {
        let mut vectors = Vec::with_capacity(cfg.lambda() + 1);
        if attempt == 0 {
            if let Some(v) = initial {
                vectors.push(v.clone());
            }
        }
        while vectors.len() < cfg.lambda() + 1 {
            vectors.push(space.random_vector(&mut rng));
        }
        let individuals = evaluate(oracle, vectors);
        let best = select(&individuals).expect("non-empty").clone();
        if best.fitness.value.is_finite() {
            gen0 = Some((individuals, best));
            break;
        }
        trace.restarts = attempt + 1;
        trace.generations = alloc::vec![Generation {
            index: 0,
            individuals,
            best,
            evaluations: oracle.solves() - solves0,
        }];
    }
    let Some((individuals, best)) = gen0 else {
        trace.restarts = cfg.init_retries;
        trace.evaluations = oracle.solves() - solves0;
        trace.elapsed = clock.now() - start;
        return Err(EsError::Infeasible {
            trace: Box::new(trace),
        });
    };
    trace.generations = alloc::vec![Generation {
        index: 0,
        individuals,
        best,
        evaluations: oracle.solves() - solves0,
    }];

    let singleton = space.cardinality_u64() == Some(1);
    loop {
        let history = trace.best_sequence();
        let stop = if singleton {
            Some(StopReason::Stall)
        } else {
            stopping(&history, cfg.stall_window, cfg.max_generations, cfg.stall_rel_tol)
        };
        if let Some(reason) = stop {
            trace.stop_reason = Some(reason);
            break;
        }
        let parent = trace.generations.last().unwrap().best.clone();
        let mut vectors: Vec<ParameterVector> = (0..cfg.lambda_s)
            .map(|_| soft_offspring(space, &parent.vector, cfg, &mut rng))
            .collect();
        vectors.extend(random_mutation(space, cfg, surrogate.as_deref_mut(), &mut rng));
        let individuals = evaluate(oracle, vectors);
        let mut best = parent;
        if let Some(challenger) = select(&individuals) {
            if challenger.fitness.value < best.fitness.value {
                best = challenger.clone();
            }
        }
        trace.generations.push(Generation {
            index: trace.generations.len(),
            individuals,
            best,
            evaluations: oracle.solves() - solves0,
        });
    }
    trace.evaluations = oracle.solves() - solves0;
    trace.elapsed = clock.now() - start;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopping_examples() {
        assert_eq!(stopping(&[5.0; 6], 5, 50, 1e-12), Some(StopReason::Stall));
        assert_eq!(stopping(&[5.0; 5], 5, 50, 1e-12), None);
        let dec: Vec<f64> = (0..50).map(|i| 100.0 - i as f64).collect();
        assert_eq!(stopping(&dec, 5, 50, 1e-12), Some(StopReason::MaxGenerations));
        assert_eq!(stopping(&dec[..49], 5, 50, 1e-12), None);
        // improvement at generation 4 of the window
        assert_eq!(stopping(&[5.0, 5.0, 5.0, 5.0, 4.0, 4.0], 5, 50, 1e-12), None);
        assert_eq!(stopping(&[], 5, 50, 1e-12), None);
    }

    #[test]
    fn pool_arithmetic() {
        let cfg = EsConfig {
            use_nn_filter: true,
            ..EsConfig::default()
        };
        assert_eq!(cfg.pool_kept(), 10);
        cfg.validate().unwrap();
        let bad = EsConfig {
            lambda_r: 11,
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        let empty = EsConfig {
            lambda_s: 0,
            lambda_r: 0,
            ..EsConfig::default()
        };
        assert!(empty.validate().is_err());
    }
}
