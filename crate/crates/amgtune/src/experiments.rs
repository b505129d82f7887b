//! Building blocks shared by the `bench` experiments and the acceptance
//! suite: synthetic datasets, re-split statistics and batches of seeded
//! tuning runs.

use std::collections::BTreeMap;

use amgtune_core::evaluator::{sample_dataset, FitnessOracle};
use amgtune_core::hes::{self, ModelSurrogate, Surrogate};
use amgtune_core::nn::{self, f_alpha, PredictionMetrics, TrainConfig};
use amgtune_core::space::ParameterSpec;
use amgtune_core::{
    seeded_rng, Dataset, EsConfig, FitnessSample, MlpModel, NullClock, ParameterVector, SearchSpace,
};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `(truth, prediction)` pairs where the prediction is the log-truth plus
/// Gaussian noise of standard deviation `noise`.
pub fn noisy_ranking<R: Rng + ?Sized>(n: usize, noise: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut truth = Vec::with_capacity(n);
    let mut pred = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(rng);
        let e: f64 = StandardNormal.sample(rng);
        truth.push(z.exp());
        pred.push(z + noise * e);
    }
    (truth, pred)
}

/// F_α on `splits` random validation subsets of size `n_v`.
pub fn f_alpha_resplits<R: Rng + ?Sized>(
    truth: &[f64],
    pred: &[f64],
    n_v: usize,
    splits: usize,
    alpha: f64,
    rng: &mut R,
) -> Vec<f64> {
    (0..splits)
        .map(|_| {
            let idx = index::sample(rng, truth.len(), n_v);
            let t: Vec<f64> = idx.iter().map(|i| truth[i]).collect();
            let p: Vec<f64> = idx.iter().map(|i| pred[i]).collect();
            f_alpha(&t, &p, alpha).expect("valid subset")
        })
        .collect()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// An abstract `dims`-parameter space with 10 levels per parameter.
pub fn synthetic_space(dims: usize) -> SearchSpace {
    let specs = (0..dims)
        .map(|j| ParameterSpec::ints(&format!("x{j}"), 0, 9).expect("valid spec"))
        .collect();
    SearchSpace::new(specs, BTreeMap::new()).expect("distinct names")
}

/// Smooth cost over the unit cube, between 1 and about 4.
fn smooth_cost(x: &[f64]) -> f64 {
    let mut s = 1.0;
    for (j, &v) in x.iter().enumerate() {
        let c = 0.3 + 0.05 * j as f64;
        s += (v - c) * (v - c) * (1.0 + 0.1 * j as f64);
    }
    s + 0.3 * (3.0 * x[0] * x[1 % x.len()]).sin()
}

/// Raw dataset over [`synthetic_space`]: a smooth cost everywhere except
/// where the first parameter sits in its top two levels (20% of samples),
/// which gives values a thousand times larger, half of them infinite.
pub fn heavy_tailed_dataset<R: Rng + ?Sized>(space: &SearchSpace, n: usize, rng: &mut R) -> Dataset {
    let samples = (0..n)
        .map(|_| {
            let v = space.random_vector(rng);
            let x = space.normalize(&v);
            let base = smooth_cost(&x);
            let value = if v.indices[0] >= 8 {
                if v.indices[1] >= 5 {
                    f64::INFINITY
                } else {
                    1e3 * base * (1.0 + 10.0 * rng.gen::<f64>())
                }
            } else {
                base
            };
            FitnessSample {
                vector: v,
                value,
                converged: value.is_finite(),
            }
        })
        .collect();
    Dataset::raw(space.fingerprint(), samples)
}

/// Metrics of one trained network on a hold-out set.
#[derive(Debug, Clone)]
pub struct HoldOut {
    pub metrics: PredictionMetrics,
    pub model: MlpModel,
}

/// Trains on `train` and scores on `validation`.
pub fn train_and_score(
    space: &SearchSpace,
    train: &Dataset,
    validation: &Dataset,
    cfg: &TrainConfig,
) -> Result<HoldOut, nn::NnError> {
    let model = nn::train(space, train, cfg)?;
    let metrics = nn::evaluate_model(&model, space, validation)?;
    Ok(HoldOut { metrics, model })
}

/// Both filtered versions of a raw dataset evaluated on one shared split:
/// the same samples are held out, and each network is scored against its
/// own stage's values.
pub fn balancing_comparison(
    space: &SearchSpace,
    raw: &Dataset,
    validation_fraction: f64,
    cfg: &TrainConfig,
) -> Result<(HoldOut, HoldOut), Box<dyn std::error::Error>> {
    let mut rng = seeded_rng(cfg.seed ^ 0x5b11);
    let (train_raw, val_raw) = raw.split(validation_fraction, &mut rng)?;
    let q3 = train_raw.unbalance()?.q3;
    let with_q3 = |d: &Dataset| Dataset { q3, ..d.clone() };
    let (tu, vu) = (with_q3(&train_raw).unbalance()?, with_q3(&val_raw).unbalance()?);
    let (tb, vb) = (with_q3(&train_raw).balance()?, with_q3(&val_raw).balance()?);
    Ok((train_and_score(space, &tu, &vu, cfg)?, train_and_score(space, &tb, &vb, cfg)?))
}

/// Final best fitness of one seeded run per entry of `seeds`.
pub fn tuning_trials(
    space: &SearchSpace,
    template: &EsConfig,
    oracle: &mut dyn FitnessOracle,
    model: Option<&MlpModel>,
    initial: Option<&ParameterVector>,
    seeds: &[u64],
) -> Result<Vec<f64>, hes::EsError> {
    let mut surrogate = match model {
        Some(m) => Some(ModelSurrogate::new(m, space).map_err(|_| hes::EsError::FingerprintMismatch {
            expected: space.fingerprint(),
            found: m.fingerprint,
        })?),
        None => None,
    };
    let mut finals = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cfg = EsConfig {
            seed,
            use_nn_filter: model.is_some(),
            ..template.clone()
        };
        let s = surrogate.as_mut().map(|s| s as &mut dyn Surrogate);
        let trace = hes::run(space, &cfg, oracle, s, initial, &NullClock)?;
        finals.push(trace.best().expect("non-empty trace").fitness.value);
    }
    Ok(finals)
}

/// Distinct per-trial seeds derived from one base seed.
pub fn trial_seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64)
        .map(|i| base.wrapping_mul(1_000_003).wrapping_add(i + 1))
        .collect()
}

/// Samples `n` uniform configurations through `oracle`, balances the
/// result and trains the standard network on all of it.
pub fn train_surrogate(
    space: &SearchSpace,
    oracle: &mut dyn FitnessOracle,
    n: usize,
    seed: u64,
) -> Result<(Dataset, MlpModel), Box<dyn std::error::Error>> {
    let raw = sample_dataset(space, n, &mut seeded_rng(seed), oracle);
    let balanced = raw.balance()?;
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let model = nn::train(space, &balanced, &cfg)?;
    Ok((raw, model))
}
