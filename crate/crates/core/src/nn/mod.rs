//! Regression surrogate for the fitness: a fully connected network over
//! normalized parameter indices, and the metrics that judge it as a filter.

mod metrics;
mod mlp;

pub use metrics::{
    assess, f_alpha, mse, n_alpha, optimal_alpha, r_squared, smallest_indices, AlphaChoice,
    PredictionMetrics, F005_WARNING, REPORT_ALPHAS,
};
pub use mlp::{epochs_for, Adam, Dense, MlpModel, TrainConfig, BATCH_SIZE, DROPOUT, HIDDEN};

use alloc::vec::Vec;

use crate::evaluator::{Dataset, Stage};
use crate::space::{ParameterVector, SearchSpace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("expected {expected} values, got {found}")]
    Shape { expected: usize, found: usize },
    #[error("empty training set")]
    Empty,
    #[error("non-finite input or target")]
    NonFinite,
    #[error("raw datasets must be unbalanced or balanced before training")]
    RawDataset,
    #[error("model fingerprint {found:016x} does not match space {expected:016x}")]
    FingerprintMismatch { expected: u64, found: u64 },
    #[error("at least 2 values are required, got {0}")]
    TooFew(usize),
    #[error("truth values are all equal")]
    ConstantTruth,
    #[error("alpha {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("alpha {alpha} selects no sample out of {n}")]
    EmptyAlphaSet { alpha: f64, n: usize },
    #[error("no usable alpha candidate")]
    NoCandidates,
}

/// Row-major normalized feature matrix of `vectors`.
pub fn features(space: &SearchSpace, vectors: &[ParameterVector]) -> Vec<f64> {
    let mut x = Vec::with_capacity(vectors.len() * space.dims());
    for v in vectors {
        x.extend(space.normalize(v));
    }
    x
}

/// Trains the standard network on a filtered dataset over `space`.
pub fn train(space: &SearchSpace, data: &Dataset, cfg: &TrainConfig) -> Result<MlpModel, NnError> {
    if data.stage == Stage::Raw {
        return Err(NnError::RawDataset);
    }
    if data.fingerprint != space.fingerprint() {
        return Err(NnError::FingerprintMismatch {
            expected: space.fingerprint(),
            found: data.fingerprint,
        });
    }
    let vectors: Vec<ParameterVector> = data.samples.iter().map(|s| s.vector.clone()).collect();
    let x = features(space, &vectors);
    let y = data.values();
    let mut model = MlpModel::standard(space.dims(), space.fingerprint(), cfg.seed);
    model.fit(&x, &y, cfg)?;
    Ok(model)
}

/// Predicted fitness of each vector, dropout disabled.
pub fn predict(
    model: &MlpModel,
    space: &SearchSpace,
    vectors: &[ParameterVector],
) -> Result<Vec<f64>, NnError> {
    if model.fingerprint != space.fingerprint() {
        return Err(NnError::FingerprintMismatch {
            expected: space.fingerprint(),
            found: model.fingerprint,
        });
    }
    if model.n_inputs() != space.dims() {
        return Err(NnError::Shape {
            expected: space.dims(),
            found: model.n_inputs(),
        });
    }
    Ok(model.predict_features(&features(space, vectors), vectors.len()))
}

/// Hold-out metrics of `model` on a dataset over `space`.
pub fn evaluate_model(
    model: &MlpModel,
    space: &SearchSpace,
    data: &Dataset,
) -> Result<PredictionMetrics, NnError> {
    let vectors: Vec<ParameterVector> = data.samples.iter().map(|s| s.vector.clone()).collect();
    let pred = predict(model, space, &vectors)?;
    Ok(assess(&data.values(), &pred))
}
