use alloc::vec::Vec;

use super::NnError;

pub fn mse(truth: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(truth.len(), pred.len());
    if truth.is_empty() {
        return 0.0;
    }
    let s: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    s / truth.len() as f64
}

/// Coefficient of determination `1 − SS_R / SS_T`.
pub fn r_squared(truth: &[f64], pred: &[f64]) -> Result<f64, NnError> {
    if truth.len() != pred.len() {
        return Err(NnError::Shape {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.len() < 2 {
        return Err(NnError::TooFew(truth.len()));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_t: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_t == 0.0 {
        return Err(NnError::ConstantTruth);
    }
    let ss_r: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    Ok(1.0 - ss_r / ss_t)
}

/// `floor(alpha · n)`, tolerant of `alpha` given as a rounded ratio.
pub fn n_alpha(alpha: f64, n: usize) -> usize {
    crate::math::floor(alpha * n as f64 + 1e-9) as usize
}

/// Indices of the `k` smallest values; ties go to the lower index.
pub fn smallest_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx.truncate(k);
    idx
}

/// Share of the `N_α` least predicted samples that are among the `N_α`
/// samples with the least true values.
pub fn f_alpha(truth: &[f64], pred: &[f64], alpha: f64) -> Result<f64, NnError> {
    if truth.len() != pred.len() {
        return Err(NnError::Shape {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(NnError::BadAlpha(alpha));
    }
    let k = n_alpha(alpha, truth.len());
    if k == 0 {
        return Err(NnError::EmptyAlphaSet {
            alpha,
            n: truth.len(),
        });
    }
    let mut best_truth = alloc::vec![false; truth.len()];
    for i in smallest_indices(truth, k) {
        best_truth[i] = true;
    }
    let hits = smallest_indices(pred, k)
        .into_iter()
        .filter(|&i| best_truth[i])
        .count();
    Ok(hits as f64 / k as f64)
}

/// Choice of the filtering fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub f_alpha: f64,
    /// No candidate met `F_α ≥ 1/λ_R`; the largest candidate was returned.
    pub constraint_violated: bool,
}

/// Maximizes `F_α / α` over candidates with `F_α ≥ 1/λ_R`.
pub fn optimal_alpha(
    truth: &[f64],
    pred: &[f64],
    candidates: &[f64],
    lambda_r: usize,
) -> Result<AlphaChoice, NnError> {
    if candidates.is_empty() {
        return Err(NnError::NoCandidates);
    }
    let floor = 1.0 / lambda_r.max(1) as f64;
    let mut best: Option<(f64, AlphaChoice)> = None;
    let mut largest: Option<AlphaChoice> = None;
    for &alpha in candidates {
        let fa = match f_alpha(truth, pred, alpha) {
            Ok(v) => v,
            Err(NnError::EmptyAlphaSet { .. }) => continue,
            Err(e) => return Err(e),
        };
        let choice = AlphaChoice {
            alpha,
            f_alpha: fa,
            constraint_violated: false,
        };
        if largest.map_or(true, |l| alpha > l.alpha) {
            largest = Some(choice);
        }
        if fa >= floor {
            let score = fa / alpha;
            if best.map_or(true, |(s, _)| score > s) {
                best = Some((score, choice));
            }
        }
    }
    match (best, largest) {
        (Some((_, c)), _) => Ok(c),
        (None, Some(l)) => Ok(AlphaChoice {
            constraint_violated: true,
            ..l
        }),
        (None, None) => Err(NnError::NoCandidates),
    }
}

/// Hold-out prediction quality.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMetrics {
    pub mse: f64,
    /// `None` when the truth is constant.
    pub r_squared: Option<f64>,
    /// `(α, F_α)` for every α with a non-empty least-values set.
    pub f_alpha: Vec<(f64, f64)>,
}

/// Fractions reported by [`assess`].
pub const REPORT_ALPHAS: [f64; 4] = [0.002, 0.01, 0.05, 0.2];

/// Below this F_0.05 a trained network is flagged as a weak filter.
pub const F005_WARNING: f64 = 0.3;

pub fn assess(truth: &[f64], pred: &[f64]) -> PredictionMetrics {
    PredictionMetrics {
        mse: mse(truth, pred),
        r_squared: r_squared(truth, pred).ok(),
        f_alpha: REPORT_ALPHAS
            .iter()
            .filter_map(|&a| f_alpha(truth, pred, a).ok().map(|f| (a, f)))
            .collect(),
    }
}

impl PredictionMetrics {
    pub fn f(&self, alpha: f64) -> Option<f64> {
        self.f_alpha
            .iter()
            .find(|(a, _)| (a - alpha).abs() < 1e-12)
            .map(|&(_, f)| f)
    }

    /// True when F_0.05 is known and below [`F005_WARNING`].
    pub fn weak_filter(&self) -> bool {
        self.f(0.05).is_some_and(|f| f < F005_WARNING)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn r_squared_reference_points() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(r_squared(&t, &t).unwrap(), 1.0);
        assert_eq!(r_squared(&t, &[3.0; 5]).unwrap(), 0.0);
        let anti = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!(r_squared(&t, &anti).unwrap() < 0.0);
        assert!(matches!(r_squared(&[2.0, 2.0], &[1.0, 3.0]), Err(NnError::ConstantTruth)));
    }

    #[test]
    fn figure_style_example() {
        // 11 validation points, least-4 sets overlapping in 3 indices.
        let truth = [0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 1.00, 1.10];
        let pred = [0.15, 0.25, 0.35, 0.90, 0.55, 0.30, 0.75, 0.85, 0.95, 1.05, 1.15];
        assert_eq!(f_alpha(&truth, &pred, 4.0 / 11.0).unwrap(), 0.75);
    }

    #[test]
    fn f_alpha_edges() {
        let truth: Vec<f64> = (0..100).map(|i| (i * 37 % 100) as f64).collect();
        let pred: Vec<f64> = (0..100).map(|i| (i * 11 % 100) as f64).collect();
        assert_eq!(f_alpha(&truth, &truth, 0.05).unwrap(), 1.0);
        assert_eq!(f_alpha(&truth, &pred, 1.0).unwrap(), 1.0);
        assert!(f_alpha(&truth, &pred, 0.001).is_err());
        assert!(f_alpha(&truth, &pred, 0.0).is_err());
    }

    #[test]
    fn perfect_predictor_prefers_smallest_alpha() {
        let truth: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let c = optimal_alpha(&truth, &truth, &[0.002, 0.05, 0.2], 5).unwrap();
        assert_eq!(c.alpha, 0.002);
        assert!(!c.constraint_violated);
    }

    #[test]
    fn unusable_predictor_falls_back_to_largest() {
        let truth: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let anti: Vec<f64> = truth.iter().map(|v| -v).collect();
        let c = optimal_alpha(&truth, &anti, &[0.002, 0.05, 0.2], 5).unwrap();
        assert_eq!(c.alpha, 0.2);
        assert!(c.constraint_violated);
        assert!(optimal_alpha(&truth, &anti, &[], 5).is_err());
    }

    #[test]
    fn mse_basic() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 4.0]), 2.0);
        assert_eq!(mse(&[], &[]), 0.0);
        let m = assess(&vec![1.0; 3], &vec![1.0; 3]);
        assert_eq!(m.r_squared, None);
    }
}
