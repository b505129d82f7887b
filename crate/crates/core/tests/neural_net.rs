use amgtune_core::nn::{
    epochs_for, f_alpha, optimal_alpha, r_squared, Adam, MlpModel, TrainConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn epoch_schedule() {
    assert_eq!(epochs_for(50000), 1050);
    assert_eq!(epochs_for(0), 50);
    assert_eq!(epochs_for(20000), 450);
    assert_eq!(epochs_for(49), 50);
}

fn gradient_check(model: &MlpModel, x: &[f64], y: &[f64], indices: impl Iterator<Item = usize>) {
    let (_, grad) = model.loss_and_gradient(x, y);
    let base = model.parameters();
    let mut probe = model.clone();
    let h = 1e-6;
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
        assert!(
            (grad[i] - numeric).abs() <= 1e-4 * scale,
            "param {i}: analytic {} numeric {numeric}",
            grad[i]
        );
    }
}

fn batch(n: usize, d: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let x = (0..n * d).map(|_| r.gen::<f64>()).collect();
    let y = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
    (x, y)
}

#[test]
fn gradients_match_finite_differences_small_network() {
    let model = MlpModel::new(&[4, 12, 8, 6, 1], 0.25, 0, 5);
    let (x, y) = batch(5, 4, 1);
    gradient_check(&model, &x, &y, 0..model.n_params());
}

#[test]
fn adam_minimizes_a_quadratic() {
    let cfg = TrainConfig::default();
    let mut opt = Adam::new(1, &cfg);
    let mut x = [1.0f64];
    let loss = |x: f64| 0.5 * x * x;
    let mut prev = loss(x[0]);
    let mut reached = None;
    for step in 1..=5000 {
        let g = [x[0]];
        opt.step(&mut x, &g);
        let l = loss(x[0]);
        if step > 10 {
            assert!(l <= prev, "step {step}: {prev} -> {l}");
        }
        if l < 1e-6 && reached.is_none() {
            reached = Some(step);
        }
        prev = l;
    }
    assert!(reached.is_some(), "final loss {prev}");
}

#[test]
fn constant_targets_are_reproduced() {
    let (x, _) = batch(200, 3, 2);
    let y = vec![4.5; 200];
    let mut m = MlpModel::standard(3, 0, 1);
    m.fit(&x, &y, &TrainConfig { epochs: Some(5), ..TrainConfig::default() }).unwrap();
    let pred = m.predict_features(&x, 200);
    assert!(pred.iter().all(|&p| p == 4.5));
    assert_eq!(m.train_mse, 0.0);
}

#[test]
fn learns_a_linear_function_of_one_input() {
    let (x, _) = batch(1000, 4, 3);
    let y: Vec<f64> = (0..1000).map(|i| 3.0 * x[i * 4 + 2] - 1.0).collect();
    let (xt, yt) = (&x[..800 * 4], &y[..800]);
    let (xv, yv) = (&x[800 * 4..], &y[800..]);
    let mut m = MlpModel::standard(4, 0, 9);
    m.fit(xt, yt, &TrainConfig { seed: 9, ..TrainConfig::default() }).unwrap();
    let pred = m.predict_features(xv, 200);
    let r2 = r_squared(yv, &pred).unwrap();
    assert!(r2 >= 0.95, "R² = {r2}");
}

#[test]
fn training_is_bit_reproducible_and_batch_invariant() {
    let (x, y) = batch(300, 5, 4);
    let cfg = TrainConfig { epochs: Some(3), seed: 11, ..TrainConfig::default() };
    let mut a = MlpModel::standard(5, 0, 11);
    let mut b = MlpModel::standard(5, 0, 11);
    a.fit(&x, &y, &cfg).unwrap();
    b.fit(&x, &y, &cfg).unwrap();
    assert_eq!(a, b);
    let all = a.predict_features(&x, 300);
    for i in [0usize, 17, 299] {
        let one = a.predict_features(&x[i * 5..(i + 1) * 5], 1);
        assert_eq!(one[0], all[i]);
    }
    assert!(all.iter().all(|p| p.is_finite()));
}

#[test]
fn random_rankings_have_flat_usefulness() {
    let truth: Vec<f64> = (0..1000).map(|i| i as f64).collect();
    let alphas = [0.01, 0.05, 0.2];
    let mut mean = [0.0; 3];
    let mut r = rng(6);
    let mut permissive = 0;
    for _ in 0..100 {
        let pred: Vec<f64> = (0..1000).map(|_| r.gen()).collect();
        for (k, &a) in alphas.iter().enumerate() {
            mean[k] += f_alpha(&truth, &pred, a).unwrap() / 100.0;
        }
        if optimal_alpha(&truth, &pred, &alphas, 5).unwrap().alpha == 0.2 {
            permissive += 1;
        }
    }
    assert!(permissive >= 95, "{permissive}");
    for (k, &a) in alphas.iter().enumerate() {
        let n_a = (a * 1000.0f64).round();
        let sigma = (a * (1.0 - a) / n_a / 100.0).sqrt();
        assert!((mean[k] - a).abs() <= 3.0 * sigma, "alpha {a}: mean F {}", mean[k]);
    }
}

fn f_spread(n_v: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let pool = 20000;
    let truth: Vec<f64> = (0..pool).map(|_| r.gen::<f64>()).collect();
    let pred: Vec<f64> = truth.iter().map(|t| t + 0.3 * r.gen::<f64>()).collect();
    let mut vals = Vec::new();
    for _ in 0..5 {
        let idx: Vec<usize> = (0..n_v).map(|_| r.gen_range(0..pool)).collect();
        let t: Vec<f64> = idx.iter().map(|&i| truth[i]).collect();
        let p: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
        vals.push(f_alpha(&t, &p, 0.05).unwrap());
    }
    let m = vals.iter().sum::<f64>() / 5.0;
    (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 4.0).sqrt()
}

#[test]
fn f_alpha_spread_shrinks_with_validation_size() {
    for seed in 0..5 {
        assert!(f_spread(5000, seed) < f_spread(200, seed + 100));
    }
}

proptest! {
    #[test]
    fn f_alpha_is_a_rank_statistic(
        pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 20..200),
        alpha in 0.05f64..1.0,
    ) {
        let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let warped: Vec<f64> = pred.iter().map(|p| p.exp()).collect();
        prop_assert_eq!(f_alpha(&truth, &pred, alpha).unwrap(), f_alpha(&truth, &warped, alpha).unwrap());
    }

    #[test]
    fn r_squared_is_affine_invariant(
        pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..100),
        a in 0.1f64..10.0,
        b in -10.0f64..10.0,
    ) {
        let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r1 = r_squared(&truth, &pred);
        prop_assume!(r1.is_ok());
        let t2: Vec<f64> = truth.iter().map(|v| a * v + b).collect();
        let p2: Vec<f64> = pred.iter().map(|v| a * v + b).collect();
        let r2 = r_squared(&t2, &p2).unwrap();
        let r1 = r1.unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-9 * r1.abs().max(1.0));
    }
}

#[test]
fn gradients_match_on_the_standard_network_sample() {
    let model = MlpModel::standard(7, 0, 2);
    let (x, y) = batch(5, 7, 2);
    gradient_check(&model, &x, &y, (0..model.n_params()).step_by(97));
}
