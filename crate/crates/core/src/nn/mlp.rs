use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::NnError;
use crate::math;

/// Hidden widths of the regression network.
pub const HIDDEN: [usize; 3] = [512, 256, 128];
pub const DROPOUT: f64 = 0.25;
pub const BATCH_SIZE: usize = 128;

/// `floor(n_train / 50) + 50`.
pub fn epochs_for(n_train: usize) -> usize {
    n_train / 50 + 50
}

/// ADAM hyper-parameters and the mini-batch schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    /// `None` selects [`epochs_for`] of the training-set size.
    pub epochs: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: BATCH_SIZE,
            epochs: None,
            seed: 0,
        }
    }
}

/// ADAM state over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize, cfg: &TrainConfig) -> Self {
        Adam {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.step_offset(0, params, grads);
        self.advance();
    }

    fn advance(&mut self) {
        self.t += 1;
    }

    /// Updates `params`, which occupy `offset..offset + len` of the flat state.
    /// The step counter is advanced separately by [`advance`](Self::advance).
    fn step_offset(&mut self, offset: usize, params: &mut [f64], grads: &[f64]) {
        let t = self.t + 1;
        let c1 = 1.0 - math::powi(self.beta1, t);
        let c2 = 1.0 - math::powi(self.beta2, t);
        let m = &mut self.m[offset..offset + params.len()];
        let v = &mut self.v[offset..offset + params.len()];
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            params[i] -= self.lr * m_hat / (math::sqrt(v_hat) + self.eps);
        }
    }
}

/// One fully connected layer; `w` is `inputs × outputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// `c = beta·c + op(a)·op(b)` for row-major operands, `op(a)` being `m × k`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the stride pairs describe `m×k`, `k×n` and `m×n` views that lie
    // inside the slices checked above, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z))
}

/// Fully connected regression network: sigmoid hidden layers with inverted
/// dropout, linear scalar output, targets standardized internally.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Dense>,
    pub dropout: f64,
    /// Fingerprint of the search space the inputs encode.
    pub fingerprint: u64,
    pub target_mean: f64,
    /// Standard deviation of the training targets; 0 for constant targets,
    /// in which case predictions equal the mean.
    pub target_std: f64,
    /// Mean squared error on the training set after the last epoch, in
    /// target units.
    pub train_mse: f64,
}

/// Activations kept for the backward pass.
struct Tape {
    /// Layer inputs; `acts[0]` is the batch itself.
    acts: Vec<Vec<f64>>,
    /// Sigmoid outputs before dropout, per hidden layer.
    sig: Vec<Vec<f64>>,
    /// Inverted-dropout multipliers per hidden layer (empty when disabled).
    masks: Vec<Vec<f64>>,
    out: Vec<f64>,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new(widths: &[usize], dropout: f64, fingerprint: u64, seed: u64) -> Self {
        assert!(widths.len() >= 2 && *widths.last().unwrap() == 1);
        let mut rng = crate::seeded_rng(seed);
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fi, fo) = (w[0], w[1]);
                let limit = math::sqrt(6.0 / (fi + fo) as f64);
                Dense {
                    inputs: fi,
                    outputs: fo,
                    w: (0..fi * fo).map(|_| rng.gen_range(-limit..limit)).collect(),
                    b: vec![0.0; fo],
                }
            })
            .collect();
        MlpModel {
            layers,
            dropout,
            fingerprint,
            target_mean: 0.0,
            target_std: 1.0,
            train_mse: 0.0,
        }
    }

    /// The standard `[n_inputs, 512, 256, 128, 1]` network.
    pub fn standard(n_inputs: usize, fingerprint: u64, seed: u64) -> Self {
        let mut widths = vec![n_inputs];
        widths.extend_from_slice(&HIDDEN);
        widths.push(1);
        Self::new(&widths, DROPOUT, fingerprint, seed)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.layers.iter().map(|l| l.inputs).collect();
        w.push(self.layers.last().map_or(0, |l| l.outputs));
        w
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// All weights then biases, layer by layer.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            p.extend_from_slice(&l.w);
            p.extend_from_slice(&l.b);
        }
        p
    }

    pub fn set_parameters(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params());
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.w.len();
            l.w.copy_from_slice(&p[at..at + nw]);
            at += nw;
            let nb = l.b.len();
            l.b.copy_from_slice(&p[at..at + nb]);
            at += nb;
        }
    }

    fn forward(&self, x: &[f64], rows: usize, mut rng: Option<&mut crate::Rng>) -> Tape {
        let n_layers = self.layers.len();
        let mut tape = Tape {
            acts: vec![x.to_vec()],
            sig: Vec::new(),
            masks: Vec::new(),
            out: Vec::new(),
        };
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; rows * layer.outputs];
            for r in 0..rows {
                z[r * layer.outputs..(r + 1) * layer.outputs].copy_from_slice(&layer.b);
            }
            gemm(
                rows,
                layer.inputs,
                layer.outputs,
                &tape.acts[li],
                false,
                &layer.w,
                false,
                1.0,
                &mut z,
            );
            if li + 1 == n_layers {
                tape.out = z;
                break;
            }
            z.iter_mut().for_each(|v| *v = sigmoid(*v));
            let mut a = z.clone();
            if let Some(rng) = rng.as_deref_mut() {
                if self.dropout > 0.0 {
                    let keep = 1.0 / (1.0 - self.dropout);
                    let mask: Vec<f64> = (0..a.len())
                        .map(|_| if rng.gen::<f64>() < self.dropout { 0.0 } else { keep })
                        .collect();
                    a.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
                    tape.masks.push(mask);
                }
            }
            tape.sig.push(z);
            tape.acts.push(a);
        }
        tape
    }

    /// Gradients of `mean((out − y)²)` with respect to [`parameters`](Self::parameters).
    fn backward(&self, tape: &Tape, y: &[f64], rows: usize) -> (f64, Vec<f64>) {
        let n_layers = self.layers.len();
        let mut loss = 0.0;
        let mut delta: Vec<f64> = tape
            .out
            .iter()
            .zip(y)
            .map(|(o, t)| {
                let e = o - t;
                loss += e * e;
                2.0 * e / rows as f64
            })
            .collect();
        loss /= rows as f64;

        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); n_layers];
        for li in (0..n_layers).rev() {
            let layer = &self.layers[li];
            let mut g = vec![0.0; layer.w.len() + layer.b.len()];
            let (gw, gb) = g.split_at_mut(layer.w.len());
            gemm(
                layer.inputs,
                rows,
                layer.outputs,
                &tape.acts[li],
                true,
                &delta,
                false,
                0.0,
                gw,
            );
            for r in 0..rows {
                for (j, gbj) in gb.iter_mut().enumerate() {
                    *gbj += delta[r * layer.outputs + j];
                }
            }
            grads[li] = g;
            if li == 0 {
                break;
            }
            let mut prev = vec![0.0; rows * layer.inputs];
            gemm(
                rows,
                layer.outputs,
                layer.inputs,
                &delta,
                false,
                &layer.w,
                true,
                0.0,
                &mut prev,
            );
            let s = &tape.sig[li - 1];
            for (i, d) in prev.iter_mut().enumerate() {
                if let Some(mask) = tape.masks.get(li - 1) {
                    *d *= mask[i];
                }
                *d *= s[i] * (1.0 - s[i]);
            }
            delta = prev;
        }
        (loss, grads.concat())
    }

    /// MSE of the raw network output against `y`, and its gradient, with
    /// dropout disabled. `x` is `rows × n_inputs` row-major.
    pub fn loss_and_gradient(&self, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let rows = y.len();
        let tape = self.forward(x, rows, None);
        self.backward(&tape, y, rows)
    }

    /// Raw network output (standardized units), dropout disabled.
    pub fn forward_raw(&self, x: &[f64], rows: usize) -> Vec<f64> {
        self.forward(x, rows, None).out
    }

    /// Predictions in target units for `rows` feature rows.
    pub fn predict_features(&self, x: &[f64], rows: usize) -> Vec<f64> {
        let out = self.forward_raw(x, rows);
        out.into_iter()
            .map(|o| self.target_mean + self.target_std * o)
            .collect()
    }

    /// Mini-batch ADAM on standardized targets. Returns the per-epoch
    /// training loss in standardized units (computed with dropout active).
    pub fn fit(&mut self, x: &[f64], y: &[f64], cfg: &TrainConfig) -> Result<Vec<f64>, NnError> {
        let n = y.len();
        let d = self.n_inputs();
        if n == 0 {
            return Err(NnError::Empty);
        }
        if x.len() != n * d {
            return Err(NnError::Shape {
                expected: n * d,
                found: x.len(),
            });
        }
        if y.iter().chain(x).any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite);
        }
        let mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let std = math::sqrt(var);
        let scale = if std > 0.0 { std } else { 1.0 };
        let ys: Vec<f64> = y.iter().map(|v| (v - mean) / scale).collect();
        self.target_mean = mean;
        self.target_std = std;

        let epochs = cfg.epochs.unwrap_or_else(|| epochs_for(n)).max(1);
        let batch = cfg.batch_size.max(1);
        let mut rng = crate::seeded_rng(cfg.seed);
        let mut opt = Adam::new(self.n_params(), cfg);
        let mut order: Vec<usize> = (0..n).collect();
        let mut history = Vec::with_capacity(epochs);
        let mut bx = Vec::with_capacity(batch * d);
        let mut by = Vec::with_capacity(batch);
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch) {
                bx.clear();
                by.clear();
                for &i in chunk {
                    bx.extend_from_slice(&x[i * d..(i + 1) * d]);
                    by.push(ys[i]);
                }
                let tape = self.forward(&bx, chunk.len(), Some(&mut rng));
                let (loss, grads) = self.backward(&tape, &by, chunk.len());
                epoch_loss += loss * chunk.len() as f64;
                let mut at = 0;
                for l in &mut self.layers {
                    let nw = l.w.len();
                    opt.step_offset(at, &mut l.w, &grads[at..at + nw]);
                    at += nw;
                    let nb = l.b.len();
                    opt.step_offset(at, &mut l.b, &grads[at..at + nb]);
                    at += nb;
                }
                opt.advance();
            }
            history.push(epoch_loss / n as f64);
        }
        let pred = self.predict_features(x, n);
        self.train_mse = super::metrics::mse(y, &pred);
        Ok(history)
    }
}
