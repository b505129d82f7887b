use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::AmgError;
use crate::sparse::CsrMatrix;

/// Target interval `[λ_min, λ_max]` on the spectrum of `D⁻¹A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl ChebyshevBounds {
    /// `λ_min = fraction · λ_max`.
    pub fn from_fraction(lambda_max: f64, fraction: f64) -> Result<Self, AmgError> {
        let b = ChebyshevBounds {
            lambda_min: fraction * lambda_max,
            lambda_max,
        };
        b.check()?;
        Ok(b)
    }

    fn check(&self) -> Result<(), AmgError> {
        if !(self.lambda_max > 0.0) || !self.lambda_max.is_finite() {
            return Err(AmgError::InvalidBounds(format!(
                "lambda_max = {} is not positive; operator is not SPD-scaled",
                self.lambda_max
            )));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max) {
            return Err(AmgError::InvalidBounds(format!(
                "need 0 < lambda_min < lambda_max, got ({}, {})",
                self.lambda_min, self.lambda_max
            )));
        }
        Ok(())
    }
}

/// Scratch vectors for repeated smoothing at one level.
#[derive(Debug, Clone)]
pub(crate) struct ChebyshevWork {
    r: Vec<f64>,
    d: Vec<f64>,
    t: Vec<f64>,
}

impl ChebyshevWork {
    pub(crate) fn new(n: usize) -> Self {
        ChebyshevWork {
            r: vec![0.0; n],
            d: vec![0.0; n],
            t: vec![0.0; n],
        }
    }
}

/// Degree-`order` Chebyshev iteration for `D⁻¹A x = D⁻¹b` in place on `x`.
/// `x_is_zero` skips the initial residual product. Returns the number of
/// operator applications.
pub(crate) fn smooth_in_place(
    a: &CsrMatrix,
    inv_diag: &[f64],
    bounds: ChebyshevBounds,
    order: usize,
    x: &mut [f64],
    b: &[f64],
    x_is_zero: bool,
    work: &mut ChebyshevWork,
) -> usize {
    let theta = 0.5 * (bounds.lambda_max + bounds.lambda_min);
    let delta = 0.5 * (bounds.lambda_max - bounds.lambda_min);
    let sigma = theta / delta;
    let mut rho = 1.0 / sigma;
    let ChebyshevWork { r, d, t } = work;
    let mut applications = 0;
    if x_is_zero {
        for i in 0..r.len() {
            r[i] = inv_diag[i] * b[i];
        }
    } else {
        a.residual_into(x, b, r);
        applications += 1;
        for i in 0..r.len() {
            r[i] *= inv_diag[i];
        }
    }
    for i in 0..d.len() {
        d[i] = r[i] / theta;
    }
    for k in 0..order {
        for i in 0..x.len() {
            x[i] += d[i];
        }
        if k + 1 == order {
            break;
        }
        a.mul_vec_into(d, t);
        applications += 1;
        for i in 0..r.len() {
            r[i] -= inv_diag[i] * t[i];
        }
        let rho_next = 1.0 / (2.0 * sigma - rho);
        let c1 = rho_next * rho;
        let c2 = 2.0 * rho_next / delta;
        for i in 0..d.len() {
            d[i] = c1 * d[i] + c2 * r[i];
        }
        rho = rho_next;
    }
    applications
}

/// Applies `order` Chebyshev steps to `x` for `A x = b` with bounds on the
/// spectrum of the diagonally scaled operator.
pub fn chebyshev_smooth(
    a: &CsrMatrix,
    bounds: ChebyshevBounds,
    order: usize,
    x: &[f64],
    b: &[f64],
) -> Result<Vec<f64>, AmgError> {
    bounds.check()?;
    if !(1..=4).contains(&order) {
        return Err(AmgError::InvalidBounds(format!("order {order} outside 1..=4")));
    }
    let n = a.n_rows();
    for v in [x.len(), b.len(), a.n_cols()] {
        if v != n {
            return Err(AmgError::DimensionMismatch {
                expected: n,
                found: v,
            });
        }
    }
    let inv_diag = inverse_diagonal(a, 0)?;
    let mut out = x.to_vec();
    let mut work = ChebyshevWork::new(n);
    smooth_in_place(a, &inv_diag, bounds, order, &mut out, b, false, &mut work);
    Ok(out)
}

pub(crate) fn inverse_diagonal(a: &CsrMatrix, level: usize) -> Result<Vec<f64>, AmgError> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d == 0.0 || !d.is_finite() {
                Err(AmgError::ZeroDiagonal { level, row })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// λ_max of `D⁻¹A` from `iters` power iterations started at the ones vector.
const START_SALT: u64 = 0x5eed_1a3b_0000_0000;

/// Power-method estimate of the largest eigenvalue of `D⁻¹A`, started from a
/// fixed pseudo-random vector (a constant start is nearly an eigenvector of
/// the smallest eigenvalue for Laplacian-like operators).
pub(crate) fn estimate_lambda_max(a: &CsrMatrix, inv_diag: &[f64], iters: usize) -> f64 {
    let n = a.n_rows();
    let mut v: Vec<f64> = (0..n as u64)
        .map(|i| 2.0 * super::coarsen::hash_unit(i ^ START_SALT) - 1.0)
        .collect();
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        a.mul_vec_into(&v, &mut w);
        for (wi, di) in w.iter_mut().zip(inv_diag) {
            *wi *= di;
        }
        let norm = crate::sparse::norm2(&w);
        if norm == 0.0 || !norm.is_finite() {
            return norm;
        }
        lambda = norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    lambda
}
