use alloc::vec::Vec;

use super::{CsrMatrix, SparseError};
use crate::math;

fn check(expected: usize, found: usize) -> Result<(), SparseError> {
    if expected == found {
        Ok(())
    } else {
        Err(SparseError::DimensionMismatch { expected, found })
    }
}

pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>, SparseError> {
    check(a.n_cols(), x.len())?;
    let mut y = alloc::vec![0.0; a.n_rows()];
    a.mul_vec_into(x, &mut y);
    Ok(y)
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64, SparseError> {
    check(x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

pub fn norm2(x: &[f64]) -> f64 {
    math::sqrt(dot_unchecked(x, x))
}

/// Returns `a x + y`.
pub fn axpy(a: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>, SparseError> {
    check(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect())
}

#[inline]
pub(crate) fn dot_unchecked(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spmv() {
        let x = [1.5, -2.0, 3.25];
        assert_eq!(spmv(&CsrMatrix::identity(3), &x).unwrap(), x.to_vec());
    }

    #[test]
    fn dot_of_unit_vectors() {
        assert_eq!(dot(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn axpy_arithmetic() {
        assert_eq!(axpy(2.0, &[1.0, 1.0], &[0.0, 1.0]).unwrap(), [2.0, 3.0]);
    }

    #[test]
    fn norm_is_euclidean() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn mismatches_are_errors() {
        assert!(dot(&[1.0], &[1.0, 2.0]).is_err());
        assert!(axpy(1.0, &[1.0], &[]).is_err());
        assert!(spmv(&CsrMatrix::identity(2), &[1.0]).is_err());
    }
}
