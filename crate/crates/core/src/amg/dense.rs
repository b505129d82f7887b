use alloc::vec::Vec;

use crate::sparse::CsrMatrix;

/// Dense LU factorization with partial pivoting, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factors `a`; `None` when a pivot vanishes relative to the largest entry.
    pub fn factor(a: &CsrMatrix) -> Option<DenseLu> {
        let n = a.n_rows();
        let mut lu = a.to_dense();
        let scale = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if n > 0 && (scale == 0.0 || !scale.is_finite()) {
            return None;
        }
        let tiny = 1e-13 * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[k * n + k].abs();
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= tiny {
                return None;
            }
            if piv != k {
                for c in 0..n {
                    lu.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
            }
            let d = lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] / d;
                lu[r * n + k] = f;
                if f != 0.0 {
                    let (top, bottom) = lu.split_at_mut(r * n);
                    let src = &top[k * n + k + 1..k * n + n];
                    let dst = &mut bottom[k + 1..n];
                    for (x, s) in dst.iter_mut().zip(src) {
                        *x -= f * s;
                    }
                }
            }
        }
        Some(DenseLu { n, lu, perm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` into `x`.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = b[self.perm[i]];
            let row = &self.lu[i * n..i * n + i];
            for (l, xv) in row.iter().zip(&x[..i]) {
                s -= l * xv;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for c in i + 1..n {
                s -= self.lu[i * n + c] * x[c];
            }
            x[i] = s / self.lu[i * n + i];
        }
    }
}
