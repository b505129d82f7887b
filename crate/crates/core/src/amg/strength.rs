use alloc::vec;
use alloc::vec::Vec;

use crate::sparse::CsrMatrix;

/// Strong-dependence graph: `depends(i)` lists the points `i` strongly
/// depends on (S_i), `influences(i)` the points strongly depending on `i` (Sᵀ_i).
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    t_offsets: Vec<usize>,
    t_targets: Vec<usize>,
}

impl StrengthGraph {
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn depends(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn influences(&self, i: usize) -> &[usize] {
        &self.t_targets[self.t_offsets[i]..self.t_offsets[i + 1]]
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len()
    }
}

/// Classical strength of connection. Off-diagonal `j` is strong for row `i`
/// when `-sgn(a_ii) a_ij > 0` and at least `theta` times the row maximum of
/// that quantity. When `max_row_sum < 1`, rows with `|Σ_j a_ij| > max_row_sum
/// |a_ii|` get no strong connections at all.
pub fn strength_graph(a: &CsrMatrix, theta: f64, max_row_sum: f64) -> StrengthGraph {
    let n = a.n_rows();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(a.nnz());
    offsets.push(0);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        let diag = a.get(i, i);
        let sgn = if diag < 0.0 { -1.0 } else { 1.0 };
        let weak_row = max_row_sum < 1.0 && {
            let row_sum: f64 = vals.iter().sum();
            row_sum.abs() > max_row_sum * diag.abs()
        };
        if !weak_row {
            let row_max = cols
                .iter()
                .zip(vals)
                .filter(|(&c, _)| c != i)
                .map(|(_, &v)| -sgn * v)
                .fold(0.0f64, f64::max);
            if row_max > 0.0 {
                let cut = theta * row_max;
                for (&c, &v) in cols.iter().zip(vals) {
                    let s = -sgn * v;
                    if c != i && s > 0.0 && s >= cut {
                        targets.push(c);
                    }
                }
            }
        }
        offsets.push(targets.len());
    }

    let mut t_offsets = vec![0usize; n + 1];
    for &t in &targets {
        t_offsets[t + 1] += 1;
    }
    for i in 0..n {
        t_offsets[i + 1] += t_offsets[i];
    }
    let mut next = t_offsets.clone();
    let mut t_targets = vec![0usize; targets.len()];
    for i in 0..n {
        for &t in &targets[offsets[i]..offsets[i + 1]] {
            t_targets[next[t]] = i;
            next[t] += 1;
        }
    }
    StrengthGraph {
        offsets,
        targets,
        t_offsets,
        t_targets,
    }
}
