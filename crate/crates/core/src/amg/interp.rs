use alloc::vec;
use alloc::vec::Vec;

use super::coarsen::PointKind;
use super::strength::StrengthGraph;
use super::Interpolation;
use crate::sparse::CsrMatrix;

const NONE: usize = usize::MAX;

/// Builds the prolongation `P` (fine × coarse). C points inject; F points
/// interpolate from their strong C neighbors, then the row is truncated.
pub fn build_interpolation(
    a: &CsrMatrix,
    s: &StrengthGraph,
    split: &[PointKind],
    kind: Interpolation,
    trunc_factor: f64,
    p_max_elements: usize,
) -> CsrMatrix {
    let n = a.n_rows();
    let mut cmap = vec![NONE; n];
    let mut n_c = 0;
    for (i, &k) in split.iter().enumerate() {
        if k == PointKind::Coarse {
            cmap[i] = n_c;
            n_c += 1;
        }
    }

    // marker[j] = slot of j in the current row's C_i, NONE otherwise
    let mut marker = vec![NONE; n];
    let mut strong = vec![false; n];
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_offsets.push(0);
    let mut ci: Vec<usize> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    let mut entries: Vec<(usize, f64)> = Vec::new();

    for i in 0..n {
        if split[i] == PointKind::Coarse {
            cols.push(cmap[i]);
            vals.push(1.0);
            row_offsets.push(cols.len());
            continue;
        }
        ci.clear();
        for &j in s.depends(i) {
            strong[j] = true;
            if split[j] == PointKind::Coarse {
                marker[j] = ci.len();
                ci.push(j);
            }
        }
        w.clear();
        w.resize(ci.len(), 0.0);
        let ok = !ci.is_empty()
            && match kind {
                Interpolation::Direct => direct_weights(a, i, &marker, &mut w),
                Interpolation::Classical => {
                    classical_weights(a, i, split, &strong, &marker, &mut w)
                }
            };
        if ok {
            entries.clear();
            entries.extend(
                ci.iter()
                    .zip(&w)
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(&j, &v)| (cmap[j], v)),
            );
            truncate_row(&mut entries, trunc_factor, p_max_elements);
            entries.sort_by_key(|&(c, _)| c);
            for &(c, v) in &entries {
                cols.push(c);
                vals.push(v);
            }
        }
        for &j in s.depends(i) {
            strong[j] = false;
            marker[j] = NONE;
        }
        row_offsets.push(cols.len());
    }
    CsrMatrix::from_parts_unchecked(n, n_c, row_offsets, cols, vals)
}

/// Stüben's direct interpolation with separate scaling of negative and
/// positive couplings. Returns false if the row cannot be interpolated.
fn direct_weights(a: &CsrMatrix, i: usize, marker: &[usize], w: &mut [f64]) -> bool {
    let (cols, vals) = a.row(i);
    let mut diag = 0.0;
    let (mut neg_all, mut pos_all, mut neg_c, mut pos_c) = (0.0, 0.0, 0.0, 0.0);
    for (&j, &v) in cols.iter().zip(vals) {
        if j == i {
            diag += v;
            continue;
        }
        let in_c = marker[j] != NONE;
        if v < 0.0 {
            neg_all += v;
            if in_c {
                neg_c += v;
            }
        } else {
            pos_all += v;
            if in_c {
                pos_c += v;
            }
        }
    }
    let beta = if pos_c == 0.0 {
        diag += pos_all;
        0.0
    } else {
        pos_all / pos_c
    };
    let alpha = if neg_c == 0.0 { 0.0 } else { neg_all / neg_c };
    if diag == 0.0 {
        return false;
    }
    for (&j, &v) in cols.iter().zip(vals) {
        if j == i || marker[j] == NONE {
            continue;
        }
        let scale = if v < 0.0 { alpha } else { beta };
        w[marker[j]] = -scale * v / diag;
    }
    true
}

/// Classical Ruge–Stüben interpolation: strong F neighbors are distributed
/// onto `C_i` through their own couplings (opposite-sign entries only);
/// weak neighbors are lumped into the diagonal.
fn classical_weights(
    a: &CsrMatrix,
    i: usize,
    split: &[PointKind],
    strong: &[bool],
    marker: &[usize],
    w: &mut [f64],
) -> bool {
    let (cols, vals) = a.row(i);
    let mut diag = 0.0;
    for (&j, &v) in cols.iter().zip(vals) {
        if j == i {
            diag += v;
        } else if marker[j] != NONE {
            w[marker[j]] += v;
        } else if strong[j] && split[j] == PointKind::Fine {
            let (kc, kv) = a.row(j);
            let a_jj = a.get(j, j);
            let opposite = |x: f64| if a_jj < 0.0 { x > 0.0 } else { x < 0.0 };
            let mut denom = 0.0;
            for (&m, &x) in kc.iter().zip(kv) {
                if m != j && marker[m] != NONE && opposite(x) {
                    denom += x;
                }
            }
            if denom == 0.0 {
                diag += v;
            } else {
                for (&m, &x) in kc.iter().zip(kv) {
                    if m != j && marker[m] != NONE && opposite(x) {
                        w[marker[m]] += v * x / denom;
                    }
                }
            }
        } else {
            diag += v;
        }
    }
    if diag == 0.0 {
        return false;
    }
    for wk in w.iter_mut() {
        *wk = -*wk / diag;
    }
    true
}

/// Drops weights below `trunc_factor · max|w|`, keeps at most
/// `p_max_elements` largest-magnitude entries (0 = no cap), and rescales the
/// survivors so the row sum is preserved.
pub fn truncate_row(entries: &mut Vec<(usize, f64)>, trunc_factor: f64, p_max_elements: usize) {
    if entries.is_empty() {
        return;
    }
    let original_sum: f64 = entries.iter().map(|e| e.1).sum();
    let before = entries.len();
    if trunc_factor > 0.0 {
        let max = entries.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
        let cut = trunc_factor * max;
        entries.retain(|e| e.1.abs() >= cut);
    }
    if p_max_elements > 0 && entries.len() > p_max_elements {
        // stable: equal magnitudes keep column order
        entries.sort_by(|x, y| y.1.abs().total_cmp(&x.1.abs()));
        entries.truncate(p_max_elements);
    }
    if entries.len() != before {
        let kept: f64 = entries.iter().map(|e| e.1).sum();
        if kept != 0.0 {
            let scale = original_sum / kept;
            for e in entries.iter_mut() {
                e.1 *= scale;
            }
        }
    }
}
