use alloc::vec;
use alloc::vec::Vec;

use crate::sparse::CsrMatrix;

/// Coarse operator `Pᵀ A P`, formed row by row. For each coarse entry
/// `(I, J)` the terms `(P_iI a_ij) P_jJ` are accumulated in ascending `(i, j)`
/// order, which makes the result reproducible by any evaluation that uses
/// the same ordering.
pub fn galerkin_product(a: &CsrMatrix, p: &CsrMatrix) -> CsrMatrix {
    assert_eq!(a.n_cols(), p.n_rows());
    assert_eq!(a.n_rows(), p.n_rows());
    let r = p.transpose();
    let n_c = p.n_cols();
    let mut acc = vec![0.0f64; n_c];
    let mut seen = vec![false; n_c];
    let mut touched: Vec<usize> = Vec::new();
    let mut row_offsets = Vec::with_capacity(n_c + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_offsets.push(0);
    for ci in 0..n_c {
        let (ri, rv) = r.row(ci);
        for (&i, &r_ii) in ri.iter().zip(rv) {
            let (aj, av) = a.row(i);
            for (&j, &a_ij) in aj.iter().zip(av) {
                let t = r_ii * a_ij;
                let (pj, pv) = p.row(j);
                for (&cj, &p_jj) in pj.iter().zip(pv) {
                    if !seen[cj] {
                        seen[cj] = true;
                        touched.push(cj);
                    }
                    acc[cj] += t * p_jj;
                }
            }
        }
        touched.sort_unstable();
        for &cj in &touched {
            cols.push(cj);
            vals.push(acc[cj]);
            acc[cj] = 0.0;
            seen[cj] = false;
        }
        touched.clear();
        row_offsets.push(cols.len());
    }
    CsrMatrix::from_parts_unchecked(n_c, n_c, row_offsets, cols, vals)
}
