use amgtune_core::sparse::{build_cube, build_jumps, dot, norm2, spmv};
use amgtune_core::CsrMatrix;
use proptest::prelude::*;

/// In-place dense Cholesky; `false` if a non-positive pivot appears.
fn cholesky_succeeds(mut a: Vec<f64>, n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    true
}

#[test]
fn cube_matrices_are_positive_definite() {
    for g in 2..=6 {
        let a = build_cube(g).unwrap().matrix;
        assert!(a.is_symmetric());
        assert!(cholesky_succeeds(a.to_dense(), a.n_rows()), "cube:{g}");
    }
}

#[test]
fn jumps_matrix_is_positive_definite() {
    let a = build_jumps(10).unwrap().matrix;
    assert!(a.is_symmetric());
    assert!(cholesky_succeeds(a.to_dense(), a.n_rows()));
}

#[test]
fn cholesky_oracle_rejects_indefinite() {
    let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
    assert!(!cholesky_succeeds(a.to_dense(), 2));
}

fn triplets() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1usize..8, 1usize..8).prop_flat_map(|(r, c)| {
        let entry = (0..r, 0..c, -4i32..5).prop_map(|(i, j, v)| (i, j, v as f64));
        (Just(r), Just(c), prop::collection::vec(entry, 0..30))
    })
}

fn dense_apply(t: &[(usize, usize, f64)], rows: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; rows];
    for &(i, j, v) in t {
        y[i] += v * x[j];
    }
    y
}

proptest! {
    #[test]
    fn spmv_matches_triplet_sum((r, c, t) in triplets(), seed in 0u64..1000) {
        let a = CsrMatrix::from_triplets(r, c, &t).unwrap();
        let x: Vec<f64> = (0..c).map(|j| ((seed + j as u64) % 7) as f64 - 3.0).collect();
        // Small integers keep every sum exact.
        prop_assert_eq!(spmv(&a, &x).unwrap(), dense_apply(&t, r, &x));
    }

    #[test]
    fn transpose_is_an_involution_and_adjoint((r, c, t) in triplets()) {
        let a = CsrMatrix::from_triplets(r, c, &t).unwrap();
        let at = a.transpose();
        prop_assert_eq!(&at.transpose(), &a);
        let x: Vec<f64> = (0..c).map(|j| j as f64 - 1.0).collect();
        let y: Vec<f64> = (0..r).map(|i| 2.0 - i as f64).collect();
        let lhs = dot(&y, &spmv(&a, &x).unwrap()).unwrap();
        let rhs = dot(&spmv(&at, &y).unwrap(), &x).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn generated_operators_are_symmetric_with_positive_energy(g in 2usize..6, seed in 0u64..100) {
        let a = build_cube(g).unwrap().matrix;
        let x: Vec<f64> = (0..a.n_rows()).map(|i| (((i as u64 * 31 + seed) % 11) as f64) - 5.0).collect();
        prop_assume!(norm2(&x) > 0.0);
        prop_assert!(a.is_symmetric());
        prop_assert!(dot(&x, &spmv(&a, &x).unwrap()).unwrap() > 0.0);
    }
}
