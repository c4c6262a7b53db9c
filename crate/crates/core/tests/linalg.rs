mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use vrpca_core::linalg::covariance_apply_vec;
use vrpca_core::solvers::heuristic_params;
use vrpca_core::{covariance_apply, gram_schmidt, Basis, Block, DataMatrix};

#[test]
fn covariance_random_3x5_matches_dense() {
    let mut r = rng(11);
    let x = random_matrix(&mut r, 3, 5);
    let w = unit(&mut r, 3);
    let got = covariance_apply_vec(&x, &w).unwrap();
    let expect = mat_vec(&dense_covariance(&x), &w);
    assert!(max_abs_diff(&got, &expect) <= 1e-12 * norm(&expect));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_schmidt_span_matches_qr(d in 2usize..30, k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(d);
        let mut r = rng(seed);
        let data = gaussian(&mut r, d * k);
        let qr = DMatrix::from_column_slice(d, k, &data).qr();
        let q = qr.q();
        let qqt = &q * q.transpose();
        let b = gram_schmidt(Block::new(d, k, data).unwrap()).unwrap();
        let p = projector(&b);
        let mut worst: f64 = 0.0;
        for row in 0..d {
            for col in 0..d {
                worst = worst.max((p[row * d + col] - qqt[(row, col)]).abs());
            }
        }
        prop_assert!(worst <= 1e-10, "projector mismatch {worst}");
        prop_assert!(b.orthonormality_error() <= 1e-10);
    }
}

/// `(1/n) Σ_i x_i (x_iᵀ w − x_iᵀ w̃) + A w̃ = A w`
#[test]
fn variance_reduced_term_is_unbiased() {
    let mut r = rng(5);
    for trial in 0..100 {
        let d = 2 + trial % 49;
        let n = 1 + (trial * 7) % 200;
        let x = random_matrix(&mut r, d, n);
        let (w, w_anchor) = (unit(&mut r, d), unit(&mut r, d));
        let mut lhs = covariance_apply_vec(&x, &w_anchor).unwrap();
        for col in x.columns() {
            col.axpy_into((col.dot(&w) - col.dot(&w_anchor)) / n as f64, &mut lhs);
        }
        let rhs = covariance_apply_vec(&x, &w).unwrap();
        assert!(
            max_abs_diff(&lhs, &rhs) <= 1e-12 * norm(&rhs).max(1e-300),
            "trial {trial}: {lhs:?} vs {rhs:?}"
        );
    }
}

fn stochastic_variance(x: &DataMatrix, diff: &[f64]) -> f64 {
    let d = x.dim();
    let terms: Vec<Vec<f64>> = x
        .columns()
        .map(|col| {
            let mut z = vec![0.0; d];
            col.axpy_into(col.dot(diff), &mut z);
            z
        })
        .collect();
    let n = terms.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| terms.iter().map(|z| z[j]).sum::<f64>() / n).collect();
    terms
        .iter()
        .map(|z| z.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
        .sum::<f64>()
        / n
}

#[test]
fn variance_scales_quadratically_with_distance_to_anchor() {
    let mut r = rng(6);
    for trial in 0..20 {
        let (d, n) = (3 + trial, 10 + 7 * trial);
        let x = random_matrix(&mut r, d, n);
        let (w, w_anchor) = (unit(&mut r, d), unit(&mut r, d));
        let diff: Vec<f64> = w.iter().zip(&w_anchor).map(|(a, b)| a - b).collect();
        let doubled: Vec<f64> = diff.iter().map(|v| 2.0 * v).collect();
        let (v1, v2) = (stochastic_variance(&x, &diff), stochastic_variance(&x, &doubled));
        assert!((v2 / v1 - 4.0).abs() <= 4e-10, "trial {trial}: ratio {}", v2 / v1);
    }
}

#[test]
fn column_permutation_leaves_covariance_and_heuristics_unchanged() {
    let mut r = rng(8);
    let x = random_matrix(&mut r, 7, 40);
    let perm: Vec<usize> = (0..40).map(|i| (i * 17 + 3) % 40).collect();
    let y = x.permute_columns(&perm).unwrap();
    let b = Basis::random(7, 2, &mut r).unwrap();
    let (ax, ay) = (covariance_apply(&x, b.block()).unwrap(), covariance_apply(&y, b.block()).unwrap());
    assert!(ax.max_abs_diff(&ay) <= 1e-14);
    let (hx, hy) = (heuristic_params(&x).unwrap(), heuristic_params(&y).unwrap());
    assert_eq!(hx.1, hy.1);
    assert!((hx.0 - hy.0).abs() <= 1e-15 * hx.0);
}

#[test]
fn sparse_and_dense_storage_give_same_products() {
    let x = vrpca_core::data::sparse_random(60, 80, 0.05, 4).unwrap();
    let dense = x.to_dense();
    let b = Basis::random(60, 3, &mut rng(1)).unwrap();
    let (s, d) = (covariance_apply(&x, b.block()).unwrap(), covariance_apply(&dense, b.block()).unwrap());
    assert!(s.max_abs_diff(&d) <= 1e-14);
}
