#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vrpca_core::{Basis, DataMatrix, SpectrumSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize, n: usize) -> DataMatrix {
    DataMatrix::from_dense(d, n, gaussian(rng, d * n)).unwrap()
}

pub fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let v = gaussian(rng, d);
    let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / nrm).collect()
}

/// `A = (1/n) X Xᵀ` built entry by entry, row-major.
pub fn dense_covariance(x: &DataMatrix) -> Vec<f64> {
    let (d, n) = (x.dim(), x.count());
    let cols: Vec<Vec<f64>> = x.columns().map(|c| c.to_dense(d)).collect();
    let mut a = vec![0.0; d * d];
    for r in 0..d {
        for c in 0..d {
            a[r * d + c] = cols.iter().map(|x| x[r] * x[c]).sum::<f64>() / n as f64;
        }
    }
    a
}

pub fn mat_vec(a: &[f64], w: &[f64]) -> Vec<f64> {
    let d = w.len();
    (0..d).map(|r| (0..d).map(|c| a[r * d + c] * w[c]).sum()).collect()
}

/// `B Bᵀ` for a `d × k` basis, row-major.
pub fn projector(b: &Basis) -> Vec<f64> {
    let d = b.dim();
    let mut p = vec![0.0; d * d];
    for j in 0..b.rank() {
        let col = b.column(j);
        for r in 0..d {
            for c in 0..d {
                p[r * d + c] += col[r] * col[c];
            }
        }
    }
    p
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn frobenius_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn small_synthetic(lambda: f64, seed: u64) -> DataMatrix {
    let spec = SpectrumSpec {
        dim: 20,
        count: 200,
        gap_lambda: lambda,
        tail_seed: seed,
        matrix_seed: seed + 1,
    };
    vrpca_core::synth_generate(&spec).unwrap()
}
