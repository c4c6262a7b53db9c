//! Synthetic data with a prescribed spectrum.
//!
//! `X = U D Vᵀ` where `D` is diagonal with head
//! `(1, 1−λ, 1−1.1λ, 1−1.2λ, 1−1.3λ, 1−1.4λ)` followed by a small random tail
//! `q_i = |g_i| / d`, and `U` (d×d), `V` (n×d) are random column-orthonormal
//! factors obtained by orthonormalizing Gaussian matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, Block, DataMatrix};

/// Number of prescribed leading singular values.
pub const HEAD_LEN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub dim: usize,
    pub count: usize,
    pub gap_lambda: f64,
    pub tail_seed: u64,
    pub matrix_seed: u64,
}

impl SpectrumSpec {
    /// Desk-scale defaults: `d = 100`, `n = 1000`.
    pub fn desk(gap_lambda: f64, seed: u64) -> Self {
        SpectrumSpec {
            dim: 100,
            count: 1000,
            gap_lambda,
            tail_seed: seed,
            matrix_seed: seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < HEAD_LEN {
            return Err(Error::domain(format!(
                "dimension must be at least {HEAD_LEN}, got {}",
                self.dim
            )));
        }
        if self.count < self.dim {
            return Err(Error::domain(format!(
                "count n = {} must be at least d = {}",
                self.count, self.dim
            )));
        }
        if !(self.gap_lambda > 0.0 && self.gap_lambda < 0.5) {
            return Err(Error::domain(format!(
                "gap lambda must lie in (0, 0.5), got {}",
                self.gap_lambda
            )));
        }
        Ok(())
    }

    /// The prescribed leading singular values.
    pub fn head(&self) -> [f64; HEAD_LEN] {
        let l = self.gap_lambda;
        [1.0, 1.0 - l, 1.0 - 1.1 * l, 1.0 - 1.2 * l, 1.0 - 1.3 * l, 1.0 - 1.4 * l]
    }

    /// Full diagonal of `D` in generation order (head, then tail).
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.tail_seed);
        let mut diag = self.head().to_vec();
        let d = self.dim as f64;
        diag.extend((HEAD_LEN..self.dim).map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            g.abs() / d
        }));
        let floor = diag[HEAD_LEN - 1];
        if let Some(q) = diag[HEAD_LEN..].iter().find(|&&q| q >= floor) {
            return Err(Error::domain(format!(
                "tail value {q} does not stay below the prescribed head ({floor}); \
                 increase d or change tail_seed"
            )));
        }
        Ok(diag)
    }
}

/// Builds the dense matrix `X = U D Vᵀ`.
pub fn synth_generate(spec: &SpectrumSpec) -> Result<DataMatrix> {
    let diag = spec.diagonal()?;
    let (d, n) = (spec.dim, spec.count);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.matrix_seed);
    let u = random_orthonormal(d, d, &mut rng)?;
    let v = random_orthonormal(n, d, &mut rng)?;

    // x_i = Σ_j U_j D_j V_{ij}
    let mut data = vec![0.0; d * n];
    let mut coeff = vec![0.0; d];
    for (i, x) in data.chunks_exact_mut(d).enumerate() {
        for (j, c) in coeff.iter_mut().enumerate() {
            *c = diag[j] * v.column(j)[i];
        }
        for (j, &c) in coeff.iter().enumerate() {
            for (xr, ur) in x.iter_mut().zip(u.column(j)) {
                *xr += c * ur;
            }
        }
    }
    DataMatrix::from_dense(d, n, data)
}

fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Block> {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Ok(gram_schmidt(Block::new(rows, cols, data)?)?.into_block())
}

/// Random sparse matrix: each entry is nonzero with probability `density`,
/// nonzeros are standard normal. Columns may come out empty.
pub fn sparse_random(dim: usize, count: usize, density: f64, seed: u64) -> Result<DataMatrix> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::domain(format!("density must lie in (0, 1], got {density}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<Vec<(usize, f64)>> = (0..count)
        .map(|_| {
            let mut col = Vec::new();
            for j in 0..dim {
                if rng.random::<f64>() < density {
                    col.push((j, rng.sample(StandardNormal)));
                }
            }
            col
        })
        .collect();
    DataMatrix::from_sparse_columns(dim, &columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_pattern_for_lambda_005() {
        let spec = SpectrumSpec::desk(0.05, 1);
        let expect = [1.0, 0.95, 0.945, 0.94, 0.935, 0.93];
        for (h, e) in spec.head().iter().zip(expect) {
            assert!((h - e).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let mut spec = SpectrumSpec::desk(0.6, 1);
        assert!(synth_generate(&spec).is_err());
        spec.gap_lambda = 0.1;
        spec.dim = 5;
        assert!(synth_generate(&spec).is_err());
        spec.dim = 20;
        spec.count = 10;
        assert!(synth_generate(&spec).is_err());
    }

    #[test]
    fn deterministic_for_fixed_seeds() {
        let spec = SpectrumSpec {
            dim: 12,
            count: 40,
            gap_lambda: 0.1,
            tail_seed: 3,
            matrix_seed: 4,
        };
        assert_eq!(synth_generate(&spec).unwrap(), synth_generate(&spec).unwrap());
    }

    #[test]
    fn sparse_density_roughly_respected() {
        let x = sparse_random(500, 400, 0.01, 2).unwrap();
        assert!(x.is_sparse());
        let density = x.nnz() as f64 / (500.0 * 400.0);
        assert!((0.008..0.012).contains(&density), "{density}");
    }

    #[test]
    fn tail_is_small() {
        let spec = SpectrumSpec::desk(0.1, 9);
        let diag = spec.diagonal().unwrap();
        assert_eq!(diag.len(), 100);
        assert!(diag[HEAD_LEN..].iter().all(|&q| q < 0.1));
    }
}
