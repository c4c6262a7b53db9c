//! Data-matrix storage and the kernels shared by every solver.
//!
//! All dense arrays are column-major. A [`DataMatrix`] holds the `n` instance
//! vectors `x_i ∈ R^d` as columns, either densely or in column-compressed
//! sparse form; nothing here ever slices rows, so the sparse layout only needs
//! per-column index/value runs.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Orthonormality tolerance of the [`Basis`] invariant.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Absolute residual norm below which Gram-Schmidt reports rank deficiency.
pub const RANK_TOL: f64 = 1e-12;

/// Columns per partial sum in [`covariance_apply`]. The reduction tree is
/// fixed by this constant, so serial and parallel execution agree bitwise.
const REDUCTION_CHUNK: usize = 256;
/// Below this many stored entries times `k` the reduction runs serially.
const PARALLEL_WORK: usize = 1 << 20;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse {
        col_ptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
    },
}

/// Borrowed view of one instance vector.
#[derive(Debug, Clone, Copy)]
pub enum Column<'a> {
    Dense(&'a [f64]),
    Sparse { indices: &'a [u32], values: &'a [f64] },
}

impl<'a> Column<'a> {
    #[inline]
    pub fn dot(&self, w: &[f64]) -> f64 {
        match *self {
            Column::Dense(x) => dot(x, w),
            Column::Sparse { indices, values } => indices
                .iter()
                .zip(values)
                .map(|(&j, v)| v * w[j as usize])
                .sum(),
        }
    }

    /// `y += alpha * x`
    #[inline]
    pub fn axpy_into(&self, alpha: f64, y: &mut [f64]) {
        match *self {
            Column::Dense(x) => axpy(alpha, x, y),
            Column::Sparse { indices, values } => {
                for (&j, v) in indices.iter().zip(values) {
                    y[j as usize] += alpha * v;
                }
            }
        }
    }

    pub fn nnz(&self) -> usize {
        match *self {
            Column::Dense(x) => x.len(),
            Column::Sparse { indices, .. } => indices.len(),
        }
    }

    /// Iterates over stored `(index, value)` pairs. Dense columns yield every entry.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, f64)> + 'a> {
        match *self {
            Column::Dense(x) => Box::new(x.iter().copied().enumerate()),
            Column::Sparse { indices, values } => Box::new(
                indices
                    .iter()
                    .zip(values)
                    .map(|(&j, &v)| (j as usize, v)),
            ),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        self.axpy_into(1.0, &mut out);
        out
    }
}

/// The data matrix `X ∈ R^{d×n}`, stored by columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    dim: usize,
    count: usize,
    storage: Storage,
    squared_norms: Vec<f64>,
}

impl DataMatrix {
    /// Builds a dense matrix from `d·n` column-major values.
    pub fn from_dense(dim: usize, count: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || count == 0 {
            return Err(Error::InvalidData(format!(
                "matrix must be non-empty, got {dim}x{count}"
            )));
        }
        if data.len() != dim * count {
            return Err(Error::shape(dim * count, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry".into()));
        }
        let squared_norms = data.chunks_exact(dim).map(norm_sq).collect();
        Ok(DataMatrix {
            dim,
            count,
            storage: Storage::Dense(data),
            squared_norms,
        })
    }

    /// Builds a dense matrix from a list of equal-length columns.
    pub fn from_dense_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::shape(dim, bad.len()));
        }
        let data = columns.iter().flatten().copied().collect();
        Self::from_dense(dim, columns.len(), data)
    }

    /// Builds a sparse matrix; each column is a list of `(index, value)`
    /// pairs with strictly increasing indices in `[0, dim)`. Explicit zeros
    /// are dropped.
    pub fn from_sparse_columns(dim: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self> {
        let count = columns.len();
        if dim == 0 || count == 0 {
            return Err(Error::InvalidData(format!(
                "matrix must be non-empty, got {dim}x{count}"
            )));
        }
        if dim > u32::MAX as usize {
            return Err(Error::InvalidData(format!("dimension {dim} too large")));
        }
        let nnz = columns.iter().map(Vec::len).sum();
        let mut col_ptr = Vec::with_capacity(count + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut squared_norms = Vec::with_capacity(count);
        col_ptr.push(0);
        for (c, col) in columns.iter().enumerate() {
            let mut prev: Option<usize> = None;
            let mut sq = 0.0;
            for &(j, v) in col {
                if j >= dim {
                    return Err(Error::InvalidData(format!(
                        "column {c}: index {j} out of range for dimension {dim}"
                    )));
                }
                if prev.is_some_and(|p| j <= p) {
                    return Err(Error::InvalidData(format!(
                        "column {c}: indices not strictly increasing at {j}"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidData(format!("column {c}: non-finite value")));
                }
                prev = Some(j);
                if v != 0.0 {
                    indices.push(j as u32);
                    values.push(v);
                    sq += v * v;
                }
            }
            col_ptr.push(indices.len());
            squared_norms.push(sq);
        }
        Ok(DataMatrix {
            dim,
            count,
            storage: Storage::Sparse {
                col_ptr,
                indices,
                values,
            },
            squared_norms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    #[inline]
    pub fn column(&self, i: usize) -> Column<'_> {
        match &self.storage {
            Storage::Dense(data) => Column::Dense(&data[i * self.dim..(i + 1) * self.dim]),
            Storage::Sparse {
                col_ptr,
                indices,
                values,
            } => {
                let (lo, hi) = (col_ptr[i], col_ptr[i + 1]);
                Column::Sparse {
                    indices: &indices[lo..hi],
                    values: &values[lo..hi],
                }
            }
        }
    }

    pub fn columns(&self) -> impl Iterator<Item = Column<'_>> + '_ {
        (0..self.count).map(move |i| self.column(i))
    }

    /// Cached `‖x_i‖²` for every column.
    pub fn squared_norms(&self) -> &[f64] {
        &self.squared_norms
    }

    /// `r = max_i ‖x_i‖²`
    pub fn max_sq_norm(&self) -> f64 {
        self.squared_norms.iter().copied().fold(0.0, f64::max)
    }

    /// `r̄ = (1/n) Σ ‖x_i‖²`
    pub fn mean_sq_norm(&self) -> f64 {
        self.squared_norms.iter().sum::<f64>() / self.count as f64
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(data) => data.len(),
            Storage::Sparse { values, .. } => values.len(),
        }
    }

    /// Average number of stored entries per column (`d_s`).
    pub fn avg_nnz(&self) -> f64 {
        self.nnz() as f64 / self.count as f64
    }

    /// Recomputes every column's squared norm and compares against the cache.
    pub fn check_norm_cache(&self, rel_tol: f64) -> bool {
        self.columns().zip(&self.squared_norms).all(|(col, &cached)| {
            let exact: f64 = col.entries().map(|(_, v)| v * v).sum();
            (exact - cached).abs() <= rel_tol * exact.max(f64::MIN_POSITIVE)
        })
    }

    /// Column-major dense copy of the entries.
    pub fn to_dense_vec(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(data) => data.clone(),
            Storage::Sparse { .. } => {
                let mut out = vec![0.0; self.dim * self.count];
                for (i, col) in self.columns().enumerate() {
                    col.axpy_into(1.0, &mut out[i * self.dim..(i + 1) * self.dim]);
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> DataMatrix {
        DataMatrix::from_dense(self.dim, self.count, self.to_dense_vec())
            .expect("valid matrix stays valid")
    }

    pub fn to_sparse(&self) -> DataMatrix {
        let cols: Vec<Vec<(usize, f64)>> = self
            .columns()
            .map(|c| c.entries().filter(|&(_, v)| v != 0.0).collect())
            .collect();
        DataMatrix::from_sparse_columns(self.dim, &cols).expect("valid matrix stays valid")
    }

    /// Multiplies every entry by `s`.
    pub fn scaled(&self, s: f64) -> DataMatrix {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(data) => data.iter_mut().for_each(|v| *v *= s),
            Storage::Sparse { values, .. } => values.iter_mut().for_each(|v| *v *= s),
        }
        out.squared_norms.iter_mut().for_each(|q| *q *= s * s);
        out
    }

    /// Returns the matrix whose column `j` is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<DataMatrix> {
        if perm.len() != self.count {
            return Err(Error::shape(self.count, perm.len()));
        }
        let mut seen = vec![false; self.count];
        for &p in perm {
            if p >= self.count || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidData("not a permutation".into()));
            }
        }
        match &self.storage {
            Storage::Dense(_) => {
                let cols: Vec<Vec<f64>> = perm
                    .iter()
                    .map(|&p| self.column(p).to_dense(self.dim))
                    .collect();
                DataMatrix::from_dense_columns(&cols)
            }
            Storage::Sparse { .. } => {
                let cols: Vec<Vec<(usize, f64)>> = perm
                    .iter()
                    .map(|&p| self.column(p).entries().collect())
                    .collect();
                DataMatrix::from_sparse_columns(self.dim, &cols)
            }
        }
    }

    /// Marks which coordinates are nonzero in at least one column.
    pub fn row_support(&self) -> Vec<bool> {
        let mut used = vec![false; self.dim];
        for col in self.columns() {
            for (j, v) in col.entries() {
                if v != 0.0 {
                    used[j] = true;
                }
            }
        }
        used
    }

    pub fn has_zero_rows(&self) -> bool {
        self.row_support().iter().any(|u| !u)
    }

    /// Drops coordinates that are zero in every column. Returns the reduced
    /// matrix and, for each kept row, its index in the original matrix.
    /// Leaves the matrix unchanged when every row is used or all are zero.
    pub fn compact_rows(&self) -> (DataMatrix, Vec<usize>) {
        let used = self.row_support();
        let kept: Vec<usize> = (0..self.dim).filter(|&j| used[j]).collect();
        if kept.len() == self.dim || kept.is_empty() {
            return (self.clone(), (0..self.dim).collect());
        }
        let mut remap = vec![usize::MAX; self.dim];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new;
        }
        let cols: Vec<Vec<(usize, f64)>> = self
            .columns()
            .map(|c| {
                c.entries()
                    .filter(|&(_, v)| v != 0.0)
                    .map(|(j, v)| (remap[j], v))
                    .collect()
            })
            .collect();
        let sparse = DataMatrix::from_sparse_columns(kept.len(), &cols)
            .expect("remapped indices stay sorted");
        let out = if self.is_sparse() {
            sparse
        } else {
            sparse.to_dense()
        };
        (out, kept)
    }
}

/// An owned `rows × cols` column-major array with no structural invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Block {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(rows * cols, data.len()));
        }
        Ok(Block { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Block {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::shape(rows, bad.len()));
        }
        Ok(Block {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.rows.max(1))
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Block) {
        axpy(alpha, &other.data, &mut self.data);
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn frobenius_sq(&self) -> f64 {
        norm_sq(&self.data)
    }

    /// `selfᵀ other`, a `cols × other.cols` array.
    pub fn transpose_mul(&self, other: &Block) -> Block {
        let mut out = Block::zeros(self.cols, other.cols);
        for q in 0..other.cols {
            for p in 0..self.cols {
                out.data[q * self.cols + p] = dot(self.column(p), other.column(q));
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Block) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A `d × k` array with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis(Block);

impl Basis {
    /// Wraps `block` after checking `BᵀB = I` to [`ORTHONORMAL_TOL`].
    pub fn new(block: Block) -> Result<Self> {
        if block.cols == 0 || block.cols > block.rows {
            return Err(Error::shape(
                format!("1 <= k <= {}", block.rows),
                format!("k = {}", block.cols),
            ));
        }
        let err = orthonormality_error(&block);
        if err > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(err));
        }
        Ok(Basis(block))
    }

    /// Normalizes a single nonzero vector.
    pub fn from_vector(v: Vec<f64>) -> Result<Self> {
        let dim = v.len();
        gram_schmidt(Block::new(dim, 1, v)?)
    }

    /// `e_{index}` in `R^dim`.
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Basis(Block::new(dim, 1, v).expect("shape"))
    }

    /// Orthonormalized standard Gaussian `d × k` matrix. For `k = 1` this is
    /// uniform on the unit sphere.
    pub fn random<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<Self> {
        let data: Vec<f64> = (0..dim * rank).map(|_| rng.sample(StandardNormal)).collect();
        gram_schmidt(Block::new(dim, rank, data)?)
    }

    pub(crate) fn from_block_unchecked(block: Block) -> Self {
        Basis(block)
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn rank(&self) -> usize {
        self.0.cols
    }

    pub fn block(&self) -> &Block {
        &self.0
    }

    pub fn into_block(self) -> Block {
        self.0
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.0.column(j)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0.data
    }

    pub fn negated(&self) -> Basis {
        let mut b = self.0.clone();
        b.scale(-1.0);
        Basis(b)
    }

    /// `max |(BᵀB − I)_{pq}|`
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }
}

fn orthonormality_error(b: &Block) -> f64 {
    let g = b.transpose_mul(b);
    let k = b.cols;
    let mut worst: f64 = 0.0;
    for q in 0..k {
        for p in 0..k {
            let target = if p == q { 1.0 } else { 0.0 };
            worst = worst.max((g.data[q * k + p] - target).abs());
        }
    }
    worst
}

/// `A·B` for `A = (1/n) X Xᵀ`, without forming `A`.
///
/// The sum over columns is split into fixed chunks whose partial results are
/// added in chunk order, so the result does not depend on whether the chunks
/// ran in parallel.
pub fn covariance_apply(x: &DataMatrix, b: &Block) -> Result<Block> {
    covariance_apply_with(x, b, true)
}

/// As [`covariance_apply`], optionally forcing serial execution.
pub fn covariance_apply_with(x: &DataMatrix, b: &Block, allow_parallel: bool) -> Result<Block> {
    if b.rows != x.dim {
        return Err(Error::shape(
            format!("{} rows", x.dim),
            format!("{} rows", b.rows),
        ));
    }
    let k = b.cols;
    let dim = x.dim;
    let partial = |chunk: usize| -> Vec<f64> {
        let mut acc = vec![0.0; dim * k];
        let mut proj = vec![0.0; k];
        let end = ((chunk + 1) * REDUCTION_CHUNK).min(x.count);
        for i in chunk * REDUCTION_CHUNK..end {
            let col = x.column(i);
            for (p, bj) in proj.iter_mut().zip(b.columns()) {
                *p = col.dot(bj);
            }
            for (j, &p) in proj.iter().enumerate() {
                col.axpy_into(p, &mut acc[j * dim..(j + 1) * dim]);
            }
        }
        acc
    };
    let chunks = x.count.div_ceil(REDUCTION_CHUNK);
    let parts: Vec<Vec<f64>> = if allow_parallel && x.nnz() * k >= PARALLEL_WORK && chunks > 1 {
        (0..chunks).into_par_iter().map(partial).collect()
    } else {
        (0..chunks).map(partial).collect()
    };
    let mut out = vec![0.0; dim * k];
    for part in &parts {
        axpy(1.0, part, &mut out);
    }
    let inv_n = 1.0 / x.count as f64;
    out.iter_mut().for_each(|v| *v *= inv_n);
    Block::new(dim, k, out)
}

/// Single-vector convenience wrapper around [`covariance_apply`].
pub fn covariance_apply_vec(x: &DataMatrix, w: &[f64]) -> Result<Vec<f64>> {
    Ok(covariance_apply(x, &Block::new(w.len(), 1, w.to_vec())?)?.into_vec())
}

/// Modified Gram-Schmidt without pivoting; a second pass re-orthogonalizes
/// when `k > 1`. Column order is preserved, so nearly orthonormal input comes
/// back almost unchanged.
pub fn gram_schmidt(mut m: Block) -> Result<Basis> {
    let (d, k) = (m.rows, m.cols);
    if k == 0 || k > d {
        return Err(Error::shape(
            format!("1 <= k <= {d}"),
            format!("k = {k}"),
        ));
    }
    for j in 0..k {
        let (done, rest) = m.data.split_at_mut(j * d);
        let col = &mut rest[..d];
        for q in done.chunks_exact(d) {
            let r = dot(q, col);
            axpy(-r, q, col);
        }
        let nrm = norm_sq(col).sqrt();
        if nrm.is_nan() || nrm < RANK_TOL {
            return Err(Error::RankDeficient {
                column: j,
                residual: nrm,
            });
        }
        col.iter_mut().for_each(|v| *v /= nrm);
    }
    if k > 1 {
        for j in 1..k {
            let (done, rest) = m.data.split_at_mut(j * d);
            let col = &mut rest[..d];
            for q in done.chunks_exact(d) {
                let r = dot(q, col);
                axpy(-r, q, col);
            }
            let nrm = norm_sq(col).sqrt();
            col.iter_mut().for_each(|v| *v /= nrm);
        }
    }
    Ok(Basis(m))
}

/// One already-extracted eigenpair `(s_l, v_l)` removed from the covariance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeflationPair {
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
}

/// `x(xᵀw) − Σ_l s_l v_l (v_lᵀ w)`
pub fn deflated_apply(x: Column<'_>, w: &[f64], deflation: &[DeflationPair]) -> Result<Vec<f64>> {
    let dim = w.len();
    let mut out = vec![0.0; dim];
    x.axpy_into(x.dot(w), &mut out);
    subtract_deflation(&mut out, w, deflation)?;
    Ok(out)
}

/// `out −= Σ_l s_l v_l (v_lᵀ w)`
pub fn subtract_deflation(out: &mut [f64], w: &[f64], deflation: &[DeflationPair]) -> Result<()> {
    for pair in deflation {
        if pair.vector.len() != w.len() {
            return Err(Error::shape(w.len(), pair.vector.len()));
        }
        let c = pair.eigenvalue * dot(&pair.vector, w);
        axpy(-c, &pair.vector, out);
    }
    Ok(())
}
