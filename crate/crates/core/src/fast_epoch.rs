//! Amortized VR-PCA epoch for `k = 1`.
//!
//! The iterate is never stored explicitly. It is represented as
//! `w = α·g + β·ũ` together with the cached scalars
//!
//! ```text
//! γ = ‖α g‖²,   δ = ⟨α g, ũ⟩,   ζ = ‖ũ‖²
//! ```
//!
//! so that `‖w‖² = γ + 2βδ + β²ζ`. A stochastic step only changes `g` on the
//! support of the sampled column and the scalars, which makes each iteration
//! `O(nnz(x_i))` instead of `O(d)`. Normalization rescales `α` and `β` only.
//!
//! Rounding slowly separates the cached scalars from the vectors they
//! describe, and `α` shrinks geometrically over long epochs. Both are handled
//! by a periodic check that rebases the representation onto `g ← w, α = 1,
//! β = 0` when needed.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{covariance_apply_vec, dot, norm_sq, DataMatrix};
use crate::solvers::sampler::IndexSampler;

/// Rebase when `|log10 α|` exceeds this.
pub const ALPHA_LOG10_LIMIT: f64 = 100.0;
/// Rebase when a refreshed scalar drifts by more than this (relative).
pub const DRIFT_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EpochState {
    g: Vec<f64>,
    u_tilde: Vec<f64>,
    w_anchor: Vec<f64>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    zeta: f64,
    eta: f64,
    refresh_every: usize,
    since_refresh: usize,
    update_touches: u64,
    rebases: u64,
}

impl EpochState {
    /// Starts an epoch at `anchor`: `g = anchor`, `ũ = A·anchor`, `α = 1`, `β = 0`.
    pub fn epoch_init(x: &DataMatrix, anchor: &[f64], eta: f64) -> Result<Self> {
        let u_tilde = covariance_apply_vec(x, anchor)?;
        Ok(Self::from_parts(x, anchor, u_tilde, eta))
    }

    /// As [`epoch_init`](Self::epoch_init) with a precomputed `ũ`.
    pub fn from_parts(x: &DataMatrix, anchor: &[f64], u_tilde: Vec<f64>, eta: f64) -> Self {
        let g = anchor.to_vec();
        let gamma = norm_sq(&g);
        let delta = dot(&g, &u_tilde);
        let zeta = norm_sq(&u_tilde);
        // O(d) refresh every d/d_s updates keeps the amortized cost O(d_s)
        let refresh_every = ((x.dim() as f64 / x.avg_nnz().max(1.0)).ceil() as usize).max(32);
        EpochState {
            g,
            u_tilde,
            w_anchor: anchor.to_vec(),
            alpha: 1.0,
            beta: 0.0,
            gamma,
            delta,
            zeta,
            eta,
            refresh_every,
            since_refresh: 0,
            update_touches: 0,
            rebases: 0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Cached `(γ, δ, ζ)`.
    pub fn scalars(&self) -> (f64, f64, f64) {
        (self.gamma, self.delta, self.zeta)
    }

    /// `(γ, δ, ζ)` recomputed from `g`, `ũ` and `α`; `O(d)`.
    pub fn recomputed_scalars(&self) -> (f64, f64, f64) {
        let ag_sq = self.alpha * self.alpha * norm_sq(&self.g);
        let ag_u = self.alpha * dot(&self.g, &self.u_tilde);
        (ag_sq, ag_u, norm_sq(&self.u_tilde))
    }

    /// `‖α g + β ũ‖²` from the cached scalars.
    pub fn represented_norm_sq(&self) -> f64 {
        self.gamma + 2.0 * self.beta * self.delta + self.beta * self.beta * self.zeta
    }

    pub fn u_tilde(&self) -> &[f64] {
        &self.u_tilde
    }

    /// Vector entries touched by [`fast_update`](Self::fast_update) so far.
    pub fn update_touches(&self) -> u64 {
        self.update_touches
    }

    pub fn rebases(&self) -> u64 {
        self.rebases
    }

    /// Applies `w ← w + η (x_i (x_iᵀw − x_iᵀw̃) + ũ)` in `O(nnz(x_i))`.
    pub fn fast_update(&mut self, x: &DataMatrix, i: usize) {
        let col = x.column(i);
        let xg = col.dot(&self.g);
        let xu = col.dot(&self.u_tilde);
        let xa = col.dot(&self.w_anchor);
        let xw = self.alpha * xg + self.beta * xu;
        // Δg = c·x_i; both inner products below use g before it moves.
        let c = self.eta * (xw - xa);
        let p = c * xg;
        let q = c * xu;
        let dg_sq = c * c * x.squared_norms()[i];
        col.axpy_into(c / self.alpha, &mut self.g);
        self.beta += self.eta;
        self.gamma += 2.0 * self.alpha * p + dg_sq;
        self.delta += q;
        self.update_touches += 4 * col.nnz() as u64;
    }

    /// Rescales the represented vector to unit norm.
    pub fn fast_normalize(&mut self) -> Result<()> {
        let nu_sq = self.represented_norm_sq();
        if nu_sq <= 0.0 || !nu_sq.is_finite() {
            return Err(Error::DegenerateIterate(nu_sq));
        }
        let nu = nu_sq.sqrt();
        self.alpha /= nu;
        self.beta /= nu;
        self.gamma /= nu_sq;
        self.delta /= nu;
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_every || self.alpha.abs().log10().abs() > ALPHA_LOG10_LIMIT
        {
            self.maintain();
        }
        Ok(())
    }

    /// Checks the scalar caches and rebases if they drifted or `α` is extreme.
    pub fn maintain(&mut self) {
        self.since_refresh = 0;
        let (gamma, delta, zeta) = self.recomputed_scalars();
        let drift = |cached: f64, exact: f64, scale: f64| (cached - exact).abs() / scale;
        let scale = (gamma + zeta).max(f64::MIN_POSITIVE);
        let drifted = drift(self.gamma, gamma, scale) > DRIFT_LIMIT
            || drift(self.delta, delta, scale) > DRIFT_LIMIT
            || drift(self.zeta, zeta, scale) > DRIFT_LIMIT;
        if drifted || self.alpha.abs().log10().abs() > ALPHA_LOG10_LIMIT {
            self.rebase();
        }
    }

    /// `g ← α g + β ũ`, `α ← 1`, `β ← 0`, scalars recomputed.
    pub fn rebase(&mut self) {
        self.g = self.materialize();
        self.alpha = 1.0;
        self.beta = 0.0;
        let (gamma, delta, zeta) = self.recomputed_scalars();
        self.gamma = gamma;
        self.delta = delta;
        self.zeta = zeta;
        self.rebases += 1;
    }

    /// `α g + β ũ` as a dense vector.
    pub fn materialize(&self) -> Vec<f64> {
        self.g
            .iter()
            .zip(&self.u_tilde)
            .map(|(g, u)| self.alpha * g + self.beta * u)
            .collect()
    }
}

/// One full amortized epoch of `m` iterations starting from `anchor`.
pub fn run_epoch<R: Rng + ?Sized>(
    x: &DataMatrix,
    anchor: &[f64],
    u_tilde: Vec<f64>,
    eta: f64,
    m: usize,
    sampler: &IndexSampler,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut state = EpochState::from_parts(x, anchor, u_tilde, eta);
    for _ in 0..m {
        let i = sampler.sample(rng);
        state.fast_update(x, i);
        state.fast_normalize()?;
    }
    Ok(state.materialize())
}
