use crate::error::Result;
use crate::linalg::{covariance_apply_with, subtract_deflation, Block, DataMatrix, DeflationPair};

/// The (possibly deflated) covariance `A − Σ_l s_l v_l v_lᵀ` as seen by the
/// solvers. Every occurrence of `x xᵀ w` inside a stochastic update
/// picks up the same `−S w` correction.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Operator<'a> {
    pub x: &'a DataMatrix,
    pub deflation: &'a [DeflationPair],
    pub parallel: bool,
}

impl<'a> Operator<'a> {
    pub fn new(x: &'a DataMatrix, deflation: &'a [DeflationPair], determinism: bool) -> Self {
        Operator {
            x,
            deflation,
            parallel: !determinism,
        }
    }

    pub fn is_deflated(&self) -> bool {
        !self.deflation.is_empty()
    }

    /// `(A − S) B`
    pub fn apply(&self, b: &Block) -> Result<Block> {
        let mut out = covariance_apply_with(self.x, b, self.parallel)?;
        if self.is_deflated() {
            for j in 0..b.cols() {
                subtract_deflation(out.column_mut(j), b.column(j), self.deflation)?;
            }
        }
        Ok(out)
    }

    /// `−S v`, or `None` when nothing is deflated.
    pub fn minus_deflation(&self, v: &[f64]) -> Result<Option<Vec<f64>>> {
        if !self.is_deflated() {
            return Ok(None);
        }
        let mut out = vec![0.0; v.len()];
        subtract_deflation(&mut out, v, self.deflation)?;
        Ok(Some(out))
    }
}
