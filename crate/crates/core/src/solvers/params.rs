//! Step size and epoch length selection.
//!
//! Two planners: the data-driven heuristic (`m = n`, `η = 1/(r̄√n)`), and the
//! sufficient conditions of the convergence guarantee, which need the
//! covariance eigengap `λ` and the norm bound `r = max_i ‖x_i‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// `(η, m)` with `m = n` and `η = 1/(r̄ √n)`.
pub fn heuristic_params(x: &DataMatrix) -> Result<(f64, usize)> {
    let r_bar = x.mean_sq_norm();
    if r_bar.is_nan() || r_bar <= 0.0 {
        return Err(Error::domain("all-zero data matrix has no heuristic step size"));
    }
    let n = x.count();
    Ok((1.0 / (r_bar * (n as f64).sqrt()), n))
}

/// The unspecified numerical constants of the guarantee. The defaults are
/// a non-normative choice; `c2 = 48` follows the epoch-length bound used in
/// the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for TheoryConstants {
    fn default() -> Self {
        TheoryConstants {
            c1: 0.05,
            c2: 48.0,
            c3: 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryParams {
    pub eta: f64,
    pub m: u64,
    pub epochs: u64,
    /// Whether all three sufficient conditions hold for `(eta, m)`.
    pub satisfied: bool,
}

/// Outcome of each sufficient condition for a given `(η, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    /// `η ≤ c1 δ² λ / r²`
    pub step: bool,
    /// `m ≥ c2 log(2/δ) / (η λ)`
    pub length: bool,
    /// `m η² r² + r √(m η² log(2/δ)) ≤ c3`
    pub variance: bool,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.step && self.length && self.variance
    }
}

fn check_inputs(r: f64, lambda: f64, delta: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("r must be positive, got {r}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// `T = ⌈log(1/ε) / log(2/δ)⌉`
pub fn theory_epochs(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(((1.0 / epsilon).ln() / (2.0 / delta).ln()).ceil() as u64)
}

/// Evaluates the three sufficient conditions for an arbitrary `(η, m)`.
pub fn theory_conditions(
    eta: f64,
    m: u64,
    r: f64,
    lambda: f64,
    delta: f64,
    constants: TheoryConstants,
) -> Result<ConditionReport> {
    check_inputs(r, lambda, delta)?;
    let log_term = (2.0 / delta).ln();
    let m = m as f64;
    Ok(ConditionReport {
        step: eta <= constants.c1 * delta * delta * lambda / (r * r),
        length: m >= constants.c2 * log_term / (eta * lambda),
        variance: m * eta * eta * r * r + r * (m * eta * eta * log_term).sqrt() <= constants.c3,
    })
}

/// Largest admissible step, the matching minimal epoch length, and the epoch
/// count for accuracy `ε`.
pub fn theory_params(
    r: f64,
    lambda: f64,
    delta: f64,
    epsilon: f64,
    constants: TheoryConstants,
) -> Result<TheoryParams> {
    check_inputs(r, lambda, delta)?;
    if !(constants.c1 > 0.0 && constants.c2 > 0.0 && constants.c3 > 0.0) {
        return Err(Error::domain("theory constants must be positive"));
    }
    let epochs = theory_epochs(epsilon, delta)?;
    let eta = constants.c1 * delta * delta * lambda / (r * r);
    let m = (constants.c2 * (2.0 / delta).ln() / (eta * lambda)).ceil();
    if !(m.is_finite() && m < u64::MAX as f64) {
        return Err(Error::domain(format!("epoch length {m} is not representable")));
    }
    let m = m as u64;
    let satisfied = theory_conditions(eta, m, r, lambda, delta, constants)?.all();
    Ok(TheoryParams {
        eta,
        m,
        epochs,
        satisfied,
    })
}
