//! Closed-form finite-sample deviation bounds for the extreme angular
//! covariance estimator, and the eigenspace perturbation bound built on them.
//!
//! With probability at least `1 − δ/2` each:
//!
//! ```text
//! ‖C̄_t − C_t‖_HS ≤ (1 + 4√log(2/δ))/√k + 8 log(2/δ)/(3k)        (sampling)
//! ‖Ĉ_k − C̄_t‖_HS ≤ √(8 log(4/δ)/k) + 4 log(4/δ)/(3k)          (threshold)
//! ```
//!
//! and their sum holds with probability at least `1 − δ` by a union bound.
//! Dividing by a positive half eigen gap bounds `ρ` between the empirical and
//! pre-asymptotic leading eigenspaces.

use crate::error::{FxError, Result};

fn check_k_delta(k: usize, delta: f64) -> Result<()> {
    if k == 0 {
        return Err(FxError::invalid("k", "must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FxError::invalid("delta", format!("must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Deviation of the pseudo-empirical operator `C̄_t` from `C_t`.
pub fn sampling_deviation_bound(k: usize, delta: f64) -> Result<f64> {
    check_k_delta(k, delta)?;
    let l = (2.0 / delta).ln();
    let k = k as f64;
    Ok((1.0 + 4.0 * l.sqrt()) / k.sqrt() + 8.0 * l / (3.0 * k))
}

/// Deviation caused by using the random threshold `R_(k)` instead of the
/// true quantile.
pub fn threshold_deviation_bound(k: usize, delta: f64) -> Result<f64> {
    check_k_delta(k, delta)?;
    let l = (4.0 / delta).ln();
    let k = k as f64;
    Ok((8.0 * l / k).sqrt() + 4.0 * l / (3.0 * k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub sampling: f64,
    pub threshold: f64,
    pub total: f64,
    pub eigen_gap: Option<f64>,
    pub rho_bound: Option<f64>,
}

/// `B(n, k, δ)`, evaluated from its own closed form; it coincides with the
/// sum of the two component bounds.
pub fn total_deviation_bound(n: usize, k: usize, delta: f64) -> Result<BoundReport> {
    check_k_delta(k, delta)?;
    if k > n {
        return Err(FxError::invalid("k", format!("must not exceed n = {n}, got {k}")));
    }
    let l2 = (2.0 / delta).ln();
    let l4 = (4.0 / delta).ln();
    let kf = k as f64;
    let total = (1.0 + 4.0 * l2.sqrt() + (8.0 * l4).sqrt()) / kf.sqrt() + (8.0 * l2 + 4.0 * l4) / (3.0 * kf);
    Ok(BoundReport {
        n,
        k,
        delta,
        sampling: sampling_deviation_bound(k, delta)?,
        threshold: threshold_deviation_bound(k, delta)?,
        total,
        eigen_gap: None,
        rho_bound: None,
    })
}

/// `ρ(Ê_p^k, E_p^t) ≤ B(n, k, δ) / g_p`.
pub fn eigenspace_bound(report: &BoundReport, eigen_gap: f64) -> Result<f64> {
    if !(eigen_gap > 0.0) {
        return Err(FxError::Degenerate(format!(
            "eigen gap must be positive to bound the eigenspace deviation, got {eigen_gap}"
        )));
    }
    Ok(report.total / eigen_gap)
}

impl BoundReport {
    /// Attaches an eigen gap and the resulting `ρ` bound.
    pub fn with_gap(mut self, eigen_gap: f64) -> Result<Self> {
        let rho = eigenspace_bound(&self, eigen_gap)?;
        self.eigen_gap = Some(eigen_gap);
        self.rho_bound = Some(rho);
        Ok(self)
    }
}
