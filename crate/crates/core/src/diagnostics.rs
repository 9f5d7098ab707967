//! Regular-variation diagnostics on radii and angles.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{FxError, Result};
use crate::polar::{l2_inner, l2_norm, midpoint_grid, PolarSample};

/// Hill estimate of `γ = 1/α` from the top `k` order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillResult {
    pub k: usize,
    pub gamma_hat: f64,
    pub alpha_hat: f64,
    pub ci_level: f64,
    /// Interval for `α`; the upper end is `+∞` when `z ≥ √k`.
    pub alpha_ci: (f64, f64),
}

/// Two-sided normal quantile `z_{(1+level)/2}`, rounded to two decimals as
/// in printed tables (1.96 at level 0.95).
pub fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(FxError::invalid("ci_level", format!("must lie in (0, 1), got {level}")));
    }
    let z = Normal::standard().inverse_cdf((1.0 + level) / 2.0);
    Ok((z * 100.0).round() / 100.0)
}

/// Radii sorted in nonincreasing order, validated for the top `needed`.
fn sorted_top(radii: &[f64], needed: usize) -> Result<Vec<f64>> {
    if let Some(i) = radii.iter().position(|r| r.is_nan()) {
        return Err(FxError::NonFinite { row: i, col: 0 });
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if let Some(&r) = sorted[..needed].iter().find(|&&r| !(r > 0.0) || r.is_infinite()) {
        return Err(FxError::invalid(
            "radii",
            format!("top {needed} order statistics must be positive and finite, found {r}"),
        ));
    }
    Ok(sorted)
}

fn hill_from_sorted(sorted: &[f64], log_sum: f64, k: usize, z: f64, ci_level: f64) -> Result<HillResult> {
    let gamma_hat = log_sum / k as f64 - sorted[k].ln();
    if !(gamma_hat > 0.0) {
        return Err(FxError::Degenerate(format!(
            "Hill estimate is zero at k = {k}: the top {} radii are tied",
            k + 1
        )));
    }
    let half = z / (k as f64).sqrt();
    let low = 1.0 / (gamma_hat * (1.0 + half));
    let high = if half < 1.0 {
        1.0 / (gamma_hat * (1.0 - half))
    } else {
        f64::INFINITY
    };
    Ok(HillResult {
        k,
        gamma_hat,
        alpha_hat: 1.0 / gamma_hat,
        ci_level,
        alpha_ci: (low, high),
    })
}

/// `γ̂ = (1/k) Σ_{i≤k} log(R_(i) / R_(k+1))` with the interval
/// `γ̂ (1 ± z/√k)` inverted for `α`.
pub fn hill(radii: &[f64], k: usize, ci_level: f64) -> Result<HillResult> {
    let n = radii.len();
    if k == 0 || k + 1 > n {
        return Err(FxError::invalid("k", format!("must lie in 1..{n}, got {k}")));
    }
    let z = normal_quantile(ci_level)?;
    let sorted = sorted_top(radii, k + 1)?;
    let log_sum: f64 = sorted[..k].iter().map(|r| r.ln()).sum();
    hill_from_sorted(&sorted, log_sum, k, z, ci_level)
}

/// Hill estimates for every `k` in `k_min..=k_max`.
pub fn hill_plot(radii: &[f64], k_min: usize, k_max: usize, ci_level: f64) -> Result<Vec<HillResult>> {
    let n = radii.len();
    if k_min == 0 || k_min > k_max || k_max + 1 > n {
        return Err(FxError::invalid(
            "k",
            format!("need 1 <= k_min <= k_max < n = {n}, got {k_min}..={k_max}"),
        ));
    }
    let z = normal_quantile(ci_level)?;
    let sorted = sorted_top(radii, k_max + 1)?;
    let mut log_sum: f64 = sorted[..k_min - 1].iter().map(|r| r.ln()).sum();
    let mut out = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        log_sum += sorted[k - 1].ln();
        out.push(hill_from_sorted(&sorted, log_sum, k, z, ci_level)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoQq {
    /// `(−log(i/(n+1)), log R_(i))` for `i = 1..=k`.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope, an estimate of `γ`.
    pub slope: f64,
    pub intercept: f64,
    /// All plotted radii are equal.
    pub degenerate: bool,
}

/// Pareto quantile plot of the top `k` radii.
pub fn pareto_qq(radii: &[f64], k: usize) -> Result<ParetoQq> {
    let n = radii.len();
    if k < 2 || k > n {
        return Err(FxError::invalid("k", format!("must lie in 2..={n}, got {k}")));
    }
    let sorted = sorted_top(radii, k)?;
    let points: Vec<(f64, f64)> = (1..=k)
        .map(|i| (-(i as f64 / (n + 1) as f64).ln(), sorted[i - 1].ln()))
        .collect();
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let degenerate = points.iter().all(|p| p.1 == points[0].1);
    let slope = if degenerate { 0.0 } else { sxy / sxx };
    Ok(ParetoQq {
        points,
        slope,
        intercept: my - slope * mx,
        degenerate,
    })
}

/// `(k, (1/k) Σ_{i≤k} |⟨Θ_(i), h⟩|)` for `k` in `k_min..=k_max`.
pub fn moment_stability(p: &PolarSample, h: &[f64], k_min: usize, k_max: usize) -> Result<Vec<(usize, f64)>> {
    if h.len() != p.d() {
        return Err(FxError::DimensionMismatch {
            expected: p.d(),
            found: h.len(),
        });
    }
    let defined = p.defined_count();
    if k_min == 0 || k_min > k_max || k_max > defined {
        return Err(FxError::invalid(
            "k",
            format!("need 1 <= k_min <= k_max <= {defined}, got {k_min}..={k_max}"),
        ));
    }
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(k_max - k_min + 1);
    for (pos, &i) in p.order()[..k_max].iter().enumerate() {
        let theta = p.angle(i).expect("top rows up to defined_count have angles");
        sum += l2_inner(theta, h, p.grid_weight())?.abs();
        let k = pos + 1;
        if k >= k_min {
            out.push((k, sum / k as f64));
        }
    }
    Ok(out)
}

/// Frequencies of the default projection test functions `sin(2πjx)`.
pub const TEST_FUNCTION_FREQUENCIES: [u32; 6] = [1, 2, 3, 4, 6, 8];

/// `sin(2πjx)` on the `d` grid midpoints for each default frequency.
pub fn default_test_functions(d: usize) -> Result<Vec<Vec<f64>>> {
    if d < 2 {
        return Err(FxError::invalid("d", format!("must be at least 2, got {d}")));
    }
    let x = midpoint_grid(d);
    Ok(TEST_FUNCTION_FREQUENCIES
        .iter()
        .map(|&j| x.iter().map(|&s| (std::f64::consts::TAU * j as f64 * s).sin()).collect())
        .collect())
}

/// Upper bound `‖h‖` on any value returned by [`moment_stability`].
pub fn moment_bound(h: &[f64], grid_weight: f64) -> f64 {
    l2_norm(h, grid_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::{polar_decompose, FunctionalSample};

    #[test]
    fn hill_hand_example() {
        let r = hill(&[8.0, 4.0, 2.0, 1.0], 2, 0.95).unwrap();
        assert!((r.gamma_hat - 1.039_720_770_839_918).abs() < 1e-12);
        assert!((r.alpha_hat * r.gamma_hat - 1.0).abs() < 1e-15);
        // input order does not matter
        let s = hill(&[1.0, 8.0, 2.0, 4.0], 2, 0.95).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn hill_interval_convention() {
        assert_eq!(normal_quantile(0.95).unwrap(), 1.96);
        let radii: Vec<f64> = (1..=200).map(|i| (i as f64 / 201.0).powf(-1.0 / 22.5)).collect();
        let r = hill(&radii, 100, 0.95).unwrap();
        let ratio = r.alpha_ci.1 / r.alpha_ci.0;
        assert!((ratio - 1.196 / 0.804).abs() < 1e-12);
        assert!(r.alpha_ci.0 < r.alpha_hat && r.alpha_hat < r.alpha_ci.1);
        // alpha 22.5 maps to [18.8, 28.0]
        let low: f64 = 22.5 / 1.196;
        let high: f64 = 22.5 / 0.804;
        assert!((low - 18.8).abs() < 0.05 && (high - 27.9).abs() < 0.1);
    }

    #[test]
    fn hill_small_k_has_open_interval() {
        let r = hill(&[8.0, 4.0, 2.0, 1.0], 2, 0.95).unwrap();
        assert_eq!(r.alpha_ci.1, f64::INFINITY);
        let radii: Vec<f64> = (1..=10).map(|i| 100.0 / i as f64).collect();
        let r = hill(&radii, 9, 0.95).unwrap();
        assert!(r.alpha_ci.1.is_finite());
    }

    #[test]
    fn hill_errors() {
        assert!(hill(&[3.0, 2.0, 1.0], 3, 0.95).is_err());
        assert!(hill(&[3.0, 2.0, 1.0], 0, 0.95).is_err());
        assert!(hill(&[3.0, 2.0, 0.0], 2, 0.95).is_err());
        assert!(hill(&[3.0, -2.0, 1.0], 2, 0.95).is_err());
        assert!(matches!(hill(&[2.0, 2.0, 2.0], 2, 0.95), Err(FxError::Degenerate(_))));
        assert!(hill(&[3.0, 2.0, 1.0], 1, 1.0).is_err());
    }

    #[test]
    fn hill_plot_matches_pointwise() {
        let radii: Vec<f64> = (1..=50).map(|i| (i as f64 / 51.0).powf(-0.5) * (1.0 + 0.01 * (i % 7) as f64)).collect();
        let series = hill_plot(&radii, 3, 20, 0.9).unwrap();
        assert_eq!(series.len(), 18);
        for h in &series {
            let single = hill(&radii, h.k, 0.9).unwrap();
            assert!((single.gamma_hat - h.gamma_hat).abs() < 1e-12);
        }
        assert_eq!(hill_plot(&radii, 5, 5, 0.95).unwrap().len(), 1);
        assert!(hill_plot(&[1.0; 10], 2, 5, 0.95).is_err());
        assert!(hill_plot(&radii, 5, 4, 0.95).is_err());
    }

    #[test]
    fn qq_on_exact_quantiles() {
        let n = 1000;
        let alpha = 2.5;
        let radii: Vec<f64> = (1..=n).map(|i| (i as f64 / (n + 1) as f64).powf(-1.0 / alpha)).collect();
        let qq = pareto_qq(&radii, 200).unwrap();
        assert!((qq.slope - 1.0 / alpha).abs() < 1e-6);
        assert!(qq.intercept.abs() < 1e-9);
        let scaled: Vec<f64> = radii.iter().map(|r| 3.0 * r).collect();
        let qs = pareto_qq(&scaled, 200).unwrap();
        assert!((qs.slope - qq.slope).abs() < 1e-12);
        assert!((qs.intercept - qq.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn qq_degenerate_and_errors() {
        let qq = pareto_qq(&[2.0; 10], 5).unwrap();
        assert!(qq.degenerate);
        assert_eq!(qq.slope, 0.0);
        assert!(pareto_qq(&[2.0, 1.0, 0.0], 3).is_err());
        assert!(pareto_qq(&[2.0, 1.0], 1).is_err());
    }

    #[test]
    fn moment_stability_trivial_cases() {
        let x = FunctionalSample::from_rows(&[vec![3.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]], 1.0).unwrap();
        let p = polar_decompose(&x);
        let ones = moment_stability(&p, &[1.0, 0.0], 1, 3).unwrap();
        assert_eq!(ones, vec![(1, 1.0), (2, 1.0), (3, 1.0)]);
        let zeros = moment_stability(&p, &[0.0, 5.0], 1, 3).unwrap();
        assert!(zeros.iter().all(|&(_, v)| v == 0.0));
        assert!(moment_stability(&p, &[1.0], 1, 3).is_err());
        assert!(moment_stability(&p, &[1.0, 0.0], 1, 4).is_err());
    }

    #[test]
    fn test_functions() {
        let h = default_test_functions(2).unwrap();
        assert_eq!(h.len(), 6);
        assert!((h[0][0] - 1.0).abs() < 1e-15);
        let d = 48;
        let h = default_test_functions(d).unwrap();
        for curve in &h {
            let sq: f64 = curve.iter().map(|v| v * v).sum();
            assert!((sq - d as f64 / 2.0).abs() < 1e-9);
        }
        assert!(l2_inner(&h[1], &h[3], 1.0).unwrap().abs() < 1e-10);
        assert!(default_test_functions(1).is_err());
    }
}
