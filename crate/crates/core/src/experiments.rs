//! End-to-end experiments: scree comparison, eigenfunction recovery,
//! reconstruction cross-validation and Monte Carlo checks of the
//! concentration bounds.

use rand::seq::index::sample as sample_indices;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::statistics::{Data, Distribution, Max, Min, OrderStatistics};

use crate::bounds::{total_deviation_bound, BoundReport};
use crate::cov::{
    angular_second_moment, empirical_extreme_cov, full_sample_cov, leading_subspace_of, pseudo_empirical_cov,
    reconstruction_error, scree,
};
use crate::error::{FxError, Result};
use crate::linalg::{hs_norm, rho_distance, Subspace, SymmetricOperator};
use crate::polar::{l2_norm, polar_decompose, select_extremes, PolarSample};
use crate::sim::{CurveSampler, Seed};

/// Normalized eigenvalues of the extreme and full-sample estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeComparison {
    pub extreme: Vec<f64>,
    pub full: Vec<f64>,
}

impl ScreeComparison {
    /// Share of the spectrum carried by the first `p` eigenvalues of each
    /// series, as `(extreme, full)`.
    pub fn leading_share(&self, p: usize) -> (f64, f64) {
        let p_e = p.min(self.extreme.len());
        let p_f = p.min(self.full.len());
        (self.extreme[..p_e].iter().sum(), self.full[..p_f].iter().sum())
    }
}

pub fn scree_comparison(p: &PolarSample, k: usize) -> Result<ScreeComparison> {
    Ok(ScreeComparison {
        extreme: scree(&empirical_extreme_cov(p, k)?)?,
        full: scree(&full_sample_cov(p)?)?,
    })
}

/// `ρ` between the leading `dim`-dimensional eigenspace of `Ĉ_k` and
/// `target`.
pub fn eigenfunction_recovery(p: &PolarSample, k: usize, dim: usize, target: &Subspace) -> Result<f64> {
    if target.ambient_dim() != p.d() {
        return Err(FxError::DimensionMismatch {
            expected: p.d(),
            found: target.ambient_dim(),
        });
    }
    let c = empirical_extreme_cov(p, k)?;
    let lead = leading_subspace_of(&c.operator, dim)?;
    rho_distance(&lead.subspace, target)
}

/// How the validation set is chosen in [`reconstruction_cv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMode {
    /// `v` angles drawn uniformly from the top `k`, fresh per replication.
    RandomCv,
    /// The `v` most extreme angles, fixed across replications.
    TailHoldout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub p: usize,
    pub v: usize,
    pub reps: usize,
    pub mode: CvMode,
    pub seed: u64,
}

impl CvConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.p == 0 {
            return Err(FxError::invalid("p", "must be at least 1"));
        }
        if self.v == 0 || self.v >= self.k {
            return Err(FxError::invalid("v", format!("must lie in 1..{}, got {}", self.k, self.v)));
        }
        if self.k > n {
            return Err(FxError::invalid("k", format!("must not exceed n = {n}, got {}", self.k)));
        }
        if self.reps == 0 {
            return Err(FxError::invalid("reps", "must be at least 1"));
        }
        Ok(())
    }
}

/// The three training sets compared by [`reconstruction_cv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvVariant {
    /// Top `k` angles minus the validation set.
    Extreme,
    /// All angles minus the validation set.
    Full,
    /// Uniform subsample of the non-validation angles, of the same size as
    /// the extreme training set.
    Subsample,
}

impl CvVariant {
    pub const ALL: [CvVariant; 3] = [CvVariant::Extreme, CvVariant::Full, CvVariant::Subsample];

    pub fn name(self) -> &'static str {
        match self {
            CvVariant::Extreme => "extreme",
            CvVariant::Full => "full",
            CvVariant::Subsample => "subsample",
        }
    }
}

/// Five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(FxError::Empty("summary of an empty series"));
        }
        let mut data = Data::new(values.to_vec());
        Ok(Summary {
            min: data.min(),
            q1: data.lower_quartile(),
            median: data.median(),
            q3: data.upper_quartile(),
            max: data.max(),
            mean: data.mean().expect("nonempty"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub config: CvConfig,
    /// Mean validation error per replication, indexed like
    /// [`CvVariant::ALL`].
    pub replication_errors: Vec<[f64; 3]>,
    /// Errors whose spread the summaries describe: the replication means
    /// under random validation sets, and the individual validation angles
    /// (pooled over replications) under the tail holdout.
    pub samples: [Vec<f64>; 3],
    pub summaries: [Summary; 3],
}

impl CvResult {
    pub fn summary(&self, variant: CvVariant) -> &Summary {
        &self.summaries[variant as usize]
    }
}

fn leading_of(sum: &SymmetricOperator, count: usize, p: usize) -> Result<Subspace> {
    Ok(leading_subspace_of(&sum.scale(1.0 / count as f64), p)?.subspace)
}

/// Validation reconstruction error of the `p`-dimensional principal
/// eigenspace of three training variants.
///
/// The validation angles are excluded from every training set. Replication
/// `r` draws from stream `r` of `cfg.seed`.
pub fn reconstruction_cv(p: &PolarSample, cfg: &CvConfig) -> Result<CvResult> {
    cfg.validate(p.n())?;
    let d = p.d();
    if cfg.p >= d {
        return Err(FxError::invalid("p", format!("must be below d = {d}, got {}", cfg.p)));
    }
    let w = p.grid_weight();
    let top = select_extremes(p, cfg.k)?.indices;
    let defined = p.defined_indices();
    let train_size = cfg.k - cfg.v;
    if defined.len() - cfg.v < train_size {
        return Err(FxError::invalid("k", "not enough angles outside the validation set"));
    }
    let sum_of = |idx: &[usize]| -> Result<SymmetricOperator> {
        let angles = p.angles_of(idx)?;
        Ok(angular_second_moment(angles, d, w)?.scale(idx.len() as f64))
    };
    let all_sum = sum_of(&defined)?;
    let angle_errors = |v: &Subspace, idx: &[usize]| -> Result<Vec<f64>> {
        idx.iter()
            .map(|&i| reconstruction_error(std::iter::once(p.angle(i).expect("defined")), w, v))
            .collect()
    };

    let mut replication_errors = Vec::with_capacity(cfg.reps);
    let mut samples: [Vec<f64>; 3] = Default::default();
    for r in 0..cfg.reps {
        let mut rng = Seed::new(cfg.seed, r as u64).rng();
        let validation: Vec<usize> = match cfg.mode {
            CvMode::RandomCv => sample_indices(&mut rng, cfg.k, cfg.v).into_iter().map(|j| top[j]).collect(),
            CvMode::TailHoldout => top[..cfg.v].to_vec(),
        };
        let mut in_validation = vec![false; p.n()];
        validation.iter().for_each(|&i| in_validation[i] = true);
        let training: Vec<usize> = top.iter().copied().filter(|&i| !in_validation[i]).collect();
        let rest: Vec<usize> = defined.iter().copied().filter(|&i| !in_validation[i]).collect();
        let sub: Vec<usize> = sample_indices(&mut rng, rest.len(), train_size)
            .into_iter()
            .map(|j| rest[j])
            .collect();

        let spaces = [
            leading_of(&sum_of(&training)?, training.len(), cfg.p)?,
            leading_of(&all_sum.sub(&sum_of(&validation)?)?, rest.len(), cfg.p)?,
            leading_of(&sum_of(&sub)?, sub.len(), cfg.p)?,
        ];
        let mut means = [0.0; 3];
        for (j, space) in spaces.iter().enumerate() {
            let errs = angle_errors(space, &validation)?;
            means[j] = errs.iter().sum::<f64>() / errs.len() as f64;
            match cfg.mode {
                CvMode::RandomCv => samples[j].push(means[j]),
                CvMode::TailHoldout => samples[j].extend(errs),
            }
        }
        replication_errors.push(means);
    }
    let summaries = [Summary::of(&samples[0])?, Summary::of(&samples[1])?, Summary::of(&samples[2])?];
    Ok(CvResult {
        config: *cfg,
        replication_errors,
        samples,
        summaries,
    })
}

/// Empirical upper quantiles of `‖X‖` for each exceedance probability in
/// `tail_probs`, from `draws` fresh curves.
pub fn estimate_tail_quantiles<M: CurveSampler>(
    model: &M,
    tail_probs: &[f64],
    draws: usize,
    seed: Seed,
) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(FxError::invalid("draws", "must be at least 1"));
    }
    let mut rng = seed.rng();
    let mut row = vec![0.0; model.d()];
    let mut norms = Vec::with_capacity(draws);
    for _ in 0..draws {
        model.draw_into(&mut rng, &mut row);
        norms.push(l2_norm(&row, model.grid_weight()));
    }
    norms.sort_by(|a, b| b.total_cmp(a));
    tail_probs
        .iter()
        .map(|&q| {
            if !(q > 0.0 && q < 1.0) {
                return Err(FxError::invalid("tail_probs", format!("must lie in (0, 1), got {q}")));
            }
            let rank = ((q * draws as f64).round() as usize).clamp(1, draws);
            Ok(norms[rank - 1])
        })
        .collect()
}

/// Monte Carlo stand-in for `C_t = E[Θ ⊗ Θ | ‖X‖ ≥ t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCovariance {
    pub threshold: f64,
    pub operator: SymmetricOperator,
    pub exceedances: usize,
    pub draws: usize,
    /// `3 / √exceedances`, added to tolerances that compare against it.
    pub budget: f64,
}

/// Oracles for several thresholds from one stream of `draws` curves.
pub fn oracle_covariances<M: CurveSampler>(
    model: &M,
    thresholds: &[f64],
    draws: usize,
    seed: Seed,
) -> Result<Vec<OracleCovariance>> {
    let d = model.d();
    let w = model.grid_weight();
    let mut rng = seed.rng();
    let mut row = vec![0.0; d];
    let mut sums = vec![vec![0.0; d * d]; thresholds.len()];
    let mut counts = vec![0usize; thresholds.len()];
    for _ in 0..draws {
        model.draw_into(&mut rng, &mut row);
        let r = l2_norm(&row, w);
        if !(r > 0.0) {
            continue;
        }
        for (t, &threshold) in thresholds.iter().enumerate() {
            if r >= threshold {
                let acc = &mut sums[t];
                for i in 0..d {
                    let ti = row[i] / r;
                    for j in i..d {
                        acc[i * d + j] += ti * row[j] / r;
                    }
                }
                counts[t] += 1;
            }
        }
    }
    thresholds
        .iter()
        .zip(sums)
        .zip(counts)
        .map(|((&threshold, mut acc), count)| {
            if count == 0 {
                return Err(FxError::Degenerate(format!(
                    "no oracle draw exceeds the threshold {threshold}"
                )));
            }
            let scale = w / count as f64;
            for i in 0..d {
                for j in i..d {
                    let v = acc[i * d + j] * scale;
                    acc[i * d + j] = v;
                    acc[j * d + i] = v;
                }
            }
            Ok(OracleCovariance {
                threshold,
                operator: SymmetricOperator::from_row_major(d, acc)?,
                exceedances: count,
                draws,
                budget: 3.0 / (count as f64).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageConfig {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub reps: usize,
    pub seed: u64,
}

/// Per-replication deviations of the extreme estimators from the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub config: CoverageConfig,
    pub bound: BoundReport,
    pub oracle_budget: f64,
    /// `‖Ĉ_k − C_t‖_HS`.
    pub total_errors: Vec<f64>,
    /// `‖Ĉ_k − C̄_t‖_HS`.
    pub threshold_errors: Vec<f64>,
    /// `‖C̄_t − C_t‖_HS`.
    pub sampling_errors: Vec<f64>,
}

impl CoverageReport {
    /// Replications with `‖Ĉ_k − C_t‖ ≤ B(n, k, δ) + oracle budget`.
    pub fn total_hits(&self) -> usize {
        let limit = self.bound.total + self.oracle_budget;
        self.total_errors.iter().filter(|&&e| e <= limit).count()
    }

    /// Replications with `‖Ĉ_k − C̄_t‖` within the threshold bound; no
    /// oracle enters this comparison.
    pub fn threshold_hits(&self) -> usize {
        self.threshold_errors.iter().filter(|&&e| e <= self.bound.threshold).count()
    }

    pub fn mean_sampling_error(&self) -> f64 {
        self.sampling_errors.iter().sum::<f64>() / self.sampling_errors.len() as f64
    }

    /// Standard error of [`Self::mean_sampling_error`].
    pub fn sampling_error_se(&self) -> f64 {
        let m = self.mean_sampling_error();
        let n = self.sampling_errors.len() as f64;
        let var = self.sampling_errors.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

/// Runs `cfg.reps` independent samples of size `n` and measures
/// `Ĉ_k` and the pseudo-empirical `C̄_t` (normalized by the expected
/// exceedance count `k`) against the oracle at `t = oracle.threshold`,
/// which should be the `1 − k/n` quantile of `‖X‖`.
pub fn concentration_coverage<M: CurveSampler>(
    model: &M,
    cfg: &CoverageConfig,
    oracle: &OracleCovariance,
) -> Result<CoverageReport> {
    if cfg.reps == 0 {
        return Err(FxError::invalid("reps", "must be at least 1"));
    }
    if oracle.operator.dim() != model.d() {
        return Err(FxError::DimensionMismatch {
            expected: model.d(),
            found: oracle.operator.dim(),
        });
    }
    let bound = total_deviation_bound(cfg.n, cfg.k, cfg.delta)?;
    let mut report = CoverageReport {
        config: *cfg,
        bound,
        oracle_budget: oracle.budget,
        total_errors: Vec::with_capacity(cfg.reps),
        threshold_errors: Vec::with_capacity(cfg.reps),
        sampling_errors: Vec::with_capacity(cfg.reps),
    };
    for r in 0..cfg.reps {
        let x = crate::sim::sample_curves(model, cfg.n, Seed::new(cfg.seed, r as u64))?;
        let p = polar_decompose(&x);
        let c_hat = empirical_extreme_cov(&p, cfg.k)?.operator;
        let c_bar = pseudo_empirical_cov(&p, oracle.threshold, cfg.k as f64)?;
        report.total_errors.push(hs_norm(&c_hat.sub(&oracle.operator)?));
        report.threshold_errors.push(hs_norm(&c_hat.sub(&c_bar)?));
        report.sampling_errors.push(hs_norm(&c_bar.sub(&oracle.operator)?));
    }
    Ok(report)
}

/// One-sided exact binomial test of `H0: p ≥ p0` after observing `hits`
/// successes in `trials`. Returns the p-value `P[Bin(trials, p0) ≤ hits]`.
pub fn binomial_lower_p_value(hits: usize, trials: usize, p0: f64) -> Result<f64> {
    if hits > trials {
        return Err(FxError::invalid("hits", format!("{hits} exceeds {trials} trials")));
    }
    let b = Binomial::new(p0, trials as u64)
        .map_err(|e| FxError::invalid("p0", e.to_string()))?;
    Ok(b.cdf(hits as u64))
}
