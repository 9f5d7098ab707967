//! Uncentered angular covariance operators and their leading eigenspaces.
//!
//! Every estimator here is a mean of rank-one operators `θ ⊗ θ`. On the grid
//! this is the matrix `w θ θᵀ`, where `w` is the grid weight: with that
//! scaling each term has unit trace and its eigenvectors are the
//! Euclidean-normalized coefficient vectors `√w θ`. All subspaces produced
//! or consumed in this module live in those coefficient coordinates; since
//! the map is a uniform rescaling, spans of grid curves are the same sets
//! either way.

use crate::error::{FxError, Result};
use crate::linalg::{symmetric_eigen, Subspace, SymmetricOperator};
use crate::polar::{select_extremes, PolarSample};

/// Which sample of angles an estimate was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceVariant {
    ExtremeTopK,
    FixedThreshold,
    FullSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub operator: SymmetricOperator,
    pub k_used: usize,
    pub threshold: f64,
    pub variant: CovarianceVariant,
}

/// `(1/m) Σ w θ θᵀ` over the given angles.
pub fn angular_second_moment<'a, I>(angles: I, d: usize, grid_weight: f64) -> Result<SymmetricOperator>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut acc = vec![0.0; d * d];
    let mut count = 0usize;
    for theta in angles {
        if theta.len() != d {
            return Err(FxError::DimensionMismatch {
                expected: d,
                found: theta.len(),
            });
        }
        for i in 0..d {
            let ti = theta[i];
            if ti == 0.0 {
                continue;
            }
            let row = &mut acc[i * d..(i + 1) * d];
            for j in i..d {
                row[j] += ti * theta[j];
            }
        }
        count += 1;
    }
    if count == 0 {
        return Err(FxError::Empty("no angles to average"));
    }
    let scale = grid_weight / count as f64;
    for i in 0..d {
        for j in i..d {
            let v = acc[i * d + j] * scale;
            acc[i * d + j] = v;
            acc[j * d + i] = v;
        }
    }
    Ok(SymmetricOperator::from_symmetric_entries(d, acc))
}

/// `Ĉ_k = (1/k) Σ_{i≤k} Θ_(i) ⊗ Θ_(i)` over the `k` largest radii.
pub fn empirical_extreme_cov(p: &PolarSample, k: usize) -> Result<CovarianceEstimate> {
    let extremes = select_extremes(p, k)?;
    let angles = p.angles_of(&extremes.indices)?;
    Ok(CovarianceEstimate {
        operator: angular_second_moment(angles, p.d(), p.grid_weight())?,
        k_used: k,
        threshold: extremes.threshold,
        variant: CovarianceVariant::ExtremeTopK,
    })
}

/// Average of `Θ_i ⊗ Θ_i` over all curves with `R_i ≥ t`, divided by the
/// observed exceedance count.
pub fn empirical_fixed_threshold_cov(p: &PolarSample, t: f64) -> Result<CovarianceEstimate> {
    let angles: Vec<&[f64]> = (0..p.n())
        .filter(|&i| p.radii()[i] >= t)
        .filter_map(|i| p.angle(i))
        .collect();
    if angles.is_empty() {
        return Err(FxError::Degenerate(format!("no curve has radius at or above {t}")));
    }
    let k_used = angles.len();
    Ok(CovarianceEstimate {
        operator: angular_second_moment(angles, p.d(), p.grid_weight())?,
        k_used,
        threshold: t,
        variant: CovarianceVariant::FixedThreshold,
    })
}

/// `Ĉ_n`: every curve with a defined angle.
pub fn full_sample_cov(p: &PolarSample) -> Result<CovarianceEstimate> {
    let indices = p.defined_indices();
    let angles = p.angles_of(&indices)?;
    Ok(CovarianceEstimate {
        operator: angular_second_moment(angles, p.d(), p.grid_weight())?,
        k_used: indices.len(),
        threshold: 0.0,
        variant: CovarianceVariant::FullSample,
    })
}

/// `C̄_t = (1/m) Σ_i Θ_i ⊗ Θ_i 1{R_i ≥ t}` with a fixed divisor `m`, the
/// expected number of exceedances `n P[R ≥ t]`. Only computable when the
/// tail probability at `t` is known, e.g. in simulation.
pub fn pseudo_empirical_cov(p: &PolarSample, t: f64, expected_exceedances: f64) -> Result<SymmetricOperator> {
    if !(expected_exceedances > 0.0) {
        return Err(FxError::invalid(
            "expected_exceedances",
            format!("must be positive, got {expected_exceedances}"),
        ));
    }
    let d = p.d();
    let angles: Vec<&[f64]> = (0..p.n())
        .filter(|&i| p.radii()[i] >= t)
        .filter_map(|i| p.angle(i))
        .collect();
    if angles.is_empty() {
        return SymmetricOperator::zeros(d);
    }
    let count = angles.len() as f64;
    let mean = angular_second_moment(angles, d, p.grid_weight())?;
    Ok(mean.scale(count / expected_exceedances))
}

/// Leading eigenspace of an estimate with its half eigen gap.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingSubspace {
    pub subspace: Subspace,
    pub eigenvalues: Vec<f64>,
    /// `(λ_p − λ_{p+1}) / 2`, clamped at zero.
    pub eigen_gap: f64,
    /// Set when the gap vanishes, i.e. the subspace is not uniquely defined.
    pub degenerate: bool,
}

pub fn leading_subspace(c: &CovarianceEstimate, p: usize) -> Result<LeadingSubspace> {
    leading_subspace_of(&c.operator, p)
}

pub fn leading_subspace_of(op: &SymmetricOperator, p: usize) -> Result<LeadingSubspace> {
    let d = op.dim();
    if p == 0 || p >= d {
        return Err(FxError::invalid("p", format!("must lie in 1..{d}, got {p}")));
    }
    let eig = symmetric_eigen(op)?;
    let ev = eig.eigenvalues();
    let eigen_gap = ((ev[p - 1] - ev[p]) / 2.0).max(0.0);
    let scale = ev[0].abs().max(f64::MIN_POSITIVE);
    Ok(LeadingSubspace {
        subspace: eig.leading_subspace(p)?,
        eigenvalues: ev.to_vec(),
        eigen_gap,
        degenerate: eigen_gap <= 1e-12 * scale,
    })
}

/// Eigenvalues normalized by their sum.
pub fn scree(c: &CovarianceEstimate) -> Result<Vec<f64>> {
    scree_of(&c.operator)
}

pub fn scree_of(op: &SymmetricOperator) -> Result<Vec<f64>> {
    let eig = symmetric_eigen(op)?;
    let total: f64 = eig.eigenvalues().iter().sum();
    if !(total > 0.0) {
        return Err(FxError::Degenerate(format!(
            "scree needs a positive trace, got {total}"
        )));
    }
    Ok(eig.eigenvalues().iter().map(|l| l / total).collect())
}

/// Mean of `‖θ − Π_V θ‖²` over a set of angles.
pub fn reconstruction_error<'a, I>(angles: I, grid_weight: f64, v: &Subspace) -> Result<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let root_w = grid_weight.sqrt();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut u = Vec::with_capacity(v.ambient_dim());
    for theta in angles {
        u.clear();
        u.extend(theta.iter().map(|t| t * root_w));
        let proj = v.project(&u)?;
        total += u.iter().zip(&proj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        count += 1;
    }
    if count == 0 {
        return Err(FxError::Empty("reconstruction error over an empty set"));
    }
    Ok(total / count as f64)
}
