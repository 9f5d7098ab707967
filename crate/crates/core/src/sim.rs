//! Simulation models with known extremal behaviour.
//!
//! * [`MultiplicativeModel`]: `X = Σ_j Z_j A_j` with independent random
//!   factors and deterministic curves; regularly varying whenever one factor
//!   has a power-law tail.
//! * [`MixtureModel`]: `X = R e_I` with Pareto `R` and `I` drawn with weight
//!   `i^{-w}` over `i ≤ ⌊R⌋`. With `w = 2` the limit angle law is
//!   `P[Θ = e_j] = 6/(πj)²`; with `w = 1` the angular mass escapes to ever
//!   higher coordinates and the model is not regularly varying in L2.
//! * [`SpikedProcessModel`]: `X = ρ Y` where `Y` is a triangular spike of
//!   height `e^Z` on `[0, 3Z²e^{−2Z})`, so `‖Y‖₂ = Z` and `‖Y‖∞ = e^Z`.
//!
//! # Random numbers
//!
//! Every generator draws from ChaCha8 (`rand_chacha` 0.9) keyed by
//! `seed_from_u64(base)` with the 64-bit stream id set to `stream`; the
//! block counter advances with each draw. Replication `r` of an experiment
//! uses stream `r`, so streams never overlap. Pareto variates use inversion
//! `scale * U^{-1/α}` with `U` uniform on `(0, 1]`, normal variates the
//! `rand_distr` 0.5 ziggurat, and mixture indices the `rand_distr` Zipf
//! sampler (rejection-inversion). Pinning these versions pins every sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Zipf};

use crate::error::{FxError, Result};
use crate::polar::{l2_norm, midpoint_grid, select_extremes, FunctionalSample, PolarSample};

/// `(base seed, stream id)` pair identifying an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Seed {
    pub base: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(base: u64, stream: u64) -> Self {
        Self { base, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.stream);
        rng
    }
}

impl From<u64> for Seed {
    fn from(base: u64) -> Self {
        Self { base, stream: 0 }
    }
}

/// Uniform on `(0, 1]`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Pareto variate with `P[X ≥ x] = (x / scale)^{-α}` for `x ≥ scale`.
pub fn pareto<R: Rng + ?Sized>(rng: &mut R, alpha: f64, scale: f64) -> f64 {
    scale * open_unit(rng).powf(-1.0 / alpha)
}

/// Law of one factor `Z_j` of a multiplicative model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorLaw {
    /// `scale * Pareto(α)` on `[scale, ∞)`.
    Pareto { alpha: f64, scale: f64 },
    /// Centered normal with standard deviation `sigma`.
    Normal { sigma: f64 },
    /// Degenerate at a constant.
    Constant(f64),
}

impl FactorLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FactorLaw::Pareto { alpha, scale } => pareto(rng, alpha, scale),
            FactorLaw::Normal { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            FactorLaw::Constant(c) => c,
        }
    }

    /// Tail index for power-law factors.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            FactorLaw::Pareto { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            FactorLaw::Pareto { alpha, scale } => alpha > 0.0 && scale > 0.0 && alpha.is_finite() && scale.is_finite(),
            FactorLaw::Normal { sigma } => sigma >= 0.0 && sigma.is_finite(),
            FactorLaw::Constant(c) => c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(FxError::invalid("factor_laws", format!("invalid factor law {self:?}")))
        }
    }
}

/// A law on curves over a fixed grid that can be sampled row by row.
pub trait CurveSampler {
    fn d(&self) -> usize;
    fn grid_weight(&self) -> f64;
    /// Overwrites `out` (length `d`) with one fresh curve.
    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
}

/// `n` independent curves from `model`.
pub fn sample_curves<M: CurveSampler>(model: &M, n: usize, seed: impl Into<Seed>) -> Result<FunctionalSample> {
    let d = model.d();
    let mut rng = seed.into().rng();
    let mut values = vec![0.0; n * d];
    for row in values.chunks_exact_mut(d) {
        model.draw_into(&mut rng, row);
    }
    FunctionalSample::new(n, d, values, model.grid_weight())
}

/// `X = Σ_j Z_j A_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeModel {
    laws: Vec<FactorLaw>,
    basis: Vec<Vec<f64>>,
    grid_weight: f64,
}

impl MultiplicativeModel {
    pub fn new(laws: Vec<FactorLaw>, basis: Vec<Vec<f64>>, grid_weight: f64) -> Result<Self> {
        if laws.is_empty() {
            return Err(FxError::Empty("multiplicative model has no factors"));
        }
        if laws.len() != basis.len() {
            return Err(FxError::DimensionMismatch {
                expected: laws.len(),
                found: basis.len(),
            });
        }
        let d = basis[0].len();
        if d == 0 {
            return Err(FxError::Empty("basis curves have no grid points"));
        }
        for (j, curve) in basis.iter().enumerate() {
            if curve.len() != d {
                return Err(FxError::DimensionMismatch {
                    expected: d,
                    found: curve.len(),
                });
            }
            if let Some(col) = curve.iter().position(|v| !v.is_finite()) {
                return Err(FxError::NonFinite { row: j, col });
            }
        }
        for law in &laws {
            law.validate()?;
        }
        if !(grid_weight > 0.0 && grid_weight.is_finite()) {
            return Err(FxError::invalid("grid_weight", format!("must be positive, got {grid_weight}")));
        }
        Ok(Self {
            laws,
            basis,
            grid_weight,
        })
    }

    /// The six-factor toy model on `d` midpoints: two Pareto(1/2) factors
    /// (the second scaled by 0.8) carried by `sin(4πx)` and `cos(6πx)`, and
    /// four centered normal factors with standard deviations 20, 16, 12, 8
    /// carried by `sin(2πx)`, `cos(8πx)`, `sin(10πx)`, `cos(12πx)`.
    pub fn six_factor(d: usize) -> Result<Self> {
        use std::f64::consts::TAU;
        const FREQUENCIES: [f64; 6] = [2.0, 3.0, 1.0, 4.0, 5.0, 6.0];
        let x = midpoint_grid(d);
        let basis = FREQUENCIES
            .iter()
            .enumerate()
            .map(|(j, &w)| {
                x.iter()
                    .map(|&s| if j % 2 == 0 { (TAU * w * s).sin() } else { (TAU * w * s).cos() })
                    .collect()
            })
            .collect();
        let laws = vec![
            FactorLaw::Pareto { alpha: 0.5, scale: 1.0 },
            FactorLaw::Pareto { alpha: 0.5, scale: 0.8 },
            FactorLaw::Normal { sigma: 20.0 },
            FactorLaw::Normal { sigma: 0.8 * 20.0 },
            FactorLaw::Normal { sigma: 0.6 * 20.0 },
            FactorLaw::Normal { sigma: 0.4 * 20.0 },
        ];
        Self::new(laws, basis, 1.0)
    }

    pub fn laws(&self) -> &[FactorLaw] {
        &self.laws
    }

    pub fn basis_curves(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Smallest tail index among the factors, if any factor is heavy tailed.
    pub fn tail_index(&self) -> Option<f64> {
        self.laws
            .iter()
            .filter_map(FactorLaw::tail_index)
            .min_by(f64::total_cmp)
    }

    fn dominant_factors(&self) -> Vec<usize> {
        match self.tail_index() {
            Some(alpha) => (0..self.laws.len())
                .filter(|&j| self.laws[j].tail_index() == Some(alpha))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Curves carried by the heaviest-tailed factors; the limit angular
    /// measure lives on the unit sphere of their span.
    pub fn limit_support(&self) -> Vec<Vec<f64>> {
        self.dominant_factors().into_iter().map(|j| self.basis[j].clone()).collect()
    }

    /// Limit probability that an extreme is driven by each of the
    /// heaviest-tailed factors, `∝ (scale_j ‖A_j‖)^α` (Breiman's lemma).
    /// Indexed like [`Self::limit_support`].
    pub fn extreme_factor_weights(&self) -> Vec<f64> {
        let Some(alpha) = self.tail_index() else {
            return Vec::new();
        };
        let raw: Vec<f64> = self
            .dominant_factors()
            .into_iter()
            .map(|j| {
                let scale = match self.laws[j] {
                    FactorLaw::Pareto { scale, .. } => scale,
                    _ => unreachable!("dominant factors are Pareto"),
                };
                (scale * l2_norm(&self.basis[j], self.grid_weight)).powf(alpha)
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

}

impl CurveSampler for MultiplicativeModel {
    fn d(&self) -> usize {
        self.basis[0].len()
    }

    fn grid_weight(&self) -> f64 {
        self.grid_weight
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (law, curve) in self.laws.iter().zip(&self.basis) {
            let z = law.sample(rng);
            if z != 0.0 {
                out.iter_mut().zip(curve).for_each(|(o, a)| *o += z * a);
            }
        }
    }
}

pub fn sample_multiplicative(model: &MultiplicativeModel, n: usize, seed: impl Into<Seed>) -> Result<FunctionalSample> {
    sample_curves(model, n, seed)
}

/// Weighting of the conditional index law in [`MixtureModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixtureWeights {
    /// `i^{-1}`: the non-regularly-varying counterexample.
    Harmonic,
    /// `i^{-2}`: regularly varying with a discrete limit angle.
    InverseSquare,
}

impl MixtureWeights {
    pub fn exponent(self) -> u32 {
        match self {
            MixtureWeights::Harmonic => 1,
            MixtureWeights::InverseSquare => 2,
        }
    }

    pub fn from_exponent(w: u32) -> Result<Self> {
        match w {
            1 => Ok(MixtureWeights::Harmonic),
            2 => Ok(MixtureWeights::InverseSquare),
            _ => Err(FxError::invalid("weight_exponent", format!("must be 1 or 2, got {w}"))),
        }
    }
}

/// `X = R e_I`, `R ~ Pareto(α)` on `[1, ∞)`, `P[I = i | R] ∝ i^{-w}` for
/// `i ≤ ⌊R⌋`.
///
/// Curves live on `d_trunc + 1` grid points: coordinate `i − 1` carries
/// `e_i` for `i ≤ d_trunc` and the last coordinate collects every index
/// beyond the truncation, so that mass escaping the first `d_trunc`
/// directions stays measurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureModel {
    pub alpha: f64,
    pub weights: MixtureWeights,
    pub d_trunc: usize,
    pub grid_weight: f64,
}

impl MixtureModel {
    pub fn new(alpha: f64, weights: MixtureWeights, d_trunc: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FxError::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if d_trunc == 0 {
            return Err(FxError::invalid("d_trunc", "must be at least 1"));
        }
        Ok(Self {
            alpha,
            weights,
            d_trunc,
            grid_weight: 1.0,
        })
    }

    /// `P[I = i | ⌊R⌋ = m]` for `i = 1..=m`.
    pub fn conditional_weights(&self, m: usize) -> Vec<f64> {
        let w = self.weights.exponent() as i32;
        let raw: Vec<f64> = (1..=m).map(|i| (i as f64).powi(-w)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    /// `P[Θ_∞ = e_j] = 6/(πj)²` for the inverse-square weights; no limit
    /// exists for harmonic weights.
    pub fn limit_probability(&self, j: usize) -> Option<f64> {
        match self.weights {
            MixtureWeights::InverseSquare if j >= 1 => {
                Some(6.0 / (std::f64::consts::PI * j as f64).powi(2))
            }
            _ => None,
        }
    }

    fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R, r: f64) -> u64 {
        let m = r.floor().max(1.0);
        if m == 1.0 {
            return 1;
        }
        let zipf = Zipf::new(m, self.weights.exponent() as f64).expect("m >= 1 and w > 0");
        let i: f64 = zipf.sample(rng);
        (i as u64).clamp(1, m as u64)
    }
}

impl CurveSampler for MixtureModel {
    /// `d_trunc` coordinates plus the overflow coordinate.
    fn d(&self) -> usize {
        self.d_trunc + 1
    }

    fn grid_weight(&self) -> f64 {
        self.grid_weight
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let r = pareto(rng, self.alpha, 1.0);
        let i = self.draw_index(rng, r);
        let col = (i as usize).min(self.d_trunc + 1) - 1;
        out[col] = r / self.grid_weight.sqrt();
    }
}

/// Mixture draws with the exact index of each curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSample {
    pub sample: FunctionalSample,
    pub radii: Vec<f64>,
    pub indices: Vec<u64>,
    /// `indices[i] > d_trunc`: the curve sits on the overflow coordinate.
    pub overflow: Vec<bool>,
}

pub fn sample_mixture(model: &MixtureModel, n: usize, seed: impl Into<Seed>) -> Result<MixtureSample> {
    sample_mixture_above(model, n, 1.0, seed)
}

/// Mixture draws conditioned on `R ≥ threshold`. Uses the scale invariance
/// of the Pareto law: given `R ≥ t` (t ≥ 1), `R / t ~ Pareto(α)`.
pub fn sample_mixture_above(
    model: &MixtureModel,
    n: usize,
    threshold: f64,
    seed: impl Into<Seed>,
) -> Result<MixtureSample> {
    if !(threshold.is_finite()) {
        return Err(FxError::invalid("threshold", "must be finite"));
    }
    let scale = threshold.max(1.0);
    let d = model.d();
    let unit = 1.0 / model.grid_weight.sqrt();
    let mut rng = seed.into().rng();
    let mut values = vec![0.0; n * d];
    let mut radii = Vec::with_capacity(n);
    let mut indices = Vec::with_capacity(n);
    let mut overflow = Vec::with_capacity(n);
    for row in values.chunks_exact_mut(d) {
        let r = pareto(&mut rng, model.alpha, scale);
        let i = model.draw_index(&mut rng, r);
        let beyond = i > model.d_trunc as u64;
        let col = if beyond { model.d_trunc } else { (i - 1) as usize };
        row[col] = r * unit;
        radii.push(r);
        indices.push(i);
        overflow.push(beyond);
    }
    Ok(MixtureSample {
        sample: FunctionalSample::new(n, d, values, model.grid_weight)?,
        radii,
        indices,
        overflow,
    })
}

/// `X = ρ Y` with a triangular spike `Y(t) = (1 − t/w) e^Z 1{t < w}`,
/// `w = 3 Z² e^{−2Z}`, on the left-endpoint grid `t_j = j/d` with grid
/// weight `1/d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikedProcessModel {
    pub alpha_z: f64,
    pub alpha_rho: f64,
    pub d: usize,
}

impl SpikedProcessModel {
    pub fn new(alpha_z: f64, alpha_rho: f64, d: usize) -> Result<Self> {
        if !(alpha_rho > 0.0 && alpha_rho < alpha_z && alpha_z.is_finite()) {
            return Err(FxError::invalid(
                "alpha",
                format!("need 0 < alpha_rho < alpha_z, got alpha_rho = {alpha_rho}, alpha_z = {alpha_z}"),
            ));
        }
        if d == 0 {
            return Err(FxError::invalid("d", "must be at least 1"));
        }
        Ok(Self { alpha_z, alpha_rho, d })
    }

    pub fn grid_weight(&self) -> f64 {
        1.0 / self.d as f64
    }

    /// Width `3 Z² e^{−2Z}` of the spike support.
    pub fn support_width(z: f64) -> f64 {
        3.0 * z * z * (-2.0 * z).exp()
    }

    /// Grid values of `Y` for a given `Z`.
    pub fn spike(&self, z: f64) -> Vec<f64> {
        let width = Self::support_width(z);
        let height = z.exp();
        (0..self.d)
            .map(|j| {
                let t = j as f64 / self.d as f64;
                if t < width {
                    (1.0 - t / width) * height
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpikedSample {
    pub sample: FunctionalSample,
    pub z: Vec<f64>,
    pub rho: Vec<f64>,
    /// Exact `‖X‖∞ = ρ e^Z`.
    pub sup_norm: Vec<f64>,
    /// Exact `‖X‖₂ = ρ Z`.
    pub l2_norm: Vec<f64>,
    /// Grid points inside the spike support.
    pub support_points: Vec<usize>,
}

pub fn sample_spiked(model: &SpikedProcessModel, n: usize, seed: impl Into<Seed>) -> Result<SpikedSample> {
    let mut rng = seed.into().rng();
    let d = model.d;
    let mut values = Vec::with_capacity(n * d);
    let mut out = SpikedSample {
        sample: FunctionalSample::new(1, 1, vec![0.0], 1.0)?,
        z: Vec::with_capacity(n),
        rho: Vec::with_capacity(n),
        sup_norm: Vec::with_capacity(n),
        l2_norm: Vec::with_capacity(n),
        support_points: Vec::with_capacity(n),
    };
    for _ in 0..n {
        let z = pareto(&mut rng, model.alpha_z, 1.0);
        let rho = pareto(&mut rng, model.alpha_rho, 1.0);
        let sup = rho * z.exp();
        if !sup.is_finite() {
            return Err(FxError::Degenerate(format!(
                "spike height overflows for Z = {z}; increase alpha_z"
            )));
        }
        let spike = model.spike(z);
        out.support_points.push(spike.iter().filter(|&&v| v > 0.0).count());
        values.extend(spike.into_iter().map(|v| rho * v));
        out.z.push(z);
        out.rho.push(rho);
        out.sup_norm.push(sup);
        out.l2_norm.push(rho * z);
    }
    out.sample = FunctionalSample::new(n, d, values, model.grid_weight())?;
    Ok(out)
}

/// Mean over the top-`k` angles of the energy outside the first `d_cut`
/// grid coordinates, `Σ_{j > d_cut} w θ_j²`. Stays near zero for
/// asymptotically finite-dimensional angle laws.
pub fn tail_mass_beyond(p: &PolarSample, d_cut: usize, k: usize) -> Result<f64> {
    if d_cut == 0 || d_cut >= p.d() {
        return Err(FxError::invalid("d_cut", format!("must lie in 1..{}, got {d_cut}", p.d())));
    }
    let extremes = select_extremes(p, k)?;
    let w = p.grid_weight();
    let total: f64 = p
        .angles_of(&extremes.indices)?
        .into_iter()
        .map(|theta| w * theta[d_cut..].iter().map(|t| t * t).sum::<f64>())
        .sum();
    Ok((total / k as f64).clamp(0.0, 1.0))
}
