//! Functional samples on a regular grid, their L2 geometry, and the
//! radius/angle decomposition with radial order statistics.

use crate::error::{FxError, Result};

/// `n` curves observed on a common grid of `d` points.
///
/// Inner products are `grid_weight * Σ f_j g_j`: weight 1 treats the grid
/// values as Euclidean coordinates, weight `1/d` gives the Riemann sum on
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    n: usize,
    d: usize,
    grid_weight: f64,
    values: Vec<f64>,
}

impl FunctionalSample {
    pub fn new(n: usize, d: usize, values: Vec<f64>, grid_weight: f64) -> Result<Self> {
        if n == 0 {
            return Err(FxError::Empty("functional sample has no curves"));
        }
        if d == 0 {
            return Err(FxError::Empty("functional sample has no grid points"));
        }
        if !(grid_weight > 0.0 && grid_weight.is_finite()) {
            return Err(FxError::invalid(
                "grid_weight",
                format!("must be positive and finite, got {grid_weight}"),
            ));
        }
        if values.len() != n * d {
            return Err(FxError::DimensionMismatch {
                expected: n * d,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(FxError::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        Ok(Self {
            n,
            d,
            grid_weight,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], grid_weight: f64) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(FxError::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values, grid_weight)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn grid_weight(&self) -> f64 {
        self.grid_weight
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn with_grid_weight(mut self, grid_weight: f64) -> Result<Self> {
        if !(grid_weight > 0.0 && grid_weight.is_finite()) {
            return Err(FxError::invalid(
                "grid_weight",
                format!("must be positive and finite, got {grid_weight}"),
            ));
        }
        self.grid_weight = grid_weight;
        Ok(self)
    }

    /// `c * X` for every curve.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.d,
            self.values.iter().map(|v| v * c).collect(),
            self.grid_weight,
        )
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(FxError::invalid("indices", format!("row {i} out of range")));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(indices.len(), self.d, values, self.grid_weight)
    }

    /// L2 norm of every curve.
    pub fn norms(&self) -> Vec<f64> {
        self.rows().map(|r| l2_norm(r, self.grid_weight)).collect()
    }
}

/// `⟨f, g⟩ = grid_weight * Σ f_j g_j`.
pub fn l2_inner(f: &[f64], g: &[f64], grid_weight: f64) -> Result<f64> {
    if f.len() != g.len() {
        return Err(FxError::DimensionMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    Ok(grid_weight * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>())
}

/// Cell midpoints `(j + 1/2) / d` of a regular grid on `[0, 1]`.
pub fn midpoint_grid(d: usize) -> Vec<f64> {
    (0..d).map(|j| (j as f64 + 0.5) / d as f64).collect()
}

pub fn l2_norm(f: &[f64], grid_weight: f64) -> f64 {
    (grid_weight * f.iter().map(|a| a * a).sum::<f64>()).sqrt()
}

/// Radii `R_i = ‖X_i‖` and angles `Θ_i = X_i / R_i`.
///
/// Curves of norm zero keep radius 0 and an all-zero placeholder angle;
/// they count towards `n` but never take part in angular computations.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSample {
    d: usize,
    grid_weight: f64,
    radii: Vec<f64>,
    angles: Vec<f64>,
    order: Vec<usize>,
}

impl PolarSample {
    pub fn n(&self) -> usize {
        self.radii.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn grid_weight(&self) -> f64 {
        self.grid_weight
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Permutation listing rows by nonincreasing radius, ties by row index.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_defined(&self, i: usize) -> bool {
        self.radii[i] > 0.0
    }

    /// The angle of row `i`, or `None` when the curve is zero.
    pub fn angle(&self, i: usize) -> Option<&[f64]> {
        self.is_defined(i)
            .then(|| &self.angles[i * self.d..(i + 1) * self.d])
    }

    /// Number of curves with a defined angle.
    pub fn defined_count(&self) -> usize {
        self.radii.iter().filter(|&&r| r > 0.0).count()
    }

    /// Row indices of all curves with a defined angle, ascending.
    pub fn defined_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.is_defined(i)).collect()
    }

    /// Angles of the listed rows. Rows with undefined angles are an error.
    pub fn angles_of<'a>(&'a self, indices: &'a [usize]) -> Result<Vec<&'a [f64]>> {
        indices
            .iter()
            .map(|&i| {
                if i >= self.n() {
                    return Err(FxError::invalid("indices", format!("row {i} out of range")));
                }
                self.angle(i).ok_or_else(|| {
                    FxError::invalid("indices", format!("row {i} has zero norm and no angle"))
                })
            })
            .collect()
    }
}

pub fn polar_decompose(x: &FunctionalSample) -> PolarSample {
    let d = x.d;
    let mut radii = Vec::with_capacity(x.n);
    let mut angles = vec![0.0; x.n * d];
    for (i, row) in x.rows().enumerate() {
        let r = l2_norm(row, x.grid_weight);
        if r > 0.0 {
            for (a, v) in angles[i * d..(i + 1) * d].iter_mut().zip(row) {
                *a = v / r;
            }
        }
        radii.push(r);
    }
    let order = radial_order(&radii);
    PolarSample {
        d,
        grid_weight: x.grid_weight,
        radii,
        angles,
        order,
    }
}

fn radial_order(radii: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..radii.len()).collect();
    // stable sort keeps ascending index among equal radii
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    order
}

/// The `k` curves of largest norm and the empirical threshold `R_(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremes {
    pub indices: Vec<usize>,
    pub threshold: f64,
}

/// Selects the top-`k` curves by radius. Ties at the threshold are broken
/// by ascending row index so exactly `k` rows come back.
pub fn select_extremes(p: &PolarSample, k: usize) -> Result<Extremes> {
    let n = p.n();
    if k == 0 || k > n {
        return Err(FxError::invalid("k", format!("must lie in 1..={n}, got {k}")));
    }
    let defined = p.defined_count();
    if k > defined {
        return Err(FxError::invalid(
            "k",
            format!("only {defined} curves have nonzero norm, cannot select {k}"),
        ));
    }
    let indices = p.order[..k].to_vec();
    let threshold = p.radii[indices[k - 1]];
    Ok(Extremes { indices, threshold })
}

/// Entrywise square root; negative entries are rejected.
pub fn sqrt_transform(x: &FunctionalSample) -> Result<FunctionalSample> {
    let mut values = Vec::with_capacity(x.values.len());
    for (pos, &v) in x.values.iter().enumerate() {
        if v < 0.0 {
            return Err(FxError::NegativeEntry {
                row: pos / x.d,
                col: pos % x.d,
                value: v,
            });
        }
        values.push(v.sqrt());
    }
    FunctionalSample::new(x.n, x.d, values, x.grid_weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: &[Vec<f64>]) -> FunctionalSample {
        FunctionalSample::from_rows(rows, 1.0).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(l2_inner(&[1.0; 4], &[1.0; 4], 0.25).unwrap(), 1.0);
        assert_eq!(l2_inner(&[1.0, 0.0], &[0.0, 1.0], 0.3).unwrap(), 0.0);
        assert_eq!(l2_inner(&[3.0, 4.0], &[3.0, 4.0], 1.0).unwrap(), 25.0);
        assert!(l2_inner(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn polar_three_four_five() {
        let p = polar_decompose(&sample(&[vec![3.0, 4.0], vec![0.0, 0.0]]));
        assert_eq!(p.radii(), &[5.0, 0.0]);
        let a = p.angle(0).unwrap();
        assert!((a[0] - 0.6).abs() < 1e-15 && (a[1] - 0.8).abs() < 1e-15);
        assert!(p.angle(1).is_none());
        assert_eq!(p.defined_count(), 1);
    }

    #[test]
    fn polar_homogeneity() {
        let u = [0.6, 0.0, -0.8];
        let c = 7.25;
        let p = polar_decompose(&sample(&[u.iter().map(|x| c * x).collect()]));
        assert!((p.radii()[0] - c).abs() < 1e-12);
        for (a, b) in p.angle(0).unwrap().iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_respects_grid_weight() {
        let x = FunctionalSample::from_rows(&[vec![2.0; 4]], 0.25).unwrap();
        let p = polar_decompose(&x);
        assert!((p.radii()[0] - 2.0).abs() < 1e-15);
        assert!((l2_norm(p.angle(0).unwrap(), 0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extremes_examples() {
        let p = polar_decompose(&sample(&[vec![5.0], vec![1.0], vec![3.0]]));
        let e = select_extremes(&p, 2).unwrap();
        assert_eq!(e.indices, vec![0, 2]);
        assert_eq!(e.threshold, 3.0);

        let p = polar_decompose(&sample(&[vec![2.0], vec![2.0], vec![2.0]]));
        let e = select_extremes(&p, 2).unwrap();
        assert_eq!(e.indices, vec![0, 1]);
        assert_eq!(e.threshold, 2.0);

        let p = polar_decompose(&sample(&[vec![4.0], vec![1.5], vec![3.0]]));
        let e = select_extremes(&p, 3).unwrap();
        assert_eq!(e.indices.len(), 3);
        assert_eq!(e.threshold, 1.5);
    }

    #[test]
    fn extremes_errors() {
        let p = polar_decompose(&sample(&[vec![1.0], vec![0.0], vec![2.0]]));
        assert!(select_extremes(&p, 0).is_err());
        assert!(select_extremes(&p, 4).is_err());
        // the zero curve is never selectable
        assert!(select_extremes(&p, 3).is_err());
        assert_eq!(select_extremes(&p, 2).unwrap().indices, vec![2, 0]);
    }

    #[test]
    fn sqrt_examples() {
        let s = sqrt_transform(&sample(&[vec![4.0, 9.0], vec![0.0, 1.0], vec![2.0, 8.0]])).unwrap();
        assert_eq!(s.row(0), &[2.0, 3.0]);
        assert_eq!(s.row(1), &[0.0, 1.0]);
        assert!((s.row(2)[0].powi(2) - 2.0).abs() < 1e-15);
        assert!((s.row(2)[1].powi(2) - 8.0).abs() < 1e-14);

        let err = sqrt_transform(&sample(&[vec![1.0, 1.0], vec![1.0, -0.5]])).unwrap_err();
        assert_eq!(
            err,
            FxError::NegativeEntry {
                row: 1,
                col: 1,
                value: -0.5
            }
        );
    }

    #[test]
    fn sample_validation() {
        assert!(FunctionalSample::new(1, 2, vec![1.0, f64::NAN], 1.0).is_err());
        assert!(FunctionalSample::new(1, 2, vec![1.0, 1.0], 0.0).is_err());
        assert!(FunctionalSample::new(0, 2, vec![], 1.0).is_err());
        assert!(FunctionalSample::from_rows(&[vec![1.0], vec![1.0, 2.0]], 1.0).is_err());
    }
}
