//! Dense symmetric linear algebra on discretized operators.
//!
//! Operators are stored row-major in a flat `Vec<f64>`. Dimensions here are
//! small (a few dozen grid points), so a cyclic Jacobi eigensolver is used
//! throughout: it keeps eigenvectors orthonormal to working precision and
//! needs no external LAPACK.

use crate::error::{FxError, Result};

/// Relative off-diagonal threshold at which the Jacobi sweeps stop.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Maximum number of full cyclic sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// A real symmetric `d x d` matrix, the discretized form of a
/// self-adjoint operator on L2.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricOperator {
    /// Builds an operator from row-major entries, symmetrizing as
    /// `(a_ij + a_ji) / 2` so the result is exactly symmetric.
    pub fn from_row_major(dim: usize, mut entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(FxError::invalid("dim", "operator dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(FxError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let s = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                entries[i * dim + j] = s;
                entries[j * dim + i] = s;
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(FxError::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(dim, entries)
    }

    /// Caller guarantees `entries` is exactly symmetric.
    pub(crate) fn from_symmetric_entries(dim: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_row_major(dim, vec![0.0; dim * dim])
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self::from_row_major(dim, entries)
    }

    /// `u uᵀ` for a single vector.
    pub fn outer(u: &[f64]) -> Result<Self> {
        let dim = u.len();
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = u[i] * u[j];
            }
        }
        Self::from_row_major(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_symmetric_entries(self.dim, entries))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_symmetric_entries(self.dim, entries))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_symmetric_entries(self.dim, self.entries.iter().map(|a| a * c).collect())
    }

    /// Matrix-vector product.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim {
            return Err(FxError::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(u).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `uᵀ A u`.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64> {
        let au = self.apply(u)?;
        Ok(au.iter().zip(u).map(|(a, b)| a * b).sum())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(FxError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

/// Eigenvalues in nonincreasing order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    dim: usize,
    values: Vec<f64>,
    // column j of this row-major d x d matrix is the j-th eigenvector
    vectors: Vec<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.vectors[i * self.dim + j]).collect()
    }

    /// Row-major eigenvector matrix (eigenvectors are columns).
    pub fn eigenvectors(&self) -> &[f64] {
        &self.vectors
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> SymmetricOperator {
        let d = self.dim;
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let s: f64 = (0..d)
                    .map(|m| self.vectors[i * d + m] * self.values[m] * self.vectors[j * d + m])
                    .sum();
                entries[i * d + j] = s;
                entries[j * d + i] = s;
            }
        }
        SymmetricOperator::from_symmetric_entries(d, entries)
    }

    /// Span of the first `p` eigenvectors.
    pub fn leading_subspace(&self, p: usize) -> Result<Subspace> {
        if p == 0 || p > self.dim {
            return Err(FxError::invalid(
                "p",
                format!("subspace dimension must lie in 1..={}, got {p}", self.dim),
            ));
        }
        let d = self.dim;
        let mut basis = vec![0.0; d * p];
        for i in 0..d {
            basis[i * p..(i + 1) * p].copy_from_slice(&self.vectors[i * d..i * d + p]);
        }
        Ok(Subspace {
            ambient: d,
            dim: p,
            basis,
        })
    }
}

/// Orthonormal basis of a `p`-dimensional subspace of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    dim: usize,
    // ambient x dim, row-major, orthonormal columns
    basis: Vec<f64>,
}

impl Subspace {
    /// Wraps columns that are already orthonormal (checked to 1e-10).
    pub fn from_orthonormal_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let (ambient, dim) = Self::shape_of(columns)?;
        for a in 0..dim {
            for b in a..dim {
                let dot: f64 = columns[a].iter().zip(&columns[b]).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                if (dot - target).abs() > ORTHONORMAL_TOLERANCE {
                    return Err(FxError::invalid(
                        "basis",
                        format!("columns {a} and {b} are not orthonormal (inner product {dot})"),
                    ));
                }
            }
        }
        Ok(Self::from_columns_unchecked(ambient, columns))
    }

    /// Orthonormalizes spanning vectors by twice-iterated modified
    /// Gram-Schmidt. Fails when the vectors are numerically dependent.
    pub fn from_spanning(vectors: &[Vec<f64>]) -> Result<Self> {
        let (ambient, _) = Self::shape_of(vectors)?;
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for (idx, v) in vectors.iter().enumerate() {
            let scale = norm(v);
            let mut w = v.clone();
            for _ in 0..2 {
                for q in &cols {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nw = norm(&w);
            if !(nw > 1e-12 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
                return Err(FxError::Degenerate(format!(
                    "spanning vector {idx} is linearly dependent on the previous ones"
                )));
            }
            w.iter_mut().for_each(|x| *x /= nw);
            cols.push(w);
        }
        Ok(Self::from_columns_unchecked(ambient, &cols))
    }

    /// `span(e_i : i in indices)`.
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Result<Self> {
        let mut cols = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= ambient {
                return Err(FxError::invalid(
                    "indices",
                    format!("coordinate {i} outside ambient dimension {ambient}"),
                ));
            }
            let mut e = vec![0.0; ambient];
            e[i] = 1.0;
            cols.push(e);
        }
        Self::from_orthonormal_columns(&cols)
    }

    pub fn full(ambient: usize) -> Result<Self> {
        Self::coordinate(ambient, &(0..ambient).collect::<Vec<_>>())
    }

    fn shape_of(columns: &[Vec<f64>]) -> Result<(usize, usize)> {
        let dim = columns.len();
        if dim == 0 {
            return Err(FxError::Empty("subspace basis"));
        }
        let ambient = columns[0].len();
        if ambient == 0 {
            return Err(FxError::invalid("basis", "ambient dimension must be at least 1"));
        }
        if dim > ambient {
            return Err(FxError::invalid(
                "basis",
                format!("{dim} vectors cannot be independent in dimension {ambient}"),
            ));
        }
        for c in columns {
            if c.len() != ambient {
                return Err(FxError::DimensionMismatch {
                    expected: ambient,
                    found: c.len(),
                });
            }
        }
        Ok((ambient, dim))
    }

    fn from_columns_unchecked(ambient: usize, columns: &[Vec<f64>]) -> Self {
        let dim = columns.len();
        let mut basis = vec![0.0; ambient * dim];
        for (j, c) in columns.iter().enumerate() {
            for i in 0..ambient {
                basis[i * dim + j] = c[i];
            }
        }
        Self {
            ambient,
            dim,
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_vector(&self, j: usize) -> Vec<f64> {
        (0..self.ambient).map(|i| self.basis[i * self.dim + j]).collect()
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|j| self.basis_vector(j)).collect()
    }

    /// Coordinates `Bᵀ u` of a vector in this basis.
    pub fn coefficients(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.ambient {
            return Err(FxError::DimensionMismatch {
                expected: self.ambient,
                found: u.len(),
            });
        }
        let mut c = vec![0.0; self.dim];
        for (i, &ui) in u.iter().enumerate() {
            let row = &self.basis[i * self.dim..(i + 1) * self.dim];
            c.iter_mut().zip(row).for_each(|(cj, b)| *cj += b * ui);
        }
        Ok(c)
    }

    /// Orthogonal projection `B Bᵀ u`.
    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        let c = self.coefficients(u)?;
        Ok((0..self.ambient)
            .map(|i| {
                self.basis[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(&c)
                    .map(|(b, cj)| b * cj)
                    .sum()
            })
            .collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &SymmetricOperator) -> f64 {
    a.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product `tr(A B)`.
pub fn hs_inner(a: &SymmetricOperator, b: &SymmetricOperator) -> Result<f64> {
    a.check_dim(b)?;
    Ok(dot(&a.entries, &b.entries))
}

/// `P = B Bᵀ`.
pub fn projection_matrix(v: &Subspace) -> SymmetricOperator {
    let d = v.ambient;
    let p = v.dim;
    let mut entries = vec![0.0; d * d];
    for i in 0..d {
        let bi = &v.basis[i * p..(i + 1) * p];
        for j in i..d {
            let s = dot(bi, &v.basis[j * p..(j + 1) * p]);
            entries[i * d + j] = s;
            entries[j * d + i] = s;
        }
    }
    SymmetricOperator::from_symmetric_entries(d, entries)
}

/// `ρ(V, W) = ‖Π_V − Π_W‖_HS`.
pub fn rho_distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    if v.ambient != w.ambient {
        return Err(FxError::DimensionMismatch {
            expected: v.ambient,
            found: w.ambient,
        });
    }
    let diff = projection_matrix(v).sub(&projection_matrix(w))?;
    Ok(hs_norm(&diff))
}

fn off_diagonal_norm(a: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            s += a[i * d + j] * a[i * d + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls to
/// `JACOBI_TOLERANCE * ‖A‖_HS`. Eigenvalues are returned in nonincreasing
/// order; each eigenvector is signed so that its largest-magnitude entry
/// (lowest index on ties) is positive.
pub fn symmetric_eigen(a: &SymmetricOperator) -> Result<EigenSystem> {
    let d = a.dim;
    let mut m = a.entries.clone();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let threshold = JACOBI_TOLERANCE * hs_norm(a);

    let mut sweeps = 0;
    while off_diagonal_norm(&m, d) > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(FxError::NoConvergence {
                sweeps,
                residual: off_diagonal_norm(&m, d),
            });
        }
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * d + p];
                let aqq = m[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    // |theta| overflowed: the rotation angle is negligible
                    0.5 / theta
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, d, p, q, c, s);
                m[p * d + p] = app - t * apq;
                m[q * d + q] = aqq + t * apq;
                m[p * d + q] = 0.0;
                m[q * d + p] = 0.0;
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[j * d + j].total_cmp(&m[i * d + i]));

    let values: Vec<f64> = order.iter().map(|&i| m[i * d + i]).collect();
    let mut vectors = vec![0.0; d * d];
    for (col, &src) in order.iter().enumerate() {
        let mut best = 0;
        for k in 1..d {
            if v[k * d + src].abs() > v[best * d + src].abs() {
                best = k;
            }
        }
        let sign = if v[best * d + src] < 0.0 { -1.0 } else { 1.0 };
        for k in 0..d {
            vectors[k * d + col] = sign * v[k * d + src];
        }
    }
    Ok(EigenSystem {
        dim: d,
        values,
        vectors,
    })
}

/// Applies the similarity `Jᵀ A J` to the off-diagonal entries of rows and
/// columns `p`, `q`. The 2x2 block is updated by the caller.
fn rotate(m: &mut [f64], d: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..d {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * d + p];
        let akq = m[k * d + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        m[k * d + p] = new_kp;
        m[p * d + k] = new_kp;
        m[k * d + q] = new_kq;
        m[q * d + k] = new_kq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn eigen_two_by_two() {
        let a = SymmetricOperator::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let es = symmetric_eigen(&a).unwrap();
        assert_close(es.eigenvalues()[0], 3.0, 1e-12);
        assert_close(es.eigenvalues()[1], 1.0, 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = es.eigenvector(0);
        assert_close(v0[0], r, 1e-12);
        assert_close(v0[1], r, 1e-12);
        let v1 = es.eigenvector(1);
        // sign convention: largest magnitude positive, ties -> lowest index
        assert_close(v1[0], r, 1e-12);
        assert_close(v1[1], -r, 1e-12);
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let es = symmetric_eigen(&SymmetricOperator::identity(3).unwrap()).unwrap();
        assert_eq!(es.eigenvalues(), &[1.0, 1.0, 1.0]);

        let a = SymmetricOperator::diagonal(&[2.0, 5.0, 0.0]).unwrap();
        let es = symmetric_eigen(&a).unwrap();
        assert_eq!(es.eigenvalues(), &[5.0, 2.0, 0.0]);
        assert_eq!(es.eigenvector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(es.eigenvector(1), vec![1.0, 0.0, 0.0]);
        assert_eq!(es.eigenvector(2), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn eigen_zero_matrix() {
        let es = symmetric_eigen(&SymmetricOperator::zeros(4).unwrap()).unwrap();
        assert!(es.eigenvalues().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn hs_norm_examples() {
        assert_eq!(hs_norm(&SymmetricOperator::zeros(3).unwrap()), 0.0);
        assert_close(hs_norm(&SymmetricOperator::identity(2).unwrap()), 2f64.sqrt(), 1e-15);
        let a = SymmetricOperator::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_close(hs_norm(&a), 10f64.sqrt(), 1e-15);
    }

    #[test]
    fn construction_symmetrizes() {
        let a = SymmetricOperator::from_rows(&[vec![1.0, 2.0], vec![4.0, 1.0]]).unwrap();
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 3.0);
        assert!(SymmetricOperator::from_row_major(0, vec![]).is_err());
        assert!(SymmetricOperator::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn projection_examples() {
        let e1 = Subspace::coordinate(2, &[0]).unwrap();
        assert_eq!(projection_matrix(&e1).entries(), &[1.0, 0.0, 0.0, 0.0]);
        let full = Subspace::full(2).unwrap();
        assert_eq!(projection_matrix(&full).entries(), &[1.0, 0.0, 0.0, 1.0]);
        let diag = Subspace::from_spanning(&[vec![1.0, 1.0]]).unwrap();
        for x in projection_matrix(&diag).entries() {
            assert_close(*x, 0.5, 1e-15);
        }
    }

    #[test]
    fn rho_examples() {
        let e1 = Subspace::coordinate(3, &[0]).unwrap();
        let e2 = Subspace::coordinate(3, &[1]).unwrap();
        assert_eq!(rho_distance(&e1, &e1).unwrap(), 0.0);
        assert_close(rho_distance(&e1, &e2).unwrap(), 2f64.sqrt(), 1e-15);
        let mid = Subspace::from_spanning(&[vec![1.0, 1.0, 0.0]]).unwrap();
        assert_close(rho_distance(&e1, &mid).unwrap(), 1.0, 1e-15);
        let other = Subspace::coordinate(2, &[0]).unwrap();
        assert!(matches!(
            rho_distance(&e1, &other),
            Err(FxError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spanning_rejects_dependent_vectors() {
        let r = Subspace::from_spanning(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(r, Err(FxError::Degenerate(_))));
        assert!(Subspace::from_orthonormal_columns(&[vec![1.0, 1.0]]).is_err());
        assert!(Subspace::from_spanning(&[]).is_err());
    }

    #[test]
    fn leading_subspace_bounds() {
        let es = symmetric_eigen(&SymmetricOperator::identity(3).unwrap()).unwrap();
        assert!(es.leading_subspace(0).is_err());
        assert!(es.leading_subspace(4).is_err());
        assert_eq!(es.leading_subspace(3).unwrap().dim(), 3);
    }

    #[test]
    fn nonconvergence_reports_residual() {
        let e = FxError::NoConvergence {
            sweeps: 100,
            residual: 1.5e-3,
        };
        assert!(e.to_string().contains("1.5e-3"));
    }
}
