//! Dense linear-algebra kernel.
//!
//! Everything here is small and dense on purpose: vectors, symmetric
//! matrices, a Cholesky solver, a cyclic Jacobi eigensolver, Gram–Schmidt
//! with re-orthogonalization and exact minimization of a quadratic over an
//! affine subspace. All functions are pure.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Off-diagonal Frobenius norm (relative to `‖M‖_F`) at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues below `PSEUDO_SOLVE_CUTOFF * λ_max` are treated as zero.
pub const PSEUDO_SOLVE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn from_elem(n: usize, value: f64) -> Self {
        Vector(vec![value; n])
    }

    /// Unit vector `e_i` in dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Vector::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Inner product. Panics on dimension mismatch; use [`dot`] for a checked version.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: f64, x: &Vector) {
        assert_eq!(self.len(), x.len(), "axpy: dimension mismatch");
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * xi;
        }
    }

    /// `alpha * x + beta * y`
    pub fn lin_comb(alpha: f64, x: &Vector, beta: f64, y: &Vector) -> Vector {
        assert_eq!(x.len(), y.len(), "lin_comb: dimension mismatch");
        Vector(x.0.iter().zip(&y.0).map(|(a, b)| alpha * a + beta * b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn distance_sq(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "distance: dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector::lin_comb(1.0, self, 1.0, rhs)
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector::lin_comb(1.0, self, -1.0, rhs)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scaled(s)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}

/// Checked inner product `Σ u_i v_i`.
pub fn dot(u: &Vector, v: &Vector) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    Ok(u.dot(v))
}

/// Dense symmetric matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, symmetrizing via `(M + Mᵀ)/2`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let mut m = SymMatrix { n, data };
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (m.data[i * n + j] + m.data[j * n + i]);
                m.data[i * n + j] = avg;
                m.data[j * n + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, di) in d.iter().enumerate() {
            data[i * n + i] = *di;
        }
        SymMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `M x`. Panics on dimension mismatch; see [`SymMatrix::try_mul_vec`].
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.n, x.len(), "mul_vec: dimension mismatch");
        Vector(
            (0..self.n)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn try_mul_vec(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.n, x.len())?;
        Ok(self.mul_vec(x))
    }

    /// `⟨M x, x⟩`
    pub fn quad_form(&self, x: &Vector) -> f64 {
        self.mul_vec(x).dot(x)
    }

    /// The compression `Bᵀ M B` for a list of column vectors `B`.
    pub fn compress(&self, basis: &[Vector]) -> SymMatrix {
        let k = basis.len();
        let images: Vec<Vector> = basis.iter().map(|b| self.mul_vec(b)).collect();
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let h = 0.5 * (basis[i].dot(&images[j]) + basis[j].dot(&images[i]));
                data[i * k + j] = h;
                data[j * k + i] = h;
            }
        }
        SymMatrix { n: k, data }
    }
}

/// Lower-triangular Cholesky factor `M = G Gᵀ`.
fn cholesky(m: &SymMatrix) -> Result<Vec<f64>> {
    let n = m.n;
    let mut g = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= g[j * n + k] * g[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotSpd { row: j, pivot: d });
        }
        let djj = d.sqrt();
        g[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= g[i * n + k] * g[j * n + k];
            }
            g[i * n + j] = s / djj;
        }
    }
    Ok(g)
}

/// Solves `M x = rhs` for symmetric positive definite `M` by Cholesky.
pub fn solve_spd(m: &SymMatrix, rhs: &Vector) -> Result<Vector> {
    check_dim(m.n, rhs.len())?;
    let n = m.n;
    let g = cholesky(m)?;
    // forward: G z = rhs
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= g[i * n + k] * z[k];
        }
        z[i] = s / g[i * n + i];
    }
    // backward: Gᵀ x = z
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in (i + 1)..n {
            s -= g[k * n + i] * x[k];
        }
        x[i] = s / g[i * n + i];
    }
    let x = Vector(x);
    if !x.is_finite() {
        return Err(Error::NonFinite("solve_spd"));
    }
    Ok(x)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[i]` belongs to `values[i]`.
    pub vectors: Vec<Vector>,
}

impl SymEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Cyclic Jacobi rotations. Returns the diagonal after convergence and,
/// when requested, the accumulated rotation (columns are eigenvectors).
fn jacobi(m: &SymMatrix, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };
    let target = JACOBI_TOL * m.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Full eigen-decomposition by cyclic Jacobi.
pub fn sym_eig(m: &SymMatrix) -> SymEig {
    let n = m.n;
    let (diag, v) = jacobi(m, true);
    let v = v.expect("vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    SymEig {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: order
            .iter()
            .map(|&j| Vector((0..n).map(|k| v[k * n + j]).collect()))
            .collect(),
    }
}

/// Extreme eigenvalues `(λ_min, λ_max)`.
pub fn sym_eig_range(m: &SymMatrix) -> Result<(f64, f64)> {
    if m.n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let (diag, _) = jacobi(m, false);
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::NonFinite("sym_eig_range"));
    }
    Ok((lo, hi))
}

/// Modified Gram–Schmidt with one full re-orthogonalization pass.
///
/// A vector is dropped when its residual after projection is at most
/// `drop_tol` times its original norm.
pub fn orthonormal_basis(vectors: &[Vector], drop_tol: f64) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(vectors.len());
    extend_orthonormal(&mut basis, vectors, drop_tol);
    basis
}

/// Appends the part of `vectors` not already spanned by the orthonormal `basis`.
/// Returns how many vectors were added.
pub fn extend_orthonormal(basis: &mut Vec<Vector>, vectors: &[Vector], drop_tol: f64) -> usize {
    let before = basis.len();
    for v in vectors {
        let original = v.norm();
        if original == 0.0 || !original.is_finite() {
            continue;
        }
        let mut w = v.clone();
        for _pass in 0..2 {
            for q in basis.iter() {
                let c = q.dot(&w);
                w.axpy(-c, q);
            }
        }
        let r = w.norm();
        if r <= drop_tol * original {
            continue;
        }
        basis.push(w.scaled(1.0 / r));
    }
    basis.len() - before
}

/// Orthonormal basis of the orthogonal complement of `span(basis)` in `R^n`.
/// `basis` must already be orthonormal.
pub fn orthogonal_complement(basis: &[Vector], n: usize) -> Vec<Vector> {
    let mut full: Vec<Vector> = basis.to_vec();
    let k = full.len();
    for i in 0..n {
        if full.len() == n {
            break;
        }
        extend_orthonormal(&mut full, &[Vector::basis(n, i)], 1e-8);
    }
    full.split_off(k)
}

/// Affine search set `anchor + span(directions)`.
#[derive(Clone, Debug)]
pub struct SubspaceSpec {
    pub anchor: Vector,
    pub directions: Vec<Vector>,
}

impl SubspaceSpec {
    pub fn new(anchor: Vector, directions: Vec<Vector>) -> Result<Self> {
        for d in &directions {
            check_dim(anchor.len(), d.len())?;
        }
        Ok(SubspaceSpec { anchor, directions })
    }

    pub fn point(anchor: Vector) -> Self {
        SubspaceSpec {
            anchor,
            directions: Vec::new(),
        }
    }
}

/// Minimizes `f(x) = ½⟨Ax,x⟩ − ⟨b,x⟩` over `anchor + span(directions)`.
///
/// Solves `(DᵀAD) c = Dᵀ(b − A·anchor)` through an eigen-truncated
/// pseudo-inverse, so singular normal systems return the minimum-norm
/// coefficient vector.
pub fn affine_subspace_min(a: &SymMatrix, b: &Vector, s: &SubspaceSpec) -> Result<Vector> {
    let n = a.dim();
    check_dim(n, b.len())?;
    check_dim(n, s.anchor.len())?;
    for d in &s.directions {
        check_dim(n, d.len())?;
    }
    if s.directions.is_empty() {
        return Ok(s.anchor.clone());
    }

    let residual = b - &a.mul_vec(&s.anchor);
    let h = a.compress(&s.directions);
    let rhs: Vec<f64> = s.directions.iter().map(|d| d.dot(&residual)).collect();
    let eig = sym_eig(&h);

    let lam_max = eig.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cutoff = PSEUDO_SOLVE_CUTOFF * lam_max;
    let lin_scale = a.frobenius_norm() * s.anchor.norm() + b.norm();

    let d_max = s.directions.iter().map(Vector::norm).fold(0.0, f64::max);
    let k = s.directions.len();
    let mut coeffs = vec![0.0; k];
    for (lam, q) in eig.values.iter().zip(&eig.vectors) {
        let proj: f64 = q.iter().zip(&rhs).map(|(qi, ri)| qi * ri).sum();
        if *lam < -cutoff {
            return Err(Error::Unbounded(format!(
                "negative curvature {lam:e} on the search subspace"
            )));
        }
        if *lam <= cutoff {
            // Zero curvature: a non-vanishing slope here means f → −∞.
            let mut dir = Vector::zeros(n);
            for (qj, d) in q.iter().zip(&s.directions) {
                dir.axpy(*qj, d);
            }
            // Linearly dependent directions: `dir` is rounding, not a direction.
            if dir.norm() <= 1e-8 * d_max {
                continue;
            }
            let slope = dir.dot(&residual);
            if slope.abs() > 1e-8 * dir.norm() * lin_scale.max(residual.norm()) {
                return Err(Error::Unbounded(
                    "linear term along a zero-curvature direction".into(),
                ));
            }
            continue;
        }
        for (c, qj) in coeffs.iter_mut().zip(q.iter()) {
            *c += proj / lam * qj;
        }
    }

    let mut x = s.anchor.clone();
    for (c, d) in coeffs.iter().zip(&s.directions) {
        x.axpy(*c, d);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("affine_subspace_min"));
    }
    Ok(x)
}

/// Orthonormal `Q` from the QR factorization of the square matrix whose
/// columns are `columns`, with `R`'s diagonal positive. Gram–Schmidt produces
/// positive diagonals directly, so the result is deterministic.
pub fn qr_orthogonal(columns: &[Vector]) -> Result<Vec<Vector>> {
    let q = orthonormal_basis(columns, 1e-12);
    if q.len() != columns.len() {
        return Err(Error::InvalidInput(
            "QR input is numerically rank deficient".into(),
        ));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec())
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&v(&[1.0, 2.0]), &v(&[4.0, -2.0])).unwrap(), 0.0);
        assert_eq!(dot(&v(&[1.0, 1.0]), &v(&[1.0, 1.0])).unwrap(), 2.0);
        assert_eq!(dot(&v(&[0.5, 0.0]), &v(&[1.0, 2.0])).unwrap(), 0.5);
        assert!(matches!(
            dot(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn from_row_major_symmetrizes() {
        let m = SymMatrix::from_row_major(2, vec![1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn solve_spd_examples() {
        let x = solve_spd(&SymMatrix::identity(3), &v(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(x, v(&[1.0, 2.0, 3.0]));
        let d = SymMatrix::diagonal(&[1.0, 2.0]);
        assert_eq!(solve_spd(&d, &v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
        let x = solve_spd(&d, &v(&[1.0, 2.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_spd_rejects_indefinite() {
        let m = SymMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            solve_spd(&m, &v(&[1.0, 1.0])),
            Err(Error::NotSpd { row: 1, .. })
        ));
        let singular = SymMatrix::diagonal(&[1.0, 0.0]);
        assert!(solve_spd(&singular, &v(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn eig_range_examples() {
        assert_eq!(sym_eig_range(&SymMatrix::identity(4)).unwrap(), (1.0, 1.0));
        assert_eq!(
            sym_eig_range(&SymMatrix::diagonal(&[1.0, 2.0])).unwrap(),
            (1.0, 2.0)
        );
    }

    #[test]
    fn eig_of_2x2_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = SymMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = sym_eig(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let mv = m.mul_vec(&e.vectors[1]);
        assert!((&mv - &e.vectors[1].scaled(3.0)).norm() < 1e-14);
    }

    #[test]
    fn orthonormal_basis_examples() {
        let b = orthonormal_basis(&[v(&[2.0, 0.0]), v(&[0.0, 3.0])], 1e-8);
        assert_eq!(b, vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]);

        let b = orthonormal_basis(&[v(&[1.0, 0.0]), v(&[2.0, 0.0])], 1e-8);
        assert_eq!(b, vec![v(&[1.0, 0.0])]);

        let b = orthonormal_basis(&[v(&[1.0, 1.0]), v(&[1.0, 0.0])], 1e-8);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&b[0] - &v(&[r, r])).norm() < 1e-15);
        assert!((&b[1] - &v(&[r, -r])).norm() < 1e-15);
    }

    #[test]
    fn orthonormal_basis_drops_zero_vectors() {
        assert!(orthonormal_basis(&[Vector::zeros(3)], 1e-8).is_empty());
    }

    #[test]
    fn complement_of_line_in_plane() {
        let k = orthonormal_basis(&[v(&[1.0, 2.0])], 1e-12);
        let c = orthogonal_complement(&k, 2);
        assert_eq!(c.len(), 1);
        assert!(c[0].dot(&k[0]).abs() < 1e-15);
        assert!((c[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_min_examples() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let b = Vector::zeros(2);

        let p = v(&[3.0, -1.0]);
        assert_eq!(affine_subspace_min(&a, &b, &SubspaceSpec::point(p.clone())).unwrap(), p);

        let s = SubspaceSpec::new(v(&[1.0, 1.0]), vec![v(&[1.0, 2.0])]).unwrap();
        let x = affine_subspace_min(&a, &b, &s).unwrap();
        assert!((x[0] - 4.0 / 9.0).abs() < 1e-15);
        assert!((x[1] + 1.0 / 9.0).abs() < 1e-15);
        let f = 0.5 * a.quad_form(&x);
        assert!((f - 1.0 / 9.0).abs() < 1e-15);

        let s = SubspaceSpec::new(Vector::zeros(2), vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!(affine_subspace_min(&a, &b, &s).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn affine_min_collinear_directions_use_min_norm() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        let b = Vector::zeros(2);
        let s = SubspaceSpec::new(v(&[1.0, 1.0]), vec![v(&[1.0, 2.0]), v(&[2.0, 4.0])]).unwrap();
        let x = affine_subspace_min(&a, &b, &s).unwrap();
        assert!((x[0] - 4.0 / 9.0).abs() < 1e-14);
        assert!((x[1] + 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn affine_min_detects_unbounded() {
        let a = SymMatrix::diagonal(&[-1.0, 2.0]);
        let s = SubspaceSpec::new(Vector::zeros(2), vec![v(&[1.0, 0.0])]).unwrap();
        assert!(matches!(
            affine_subspace_min(&a, &Vector::zeros(2), &s),
            Err(Error::Unbounded(_))
        ));
        // zero curvature, nonzero slope
        let a = SymMatrix::diagonal(&[0.0, 2.0]);
        assert!(matches!(
            affine_subspace_min(&a, &v(&[1.0, 0.0]), &s),
            Err(Error::Unbounded(_))
        ));
        // zero curvature, zero slope: stays at the anchor
        let x = affine_subspace_min(&a, &v(&[0.0, 1.0]), &s).unwrap();
        assert_eq!(x, Vector::zeros(2));
    }

    #[test]
    fn affine_min_dimension_mismatch() {
        let a = SymMatrix::identity(2);
        let s = SubspaceSpec::point(Vector::zeros(3));
        assert!(affine_subspace_min(&a, &Vector::zeros(2), &s).is_err());
    }
}
