use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tensor::{self, CMatrix};
use crate::error::{Error, Result};

/// Absolute entrywise tolerance for the Hermiticity check on inputs.
pub const EPS_HERM: f64 = 1e-9;

/// A dense Hermitian matrix.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOperator({}x{}) {:?}", self.dim(), self.dim(), self.mat.as_slice())
    }
}

fn hermiticity_defect(mat: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..mat.nrows() {
        for j in i..mat.ncols() {
            worst = worst.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    worst
}

impl HermitianOperator {
    /// Wraps a matrix, rejecting it unless it is square, non-empty and Hermitian within [`EPS_HERM`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
        }
        if mat.nrows() == 0 {
            return Err(Error::Precondition("operator dimension must be at least 1".into()));
        }
        let deviation = hermiticity_defect(&mat);
        if deviation > EPS_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { mat })
    }

    /// Builds from a matrix produced by internal arithmetic, removing round-off asymmetry.
    pub(crate) fn from_computed(mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        let sym = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
        Self { mat: sym }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = Complex64::new(*v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim) }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = DVector::from_iterator(entries.len(), entries.iter().map(|&x| Complex64::new(x, 0.0)));
        Self { mat: CMatrix::from_diagonal(&d) }
    }

    /// `|ψ⟩⟨ψ|` for the given (not necessarily normalized) vector.
    pub fn projector(ket: &DVector<Complex64>) -> Self {
        Self::from_computed(ket * ket.adjoint())
    }

    /// `|i⟩⟨i|` in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Hilbert–Schmidt inner product `Tr[AB]`.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.inner(other))
    }

    pub(crate) fn inner(&self, other: &Self) -> f64 {
        // Tr[AB] = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for Hermitian B
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: &self.mat * Complex64::new(s, 0.0) }
    }

    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { mat: self.mat.kronecker(&other.mat) }
    }

    pub fn kron_all<'a, I: IntoIterator<Item = &'a HermitianOperator>>(ops: I) -> Self {
        let mut acc = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for op in ops {
            acc = acc.kronecker(&op.mat);
        }
        Self { mat: acc }
    }

    /// Product `AB` is generally not Hermitian; returns `Tr[AB]` style contractions only.
    pub fn product_trace(&self, other: &Self) -> Complex64 {
        (&self.mat * &other.mat).trace()
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.mat.clone());
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = CMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, idx[c])]);
        (vals, vecs)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, eps: f64) -> bool {
        self.min_eigenvalue() >= -eps
    }

    /// Rank counting eigenvalues above `rel` times the largest magnitude.
    pub fn rank(&self, rel: f64) -> usize {
        let vals = self.eigenvalues();
        let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if top == 0.0 {
            return 0;
        }
        vals.iter().filter(|v| v.abs() > rel * top).count()
    }

    /// Trace of the square divided by the squared trace (1 for pure states).
    pub fn purity(&self) -> f64 {
        let t = self.trace();
        self.inner(self) / (t * t)
    }

    /// Projection onto the positive semidefinite cone in Frobenius norm.
    pub fn psd_part(&self) -> Self {
        let (vals, vecs) = self.eigen();
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (k, &v) in vals.iter().enumerate() {
            if v > 0.0 {
                let col = vecs.column(k);
                m += (col * col.adjoint()) * Complex64::new(v, 0.0);
            }
        }
        Self::from_computed(m)
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::from_computed(tensor::partial_trace(&self.mat, dims, keep)?))
    }

    pub fn partial_transpose(&self, dims: &[usize], systems: &[usize]) -> Result<Self> {
        Ok(Self::from_computed(tensor::partial_transpose(&self.mat, dims, systems)?))
    }

    pub fn permute_systems(&self, dims: &[usize], order: &[usize]) -> Result<Self> {
        Ok(Self::from_computed(tensor::permute_systems(&self.mat, dims, order)?))
    }

    /// `Tr_measured[(E ⊗ 𝟙) self]` with `E` on the `measured` systems in the given order.
    pub fn contract(&self, dims: &[usize], measured: &[usize], effect: &Self) -> Result<Self> {
        Ok(Self::from_computed(tensor::contract(&self.mat, dims, measured, &effect.mat)?))
    }

    /// Coordinates in a fixed orthonormal Hermitian basis (normalized identity first,
    /// then diagonal generalized Gell-Mann matrices, then symmetric/antisymmetric pairs).
    pub fn coords(&self) -> DVector<f64> {
        let d = self.dim();
        let m = &self.mat;
        let mut out = DVector::zeros(d * d);
        out[0] = self.trace() / (d as f64).sqrt();
        let mut prefix = 0.0;
        for l in 1..d {
            prefix += m[(l - 1, l - 1)].re;
            let lf = l as f64;
            out[l] = (prefix - lf * m[(l, l)].re) / (lf * (lf + 1.0)).sqrt();
        }
        let mut k = d;
        let s2 = std::f64::consts::SQRT_2;
        for j in 0..d {
            for l in (j + 1)..d {
                out[k] = s2 * m[(j, l)].re;
                out[k + 1] = -s2 * m[(j, l)].im;
                k += 2;
            }
        }
        out
    }

    /// Inverse of [`HermitianOperator::coords`].
    pub fn from_coords(dim: usize, c: &[f64]) -> Result<Self> {
        if c.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: c.len() });
        }
        let d = dim;
        let mut m = CMatrix::zeros(d, d);
        let base = c[0] / (d as f64).sqrt();
        for l in 0..d {
            let mut v = base;
            for (q, &cq) in c.iter().enumerate().take(d).skip(1) {
                let qf = q as f64;
                let norm = (qf * (qf + 1.0)).sqrt();
                if l < q {
                    v += cq / norm;
                } else if l == q {
                    v -= qf * cq / norm;
                }
            }
            m[(l, l)] = Complex64::new(v, 0.0);
        }
        let mut k = d;
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..d {
            for l in (j + 1)..d {
                let z = Complex64::new(c[k] * r2, -c[k + 1] * r2);
                m[(j, l)] = z;
                m[(l, j)] = z.conj();
                k += 2;
            }
        }
        Ok(Self { mat: m })
    }

    /// Rows of `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| [self.mat[(i, j)].re, self.mat[(i, j)].im]).collect())
            .collect()
    }

    pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { rows: n, cols: r.len() });
            }
            for (j, p) in r.iter().enumerate() {
                if !p[0].is_finite() || !p[1].is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at ({i},{j})")));
                }
                m[(i, j)] = Complex64::new(p[0], p[1]);
            }
        }
        Self::new(m)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        HermitianOperator::from_pairs(&rows).map_err(serde::de::Error::custom)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat - &rhs.mat }
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: self.mat + rhs.mat }
    }
}

impl Sub for HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: self.mat - rhs.mat }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Mul<f64> for HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Weighted sum `Σ w_k A_k`; all operators must share a dimension.
pub fn linear_combination(weights: &[f64], ops: &[HermitianOperator]) -> Result<HermitianOperator> {
    let first = ops.first().ok_or(Error::EmptyFamily)?;
    if weights.len() != ops.len() {
        return Err(Error::DimensionMismatch { expected: ops.len(), found: weights.len() });
    }
    let d = first.dim();
    let mut acc = CMatrix::zeros(d, d);
    for (w, op) in weights.iter().zip(ops) {
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
        if *w != 0.0 {
            acc += &op.mat * Complex64::new(*w, 0.0);
        }
    }
    Ok(HermitianOperator { mat: acc })
}

pub fn sum(ops: &[HermitianOperator]) -> Result<HermitianOperator> {
    linear_combination(&vec![1.0; ops.len()], ops)
}
