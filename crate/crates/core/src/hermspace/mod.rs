//! Real-linear algebra on Hermitian operators under the Hilbert–Schmidt inner product.

mod operator;
pub mod tensor;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use operator::{linear_combination, sum, HermitianOperator, EPS_HERM};
pub use tensor::CMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, EPS_RANK};

/// Tolerance on the Gram matrix of a span basis.
pub const EPS_ORTH: f64 = 1e-9;

/// Real coefficients indexed like the operator family they combine or annihilate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientVector(pub Vec<f64>);

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Residual `‖Σ α_k A_k‖` of the combination on a family.
    pub fn apply(&self, ops: &[HermitianOperator]) -> Result<HermitianOperator> {
        linear_combination(&self.0, ops)
    }
}

/// A subspace of Hermitian operators with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct OperatorSpan {
    ambient_dim: usize,
    basis: Vec<HermitianOperator>,
    /// Basis coordinates as orthonormal columns.
    q: DMatrix<f64>,
}

impl OperatorSpan {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[HermitianOperator] {
        &self.basis
    }

    /// The full operator space on `d` dimensions.
    pub fn full(d: usize) -> Self {
        let q = DMatrix::identity(d * d, d * d);
        Self::from_columns(d, q)
    }

    fn from_columns(ambient_dim: usize, q: DMatrix<f64>) -> Self {
        let basis = q
            .column_iter()
            .map(|c| HermitianOperator::from_coords(ambient_dim, c.as_slice()).expect("coordinate length"))
            .collect();
        Self { ambient_dim, basis, q }
    }

    pub fn project(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        project_onto(self, x)
    }

    /// Distance from `x` to the subspace.
    pub fn distance(&self, x: &HermitianOperator) -> Result<f64> {
        let p = self.project(x)?;
        Ok((x - &p).frobenius_norm())
    }

    pub fn contains(&self, x: &HermitianOperator, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol * x.frobenius_norm().max(1.0))
    }

    /// Largest deviation of the basis Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - target).abs());
            }
        }
        worst
    }
}

fn check_family(ops: &[HermitianOperator]) -> Result<usize> {
    let first = ops.first().ok_or(Error::EmptyFamily)?;
    let d = first.dim();
    for op in ops {
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
    }
    Ok(d)
}

/// Columns are the real coordinates of the operators.
pub fn coords_matrix(ops: &[HermitianOperator]) -> Result<DMatrix<f64>> {
    let d = check_family(ops)?;
    let cols: Vec<DVector<f64>> = ops.iter().map(|o| o.coords()).collect();
    let mut m = DMatrix::zeros(d * d, ops.len());
    for (k, c) in cols.iter().enumerate() {
        m.set_column(k, c);
    }
    Ok(m)
}

pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.hs_inner(b)
}

pub fn span_of(ops: &[HermitianOperator]) -> Result<OperatorSpan> {
    let d = check_family(ops)?;
    let m = coords_matrix(ops)?;
    Ok(OperatorSpan::from_columns(d, linalg::range_basis(&m, EPS_RANK)))
}

/// Orthonormal basis of all real linear dependences among `ops`.
pub fn nullspace_coeffs(ops: &[HermitianOperator]) -> Result<Vec<CoefficientVector>> {
    let m = coords_matrix(ops)?;
    Ok(linalg::nullspace(&m, EPS_RANK)
        .into_iter()
        .map(|v| CoefficientVector(v.iter().copied().collect()))
        .collect())
}

pub fn is_linearly_independent(ops: &[HermitianOperator]) -> Result<bool> {
    Ok(nullspace_coeffs(ops)?.is_empty())
}

pub fn project_onto(v: &OperatorSpan, x: &HermitianOperator) -> Result<HermitianOperator> {
    if x.dim() != v.ambient_dim {
        return Err(Error::DimensionMismatch { expected: v.ambient_dim, found: x.dim() });
    }
    let c = x.coords();
    let p = &v.q * (v.q.transpose() * c);
    HermitianOperator::from_coords(v.ambient_dim, p.as_slice())
}

/// The unique family `D` in the span of `basis` with `Tr[D_i F_j] = δ_ij`.
pub fn dual_basis(basis: &[HermitianOperator]) -> Result<Vec<HermitianOperator>> {
    let d = check_family(basis)?;
    let f = coords_matrix(basis)?;
    if linalg::rank(&f, EPS_RANK) < basis.len() {
        return Err(Error::LinearlyDependent);
    }
    let gram = f.transpose() * &f;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Gram matrix".into()))?;
    let duals = &f * inv;
    duals
        .column_iter()
        .map(|c| HermitianOperator::from_coords(d, c.as_slice()))
        .collect()
}

/// Least-norm dual frame: `x = Σ_λ Tr[x D_λ] F_λ` for every `x` in the span of `frame`.
pub fn canonical_dual_frame(frame: &[HermitianOperator]) -> Result<Vec<HermitianOperator>> {
    let d = check_family(frame)?;
    let f = coords_matrix(frame)?;
    let p = linalg::pinv(&f, EPS_RANK);
    p.row_iter()
        .map(|r| HermitianOperator::from_coords(d, r.transpose().as_slice()))
        .collect()
}

/// `‖x − Σ_λ Tr[x D_λ] F_λ‖`.
pub fn reconstruction_residual(
    x: &HermitianOperator,
    frame: &[HermitianOperator],
    duals: &[HermitianOperator],
) -> Result<f64> {
    if frame.len() != duals.len() {
        return Err(Error::DimensionMismatch { expected: frame.len(), found: duals.len() });
    }
    let w: Vec<f64> = duals.iter().map(|dl| x.hs_inner(dl)).collect::<Result<_>>()?;
    let rec = linear_combination(&w, frame)?;
    Ok((x - &rec).frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard::{ket_minus, ket_one, ket_plus, ket_zero, pauli_x, pauli_y, pauli_z};

    fn proj(k: &DVector<num_complex::Complex64>) -> HermitianOperator {
        HermitianOperator::projector(k)
    }

    #[test]
    fn hs_inner_examples() {
        assert!((hs_inner(&pauli_x(), &pauli_x()).unwrap() - 2.0).abs() < 1e-12);
        assert!((hs_inner(&proj(&ket_zero()), &proj(&ket_plus())).unwrap() - 0.5).abs() < 1e-12);
        let i3 = HermitianOperator::identity(3);
        assert!((hs_inner(&i3, &i3).unwrap() - 3.0).abs() < 1e-12);
        assert!(hs_inner(&i3, &pauli_x()).is_err());
    }

    #[test]
    fn span_dimensions() {
        let paulis = [HermitianOperator::identity(2), pauli_x(), pauli_y(), pauli_z()];
        assert_eq!(span_of(&paulis).unwrap().dim(), 4);
        let bb84 = [proj(&ket_zero()), proj(&ket_one()), proj(&ket_plus()), proj(&ket_minus())];
        let s = span_of(&bb84).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(s.orthonormality_defect() < EPS_ORTH);
        assert_eq!(span_of(&bb84[..1].iter().chain(&bb84[2..3]).cloned().collect::<Vec<_>>()).unwrap().dim(), 2);
        assert!(matches!(span_of(&[]), Err(Error::EmptyFamily)));
    }

    #[test]
    fn bb84_nullspace() {
        let bb84 = [proj(&ket_zero()), proj(&ket_one()), proj(&ket_plus()), proj(&ket_minus())];
        let ns = nullspace_coeffs(&bb84).unwrap();
        assert_eq!(ns.len(), 1);
        let expect = [0.5, 0.5, -0.5, -0.5];
        for (a, b) in ns[0].0.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mixture_nullspace() {
        let r1 = proj(&ket_zero());
        let r2 = proj(&ket_plus());
        let mix = &(&r1 * 0.5) + &(&r2 * 0.5);
        let ns = nullspace_coeffs(&[r1, r2, mix]).unwrap();
        assert_eq!(ns.len(), 1);
        let n = (0.25f64 + 0.25 + 1.0).sqrt();
        let expect = [-0.5 / n, -0.5 / n, 1.0 / n];
        for (a, b) in ns[0].0.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_examples() {
        let p0 = proj(&ket_zero());
        let pp = proj(&ket_plus());
        let v = span_of(&[p0.clone(), pp.clone()]).unwrap();
        let got = project_onto(&v, &HermitianOperator::identity(2)).unwrap();
        let expect = &(&p0 * (2.0 / 3.0)) + &(&pp * (2.0 / 3.0));
        assert!(got.max_abs_diff(&expect) < 1e-12);
        assert!(project_onto(&v, &p0).unwrap().max_abs_diff(&p0) < 1e-12);
        let vz = span_of(&[pauli_z()]).unwrap();
        assert!(project_onto(&vz, &pauli_x()).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn dual_basis_examples() {
        let d = dual_basis(&[HermitianOperator::identity(2), pauli_z()]).unwrap();
        assert!(d[0].max_abs_diff(&HermitianOperator::identity(2).scale(0.5)) < 1e-12);
        assert!(d[1].max_abs_diff(&pauli_z().scale(0.5)) < 1e-12);

        let p0 = proj(&ket_zero());
        let pp = proj(&ket_plus());
        let d = dual_basis(&[p0.clone(), pp.clone()]).unwrap();
        let e0 = &(&p0 * (4.0 / 3.0)) - &(&pp * (2.0 / 3.0));
        let e1 = &(&pp * (4.0 / 3.0)) - &(&p0 * (2.0 / 3.0));
        assert!(d[0].max_abs_diff(&e0) < 1e-12);
        assert!(d[1].max_abs_diff(&e1) < 1e-12);

        assert!(matches!(dual_basis(&[p0.clone(), p0]), Err(Error::LinearlyDependent)));
    }

    #[test]
    fn canonical_dual_splits_repeated_element() {
        let p0 = proj(&ket_zero());
        let pp = proj(&ket_plus());
        let d = canonical_dual_frame(&[p0.clone(), pp.clone(), pp.clone()]).unwrap();
        let single = dual_basis(&[p0, pp]).unwrap();
        assert!(d[1].max_abs_diff(&single[1].scale(0.5)) < 1e-10);
        assert!(d[2].max_abs_diff(&single[1].scale(0.5)) < 1e-10);
        assert!(d[0].max_abs_diff(&single[0]) < 1e-10);
    }
}
