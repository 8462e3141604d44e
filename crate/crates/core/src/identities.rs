//! Operational identities (linear dependences) of process families and the
//! nonsingularity predicate for bipartite states.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermspace::{coords_matrix, nullspace_coeffs, CoefficientVector, HermitianOperator, OperatorSpan};
use crate::linalg::{self, EPS_RANK};
use crate::processes::{BipartiteState, MultiMeasurement, MultiSource, Side};

/// Basis of all linear dependences among a labelled operator family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentitySet {
    /// `(outcome, setting)` label of every coefficient position.
    pub index_labels: Vec<(usize, usize)>,
    pub basis: Vec<CoefficientVector>,
}

impl IdentitySet {
    pub fn compute(index_labels: Vec<(usize, usize)>, ops: &[HermitianOperator]) -> Result<Self> {
        Ok(Self { index_labels, basis: nullspace_coeffs(ops)? })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Largest residual `‖Σ α_k A_k‖` over the basis.
    pub fn annihilation_residual(&self, ops: &[HermitianOperator]) -> Result<f64> {
        let mut worst = 0.0f64;
        for v in &self.basis {
            worst = worst.max(v.apply(ops)?.frobenius_norm());
        }
        Ok(worst)
    }

    /// Distance of `v` from the span of the basis.
    pub fn distance_to(&self, v: &[f64]) -> f64 {
        let mut r = nalgebra::DVector::from_column_slice(v);
        for b in &self.basis {
            let bv = nalgebra::DVector::from_column_slice(b.as_slice());
            let c = bv.dot(&r);
            r.axpy(-c, &bv, 1.0);
        }
        r.norm()
    }

    /// Whether every basis vector of `self` lies in the span of `other`.
    pub fn is_subspace_of(&self, other: &IdentitySet, tol: f64) -> bool {
        self.basis.iter().all(|v| other.distance_to(v.as_slice()) <= tol)
    }
}

pub fn identities_of_multisource(ms: &MultiSource) -> Result<IdentitySet> {
    IdentitySet::compute(ms.labels(), &ms.subnormalized_flat())
}

pub fn identities_of_multimeasurement(mm: &MultiMeasurement) -> Result<IdentitySet> {
    IdentitySet::compute(mm.labels(), &mm.flat())
}

/// A realization of a bipartite state inside the span of products of steered operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductExpansion {
    /// `coefficients[i][j]` multiplies `steered_by_second[i] ⊗ steered_by_first[j]`.
    pub coefficients: Vec<Vec<f64>>,
    pub residual: f64,
}

/// Identities induced by measuring each side of a bipartite state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedIdentities {
    pub first_measurement: IdentitySet,
    pub second_measurement: IdentitySet,
    /// Dependences among the operators steered onto the second side by the first measurement.
    pub first_composed: IdentitySet,
    /// Dependences among the operators steered onto the first side by the second measurement.
    pub second_composed: IdentitySet,
    pub product_expansion: Option<ProductExpansion>,
    pub expansion_residual: f64,
}

fn steered_family(rho: &BipartiteState, mm: &MultiMeasurement, side: Side) -> Result<Vec<HermitianOperator>> {
    mm.flat().iter().map(|e| rho.steer_operator(side, e)).collect()
}

pub fn induced_identities_bipartite(
    rho: &BipartiteState,
    mm1: &MultiMeasurement,
    mm2: &MultiMeasurement,
) -> Result<InducedIdentities> {
    let (d1, d2) = rho.dims();
    if mm1.dim() != d1 {
        return Err(Error::DimensionMismatch { expected: d1, found: mm1.dim() });
    }
    if mm2.dim() != d2 {
        return Err(Error::DimensionMismatch { expected: d2, found: mm2.dim() });
    }
    let on_second = steered_family(rho, mm1, Side::First)?;
    let on_first = steered_family(rho, mm2, Side::Second)?;
    let first_composed = IdentitySet::compute(mm1.labels(), &on_second)?;
    let second_composed = IdentitySet::compute(mm2.labels(), &on_first)?;

    let mut products = Vec::with_capacity(on_first.len() * on_second.len());
    for a in &on_first {
        for b in &on_second {
            products.push(a.kron(b));
        }
    }
    let m = coords_matrix(&products)?;
    let target = rho.rho().coords();
    let sol = linalg::pinv(&m, EPS_RANK) * &target;
    let residual = (&m * &sol - &target).norm();
    let n2 = on_second.len();
    let expansion = (residual <= 1e-8).then(|| ProductExpansion {
        coefficients: (0..on_first.len())
            .map(|i| (0..n2).map(|j| sol[i * n2 + j]).collect())
            .collect(),
        residual,
    });
    Ok(InducedIdentities {
        first_measurement: identities_of_multimeasurement(mm1)?,
        second_measurement: identities_of_multimeasurement(mm2)?,
        first_composed,
        second_composed,
        product_expansion: expansion,
        expansion_residual: residual,
    })
}

/// Invertibility of the two steering superoperators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsingularityReport {
    pub nonsingular: bool,
    /// Condition numbers of `X ↦ Tr_1[(Xᵀ⊗𝟙)ρ]` and `X ↦ Tr_2[(𝟙⊗Xᵀ)ρ]` (infinite when singular).
    pub condition_numbers: [f64; 2],
}

fn steering_matrix(rho: &BipartiteState, side: Side) -> DMatrix<f64> {
    let d = rho.dim_of(side);
    let basis = OperatorSpan::full(d);
    let images: Vec<HermitianOperator> = basis
        .basis()
        .iter()
        .map(|b| rho.steer_operator(side, &b.transpose()).expect("dims"))
        .collect();
    coords_matrix(&images).expect("non-empty")
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    let top = s.iter().fold(0.0f64, |a, b| a.max(*b));
    let bottom = s.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    if top == 0.0 || bottom <= EPS_RANK * top {
        f64::INFINITY
    } else {
        top / bottom
    }
}

pub fn is_nonsingular(rho: &BipartiteState) -> NonsingularityReport {
    let m1 = steering_matrix(rho, Side::First);
    let m2 = steering_matrix(rho, Side::Second);
    let c = [condition(&m1), condition(&m2)];
    let (d1, d2) = rho.dims();
    NonsingularityReport { nonsingular: d1 == d2 && c.iter().all(|x| x.is_finite()), condition_numbers: c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard::*;

    fn proj(k: &nalgebra::DVector<num_complex::Complex64>) -> HermitianOperator {
        HermitianOperator::projector(k)
    }

    #[test]
    fn trine_is_independent() {
        let trine: Vec<_> = (0..3)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                bloch_pure([t.sin(), 0.0, t.cos()])
            })
            .collect();
        let ms = MultiSource::multi_state(trine).unwrap();
        assert!(identities_of_multisource(&ms).unwrap().is_empty());
    }

    #[test]
    fn bell_is_nonsingular_product_is_not() {
        let bell = BipartiteState::new(2, 2, bell_state()).unwrap();
        assert!(is_nonsingular(&bell).nonsingular);
        let prod = BipartiteState::product(&proj(&ket_zero()), &maximally_mixed(2));
        assert!(!is_nonsingular(&prod).nonsingular);
    }
}
