//! Local-hidden-state models of assemblages by linear programming over
//! deterministic strategies and a growing pool of pure hidden states.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lp::{lp_feasible, LinearProgram, VarKind};
use crate::error::Result;
use crate::hermspace::{sum, HermitianOperator};
use crate::processes::{MultiSource, EPS_PSD, EPS_TR};
use crate::standard::mub_kets;

/// Steering inequality: `Σ_x F_{λ(x)|x} ⪰ 0` for every deterministic strategy `λ`,
/// while `Σ_{a,x} Tr[F_{a|x} σ_{a|x}] = value < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteeringWitness {
    pub operators: Vec<Vec<HermitianOperator>>,
    pub value: f64,
    /// Most negative eigenvalue of `Σ_x F_{λ(x)|x}` over all strategies (0 when none).
    pub strategy_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum SteeringVerdict {
    Unsteerable {
        /// `strategies[λ][x]` is the outcome deterministically assigned to setting `x`.
        strategies: Vec<Vec<usize>>,
        hidden_states: Vec<HermitianOperator>,
    },
    Steerable {
        witness: SteeringWitness,
    },
    Undetermined {
        reason: String,
    },
}

impl SteeringVerdict {
    pub fn is_steerable(&self) -> bool {
        matches!(self, SteeringVerdict::Steerable { .. })
    }

    pub fn is_unsteerable(&self) -> bool {
        matches!(self, SteeringVerdict::Unsteerable { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteeringBudget {
    pub max_strategies: usize,
    pub max_rounds: usize,
    pub max_lp_iterations: usize,
}

impl Default for SteeringBudget {
    fn default() -> Self {
        Self { max_strategies: 256, max_rounds: 60, max_lp_iterations: 200_000 }
    }
}

/// A steering inequality must be violated by more than this.
pub const WITNESS_MARGIN: f64 = 1e-9;
/// Largest tolerated negative eigenvalue of a strategy sum.
pub const WITNESS_DEFECT: f64 = 1e-9;

/// All deterministic response functions `x ↦ a`, first setting varying slowest.
pub fn deterministic_strategies(outcomes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in outcomes {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

fn initial_kets(d: usize) -> Vec<DVector<Complex64>> {
    mub_kets(d).into_iter().flatten().collect()
}

/// Hidden states restricted to conic combinations of `kets`:
/// variables `q[λ][k] ≥ 0`, `σ_λ = Σ_k q[λ][k] |k⟩⟨k|`.
fn inner_lp(ms: &MultiSource, strategies: &[Vec<usize>], kets: &[Vec<f64>], max_iter: usize) -> LinearProgram {
    let d2 = ms.dim() * ms.dim();
    let nk = kets.len();
    let n = strategies.len() * nk;
    let mut lp = LinearProgram::new(vec![VarKind::NonNegative; n]);
    lp.set_max_iterations(max_iter);
    for (x, row) in ms.branches().iter().enumerate() {
        for (a, b) in row.iter().enumerate() {
            let target = b.subnormalized().coords();
            for i in 0..d2 {
                let mut r = vec![0.0; n];
                for (l, s) in strategies.iter().enumerate() {
                    if s[x] == a {
                        for (k, p) in kets.iter().enumerate() {
                            r[l * nk + k] = p[i];
                        }
                    }
                }
                lp.add_eq(r, target[i]);
            }
        }
    }
    lp
}

fn operators_from_multipliers(ms: &MultiSource, u: &[f64]) -> Result<Vec<Vec<HermitianOperator>>> {
    let d = ms.dim();
    let d2 = d * d;
    let mut k = 0;
    let mut out = Vec::new();
    for row in ms.branches() {
        let mut ops = Vec::new();
        for _ in row {
            ops.push(HermitianOperator::from_coords(d, &u[k..k + d2])?);
            k += d2;
        }
        out.push(ops);
    }
    let scale = out.iter().flatten().map(|f| f.frobenius_norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        for f in out.iter_mut().flatten() {
            *f = f.scale(1.0 / scale);
        }
    }
    Ok(out)
}

/// Evaluates a candidate steering inequality on an assemblage.
pub fn check_witness(
    ms: &MultiSource,
    operators: &[Vec<HermitianOperator>],
    strategies: &[Vec<usize>],
) -> Result<SteeringWitness> {
    let mut value = 0.0;
    for (row, fs) in ms.branches().iter().zip(operators) {
        for (b, f) in row.iter().zip(fs) {
            value += b.subnormalized().hs_inner(f)?;
        }
    }
    let mut defect = 0.0f64;
    for s in strategies {
        defect = defect.max(-strategy_sum(operators, s).min_eigenvalue());
    }
    Ok(SteeringWitness { operators: operators.to_vec(), value, strategy_defect: defect })
}

fn strategy_sum(operators: &[Vec<HermitianOperator>], s: &[usize]) -> HermitianOperator {
    let d = operators[0][0].dim();
    s.iter().enumerate().fold(HermitianOperator::zeros(d), |acc, (x, &a)| &acc + &operators[x][a])
}

/// Shifts `F_{a|0}` by `δ𝟙` to absorb a small strategy defect `δ`.
fn absorb_defect(ms: &MultiSource, w: &SteeringWitness, strategies: &[Vec<usize>]) -> Result<SteeringWitness> {
    let shift = HermitianOperator::identity(ms.dim()).scale(w.strategy_defect);
    let mut ops = w.operators.clone();
    for f in ops[0].iter_mut() {
        *f = &*f + &shift;
    }
    check_witness(ms, &ops, strategies)
}

/// Decides whether an assemblage admits a local-hidden-state model.
///
/// Column generation over pure hidden states: a feasible restricted problem is an
/// explicit model; otherwise its Farkas multipliers form a candidate steering
/// inequality whose negative directions enlarge the pure-state pool.
pub fn unsteerable_lp(ms: &MultiSource, budget: SteeringBudget) -> Result<SteeringVerdict> {
    let d = ms.dim();
    if ms.signaling_defect() > EPS_TR {
        return Ok(SteeringVerdict::Undetermined { reason: "assemblage is not no-signalling".into() });
    }
    let outcomes: Vec<usize> = ms.branches().iter().map(Vec::len).collect();
    let count = outcomes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
    match count {
        Some(c) if c <= budget.max_strategies => {}
        _ => {
            return Ok(SteeringVerdict::Undetermined {
                reason: format!("more than {} deterministic strategies", budget.max_strategies),
            })
        }
    }
    let strategies = deterministic_strategies(&outcomes);
    let mut pool: Vec<DVector<Complex64>> = initial_kets(d);

    for _ in 0..budget.max_rounds {
        let coords: Vec<Vec<f64>> = pool.iter().map(|v| HermitianOperator::projector(v).coords().as_slice().to_vec()).collect();
        let lp = inner_lp(ms, &strategies, &coords, budget.max_lp_iterations);
        let feas = lp_feasible(&lp)?;
        if let Some(q) = feas.point {
            let nk = pool.len();
            let hidden = (0..strategies.len())
                .map(|l| {
                    let terms: Vec<HermitianOperator> = (0..nk)
                        .filter(|&k| q[l * nk + k] > 0.0)
                        .map(|k| HermitianOperator::projector(&pool[k]).scale(q[l * nk + k]))
                        .collect();
                    if terms.is_empty() {
                        HermitianOperator::zeros(d)
                    } else {
                        sum(&terms).expect("non-empty")
                    }
                })
                .collect();
            return Ok(SteeringVerdict::Unsteerable { strategies, hidden_states: hidden });
        }
        let dual = feas.dual.expect("infeasible problems carry a dual");
        let ops = operators_from_multipliers(ms, &dual.eq_multipliers)?;
        let mut w = check_witness(ms, &ops, &strategies)?;
        if w.strategy_defect > 0.0 && w.value + w.strategy_defect * ms.marginal(0).trace() < -WITNESS_MARGIN {
            w = absorb_defect(ms, &w, &strategies)?;
        }
        if w.value < -WITNESS_MARGIN && w.strategy_defect <= WITNESS_DEFECT {
            return Ok(SteeringVerdict::Steerable { witness: w });
        }
        let before = pool.len();
        for s in &strategies {
            let (vals, vecs) = strategy_sum(&ops, s).eigen();
            if vals[0] < -EPS_PSD {
                let v = vecs.column(0).into_owned();
                let fresh = pool.iter().all(|p| 1.0 - p.dotc(&v).norm_sqr() > 1e-12);
                if fresh {
                    pool.push(v);
                }
            }
        }
        if pool.len() == before {
            return Ok(SteeringVerdict::Undetermined {
                reason: format!(
                    "restricted model infeasible but no steering inequality certified (value {:.3e}, defect {:.3e})",
                    w.value, w.strategy_defect
                ),
            });
        }
    }
    Ok(SteeringVerdict::Undetermined { reason: "column-generation round budget exhausted".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{steer, BipartiteState, MultiMeasurement, Side};
    use crate::standard::*;

    fn zx() -> MultiMeasurement {
        let z = vec![HermitianOperator::projector(&ket_zero()), HermitianOperator::projector(&ket_one())];
        let x = vec![HermitianOperator::projector(&ket_plus()), HermitianOperator::projector(&ket_minus())];
        MultiMeasurement::new(2, vec![z, x]).unwrap()
    }

    fn werner_assemblage(w: f64) -> MultiSource {
        let rho = BipartiteState::new(2, 2, werner_state(w)).unwrap();
        steer(&rho, &zx(), Side::First).unwrap()
    }

    #[test]
    fn strategies_enumerated() {
        assert_eq!(deterministic_strategies(&[2, 3]).len(), 6);
        assert_eq!(deterministic_strategies(&[2, 3])[1], vec![0, 1]);
    }

    #[test]
    fn bell_assemblage_is_steerable() {
        assert!(unsteerable_lp(&werner_assemblage(1.0), SteeringBudget::default()).unwrap().is_steerable());
    }

    #[test]
    fn noisy_assemblage_is_unsteerable() {
        let v = unsteerable_lp(&werner_assemblage(0.5), SteeringBudget::default()).unwrap();
        match v {
            SteeringVerdict::Unsteerable { hidden_states, .. } => {
                assert!(hidden_states.iter().all(|h| h.min_eigenvalue() >= -EPS_PSD));
            }
            o => panic!("{o:?}"),
        }
    }
}
