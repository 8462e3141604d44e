//! Feasibility of linear constraints over tuples of positive semidefinite blocks.
//!
//! Feasible points come from Dykstra's alternating projections; infeasibility is
//! certified by a separating functional `y` with `Σ_i y_i A_i ⪯ 0` and `b·y > 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermspace::HermitianOperator;
use crate::linalg::{self, EPS_RANK};

/// Affine residual below which a positive point counts as feasible.
pub const PSD_FEAS_TOL: f64 = 1e-9;
/// Minimal normalized margin of an accepted separating functional.
pub const SEPARATION_MARGIN: f64 = 1e-6;

/// Constraints `Σ_k ⟨A_{ik}, X_k⟩ = b_i` over Hermitian blocks `X_k ⪰ 0`.
#[derive(Clone, Debug)]
pub struct PsdProblem {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    rows: Vec<DVector<f64>>,
    rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsdOutcome {
    Feasible {
        blocks: Vec<HermitianOperator>,
        residual: f64,
    },
    Infeasible {
        /// Multipliers `y`, scaled so that `‖Σ_i y_i A_i‖ = 1`.
        multipliers: Vec<f64>,
        /// `b·y`.
        margin: f64,
        /// Largest eigenvalue of `Σ_i y_i A_i` over all blocks (at most round-off).
        max_eigenvalue: f64,
    },
    Inconclusive {
        residual: f64,
        gap: f64,
    },
}

impl PsdOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PsdOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, PsdOutcome::Infeasible { .. })
    }
}

impl PsdProblem {
    pub fn new(block_dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut acc = 0;
        for &d in &block_dims {
            offsets.push(acc);
            acc += d * d;
        }
        Self { block_dims, offsets, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    fn width(&self) -> usize {
        self.block_dims.iter().map(|d| d * d).sum()
    }

    /// Adds `Σ ⟨A, X_block⟩ = rhs` for the given `(block, A)` terms.
    pub fn add_constraint(&mut self, terms: &[(usize, HermitianOperator)], rhs: f64) -> Result<()> {
        let mut row = DVector::zeros(self.width());
        for (k, a) in terms {
            let d = *self.block_dims.get(*k).ok_or_else(|| Error::Precondition(format!("no block {k}")))?;
            if a.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: a.dim() });
            }
            let c = a.coords();
            let off = self.offsets[*k];
            for (i, v) in c.iter().enumerate() {
                row[off + i] += v;
            }
        }
        self.rows.push(row);
        self.rhs.push(rhs);
        Ok(())
    }

    /// Adds the operator equation `Σ c·X_block = target`, one scalar row per coordinate.
    pub fn add_operator_equation(&mut self, terms: &[(usize, f64)], target: &HermitianOperator) -> Result<()> {
        let d = target.dim();
        let t = target.coords();
        for i in 0..d * d {
            let mut unit = vec![0.0; d * d];
            unit[i] = 1.0;
            let basis = HermitianOperator::from_coords(d, &unit)?;
            let ts: Vec<(usize, HermitianOperator)> = terms.iter().map(|&(k, c)| (k, basis.scale(c))).collect();
            self.add_constraint(&ts, t[i])?;
        }
        Ok(())
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.width();
        let mut a = DMatrix::zeros(self.rows.len(), n);
        for (i, r) in self.rows.iter().enumerate() {
            a.set_row(i, &r.transpose());
        }
        a
    }

    fn split(&self, x: &DVector<f64>) -> Result<Vec<HermitianOperator>> {
        self.block_dims
            .iter()
            .zip(&self.offsets)
            .map(|(&d, &off)| HermitianOperator::from_coords(d, &x.as_slice()[off..off + d * d]))
            .collect()
    }

    fn project_cone(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(x.len());
        for (b, &off) in self.split(x)?.iter().zip(&self.offsets) {
            let p = b.psd_part().coords();
            out.rows_mut(off, p.len()).copy_from(&p);
        }
        Ok(out)
    }

    fn max_block_eigenvalue(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.split(x)?.iter().map(|b| b.max_eigenvalue()).fold(f64::NEG_INFINITY, f64::max))
    }
}

struct Affine {
    a: DMatrix<f64>,
    pinv: DMatrix<f64>,
    b: DVector<f64>,
}

impl Affine {
    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.pinv * (&self.a * x - &self.b)
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        (&self.a * x - &self.b).norm()
    }
}

/// Decides feasibility of `problem` within `max_iter` projection sweeps.
pub fn psd_feasible(problem: &PsdProblem, max_iter: usize) -> Result<PsdOutcome> {
    let n = problem.width();
    if problem.rows.is_empty() {
        let zeros = problem.split(&DVector::zeros(n))?;
        return Ok(PsdOutcome::Feasible { blocks: zeros, residual: 0.0 });
    }
    let a = problem.matrix();
    let b = DVector::from_column_slice(&problem.rhs);
    let pinv = linalg::pinv(&a, EPS_RANK);
    let aff = Affine { a, pinv, b };

    // inconsistent affine part: the residual of b against range(A) separates
    let x_ls = &aff.pinv * &aff.b;
    let r = &aff.b - &aff.a * &x_ls;
    if r.norm() > 1e-9 * (1.0 + aff.b.norm()) {
        let y = &r / r.norm();
        let margin = aff.b.dot(&y);
        return Ok(PsdOutcome::Infeasible {
            multipliers: y.iter().copied().collect(),
            margin,
            max_eigenvalue: problem.max_block_eigenvalue(&(aff.a.transpose() * &y))?,
        });
    }

    // Dykstra from the origin
    let mut x = DVector::zeros(n);
    let mut p = DVector::zeros(n);
    let mut q = DVector::zeros(n);
    let mut best_res = f64::INFINITY;
    for _ in 0..max_iter {
        let y = aff.project(&(&x + &p));
        p = &x + &p - &y;
        let xn = problem.project_cone(&(&y + &q))?;
        q = &y + &q - &xn;
        x = xn;
        let res = aff.residual(&x);
        best_res = best_res.min(res);
        if res <= PSD_FEAS_TOL {
            return Ok(PsdOutcome::Feasible { blocks: problem.split(&x)?, residual: res });
        }
    }

    // plain alternating projections converge to a closest pair; their gap separates
    let mut k = problem.project_cone(&x_ls)?;
    let mut l = aff.project(&k);
    for _ in 0..max_iter {
        let kn = problem.project_cone(&l)?;
        let ln = aff.project(&kn);
        let step = (&kn - &k).norm() + (&ln - &l).norm();
        k = kn;
        l = ln;
        if step < 1e-14 {
            break;
        }
    }
    let gap_vec = &l - &k;
    let gap = gap_vec.norm();
    if gap < 1e-12 {
        return Ok(PsdOutcome::Inconclusive { residual: best_res, gap });
    }
    let at = aff.a.transpose();
    let at_pinv = linalg::pinv(&at, EPS_RANK);
    let mut y = &at_pinv * &gap_vec;
    let mut aty = &at * &y;
    let scale = aty.norm();
    if scale <= 0.0 {
        return Ok(PsdOutcome::Inconclusive { residual: best_res, gap });
    }
    y /= scale;
    aty /= scale;
    let mut top = problem.max_block_eigenvalue(&aty)?;
    if top > 0.0 {
        // shift by a functional representing the identity on every block, if available
        let mut ident = DVector::zeros(n);
        for (&d, &off) in problem.block_dims.iter().zip(&problem.offsets) {
            let c = HermitianOperator::identity(d).coords();
            ident.rows_mut(off, c.len()).copy_from(&c);
        }
        let y0 = &at_pinv * &ident;
        if (&at * &y0 - &ident).norm() < 1e-9 {
            y -= &y0 * (top * (1.0 + 1e-9));
            aty = &at * &y;
            let s = aty.norm();
            y /= s;
            aty /= s;
            top = problem.max_block_eigenvalue(&aty)?;
        }
    }
    let margin = aff.b.dot(&y);
    if top <= 1e-12 && margin > SEPARATION_MARGIN {
        Ok(PsdOutcome::Infeasible { multipliers: y.iter().copied().collect(), margin, max_eigenvalue: top })
    } else {
        Ok(PsdOutcome::Inconclusive { residual: best_res, gap })
    }
}
