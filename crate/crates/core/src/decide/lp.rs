//! Dense two-phase simplex for small feasibility and optimization problems,
//! returning Farkas certificates on infeasibility.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-9;
/// Pivots between refactorizations of the basis.
const REFACTOR_EVERY: usize = 100;
const FEAS_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Free,
    NonNegative,
}

/// `A_eq x = b_eq`, `A_le x ≤ b_le`, optional objective to minimize.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    kinds: Vec<VarKind>,
    eq: Vec<(Vec<f64>, f64)>,
    le: Vec<(Vec<f64>, f64)>,
    objective: Option<Vec<f64>>,
    max_iterations: usize,
}

/// Multipliers proving infeasibility: `u_eq` free, `u_le ≥ 0`,
/// `Aᵀu` zero on free and nonnegative on nonnegative variables, `bᵀu < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub eq_multipliers: Vec<f64>,
    pub le_multipliers: Vec<f64>,
    /// `−bᵀu` after scaling the multipliers to unit max-norm.
    pub violation: f64,
    /// Largest violation of the sign conditions on `Aᵀu` and `u_le`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64, residual: f64 },
    Infeasible(FarkasCertificate),
    Unbounded,
}

impl LinearProgram {
    pub fn new(kinds: Vec<VarKind>) -> Self {
        Self { kinds, eq: Vec::new(), le: Vec::new(), objective: None, max_iterations: 200_000 }
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.kinds.len());
        self.eq.push((row, rhs));
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.kinds.len());
        self.le.push((row, rhs));
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    /// Minimizes `c·x`.
    pub fn set_objective(&mut self, c: Vec<f64>) {
        debug_assert_eq!(c.len(), self.kinds.len());
        self.objective = Some(c);
    }

    pub fn set_max_iterations(&mut self, n: usize) {
        self.max_iterations = n;
    }

    /// Largest violation of all constraints at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst = 0.0f64;
        for (r, b) in &self.eq {
            worst = worst.max((dot(r) - b).abs());
        }
        for (r, b) in &self.le {
            worst = worst.max(dot(r) - b);
        }
        for (k, v) in self.kinds.iter().zip(x) {
            if *k == VarKind::NonNegative {
                worst = worst.max(-v);
            }
        }
        worst
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Simplex::build(self).run(self)
    }
}

/// Standard form `A z = b`, `z ≥ 0`, `b ≥ 0`, with artificial columns appended.
struct Simplex {
    m: usize,
    /// Structural columns (split free variables and slacks), before artificials.
    n: usize,
    /// Row-major tableau of `m + 1` rows and `n + m + 1` columns; last row is the cost row.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Orientation of each original row after making `b ≥ 0`.
    row_sign: Vec<f64>,
    /// For every original variable: column of its positive part and optional negative part.
    var_cols: Vec<(usize, Option<usize>)>,
    cost: Vec<f64>,
    /// Initial constraint rows `[A | I | b]`, kept for refactorization.
    original: Vec<f64>,
    /// Cost vector of the phase in progress.
    phase_cost: Vec<f64>,
}

impl Simplex {
    fn width(&self) -> usize {
        self.n + self.m + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width() + c]
    }

    fn build(lp: &LinearProgram) -> Self {
        let mut var_cols = Vec::with_capacity(lp.kinds.len());
        let mut col = 0;
        for k in &lp.kinds {
            match k {
                VarKind::NonNegative => {
                    var_cols.push((col, None));
                    col += 1;
                }
                VarKind::Free => {
                    var_cols.push((col, Some(col + 1)));
                    col += 2;
                }
            }
        }
        let n_struct = col;
        let n_slack = lp.le.len();
        let n = n_struct + n_slack;
        let m = lp.eq.len() + lp.le.len();
        let w = n + m + 1;
        let mut t = vec![0.0; (m + 1) * w];
        let mut row_sign = Vec::with_capacity(m);
        let rows = lp.eq.iter().map(|r| (r, None)).chain(lp.le.iter().enumerate().map(|(i, r)| (r, Some(i))));
        for (i, ((coeffs, rhs), slack)) in rows.enumerate() {
            let s = if *rhs < 0.0 { -1.0 } else { 1.0 };
            row_sign.push(s);
            let base = i * w;
            for (v, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let (p, neg) = var_cols[v];
                t[base + p] = s * a;
                if let Some(q) = neg {
                    t[base + q] = -s * a;
                }
            }
            if let Some(k) = slack {
                t[base + n_struct + k] = s;
            }
            t[base + n + i] = 1.0;
            t[base + w - 1] = s * rhs;
        }
        let mut cost = vec![0.0; n];
        if let Some(c) = &lp.objective {
            for (v, &cv) in c.iter().enumerate() {
                let (p, neg) = var_cols[v];
                cost[p] = cv;
                if let Some(q) = neg {
                    cost[q] = -cv;
                }
            }
        }
        let original = t[..m * w].to_vec();
        Simplex { m, n, t, basis: (n..n + m).collect(), row_sign, var_cols, cost, original, phase_cost: Vec::new() }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let pv = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= pv;
        }
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                let row = &mut self.t[i * w..(i + 1) * w];
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Loads cost vector `c` (over all columns) into the last row as reduced costs.
    fn load_cost(&mut self, c: &[f64]) {
        self.phase_cost = c.to_vec();
        let w = self.width();
        let m = self.m;
        for j in 0..w {
            self.t[m * w + j] = if j < c.len() { c[j] } else { 0.0 };
        }
        for r in 0..m {
            let cb = c[self.basis[r]];
            if cb != 0.0 {
                for j in 0..w {
                    self.t[m * w + j] -= cb * self.t[r * w + j];
                }
            }
        }
    }

    /// Recomputes the tableau as `B⁻¹ [A | I | b]` from the original rows.
    fn refactor(&mut self) {
        let (m, w) = (self.m, self.width());
        let b = DMatrix::from_fn(m, m, |i, j| self.original[i * w + self.basis[j]]);
        let Some(inv) = b.try_inverse() else {
            return;
        };
        let a = DMatrix::from_row_slice(m, w, &self.original);
        let fresh = inv * a;
        for i in 0..m {
            for j in 0..w {
                self.t[i * w + j] = fresh[(i, j)];
            }
            self.t[i * w + self.basis[i]] = 1.0;
        }
        let c = std::mem::take(&mut self.phase_cost);
        self.load_cost(&c);
    }

    /// Minimizes the loaded cost over columns `allowed`; returns false when unbounded.
    /// Dantzig pricing until the objective stalls, Bland's rule afterwards.
    fn optimize(&mut self, allowed: usize, max_iter: usize) -> Result<bool> {
        let w = self.width();
        let m = self.m;
        let mut stall = 0usize;
        let mut bland = false;
        let mut last_obj = f64::INFINITY;
        for it in 0..max_iter {
            if it > 0 && it % REFACTOR_EVERY == 0 {
                self.refactor();
            }
            // reduced costs are compared relative to the column scale
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..allowed {
                let rc = self.t[m * w + j];
                if rc >= -PIVOT_EPS {
                    continue;
                }
                let scale = (0..m).map(|i| self.t[i * w + j].abs()).fold(1.0, f64::max);
                let score = rc / scale;
                if score < -PIVOT_EPS && score < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = score;
                }
            }
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut ratio = f64::INFINITY;
            for r in 0..m {
                let a = self.t[r * w + c];
                if a > PIVOT_EPS {
                    ratio = ratio.min(self.t[r * w + w - 1].max(0.0) / a);
                }
            }
            if ratio == f64::INFINITY {
                return Ok(false);
            }
            let slack = 1e-9 * (1.0 + ratio);
            let mut leave: Option<usize> = None;
            for r in 0..m {
                let a = self.t[r * w + c];
                if a > PIVOT_EPS && self.t[r * w + w - 1].max(0.0) / a <= ratio + slack {
                    let better = match leave {
                        None => true,
                        Some(l) if bland => self.basis[r] < self.basis[l],
                        Some(l) => a > self.t[l * w + c],
                    };
                    if better {
                        leave = Some(r);
                    }
                }
            }
            let r = leave.expect("ratio test found a row");
            self.pivot(r, c);
            let obj = -self.t[m * w + w - 1];
            if obj < last_obj - 1e-11 * (1.0 + obj.abs()) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
                if stall > 50 {
                    bland = true;
                }
            }
        }
        Err(Error::Numerical("simplex iteration budget exhausted".into()))
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpOutcome> {
        let (m, n) = (self.m, self.n);
        let w = self.width();
        let mut phase1 = vec![0.0; n + m];
        for c in phase1.iter_mut().skip(n) {
            *c = 1.0;
        }
        self.load_cost(&phase1);
        self.optimize(n + m, lp.max_iterations)?;
        let infeas = -self.at(m, w - 1);
        let scale = 1.0 + lp.eq.iter().chain(&lp.le).map(|(_, b)| b.abs()).fold(0.0, f64::max);
        if infeas > FEAS_EPS * scale {
            return Ok(LpOutcome::Infeasible(self.farkas(lp)));
        }
        // drive artificials out of the basis where possible
        for r in 0..m {
            if self.basis[r] >= n {
                let best = (0..n).max_by(|&a, &b| self.at(r, a).abs().total_cmp(&self.at(r, b).abs()));
                if let Some(c) = best.filter(|&c| self.at(r, c).abs() > 1e-7) {
                    self.pivot(r, c);
                }
            }
        }
        // forbid artificial columns in phase II by zeroing them out of non-basic consideration
        let mut phase2 = self.cost.clone();
        phase2.extend(std::iter::repeat_n(0.0, m));
        self.load_cost(&phase2);
        if !self.optimize(n, lp.max_iterations)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut z = vec![0.0; n + m];
        for r in 0..m {
            z[self.basis[r]] = self.at(r, w - 1);
        }
        let x: Vec<f64> = self
            .var_cols
            .iter()
            .map(|&(p, neg)| z[p] - neg.map_or(0.0, |q| z[q]))
            .collect();
        let value = lp.objective.as_ref().map_or(0.0, |c| c.iter().zip(&x).map(|(a, b)| a * b).sum());
        let residual = lp.residual(&x);
        Ok(LpOutcome::Optimal { x, value, residual })
    }

    fn farkas(&self, lp: &LinearProgram) -> FarkasCertificate {
        let (m, n) = (self.m, self.n);
        // phase-I duals from the reduced costs of the artificial columns
        let y: Vec<f64> = (0..m).map(|i| 1.0 - self.at(m, n + i)).collect();
        let mut u: Vec<f64> = (0..m).map(|i| -self.row_sign[i] * y[i]).collect();
        for v in u.iter_mut() {
            if v.abs() < 1e-13 {
                *v = 0.0;
            }
        }
        let top = u.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if top > 0.0 {
            for v in u.iter_mut() {
                *v /= top;
            }
        }
        let ne = lp.eq.len();
        let rows: Vec<&(Vec<f64>, f64)> = lp.eq.iter().chain(&lp.le).collect();
        let bu: f64 = rows.iter().zip(&u).map(|((_, b), ui)| b * ui).sum();
        let mut residual = 0.0f64;
        for (v, kind) in lp.kinds.iter().enumerate() {
            let atu: f64 = rows.iter().zip(&u).map(|((r, _), ui)| r[v] * ui).sum();
            residual = residual.max(match kind {
                VarKind::Free => atu.abs(),
                VarKind::NonNegative => (-atu).max(0.0),
            });
        }
        for ul in &u[ne..] {
            residual = residual.max(-ul);
        }
        FarkasCertificate {
            eq_multipliers: u[..ne].to_vec(),
            le_multipliers: u[ne..].to_vec(),
            violation: -bu,
            residual,
        }
    }
}

/// Feasibility verdict with either a point or an infeasibility proof.
#[derive(Clone, Debug, PartialEq)]
pub struct LpFeasibility {
    pub feasible: bool,
    pub point: Option<Vec<f64>>,
    pub residual: f64,
    pub dual: Option<FarkasCertificate>,
}

/// Solves the constraint system without an objective.
pub fn lp_feasible(lp: &LinearProgram) -> Result<LpFeasibility> {
    let mut p = lp.clone();
    p.objective = None;
    match p.solve()? {
        LpOutcome::Optimal { x, residual, .. } => {
            Ok(LpFeasibility { feasible: true, point: Some(x), residual, dual: None })
        }
        LpOutcome::Infeasible(f) => Ok(LpFeasibility { feasible: false, point: None, residual: f64::NAN, dual: Some(f) }),
        LpOutcome::Unbounded => Err(Error::Numerical("feasibility problem reported unbounded".into())),
    }
}
