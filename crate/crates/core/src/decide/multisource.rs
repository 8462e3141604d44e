use serde_json::json;

use super::library::source_frames;
use super::lp::{lp_feasible, LinearProgram, VarKind};
use super::steering::{unsteerable_lp, SteeringBudget, SteeringVerdict};
use super::{ensure_valid, rules, to_json, DecideConfig, Mode, Verdict};
use crate::certify::{verify_source_certificate, Certificate, SourceCertificate};
use crate::error::Result;
use crate::hermspace::{canonical_dual_frame, dual_basis, is_linearly_independent, nullspace_coeffs, span_of, HermitianOperator, OperatorSpan};
use crate::linalg::{self, EPS_RANK};
use crate::processes::{MultiSource, Process};

/// Trace distance below which two normalized states are treated as equal.
pub(crate) const DISTINCT_TOL: f64 = 1e-8;
const PURITY_TOL: f64 = 1e-9;

pub(crate) fn trace_distance(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    0.5 * (a - b).eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
}

/// Indices into `pool` of each operator after merging equal ones (first occurrence kept).
pub(crate) fn merge_equal(ops: &[HermitianOperator]) -> (Vec<HermitianOperator>, Vec<usize>) {
    let mut pool: Vec<HermitianOperator> = Vec::new();
    let mut index = Vec::with_capacity(ops.len());
    for op in ops {
        match pool.iter().position(|p| trace_distance(p, op) <= DISTINCT_TOL) {
            Some(i) => index.push(i),
            None => {
                index.push(pool.len());
                pool.push(op.clone());
            }
        }
    }
    (pool, index)
}

struct Distinct {
    states: Vec<HermitianOperator>,
    /// `(outcome, setting)` of the first branch showing each state.
    labels: Vec<(usize, usize)>,
}

fn distinct_states(ms: &MultiSource) -> Distinct {
    let mut states = Vec::new();
    let mut labels = Vec::new();
    for (x, row) in ms.branches().iter().enumerate() {
        for (a, b) in row.iter().enumerate() {
            if b.is_present() {
                states.push(b.state.clone());
                labels.push((a, x));
            }
        }
    }
    let (pool, index) = merge_equal(&states);
    let mut first = vec![None; pool.len()];
    for (k, &i) in index.iter().enumerate() {
        first[i].get_or_insert(labels[k]);
    }
    Distinct { states: pool, labels: first.into_iter().map(|l| l.expect("every pooled state occurs")).collect() }
}

fn present_subnormalized(ms: &MultiSource) -> Vec<HermitianOperator> {
    ms.branches().iter().flatten().filter(|b| b.is_present()).map(|b| b.subnormalized()).collect()
}

fn checked(ms: &MultiSource, cert: SourceCertificate, cfg: &DecideConfig, diag: &mut Vec<String>, what: &str) -> Result<Option<Certificate>> {
    let report = verify_source_certificate(ms, &cert, cfg.tol)?;
    if report.passed() {
        Ok(Some(Certificate::MultiSource(cert)))
    } else {
        diag.push(format!("{what}: candidate certificate failed verification (max residual {:.3e})", report.max_residual()));
        Ok(None)
    }
}

/// Decides classicality of a multi-source (states, sources, multi-states and assemblages).
pub fn decide_multisource(ms: &MultiSource, cfg: &DecideConfig) -> Result<Verdict> {
    ensure_valid(&Process::MultiSource(ms.clone()))?;
    run(ms, cfg, Mode::Full)
}

pub(super) fn run(ms: &MultiSource, cfg: &DecideConfig, mode: Mode) -> Result<Verdict> {
    let mut diag = Vec::new();
    let distinct = distinct_states(ms);
    if distinct.states.is_empty() {
        diag.push("no branch has positive weight".into());
        return Ok(Verdict::inconclusive(diag));
    }

    // R1
    if is_linearly_independent(&distinct.states)? {
        let cert = SourceCertificate { frame: distinct.states.clone(), dual: dual_basis(&distinct.states)? };
        if let Some(c) = checked(ms, cert, cfg, &mut diag, "linearly independent states")? {
            return Ok(Verdict::classical(rules::LINEARLY_INDEPENDENT, c, diag));
        }
    } else {
        diag.push(format!("{} distinct states are linearly dependent", distinct.states.len()));
    }

    // R2
    if distinct.states.len() <= 3 {
        if let Some(c) = simplex_fit(ms, &distinct.states, cfg, &mut diag)? {
            return Ok(Verdict::classical(rules::THREE_STATES, c, diag));
        }
    }

    // R3
    let pure: Vec<usize> = (0..distinct.states.len())
        .filter(|&i| (distinct.states[i].purity() - 1.0).abs() <= PURITY_TOL)
        .collect();
    if pure.len() >= 2 {
        let ops: Vec<HermitianOperator> = pure.iter().map(|&i| distinct.states[i].clone()).collect();
        if let Some(beta) = nullspace_coeffs(&ops)?.into_iter().next() {
            let residual = beta.apply(&ops)?.frobenius_norm();
            let purities: Vec<f64> = ops.iter().map(HermitianOperator::purity).collect();
            let labels: Vec<(usize, usize)> = pure.iter().map(|&i| distinct.labels[i]).collect();
            return Ok(Verdict::nonclassical(
                rules::PURE_DEPENDENT,
                json!({
                    "labels": labels,
                    "dependence": beta.0,
                    "dependence_residual": residual,
                    "purities": purities,
                }),
                diag,
            ));
        }
    }

    // R4
    if ms.is_assemblage() && ms.num_settings() > 1 {
        let budget = match mode {
            Mode::Full => cfg.steering,
            Mode::Probe => SteeringBudget { max_strategies: cfg.probe_max_strategies, ..cfg.steering },
        };
        match unsteerable_lp(ms, budget)? {
            SteeringVerdict::Steerable { witness } => {
                return Ok(Verdict::nonclassical(rules::STEERABLE, to_json(&witness), diag));
            }
            SteeringVerdict::Unsteerable { .. } => diag.push("assemblage admits a local-hidden-state model".into()),
            SteeringVerdict::Undetermined { reason } => diag.push(format!("steering test undetermined: {reason}")),
        }
    }

    // R5
    if mode == Mode::Full {
        for frame in source_frames(ms.dim(), cfg.net_resolution, cfg.seed) {
            if !cfg.frame_allowed(&frame.name) {
                continue;
            }
            match fixed_frame_search(ms, &frame.states, cfg, &mut diag)? {
                Some(c) => {
                    diag.push(format!("frame {}: representation found", frame.name));
                    return Ok(Verdict::classical(rules::FIXED_FRAME, c, diag));
                }
                None => diag.push(format!("frame {}: no representation", frame.name)),
            }
        }
    }
    Ok(Verdict::inconclusive(diag))
}

/// Chooses a linearly independent subfamily whose dual basis gives weights in `[0, 1]`.
fn simplex_fit(ms: &MultiSource, states: &[HermitianOperator], cfg: &DecideConfig, diag: &mut Vec<String>) -> Result<Option<Certificate>> {
    let r = span_of(states)?.dim();
    for subset in combinations(states.len(), r) {
        let sub: Vec<HermitianOperator> = subset.iter().map(|&i| states[i].clone()).collect();
        if !is_linearly_independent(&sub)? {
            continue;
        }
        let dual = dual_basis(&sub)?;
        let ok = states.iter().all(|s| dual.iter().all(|d| {
            let w = d.hs_inner(s).unwrap_or(f64::NAN);
            (-1e-12..=1.0 + 1e-12).contains(&w)
        }));
        if ok {
            if let Some(c) = checked(ms, SourceCertificate { frame: sub, dual }, cfg, diag, "simplex fit")? {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Least-norm `H ∈ V` with `⟨H, S_k⟩ = targets[k]` for the spanning family `S`.
pub(crate) fn functional_in_span(span: &OperatorSpan, family: &[HermitianOperator], targets: &[f64]) -> Result<(HermitianOperator, f64)> {
    let basis = span.basis();
    let d = span.ambient_dim();
    if basis.is_empty() {
        return Ok((HermitianOperator::zeros(d), targets.iter().fold(0.0, |m, t| m.max(t.abs()))));
    }
    let e = nalgebra::DMatrix::from_fn(family.len(), basis.len(), |k, j| family[k].hs_inner(&basis[j]).unwrap_or(0.0));
    let t = nalgebra::DVector::from_column_slice(targets);
    let c = linalg::pinv(&e, EPS_RANK) * &t;
    let residual = (&e * &c - &t).amax();
    let h = crate::hermspace::linear_combination(c.as_slice(), basis)?;
    Ok((h, residual))
}

/// Outcome of the fixed-frame linear program for a multi-source.
#[derive(Clone, Debug, PartialEq)]
pub enum FrameLp {
    /// `weights[k][λ]` for the `k`-th present branch, plus the certificate built from them.
    Feasible { weights: Vec<Vec<f64>>, certificate: SourceCertificate },
    Infeasible { violation: f64 },
}

/// Solves for `p(aλ|x) ≥ 0` with `Σ_λ p(aλ|x) σ_λ = p(a|x)ρ_{a|x}` subject to the operational identities.
///
/// The canonical dual projected onto the span is tried first, so a feasible
/// problem with many solutions returns the canonical one when it is valid.
pub fn fixed_frame_lp(ms: &MultiSource, frame: &[HermitianOperator], cfg: &DecideConfig) -> Result<FrameLp> {
    let sub = present_subnormalized(ms);
    let span = span_of(&sub)?;
    let dual = canonical_dual_frame(frame)?.iter().map(|d| span.project(d)).collect::<Result<Vec<_>>>()?;
    let cert = SourceCertificate { frame: frame.to_vec(), dual };
    if verify_source_certificate(ms, &cert, cfg.tol)?.passed() {
        let weights = sub.iter().map(|s| cert.dual.iter().map(|h| h.inner(s)).collect()).collect();
        return Ok(FrameLp::Feasible { weights, certificate: cert });
    }
    let nk = sub.len();
    let nl = frame.len();
    let d2 = ms.dim() * ms.dim();
    let var = |k: usize, l: usize| k * nl + l;
    let mut lp = LinearProgram::new(vec![VarKind::NonNegative; nk * nl]);
    lp.set_max_iterations(cfg.lp_max_iterations);
    let frame_coords: Vec<_> = frame.iter().map(HermitianOperator::coords).collect();
    for (k, s) in sub.iter().enumerate() {
        let target = s.coords();
        for i in 0..d2 {
            let mut row = vec![0.0; nk * nl];
            for (l, fc) in frame_coords.iter().enumerate() {
                row[var(k, l)] = fc[i];
            }
            lp.add_eq(row, target[i]);
        }
    }
    for beta in nullspace_coeffs(&sub)? {
        for l in 0..nl {
            let mut row = vec![0.0; nk * nl];
            for (k, b) in beta.0.iter().enumerate() {
                row[var(k, l)] = *b;
            }
            lp.add_eq(row, 0.0);
        }
    }
    let res = lp_feasible(&lp)?;
    let Some(x) = res.point else {
        let violation = res.dual.map_or(f64::NAN, |d| d.violation);
        return Ok(FrameLp::Infeasible { violation });
    };
    let weights: Vec<Vec<f64>> = (0..nk).map(|k| (0..nl).map(|l| x[var(k, l)].max(0.0)).collect()).collect();
    let mut dual = Vec::with_capacity(nl);
    for l in 0..nl {
        let t: Vec<f64> = weights.iter().map(|w| w[l]).collect();
        dual.push(functional_in_span(&span, &sub, &t)?.0);
    }
    Ok(FrameLp::Feasible { weights, certificate: SourceCertificate { frame: frame.to_vec(), dual } })
}

fn fixed_frame_search(ms: &MultiSource, frame: &[HermitianOperator], cfg: &DecideConfig, diag: &mut Vec<String>) -> Result<Option<Certificate>> {
    match fixed_frame_lp(ms, frame, cfg)? {
        FrameLp::Feasible { certificate, .. } => checked(ms, certificate, cfg, diag, "fixed-frame LP"),
        FrameLp::Infeasible { .. } => Ok(None),
    }
}
