use serde_json::json;

use super::library::parent_povms;
use super::lp::{lp_feasible, LinearProgram, VarKind};
use super::multisource::{functional_in_span, merge_equal};
use super::psd::{psd_feasible, PsdOutcome, PsdProblem};
use super::{ensure_valid, rules, DecideConfig, Mode, Verdict};
use crate::certify::{verify_measurement_certificate, Certificate, MeasurementCertificate};
use crate::error::Result;
use crate::hermspace::{dual_basis, nullspace_coeffs, span_of, HermitianOperator};
use crate::linalg::EPS_RANK;
use crate::processes::{MultiMeasurement, Process};

/// Largest outcome lattice for which joint measurability is tested.
pub const MAX_JOINT_OUTCOMES: usize = 4096;

/// Decides classicality of a multi-measurement.
pub fn decide_multimeasurement(mm: &MultiMeasurement, cfg: &DecideConfig) -> Result<Verdict> {
    ensure_valid(&Process::MultiMeasurement(mm.clone()))?;
    run(mm, cfg, Mode::Full)
}

fn checked(mm: &MultiMeasurement, cert: MeasurementCertificate, cfg: &DecideConfig, diag: &mut Vec<String>, what: &str) -> Result<Option<Certificate>> {
    let report = verify_measurement_certificate(mm, &cert, cfg.tol)?;
    if report.passed() {
        Ok(Some(Certificate::MultiMeasurement(cert)))
    } else {
        diag.push(format!("{what}: candidate certificate failed verification (max residual {:.3e})", report.max_residual()));
        Ok(None)
    }
}

pub(super) fn run(mm: &MultiMeasurement, cfg: &DecideConfig, mode: Mode) -> Result<Verdict> {
    let mut diag = Vec::new();

    // R1
    if mm.num_settings() == 1 {
        let nonzero: Vec<&HermitianOperator> = mm.setting(0).iter().filter(|e| e.frobenius_norm() > 1e-12).collect();
        if nonzero.iter().all(|e| e.rank(EPS_RANK) == 1) {
            let normalized: Vec<HermitianOperator> = nonzero.iter().map(|e| e.scale(1.0 / e.trace())).collect();
            let (pool, index) = merge_equal(&normalized);
            let mut merged = vec![HermitianOperator::zeros(mm.dim()); pool.len()];
            for (e, &i) in nonzero.iter().zip(&index) {
                merged[i] = &merged[i] + *e;
            }
            if merged.len() < nonzero.len() {
                diag.push(format!("merged {} proportional effects", nonzero.len() - merged.len()));
            }
            match nullspace_coeffs(&merged)?.into_iter().next() {
                None => {
                    let cert = MeasurementCertificate { dual: dual_basis(&merged)?, parent: merged };
                    if let Some(c) = checked(mm, cert, cfg, &mut diag, "rank-one effects")? {
                        return Ok(Verdict::classical(rules::RANK_ONE_INDEPENDENT, c, diag));
                    }
                }
                Some(beta) => {
                    let residual = beta.apply(&merged)?.frobenius_norm();
                    let ranks: Vec<usize> = merged.iter().map(|e| e.rank(EPS_RANK)).collect();
                    return Ok(Verdict::nonclassical(
                        rules::RANK_ONE_DEPENDENT,
                        json!({ "dependence": beta.0, "dependence_residual": residual, "ranks": ranks, "merged_effects": merged }),
                        diag,
                    ));
                }
            }
        }
    }

    // R2
    if mm.num_settings() > 1 {
        match joint_measurability(mm, cfg.psd_max_iterations)? {
            Some(JointMeasurability { outcome: PsdOutcome::Infeasible { multipliers, margin, max_eigenvalue }, .. }) => {
                let d2 = mm.dim() * mm.dim();
                let mut ops = Vec::new();
                let mut k = 0;
                for row in mm.effects() {
                    let mut r = Vec::new();
                    for _ in row {
                        r.push(HermitianOperator::from_coords(mm.dim(), &multipliers[k..k + d2])?);
                        k += d2;
                    }
                    ops.push(r);
                }
                return Ok(Verdict::nonclassical(
                    rules::INCOMPATIBLE,
                    json!({ "separating_operators": ops, "margin": margin, "max_eigenvalue": max_eigenvalue }),
                    diag,
                ));
            }
            Some(JointMeasurability { outcome: PsdOutcome::Feasible { .. }, .. }) => {
                diag.push("measurements are jointly measurable".into())
            }
            Some(_) => diag.push("joint measurability undetermined".into()),
            None => diag.push("outcome lattice too large for the joint measurability test".into()),
        }
    }

    // R3
    if mode == Mode::Full {
        for parent in parent_povms(mm.dim()) {
            if !cfg.frame_allowed(&parent.name) {
                continue;
            }
            match parent_povm_lp(mm, &parent.effects, cfg)? {
                Some(cert) => {
                    if let Some(c) = checked(mm, cert, cfg, &mut diag, "parent LP")? {
                        diag.push(format!("parent {}: representation found", parent.name));
                        return Ok(Verdict::classical(rules::PARENT_POVM, c, diag));
                    }
                }
                None => diag.push(format!("parent {}: no representation", parent.name)),
            }
        }
    }
    Ok(Verdict::inconclusive(diag))
}

/// A joint-measurability problem over the product outcome lattice and its outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct JointMeasurability {
    /// Outcome tuple `(b_1, …, b_Y)` of every parent block.
    pub lattice: Vec<Vec<usize>>,
    pub outcome: PsdOutcome,
}

/// Searches for a parent POVM whose marginals are the given measurements;
/// `None` when the outcome lattice exceeds [`MAX_JOINT_OUTCOMES`].
pub fn joint_measurability(mm: &MultiMeasurement, max_iter: usize) -> Result<Option<JointMeasurability>> {
    let counts: Vec<usize> = mm.effects().iter().map(Vec::len).collect();
    let size = counts.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
    let Some(size) = size.filter(|&s| s <= MAX_JOINT_OUTCOMES) else {
        return Ok(None);
    };
    let lattice = super::steering::deterministic_strategies(&counts);
    debug_assert_eq!(lattice.len(), size);
    let mut p = PsdProblem::new(vec![mm.dim(); size]);
    for (y, row) in mm.effects().iter().enumerate() {
        for (b, m) in row.iter().enumerate() {
            let terms: Vec<(usize, f64)> =
                lattice.iter().enumerate().filter(|(_, t)| t[y] == b).map(|(j, _)| (j, 1.0)).collect();
            p.add_operator_equation(&terms, m)?;
        }
    }
    Ok(Some(JointMeasurability { outcome: psd_feasible(&p, max_iter)?, lattice }))
}

/// Solves for response functions `p(b|yλ)` over a fixed parent POVM and builds the certificate.
pub fn parent_povm_lp(mm: &MultiMeasurement, parent: &[HermitianOperator], cfg: &DecideConfig) -> Result<Option<MeasurementCertificate>> {
    let flat = mm.flat();
    let nk = flat.len();
    let nl = parent.len();
    let d2 = mm.dim() * mm.dim();
    let var = |l: usize, k: usize| l * nk + k;
    let mut lp = LinearProgram::new(vec![VarKind::NonNegative; nk * nl]);
    lp.set_max_iterations(cfg.lp_max_iterations);
    let pc: Vec<_> = parent.iter().map(HermitianOperator::coords).collect();
    for (k, m) in flat.iter().enumerate() {
        let target = m.coords();
        for i in 0..d2 {
            let mut row = vec![0.0; nk * nl];
            for (l, c) in pc.iter().enumerate() {
                row[var(l, k)] = c[i];
            }
            lp.add_eq(row, target[i]);
        }
    }
    let mut offset = 0;
    let ranges: Vec<std::ops::Range<usize>> = mm
        .effects()
        .iter()
        .map(|r| {
            let range = offset..offset + r.len();
            offset += r.len();
            range
        })
        .collect();
    for l in 0..nl {
        for range in &ranges {
            let mut row = vec![0.0; nk * nl];
            for k in range.clone() {
                row[var(l, k)] = 1.0;
            }
            lp.add_eq(row, 1.0);
        }
    }
    for beta in nullspace_coeffs(&flat)? {
        for l in 0..nl {
            let mut row = vec![0.0; nk * nl];
            for (k, b) in beta.0.iter().enumerate() {
                row[var(l, k)] = *b;
            }
            lp.add_eq(row, 0.0);
        }
    }
    let Some(x) = lp_feasible(&lp)?.point else {
        return Ok(None);
    };
    let span = span_of(&flat)?;
    let mut dual = Vec::with_capacity(nl);
    for l in 0..nl {
        let t: Vec<f64> = (0..nk).map(|k| x[var(l, k)].clamp(0.0, 1.0)).collect();
        dual.push(functional_in_span(&span, &flat, &t)?.0);
    }
    Ok(Some(MeasurementCertificate { parent: parent.to_vec(), dual }))
}
