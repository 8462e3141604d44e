use serde_json::json;

use super::library::measurement_probes;
use super::{decomposition, ensure_valid, multisource, rules, DecideConfig, Mode, Verdict};
use crate::certify::{verify_bipartite_certificate, BipartiteCertificate, Certificate};
use crate::error::Result;
use crate::identities::is_nonsingular;
use crate::processes::{steer, BipartiteState, Process, Side, EPS_PSD};

/// Decides classicality of a bipartite state.
pub fn decide_bipartite_state(rho: &BipartiteState, cfg: &DecideConfig) -> Result<Verdict> {
    ensure_valid(&Process::Bipartite(rho.clone()))?;
    run(rho, cfg)
}

fn li_local(rho: &BipartiteState, cfg: &DecideConfig, diag: &mut Vec<String>) -> Result<Option<Certificate>> {
    let (d1, d2) = rho.dims();
    let Some(pairs) = decomposition::search(rho.rho(), &[d1, d2], cfg.seed, cfg.decomposition_attempts)? else {
        diag.push("no separable decomposition with linearly independent local states found".into());
        return Ok(None);
    };
    let mut it = pairs.into_iter();
    let cert = BipartiteCertificate { first: it.next().expect("two parties"), second: it.next().expect("two parties") };
    let report = verify_bipartite_certificate(rho, &cert, cfg.tol)?;
    if report.passed() {
        Ok(Some(Certificate::Bipartite(cert)))
    } else {
        diag.push(format!("LI-local certificate failed verification (max residual {:.3e})", report.max_residual()));
        Ok(None)
    }
}

pub(super) fn run(rho: &BipartiteState, cfg: &DecideConfig) -> Result<Verdict> {
    let mut diag = Vec::new();
    let (d1, d2) = rho.dims();

    // R1
    let min_pt = rho.partial_transpose().min_eigenvalue();
    if min_pt < -EPS_PSD {
        return Ok(Verdict::nonclassical(rules::NPT, json!({ "partial_transpose_min_eigenvalue": min_pt }), diag));
    }
    diag.push(format!("PPT (minimum partial-transpose eigenvalue {min_pt:.3e})"));

    // R2
    if d1 == 2 && d2 == 2 {
        return Ok(match li_local(rho, cfg, &mut diag)? {
            Some(c) => Verdict::classical(rules::TWO_QUBIT, c, diag),
            None => Verdict::classical_by_theorem(
                rules::TWO_QUBIT,
                "PPT two-qubit state is separable; no explicit certificate constructed".into(),
                diag,
            ),
        });
    }

    // R3
    for side in [Side::First, Side::Second] {
        for probe in measurement_probes(rho.dim_of(side)) {
            if !cfg.probe_allowed(&probe.name) {
                continue;
            }
            let steered = steer(rho, &probe.probe, side)?;
            let v = multisource::run(&steered, cfg, Mode::Probe)?;
            if v.is_nonclassical() {
                return Ok(Verdict::nonclassical(
                    rules::STEERING_PROBE,
                    json!({
                        "measured_side": side,
                        "probe": probe.name,
                        "inner_rule": v.rule,
                        "inner_witness": v.witness,
                    }),
                    diag,
                ));
            }
        }
    }

    // R4
    if let Some(c) = li_local(rho, cfg, &mut diag)? {
        return Ok(Verdict::classical(rules::LI_LOCAL, c, diag));
    }

    if cfg.experimental_nonsingular && d1 == d2 {
        let report = is_nonsingular(rho);
        if report.nonsingular {
            diag.push(format!(
                "experimental: nonsingular PPT state left inconclusive (condition numbers {:.3e}, {:.3e})",
                report.condition_numbers[0], report.condition_numbers[1]
            ));
        }
    }
    Ok(Verdict::inconclusive(diag))
}
