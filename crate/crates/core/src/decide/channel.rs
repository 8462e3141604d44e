use serde_json::json;

use super::library::{measurement_probes, source_probes};
use super::{bipartite, ensure_valid, multimeasurement, multisource, rules, DecideConfig, Mode, Tag, Verdict};
use crate::certify::{transport_choi_inverse, verify_channel_certificate, Certificate};
use crate::error::Result;
use crate::processes::{pullback, pushforward, ChannelChoi, Process, EPS_PSD};

/// Decides classicality of a channel through its Choi state and input/output probes.
pub fn decide_channel(e: &ChannelChoi, cfg: &DecideConfig) -> Result<Verdict> {
    ensure_valid(&Process::Channel(e.clone()))?;
    let mut diag = Vec::new();
    let choi = e.choi_state();

    let min_pt = choi.partial_transpose().min_eigenvalue();
    if min_pt < -EPS_PSD {
        return Ok(Verdict::nonclassical(rules::CHOI_NPT, json!({ "partial_transpose_min_eigenvalue": min_pt }), diag));
    }

    for probe in source_probes(e.din()) {
        if !cfg.probe_allowed(&probe.name) {
            continue;
        }
        let image = pushforward(e, &probe.probe)?;
        let v = multisource::run(&image, cfg, Mode::Probe)?;
        if v.is_nonclassical() {
            return Ok(Verdict::nonclassical(
                rules::PUSHFORWARD_PROBE,
                json!({ "probe": probe.name, "inner_rule": v.rule, "inner_witness": v.witness }),
                diag,
            ));
        }
    }

    for probe in measurement_probes(e.dout()) {
        if !cfg.probe_allowed(&probe.name) {
            continue;
        }
        let pre = pullback(e, &probe.probe)?;
        let v = multimeasurement::run(&pre, cfg, Mode::Probe)?;
        if v.is_nonclassical() {
            return Ok(Verdict::nonclassical(
                rules::PULLBACK_PROBE,
                json!({ "probe": probe.name, "inner_rule": v.rule, "inner_witness": v.witness }),
                diag,
            ));
        }
    }

    let inner = bipartite::run(&choi, cfg)?;
    diag.extend(inner.diagnostics.iter().map(|d| format!("Choi state: {d}")));
    match inner.tag {
        Tag::Nonclassical => Ok(Verdict::nonclassical(
            rules::CHOI_STATE,
            json!({ "inner_rule": inner.rule, "inner_witness": inner.witness }),
            diag,
        )),
        Tag::Classical => match inner.certificate {
            Some(Certificate::Bipartite(c)) => {
                let cert = transport_choi_inverse(&c, e)?;
                let report = verify_channel_certificate(e, &cert, cfg.tol)?;
                if report.passed() {
                    Ok(Verdict::classical(rules::CHOI_STATE, Certificate::Channel(cert), diag))
                } else {
                    diag.push(format!("transported certificate failed verification (max residual {:.3e})", report.max_residual()));
                    Ok(Verdict::inconclusive(diag))
                }
            }
            _ => Ok(Verdict::classical_by_theorem(
                rules::CHOI_STATE,
                format!(
                    "Choi state classified Classical without a certificate ({})",
                    inner.rule.unwrap_or_default()
                ),
                diag,
            )),
        },
        Tag::Inconclusive => Ok(Verdict::inconclusive(diag)),
    }
}
