use serde_json::json;

use super::library::{measurement_probes, trivial_probe, NamedMeasurementProbe};
use super::{bipartite, decomposition, ensure_valid, multisource, rules, DecideConfig, Mode, Verdict};
use crate::certify::{verify_general_certificate, Certificate, GeneralCertificate};
use crate::error::Result;
use crate::hermspace::HermitianOperator;
use crate::processes::{
    associated_state, steer, to_instrument, BipartiteState, MultiInstrument, MultiMeasurement, MultipartiteState, Process, Side,
    EPS_PSD,
};

/// Decides a multi-instrument through its associated multipartite state.
pub fn decide_general(mi: &MultiInstrument, cfg: &DecideConfig) -> Result<Verdict> {
    let process = Process::Instrument(mi.clone());
    ensure_valid(&process)?;
    let assoc = associated_state(&process)?;
    let mut v = run(&assoc.multipartite(), cfg)?;
    if v.certificate.is_some() {
        v.certificate_note = Some(format!("certificate of the associated state on factors [{}]", assoc.labels.join(", ")));
    }
    Ok(v)
}

/// Decides a state on any number of parties.
pub fn decide_multipartite_state(m: &MultipartiteState, cfg: &DecideConfig) -> Result<Verdict> {
    ensure_valid(&Process::Multipartite(m.clone()))?;
    run(m, cfg)
}

fn general_from_pairs(pairs: Vec<crate::certify::FramePair>) -> GeneralCertificate {
    GeneralCertificate { inputs: Vec::new(), outputs: pairs }
}

fn li_local(m: &MultipartiteState, cfg: &DecideConfig, diag: &mut Vec<String>) -> Result<Option<Certificate>> {
    let Some(pairs) = decomposition::search(m.rho(), m.dims(), cfg.seed, cfg.decomposition_attempts)? else {
        diag.push("no separable decomposition with linearly independent local states found".into());
        return Ok(None);
    };
    let cert = general_from_pairs(pairs);
    let report = verify_general_certificate(&to_instrument(&Process::Multipartite(m.clone()))?, &cert, cfg.tol)?;
    if report.passed() {
        Ok(Some(Certificate::General(cert)))
    } else {
        diag.push(format!("LI-local certificate failed verification (max residual {:.3e})", report.max_residual()));
        Ok(None)
    }
}

fn run(m: &MultipartiteState, cfg: &DecideConfig) -> Result<Verdict> {
    let dims = m.dims().to_vec();
    let n = dims.len();
    if n == 2 {
        let b = BipartiteState::new(dims[0], dims[1], m.rho().clone())?;
        let mut v = bipartite::run(&b, cfg)?;
        if let Some(Certificate::Bipartite(c)) = v.certificate.take() {
            v.certificate = Some(Certificate::General(general_from_pairs(vec![c.first, c.second])));
        }
        return Ok(v);
    }
    let mut diag = Vec::new();
    if n == 1 {
        return Ok(match li_local(m, cfg, &mut diag)? {
            Some(c) => Verdict::classical(rules::LI_LOCAL, c, diag),
            None => Verdict::inconclusive(diag),
        });
    }

    // NPT across any bipartition
    let mut worst = (0.0f64, Vec::new());
    for mask in 1usize..(1 << (n - 1)) {
        let systems: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let e = m.rho().partial_transpose(&dims, &systems)?.min_eigenvalue();
        if e < worst.0 {
            worst = (e, systems);
        }
    }
    if worst.0 < -EPS_PSD {
        return Ok(Verdict::nonclassical(
            rules::NPT_BIPARTITION,
            json!({ "transposed_parties": worst.1, "partial_transpose_min_eigenvalue": worst.0 }),
            diag,
        ));
    }
    diag.push("PPT across every bipartition".into());

    // steering probes: product measurements on all parties but one
    for target in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != target).collect();
        let order: Vec<usize> = others.iter().copied().chain(std::iter::once(target)).collect();
        let d_rest: usize = others.iter().map(|&k| dims[k]).product();
        let rho = BipartiteState::new(d_rest, dims[target], m.rho().permute_systems(&dims, &order)?)?;
        let libraries: Vec<Vec<NamedMeasurementProbe>> = others
            .iter()
            .map(|&k| {
                let mut l: Vec<_> = measurement_probes(dims[k]).into_iter().filter(|p| cfg.probe_allowed(&p.name)).collect();
                l.push(trivial_probe(dims[k]));
                l
            })
            .collect();
        for combo in super::steering::deterministic_strategies(&libraries.iter().map(Vec::len).collect::<Vec<_>>()) {
            let chosen: Vec<&NamedMeasurementProbe> = combo.iter().zip(&libraries).map(|(&i, l)| &l[i]).collect();
            if chosen.iter().all(|p| p.name == "trivial") {
                continue;
            }
            let mm = product_measurement(&chosen)?;
            let steered = steer(&rho, &mm, Side::First)?;
            let v = multisource::run(&steered, cfg, Mode::Probe)?;
            if v.is_nonclassical() {
                let names: Vec<&str> = chosen.iter().map(|p| p.name.as_str()).collect();
                return Ok(Verdict::nonclassical(
                    rules::PARTY_PROBE,
                    json!({
                        "steered_party": target,
                        "measured_parties": others,
                        "probes": names,
                        "inner_rule": v.rule,
                        "inner_witness": v.witness,
                    }),
                    diag,
                ));
            }
        }
    }
    diag.push("no party probe found nonclassicality".into());

    if let Some(c) = li_local(m, cfg, &mut diag)? {
        return Ok(Verdict::classical(rules::LI_LOCAL, c, diag));
    }
    Ok(Verdict::inconclusive(diag))
}

/// Tensor product of multi-measurements; settings and outcomes enumerate with the first party slowest.
fn product_measurement(parts: &[&NamedMeasurementProbe]) -> Result<MultiMeasurement> {
    let mut rows: Vec<Vec<HermitianOperator>> = vec![vec![HermitianOperator::identity(1)]];
    for p in parts {
        let mut next = Vec::new();
        for row in &rows {
            for prow in p.probe.effects() {
                let mut r = Vec::with_capacity(row.len() * prow.len());
                for a in row {
                    for b in prow {
                        r.push(a.kron(b));
                    }
                }
                next.push(r);
            }
        }
        rows = next;
    }
    let d = rows[0][0].dim();
    MultiMeasurement::new(d, rows)
}
