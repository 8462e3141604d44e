//! Command implementations; each returns the exit code and the text for stdout.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use gnc_core::certify::{verify, Certificate, VerificationReport, DEFAULT_TOL};
use gnc_core::decide::library::{frame_names, measurement_probes, source_probes};
use gnc_core::decide::{decide, DecideConfig, Tag, Verdict};
use gnc_core::identities::{identities_of_multimeasurement, identities_of_multisource, IdentitySet};
use gnc_core::processes::{associated_state, dephase_embed, flag_convexify, to_instrument, Process};
use serde::Serialize;
use serde_json::Value;

use crate::document::{DocKind, Generator, ProcessDocument};
use crate::error::{exit, CliError};
use crate::registry::{self, Policy, Resolved};

pub const REPORT_VERSION: &str = "gnc-report/1";

/// Exit code and standard output of a command.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

/// Parses `key=value` pairs.
pub fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::parse(format!("expected key=value, got '{kv}'")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::parse(format!("parameter '{k}' is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

pub fn tag_exit_code(tag: Tag) -> i32 {
    match tag {
        Tag::Classical => exit::CLASSICAL,
        Tag::Nonclassical => exit::NONCLASSICAL,
        Tag::Inconclusive => exit::INCONCLUSIVE,
    }
}

/// Loads a document, regenerating it from its generator when parameters are overridden.
pub fn load_process(path: &Path, kind: Option<&str>, params: &BTreeMap<String, f64>) -> Result<(Process, ProcessDocument), CliError> {
    let mut doc = ProcessDocument::from_json(&read(path)?)?;
    if !params.is_empty() {
        let generator = doc
            .generator
            .as_ref()
            .ok_or_else(|| CliError::parse("--param needs a document with a generator"))?;
        let mut merged = generator.params.clone();
        merged.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        let resolved = registry::resolve(&generator.id, &merged)?;
        let p = resolved.build()?;
        doc = ProcessDocument::from_process(&p, Some(Generator { id: resolved.entry.id.into(), params: resolved.params }));
    }
    if let Some(k) = kind {
        doc.kind = DocKind::parse(k)?;
    }
    let p = doc.to_process()?;
    Ok((p, doc))
}

/// Process on which a verdict's certificate is checked.
fn certificate_target(p: &Process) -> Result<Process, CliError> {
    match p {
        Process::Instrument(_) => Ok(Process::Multipartite(associated_state(p)?.multipartite())),
        other => Ok(other.clone()),
    }
}

fn verify_verdict(p: &Process, v: &Verdict, tol: f64) -> Result<Option<VerificationReport>, CliError> {
    match &v.certificate {
        Some(c) => Ok(Some(verify(&certificate_target(p)?, c, tol)?)),
        None => Ok(None),
    }
}

#[derive(Serialize)]
struct ProcessSummary {
    kind: DocKind,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    settings: usize,
}

fn summary(doc: &ProcessDocument) -> ProcessSummary {
    ProcessSummary {
        kind: doc.kind,
        inputs: doc.shape.inputs.clone(),
        outputs: doc.shape.outputs.clone(),
        settings: doc.operators.len(),
    }
}

#[derive(Serialize)]
struct ConfigSummary {
    tol: f64,
    seed: u64,
    frames: Option<Vec<String>>,
    probes: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ClassifyReport {
    version: &'static str,
    process: ProcessSummary,
    config: ConfigSummary,
    verdict: Verdict,
    verification: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct ClassifyOptions {
    pub kind: Option<String>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub frames: Option<Vec<String>>,
    pub probes: Option<Vec<String>>,
    pub params: BTreeMap<String, f64>,
    pub text: bool,
    pub timing: bool,
}

impl ClassifyOptions {
    fn config(&self) -> DecideConfig {
        DecideConfig {
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            seed: self.seed,
            frames: self.frames.clone(),
            probes: self.probes.clone(),
            ..DecideConfig::default()
        }
    }
}

pub fn classify(path: &Path, opts: &ClassifyOptions) -> Result<Output, CliError> {
    let (p, doc) = load_process(path, opts.kind.as_deref(), &opts.params)?;
    let cfg = opts.config();
    let start = Instant::now();
    let verdict = decide(&p, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let verification = verify_verdict(&p, &verdict, cfg.tol)?;
    let code = tag_exit_code(verdict.tag);
    let report = ClassifyReport {
        version: REPORT_VERSION,
        process: summary(&doc),
        config: ConfigSummary { tol: cfg.tol, seed: cfg.seed, frames: cfg.frames.clone(), probes: cfg.probes.clone() },
        verdict,
        verification,
        timing_ms: opts.timing.then_some(elapsed),
    };
    let stdout = if opts.text { classify_text(&report) } else { json(&report) };
    Ok(Output { code, stdout })
}

fn classify_text(r: &ClassifyReport) -> String {
    let mut s = String::new();
    let v = &r.verdict;
    let _ = writeln!(s, "process: {}", serde_json::to_value(r.process.kind).unwrap_or(Value::Null).as_str().unwrap_or("?"));
    let _ = writeln!(s, "verdict: {}", v.tag.name());
    if let Some(rule) = &v.rule {
        let _ = writeln!(s, "rule: {rule}");
    }
    if let Some(loc) = &v.locator {
        let _ = writeln!(s, "locator: {loc}");
    }
    if let Some(c) = &v.certificate {
        let _ = writeln!(s, "certificate: {}", c.theorem());
    }
    if let Some(rep) = &r.verification {
        let state = if rep.passed() { "passed" } else { "FAILED" };
        let _ = writeln!(s, "verification: {state} (max residual {:.3e})", rep.max_residual());
    }
    if let Some(n) = &v.certificate_note {
        let _ = writeln!(s, "note: {n}");
    }
    if let Some(w) = &v.witness {
        let _ = writeln!(s, "witness: {}", serde_json::to_string(&w.data).unwrap_or_default());
    }
    for d in &v.diagnostics {
        let _ = writeln!(s, "diagnostic: {d}");
    }
    if let Some(t) = r.timing_ms {
        let _ = writeln!(s, "time: {t:.3} ms");
    }
    s
}

pub fn identities(path: &Path) -> Result<Output, CliError> {
    let doc = ProcessDocument::from_json(&read(path)?)?;
    let p = doc.to_process()?;
    let set = match &p {
        Process::MultiSource(ms) => identities_of_multisource(ms)?,
        Process::MultiMeasurement(mm) => identities_of_multimeasurement(mm)?,
        other => {
            let mi = to_instrument(other)?;
            let mut labels = Vec::new();
            let mut ops = Vec::new();
            for (z, row) in mi.branches().iter().enumerate() {
                for (c, op) in row.iter().enumerate() {
                    labels.push((c, z));
                    ops.push(op.clone());
                }
            }
            IdentitySet::compute(labels, &ops)?
        }
    };
    #[derive(Serialize)]
    struct Report<'a> {
        version: &'static str,
        kind: DocKind,
        dimension: usize,
        identities: &'a IdentitySet,
    }
    Ok(Output {
        code: 0,
        stdout: json(&Report { version: REPORT_VERSION, kind: doc.kind, dimension: set.dim(), identities: &set }),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformOp {
    Choi,
    Flag,
    Dephase,
    Associated,
}

impl TransformOp {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "choi" => Ok(TransformOp::Choi),
            "flag" => Ok(TransformOp::Flag),
            "dephase" => Ok(TransformOp::Dephase),
            "associated" => Ok(TransformOp::Associated),
            _ => Err(CliError::parse(format!("unknown transform '{s}' (choi, flag, dephase, associated)"))),
        }
    }
}

pub fn transform(path: &Path, op: TransformOp) -> Result<Output, CliError> {
    let doc = ProcessDocument::from_json(&read(path)?)?;
    let p = doc.to_process()?;
    let out = match op {
        TransformOp::Choi => match &p {
            Process::Channel(e) => ProcessDocument::from_process(&Process::Bipartite(e.choi_state()), None),
            _ => return Err(CliError::invariant("the Choi transform applies to channels")),
        },
        TransformOp::Flag => ProcessDocument::from_process(&flag_convexify(&p)?, None),
        // several settings are first folded into outcomes
        TransformOp::Dephase => match &p {
            Process::MultiSource(ms) if ms.num_settings() == 1 => {
                ProcessDocument::from_process(&Process::Bipartite(dephase_embed(ms)?), None)
            }
            Process::MultiSource(_) => match flag_convexify(&p)? {
                Process::MultiSource(flat) => ProcessDocument::from_process(&Process::Bipartite(dephase_embed(&flat)?), None),
                _ => return Err(CliError::invariant("flag-convexification of a source must be a source")),
            },
            _ => return Err(CliError::invariant("the dephasing transform applies to sources")),
        },
        TransformOp::Associated => {
            let a = associated_state(&p)?;
            let mut d = ProcessDocument::from_process(&Process::Multipartite(a.multipartite()), None);
            d.kind = DocKind::MultipartiteState;
            d.labels = Some(a.labels);
            d
        }
    };
    Ok(Output { code: 0, stdout: out.to_json() + "\n" })
}

/// Accepts a bare certificate, `{"certificate": ...}`, or a classify report.
fn extract_certificate(v: Value) -> Result<Certificate, CliError> {
    let inner = if v.get("theorem").is_some() {
        v
    } else if let Some(c) = v.get("certificate") {
        c.clone()
    } else if let Some(c) = v.get("verdict").and_then(|x| x.get("certificate")) {
        c.clone()
    } else {
        return Err(CliError::parse("no certificate found"));
    };
    if inner.is_null() {
        return Err(CliError::parse("the report carries no certificate"));
    }
    serde_json::from_value(inner).map_err(|e| CliError::parse(format!("certificate: {e}")))
}

fn theorem_applies(p: &Process, c: &Certificate) -> bool {
    matches!(
        (p, c),
        (Process::MultiSource(_), Certificate::MultiSource(_))
            | (Process::MultiMeasurement(_), Certificate::MultiMeasurement(_))
            | (Process::Bipartite(_), Certificate::Bipartite(_))
            | (Process::Channel(_), Certificate::Channel(_))
            | (Process::Bipartite(_) | Process::Multipartite(_) | Process::Instrument(_), Certificate::General(_))
    ) || matches!((p, c), (Process::Multipartite(m), Certificate::Bipartite(_)) if m.num_parties() == 2)
}

pub fn verify_cert(process: &Path, cert: &Path, tol: Option<f64>, text: bool) -> Result<Output, CliError> {
    let doc = ProcessDocument::from_json(&read(process)?)?;
    let p = doc.to_process()?;
    let value: Value = serde_json::from_str(&read(cert)?).map_err(|e| CliError::parse(e.to_string()))?;
    let c = extract_certificate(value)?;
    if !theorem_applies(&p, &c) {
        return Err(CliError::new(
            exit::WRONG_THEOREM,
            format!("a {} certificate does not apply to a {} process", c.theorem(), p.kind().name()),
        ));
    }
    let tol = tol.unwrap_or(DEFAULT_TOL);
    let report = verify(&certificate_target(&p)?, &c, tol)?;
    let code = if report.passed() { exit::PASS } else { exit::FAIL };
    let stdout = if text {
        let mut s = String::new();
        let _ = writeln!(s, "{:<40} {:>12} {:>12}  result", "check", "residual", "tolerance");
        for ch in &report.checks {
            let r = if ch.passed { "ok" } else { "FAIL" };
            let _ = writeln!(s, "{:<40} {:>12.3e} {:>12.3e}  {r}", ch.name, ch.residual, ch.tolerance);
        }
        let _ = writeln!(s, "{}", if report.passed() { "PASS" } else { "FAIL" });
        s
    } else {
        #[derive(Serialize)]
        struct Report<'a> {
            version: &'static str,
            theorem: &'static str,
            passed: bool,
            checks: &'a VerificationReport,
        }
        json(&Report { version: REPORT_VERSION, theorem: c.theorem(), passed: report.passed(), checks: &report })
    };
    Ok(Output { code, stdout })
}

#[derive(Serialize)]
struct CompanionRow {
    transform: &'static str,
    observed: Tag,
    rule: Option<String>,
}

#[derive(Serialize)]
struct ReproduceRow {
    id: &'static str,
    params: BTreeMap<String, f64>,
    locator: &'static str,
    expected: Option<Tag>,
    policy: Policy,
    observed: Tag,
    rule: Option<String>,
    certificate_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    companion: Option<CompanionRow>,
    pass: bool,
}

#[derive(Serialize)]
struct ReproduceReport {
    version: &'static str,
    seed: u64,
    rows: Vec<ReproduceRow>,
    passed: usize,
    total: usize,
    all_pass: bool,
}

fn opposite(a: Tag, b: Tag) -> bool {
    matches!((a, b), (Tag::Classical, Tag::Nonclassical) | (Tag::Nonclassical, Tag::Classical))
}

fn reproduce_row(r: &Resolved, cfg: &DecideConfig) -> Result<ReproduceRow, CliError> {
    let p = r.build()?;
    let v = decide(&p, cfg)?;
    let certificate_verified = verify_verdict(&p, &v, cfg.tol)?.map(|rep| rep.passed());
    let expected = r.expected();
    let mut pass = match (expected, r.entry.policy) {
        (None, _) => true,
        (Some(e), Policy::Exact) => e == v.tag,
        (Some(e), Policy::NeverOpposite) => !opposite(e, v.tag),
    };
    pass &= certificate_verified != Some(false);
    let companion = match r.entry.companion {
        Some((name, f)) => {
            let q = f(&p)?;
            let w = decide(&q, cfg)?;
            pass &= !opposite(v.tag, w.tag);
            Some(CompanionRow { transform: name, observed: w.tag, rule: w.rule })
        }
        None => None,
    };
    Ok(ReproduceRow {
        id: r.entry.id,
        params: r.params.clone(),
        locator: r.entry.locator,
        expected,
        policy: r.entry.policy,
        observed: v.tag,
        rule: v.rule,
        certificate_verified,
        companion,
        pass,
    })
}

pub fn reproduce(id: Option<&str>, all: bool, seed: u64, params: &BTreeMap<String, f64>, text: bool) -> Result<Output, CliError> {
    let rows: Vec<Resolved> = match (id, all) {
        (Some(_), true) => return Err(CliError::parse("give either an id or --all")),
        (Some(id), false) => vec![registry::resolve(id, params)?],
        (None, true) => {
            if !params.is_empty() {
                return Err(CliError::parse("--param cannot be combined with --all"));
            }
            registry::all_rows()
        }
        (None, false) => return Err(CliError::parse("give an example id or --all")),
    };
    let cfg = DecideConfig { seed, ..DecideConfig::default() };
    let rows = rows.iter().map(|r| reproduce_row(r, &cfg)).collect::<Result<Vec<_>, _>>()?;
    let passed = rows.iter().filter(|r| r.pass).count();
    let report = ReproduceReport { version: REPORT_VERSION, seed, total: rows.len(), all_pass: passed == rows.len(), passed, rows };
    let code = if report.all_pass { exit::PASS } else { exit::FAIL };
    let stdout = if text {
        let mut s = String::new();
        for r in &report.rows {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(
                s,
                "{:<5} {:<24} {:<14} expected {:<13} observed {:<13} {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.id,
                params.join(","),
                r.expected.map_or("-", Tag::name),
                r.observed.name(),
                r.rule.as_deref().unwrap_or("-"),
            );
        }
        let _ = writeln!(s, "{}/{} rows pass", report.passed, report.total);
        s
    } else {
        json(&report)
    };
    Ok(Output { code, stdout })
}

pub fn frames_list(dim: usize, net: usize) -> Result<Output, CliError> {
    if dim == 0 || dim > gnc_core::processes::MAX_SUBSYSTEM_DIM {
        return Err(CliError::new(exit::DIMENSION_LIMIT, format!("dimension {dim} is outside 1..=16")));
    }
    let (frames, parents) = frame_names(dim, net);
    #[derive(Serialize)]
    struct Report {
        version: &'static str,
        dim: usize,
        state_frames: Vec<String>,
        parent_povms: Vec<String>,
        measurement_probes: Vec<String>,
        source_probes: Vec<String>,
    }
    Ok(Output {
        code: 0,
        stdout: json(&Report {
            version: REPORT_VERSION,
            dim,
            state_frames: frames,
            parent_povms: parents,
            measurement_probes: measurement_probes(dim).into_iter().map(|p| p.name).collect(),
            source_probes: source_probes(dim).into_iter().map(|p| p.name).collect(),
        }),
    })
}

/// Writes the registry example `id` as a process document.
pub fn generate(id: &str, params: &BTreeMap<String, f64>) -> Result<Output, CliError> {
    let r = registry::resolve(id, params)?;
    let p = r.build()?;
    let doc = ProcessDocument::from_process(&p, Some(Generator { id: r.entry.id.into(), params: r.params }));
    Ok(Output { code: 0, stdout: doc.to_json() + "\n" })
}
