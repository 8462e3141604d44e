//! Frame-representation certificates, their verifiers, and transports between
//! equivalent descriptions of a process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermspace::{span_of, sum, HermitianOperator, OperatorSpan};
use crate::processes::{
    to_instrument, BipartiteState, ChannelChoi, MultiInstrument, MultiMeasurement, MultiSource, Process,
    EPS_WEIGHT,
};

/// Default reconstruction tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Lowest admissible weight (round-off allowance).
pub const WEIGHT_FLOOR: f64 = -1e-9;
/// Eigenvalue floor for frame states and parent effects.
pub const PSD_FLOOR: f64 = 1e-9;

/// A frame and a dual acting on one system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePair {
    pub frame: Vec<HermitianOperator>,
    pub dual: Vec<HermitianOperator>,
}

impl FramePair {
    pub fn new(frame: Vec<HermitianOperator>, dual: Vec<HermitianOperator>) -> Result<Self> {
        if frame.len() != dual.len() {
            return Err(Error::DimensionMismatch { expected: frame.len(), found: dual.len() });
        }
        if frame.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(Self { frame, dual })
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.frame[0].dim()
    }
}

/// States `σ_λ` with dual `H_λ` for a multi-source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceCertificate {
    pub frame: Vec<HermitianOperator>,
    pub dual: Vec<HermitianOperator>,
}

/// Parent POVM `G_λ` with dual `F_λ` for a multi-measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementCertificate {
    pub parent: Vec<HermitianOperator>,
    pub dual: Vec<HermitianOperator>,
}

/// Per-side state frames and duals for a bipartite state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteCertificate {
    pub first: FramePair,
    pub second: FramePair,
}

/// Input frame `F` with dual POVM `G`, output state frame `σ` with dual `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelCertificate {
    pub input_frame: Vec<HermitianOperator>,
    pub input_dual: Vec<HermitianOperator>,
    pub output_frame: Vec<HermitianOperator>,
    pub output_dual: Vec<HermitianOperator>,
}

/// Input wires carry `(F, G)` pairs, output wires `(σ, H)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralCertificate {
    pub inputs: Vec<FramePair>,
    pub outputs: Vec<FramePair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "kebab-case")]
pub enum Certificate {
    MultiSource(SourceCertificate),
    MultiMeasurement(MeasurementCertificate),
    Bipartite(BipartiteCertificate),
    Channel(ChannelCertificate),
    General(GeneralCertificate),
}

impl Certificate {
    pub fn theorem(&self) -> &'static str {
        match self {
            Certificate::MultiSource(_) => "multi-source",
            Certificate::MultiMeasurement(_) => "multi-measurement",
            Certificate::Bipartite(_) => "bipartite",
            Certificate::Channel(_) => "channel",
            Certificate::General(_) => "general",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Residual table of a certificate verification.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn add(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        let passed = residual.is_finite() && residual <= tolerance;
        self.checks.push(Check { name: name.into(), residual, tolerance, passed });
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check_dims(ops: &[HermitianOperator], d: usize) -> Result<()> {
    for o in ops {
        if o.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: o.dim() });
        }
    }
    Ok(())
}

fn state_defect(states: &[HermitianOperator]) -> (f64, f64) {
    let mut psd = 0.0f64;
    let mut tr = 0.0f64;
    for s in states {
        psd = psd.max(-s.min_eigenvalue());
        tr = tr.max((s.trace() - 1.0).abs());
    }
    (psd.max(0.0), tr)
}

fn dual_sum_defect(dual: &[HermitianOperator], span: &OperatorSpan) -> Result<f64> {
    let target = span.project(&HermitianOperator::identity(span.ambient_dim()))?;
    Ok((&sum(dual)? - &target).frobenius_norm())
}

/// Verifies `p(a|x)ρ_{a|x} = Σ_λ Tr[H_λ p(a|x)ρ_{a|x}] σ_λ` with `Σ H = P_V(𝟙)` and weights in `[0, 1]`.
pub fn verify_source_certificate(
    ms: &MultiSource,
    cert: &SourceCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let d = ms.dim();
    if cert.frame.len() != cert.dual.len() || cert.frame.is_empty() {
        return Err(Error::Precondition("frame and dual must be non-empty and of equal length".into()));
    }
    check_dims(&cert.frame, d)?;
    check_dims(&cert.dual, d)?;
    let present: Vec<_> = ms.branches().iter().flatten().filter(|b| b.is_present()).collect();
    if present.is_empty() {
        return Err(Error::Precondition("multi-source has no branch with positive weight".into()));
    }
    let sub: Vec<HermitianOperator> = present.iter().map(|b| b.subnormalized()).collect();
    let v = span_of(&sub)?;
    let mut r = VerificationReport::default();

    let mut recon = 0.0f64;
    let mut low = 0.0f64;
    let mut high = 0.0f64;
    for (b, op) in present.iter().zip(&sub) {
        let w: Vec<f64> = cert.dual.iter().map(|h| h.inner(&b.state)).collect();
        for &x in &w {
            low = low.max(-x);
            high = high.max(x - 1.0);
        }
        let rec = crate::hermspace::linear_combination(&w, &cert.frame)?.scale(b.weight);
        recon = recon.max((op - &rec).frobenius_norm());
    }
    r.add("reconstruction", recon, tol);
    r.add("dual sum equals projected identity", dual_sum_defect(&cert.dual, &v)?, tol);
    r.add("weights nonnegative", low.max(0.0), -WEIGHT_FLOOR);
    r.add("weights at most one", high.max(0.0), -WEIGHT_FLOOR);
    let (psd, tr) = state_defect(&cert.frame);
    r.add("frame states positive", psd, PSD_FLOOR);
    r.add("frame states unit trace", tr, tol);
    Ok(r)
}

/// Verifies `M_{b|y} = Σ_λ Tr[M_{b|y} F_λ] G_λ` with `G` a POVM, `Tr F_λ = 1` and weights in `[0, 1]`.
pub fn verify_measurement_certificate(
    mm: &MultiMeasurement,
    cert: &MeasurementCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let d = mm.dim();
    if cert.parent.len() != cert.dual.len() || cert.parent.is_empty() {
        return Err(Error::Precondition("parent and dual must be non-empty and of equal length".into()));
    }
    check_dims(&cert.parent, d)?;
    check_dims(&cert.dual, d)?;
    let mut r = VerificationReport::default();
    let mut recon = 0.0f64;
    let mut low = 0.0f64;
    let mut high = 0.0f64;
    for m in mm.effects().iter().flatten() {
        let w: Vec<f64> = cert.dual.iter().map(|f| f.inner(m)).collect();
        for &x in &w {
            low = low.max(-x);
            high = high.max(x - 1.0);
        }
        let rec = crate::hermspace::linear_combination(&w, &cert.parent)?;
        recon = recon.max((m - &rec).frobenius_norm());
    }
    r.add("reconstruction", recon, tol);
    let total = sum(&cert.parent)?;
    r.add("parent sums to identity", (&total - &HermitianOperator::identity(d)).frobenius_norm(), tol);
    let psd = cert.parent.iter().map(|g| -g.min_eigenvalue()).fold(0.0, f64::max);
    r.add("parent effects positive", psd, PSD_FLOOR);
    let tr = cert.dual.iter().map(|f| (f.trace() - 1.0).abs()).fold(0.0, f64::max);
    r.add("dual unit trace", tr, tol);
    r.add("weights nonnegative", low.max(0.0), -WEIGHT_FLOOR);
    r.add("weights at most one", high.max(0.0), -WEIGHT_FLOOR);
    Ok(r)
}

/// Span of all operators a party can be steered to by Hermitian effects on the other factors.
pub fn steered_span(rho: &HermitianOperator, dims: &[usize], party: usize) -> Result<OperatorSpan> {
    let others: Vec<usize> = (0..dims.len()).filter(|&k| k != party).collect();
    if others.is_empty() {
        return span_of(std::slice::from_ref(rho));
    }
    let dr: usize = others.iter().map(|&k| dims[k]).product();
    let basis = OperatorSpan::full(dr);
    let images: Vec<HermitianOperator> =
        basis.basis().iter().map(|b| rho.contract(dims, &others, b)).collect::<Result<_>>()?;
    span_of(&images)
}

/// Per-wire operators of a product decomposition: weights come from `functional`,
/// reconstruction uses `recon`.
struct Wire {
    recon: Vec<HermitianOperator>,
    functional: Vec<HermitianOperator>,
}

fn wire(recon: Vec<HermitianOperator>, functional: Vec<HermitianOperator>) -> Wire {
    Wire { recon, functional }
}

/// All product weights `Tr[(⊗_k Q_{λ_k}) X]`, indexed row-major over the wires.
fn product_weights(x: &HermitianOperator, wires: &[Wire]) -> Vec<f64> {
    fn rec(x: &HermitianOperator, wires: &[Wire], acc: Option<HermitianOperator>, out: &mut Vec<f64>) {
        match wires.split_first() {
            None => {
                let op = acc.unwrap_or_else(|| HermitianOperator::identity(1));
                out.push(x.inner(&op));
            }
            Some((w, rest)) => {
                for q in &w.functional {
                    let next = match &acc {
                        None => q.clone(),
                        Some(a) => a.kron(q),
                    };
                    rec(x, rest, Some(next), out);
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(x, wires, None, &mut out);
    out
}

fn product_reconstruction(weights: &[f64], wires: &[Wire]) -> HermitianOperator {
    fn rec(weights: &[f64], wires: &[Wire], acc: Option<HermitianOperator>, idx: &mut usize, out: &mut Option<HermitianOperator>) {
        match wires.split_first() {
            None => {
                let w = weights[*idx];
                *idx += 1;
                if w != 0.0 {
                    let op = acc.unwrap_or_else(|| HermitianOperator::identity(1)).scale(w);
                    *out = Some(match out.take() {
                        None => op,
                        Some(o) => &o + &op,
                    });
                }
            }
            Some((w, rest)) => {
                let block: usize = rest.iter().map(|r| r.recon.len()).product();
                for r in &w.recon {
                    let start = *idx;
                    if weights[start..start + block].iter().all(|&v| v == 0.0) {
                        *idx += block;
                        continue;
                    }
                    let next = match &acc {
                        None => r.clone(),
                        Some(a) => a.kron(r),
                    };
                    rec(weights, rest, Some(next), idx, out);
                }
            }
        }
    }
    let total_dim: usize = wires.iter().map(|w| w.recon[0].dim()).product();
    let mut out = None;
    let mut idx = 0;
    rec(weights, wires, None, &mut idx, &mut out);
    out.unwrap_or_else(|| HermitianOperator::zeros(total_dim))
}

fn check_state_wire(r: &mut VerificationReport, label: &str, pair: &FramePair, span: &OperatorSpan, tol: f64) -> Result<()> {
    let (psd, tr) = state_defect(&pair.frame);
    r.add(format!("{label}: frame states positive"), psd, PSD_FLOOR);
    r.add(format!("{label}: frame states unit trace"), tr, tol);
    r.add(format!("{label}: dual sum equals projected identity"), dual_sum_defect(&pair.dual, span)?, tol);
    Ok(())
}

fn check_input_wire(r: &mut VerificationReport, label: &str, pair: &FramePair, tol: f64) -> Result<()> {
    let d = pair.dim();
    let total = sum(&pair.dual)?;
    r.add(format!("{label}: dual POVM sums to identity"), (&total - &HermitianOperator::identity(d)).frobenius_norm(), tol);
    let psd = pair.dual.iter().map(|g| -g.min_eigenvalue()).fold(0.0, f64::max);
    r.add(format!("{label}: dual POVM positive"), psd.max(0.0), PSD_FLOOR);
    let tr = pair.frame.iter().map(|f| (f.trace() - 1.0).abs()).fold(0.0, f64::max);
    r.add(format!("{label}: frame unit trace"), tr, tol);
    Ok(())
}

fn check_pair_shape(pair: &FramePair, d: usize) -> Result<()> {
    if pair.frame.len() != pair.dual.len() || pair.frame.is_empty() {
        return Err(Error::Precondition("frame and dual must be non-empty and of equal length".into()));
    }
    check_dims(&pair.frame, d)?;
    check_dims(&pair.dual, d)
}

/// Verifies `ρ = Σ Tr[(H¹⊗H²)ρ] σ¹⊗σ²` with nonnegative joint weights.
pub fn verify_bipartite_certificate(
    rho: &BipartiteState,
    cert: &BipartiteCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let (d1, d2) = rho.dims();
    check_pair_shape(&cert.first, d1)?;
    check_pair_shape(&cert.second, d2)?;
    let dims = [d1, d2];
    let mut r = VerificationReport::default();
    let wires = [
        wire(cert.first.frame.clone(), cert.first.dual.clone()),
        wire(cert.second.frame.clone(), cert.second.dual.clone()),
    ];
    let w = product_weights(rho.rho(), &wires);
    let rec = product_reconstruction(&w, &wires);
    r.add("reconstruction", (rho.rho() - &rec).frobenius_norm(), tol);
    let low = w.iter().fold(0.0f64, |m, &x| m.max(-x));
    r.add("joint weights nonnegative", low, -WEIGHT_FLOOR);
    check_state_wire(&mut r, "first", &cert.first, &steered_span(rho.rho(), &dims, 0)?, tol)?;
    check_state_wire(&mut r, "second", &cert.second, &steered_span(rho.rho(), &dims, 1)?, tol)?;
    Ok(r)
}

/// Verifies `𝓔(·) = Σ σ_μ Tr[H_μ 𝓔(F_λ)] Tr[G_λ ·]` as an equality of Choi operators.
pub fn verify_channel_certificate(
    e: &ChannelChoi,
    cert: &ChannelCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let input = FramePair::new(cert.input_frame.clone(), cert.input_dual.clone())?;
    let output = FramePair::new(cert.output_frame.clone(), cert.output_dual.clone())?;
    let general = GeneralCertificate { inputs: vec![input], outputs: vec![output] };
    let mi = MultiInstrument::new(vec![e.din()], vec![e.dout()], vec![vec![e.choi().clone()]])?;
    verify_general_certificate(&mi, &general, tol)
}

fn instrument_wires(mi: &MultiInstrument, cert: &GeneralCertificate) -> Result<Vec<Wire>> {
    if cert.inputs.len() != mi.inputs().len() || cert.outputs.len() != mi.outputs().len() {
        return Err(Error::Precondition(format!(
            "certificate has {} inputs/{} outputs, process has {}/{}",
            cert.inputs.len(),
            cert.outputs.len(),
            mi.inputs().len(),
            mi.outputs().len()
        )));
    }
    let mut wires = Vec::new();
    for (pair, &d) in cert.outputs.iter().zip(mi.outputs()) {
        check_pair_shape(pair, d)?;
        wires.push(wire(pair.frame.clone(), pair.dual.clone()));
    }
    for (pair, &d) in cert.inputs.iter().zip(mi.inputs()) {
        check_pair_shape(pair, d)?;
        let df = d as f64;
        let recon = pair.dual.iter().map(|g| g.transpose().scale(1.0 / df)).collect();
        let functional = pair.frame.iter().map(|f| f.transpose().scale(df)).collect();
        wires.push(wire(recon, functional));
    }
    Ok(wires)
}

/// Transition weights of every branch, row-major over `(outputs..., inputs...)` frame indices.
pub fn general_weights(mi: &MultiInstrument, cert: &GeneralCertificate) -> Result<Vec<Vec<Vec<f64>>>> {
    let wires = instrument_wires(mi, cert)?;
    Ok(mi
        .branches()
        .iter()
        .map(|row| row.iter().map(|op| product_weights(op, &wires)).collect())
        .collect())
}

/// Verifies the product frame decomposition of every branch of a multi-instrument.
pub fn verify_general_certificate(
    mi: &MultiInstrument,
    cert: &GeneralCertificate,
    tol: f64,
) -> Result<VerificationReport> {
    let wires = instrument_wires(mi, cert)?;
    let mut r = VerificationReport::default();
    let mut recon = 0.0f64;
    let mut low = 0.0f64;
    let mut all_weights = Vec::new();
    for row in mi.branches() {
        let mut row_w = Vec::new();
        for op in row {
            let w = product_weights(op, &wires);
            let rec = product_reconstruction(&w, &wires);
            recon = recon.max((op - &rec).frobenius_norm());
            low = w.iter().fold(low, |m, &x| m.max(-x));
            row_w.push(w);
        }
        all_weights.push(row_w);
    }
    r.add("reconstruction", recon, tol);
    r.add("transition weights nonnegative", low, -WEIGHT_FLOOR);

    let dims = mi.wire_dims();
    let nout = mi.outputs().len();
    for (j, pair) in cert.outputs.iter().enumerate() {
        let mut images = Vec::new();
        for op in mi.branches().iter().flatten() {
            images.extend(steered_span(op, &dims, j)?.basis().iter().cloned());
        }
        let span = if images.is_empty() {
            OperatorSpan::full(dims[j])
        } else {
            span_of(&images)?
        };
        check_state_wire(&mut r, &format!("output {}", j + 1), pair, &span, tol)?;
    }
    for (i, pair) in cert.inputs.iter().enumerate() {
        check_input_wire(&mut r, &format!("input {}", i + 1), pair, tol)?;
    }

    if mi.is_comb() {
        r.add("comb no-signaling", comb_signaling(&all_weights, &wires, nout), tol);
    }
    Ok(r)
}

/// Largest change of `Σ_{c, μ2} w(μ1 μ2 c | z λ1 λ2)` under a change of `λ2`.
fn comb_signaling(weights: &[Vec<Vec<f64>>], wires: &[Wire], nout: usize) -> f64 {
    // wire order: B1, B2, A1, A2
    debug_assert_eq!(nout, 2);
    let n: Vec<usize> = wires.iter().map(|w| w.recon.len()).collect();
    let idx = |m1: usize, m2: usize, l1: usize, l2: usize| ((m1 * n[1] + m2) * n[2] + l1) * n[3] + l2;
    let mut worst = 0.0f64;
    for row in weights {
        for m1 in 0..n[0] {
            for l1 in 0..n[2] {
                let marg = |l2: usize| -> f64 {
                    row.iter().map(|w| (0..n[1]).map(|m2| w[idx(m1, m2, l1, l2)]).sum::<f64>()).sum()
                };
                let base = marg(0);
                for l2 in 1..n[3] {
                    worst = worst.max((marg(l2) - base).abs());
                }
            }
        }
    }
    worst
}

/// Verifies a certificate against a process, requiring the matching theorem.
pub fn verify(process: &Process, cert: &Certificate, tol: f64) -> Result<VerificationReport> {
    let mismatch = || {
        Error::Precondition(format!(
            "a {} certificate does not apply to a {} process",
            cert.theorem(),
            process.kind().name()
        ))
    };
    match (process, cert) {
        (Process::MultiSource(ms), Certificate::MultiSource(c)) => verify_source_certificate(ms, c, tol),
        (Process::MultiMeasurement(mm), Certificate::MultiMeasurement(c)) => verify_measurement_certificate(mm, c, tol),
        (Process::Bipartite(b), Certificate::Bipartite(c)) => verify_bipartite_certificate(b, c, tol),
        (Process::Multipartite(m), Certificate::Bipartite(c)) if m.num_parties() == 2 => {
            verify_bipartite_certificate(&BipartiteState::try_from(m.clone())?, c, tol)
        }
        (Process::Channel(e), Certificate::Channel(c)) => verify_channel_certificate(e, c, tol),
        (Process::Instrument(_) | Process::Multipartite(_) | Process::Bipartite(_), Certificate::General(c)) => {
            verify_general_certificate(&to_instrument(process)?, c, tol)
        }
        _ => Err(mismatch()),
    }
}

/// Channel certificate to a certificate of its Choi state (output side first).
pub fn transport_choi(cert: &ChannelCertificate, e: &ChannelChoi) -> Result<BipartiteCertificate> {
    if !verify_channel_certificate(e, cert, DEFAULT_TOL)?.passed() {
        return Err(Error::Precondition("channel certificate does not verify".into()));
    }
    let mut frame = Vec::new();
    let mut dual = Vec::new();
    for (f, g) in cert.input_frame.iter().zip(&cert.input_dual) {
        let t = g.trace();
        if t <= EPS_WEIGHT {
            continue;
        }
        frame.push(g.transpose().scale(1.0 / t));
        dual.push(f.transpose().scale(t));
    }
    Ok(BipartiteCertificate {
        first: FramePair::new(cert.output_frame.clone(), cert.output_dual.clone())?,
        second: FramePair::new(frame, dual)?,
    })
}

/// Inverse of [`transport_choi`]: certificate of the Choi state back to the channel.
pub fn transport_choi_inverse(cert: &BipartiteCertificate, e: &ChannelChoi) -> Result<ChannelCertificate> {
    let choi = e.choi_state();
    if !verify_bipartite_certificate(&choi, cert, DEFAULT_TOL)?.passed() {
        return Err(Error::Precondition("Choi-state certificate does not verify".into()));
    }
    let mut input_frame = Vec::new();
    let mut input_dual = Vec::new();
    for (s, h) in cert.second.frame.iter().zip(&cert.second.dual) {
        let t = h.trace();
        if t <= EPS_WEIGHT {
            continue;
        }
        input_frame.push(h.transpose().scale(1.0 / t));
        input_dual.push(s.transpose().scale(t));
    }
    if input_frame.is_empty() {
        return Err(Error::Numerical("all input-side duals have zero trace".into()));
    }
    Ok(ChannelCertificate {
        input_frame,
        input_dual,
        output_frame: cert.first.frame.clone(),
        output_dual: cert.first.dual.clone(),
    })
}

/// Source certificate to a certificate of its dephased embedding (flag side first).
pub fn transport_dephase(cert: &SourceCertificate, s: &MultiSource) -> Result<BipartiteCertificate> {
    if !verify_source_certificate(s, cert, DEFAULT_TOL)?.passed() {
        return Err(Error::Precondition("source certificate does not verify".into()));
    }
    let state = crate::processes::dephase_embed(s)?;
    let (dc, _) = state.dims();
    let flag_span = steered_span(state.rho(), &[dc, s.dim()], 0)?;
    let frame: Vec<HermitianOperator> = (0..dc).map(|c| HermitianOperator::basis_projector(dc, c)).collect();
    let dual = frame.iter().map(|p| flag_span.project(p)).collect::<Result<Vec<_>>>()?;
    Ok(BipartiteCertificate {
        first: FramePair::new(frame, dual)?,
        second: FramePair::new(cert.frame.clone(), cert.dual.clone())?,
    })
}

/// Certificate for the flag-convexified process: the frame operators are unchanged.
pub fn transport_flag(cert: &Certificate) -> Certificate {
    cert.clone()
}

/// Weights `p(λ|x) = Σ_a p(a|x) Tr[H_λ ρ_{a|x}]` per setting.
pub fn source_ontic_marginals(ms: &MultiSource, cert: &SourceCertificate) -> Vec<Vec<f64>> {
    ms.branches()
        .iter()
        .map(|row| {
            cert.dual
                .iter()
                .map(|h| row.iter().filter(|b| b.is_present()).map(|b| b.weight * h.inner(&b.state)).sum())
                .collect()
        })
        .collect()
}
