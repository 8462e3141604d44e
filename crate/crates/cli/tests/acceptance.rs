//! Acceptance suite: prints one PASS/FAIL line per criterion, with the pinned
//! tolerance and the elapsed time, and exits nonzero when any criterion fails.
//!
//! Expected values come from independent oracles written here: closed forms,
//! explicit hidden-state models and steering inequalities, and a brute-force
//! vertex enumeration of a small polytope.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::Command;
use std::time::Instant;

use gnc_core::catalog;
use gnc_core::certify::{
    transport_choi, transport_choi_inverse, transport_dephase, transport_flag, verify, verify_bipartite_certificate,
    verify_channel_certificate, verify_measurement_certificate, verify_source_certificate, Certificate,
    ChannelCertificate, MeasurementCertificate, SourceCertificate, DEFAULT_TOL,
};
use gnc_core::decide::{decide, fixed_frame_lp, rules, unsteerable_lp, DecideConfig, FrameLp, SteeringBudget, Tag, Verdict};
use gnc_core::hermspace::{dual_basis, sum, HermitianOperator};
use gnc_core::processes::{
    dephase_embed, flag_convexify, BipartiteState, ChannelChoi, MultiMeasurement, MultiSource, Process, SourceBranch,
};
use gnc_core::standard::{ket_from, ket_plus, ket_zero, paulis};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

const TOL_DEPENDENCE: f64 = 1e-9;
const TOL_REMARK: f64 = 1e-9;
const TOL_CUBE_WEIGHT: f64 = 1e-8;
const TOL_DELTA_WEIGHT: f64 = 1e-9;
const TOL_WITNESS: f64 = 1e-9;
const STEERING_BRACKET: f64 = 1e-3;
const TOL_NPT: f64 = 1e-9;
const TOL_CHOI_MATCH: f64 = 1e-12;
const TOL_ROUND_TRIP: f64 = 1e-8;
const RANDOM_PRODUCTS: usize = 200;
const RANDOM_CERTIFICATES: usize = 50;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(p: &Process) -> Result<Verdict, String> {
    decide(p, &DecideConfig::default()).map_err(|e| e.to_string())
}

fn with_frames(names: &[&str]) -> DecideConfig {
    DecideConfig { frames: Some(names.iter().map(|s| s.to_string()).collect()), ..DecideConfig::default() }
}

fn tr(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    a.product_trace(b).re
}

fn witness_f64(v: &Verdict, key: &str) -> Option<f64> {
    v.witness.as_ref()?.data.get(key)?.as_f64()
}

fn matrix_from_json(v: &serde_json::Value) -> Result<HermitianOperator, String> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    HermitianOperator::from_pairs(&rows).map_err(|e| e.to_string())
}

/// `(Tr M, Tr Mσx, Tr Mσy, Tr Mσz)` of a qubit operator.
fn pauli_coords(m: &HermitianOperator) -> [f64; 4] {
    let [x, y, z] = paulis();
    [m.trace(), tr(m, &x), tr(m, &y), tr(m, &z)]
}

fn qubit(c: f64, x: f64, y: f64, z: f64) -> HermitianOperator {
    let [sx, sy, sz] = paulis();
    let id = HermitianOperator::identity(2);
    sum(&[id.scale(c), sx.scale(x), sy.scale(y), sz.scale(z)]).expect("same dimension")
}

// ---------------------------------------------------------------------------
// 1. BB84

fn criterion_1() -> Outcome {
    let ms = catalog::bb84_multistate();
    let v = run(&Process::MultiSource(ms.clone()))?;
    ensure(v.tag == Tag::Nonclassical, || format!("verdict {:?}", v.tag))?;
    ensure(v.rule.as_deref() == Some(rules::PURE_DEPENDENT.id), || format!("rule {:?}", v.rule))?;
    let beta: Vec<f64> = v
        .witness
        .as_ref()
        .and_then(|w| serde_json::from_value(w.data["dependence"].clone()).ok())
        .ok_or("witness has no dependence vector")?;
    let expected = [0.5, 0.5, -0.5, -0.5];
    // the oracle vector annihilates the states: ρ0 + ρ1 = ρ+ + ρ− = 𝟙
    let states = ms.subnormalized_flat();
    let combo = sum(&states.iter().zip(expected).map(|(s, b)| s.scale(b)).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    ensure(combo.frobenius_norm() < 1e-14, || "oracle vector is not a dependence".into())?;
    // a dependence vector is fixed up to sign
    let sign = if beta[0] < 0.0 { -1.0 } else { 1.0 };
    let err = beta.iter().zip(expected).map(|(b, e)| (sign * b - e).abs()).fold(0.0, f64::max);
    ensure(beta.len() == 4 && err <= TOL_DEPENDENCE, || format!("dependence {beta:?}, error {err:.2e}"))?;
    Ok(format!("pure-dependent, dependence error {err:.1e} <= {TOL_DEPENDENCE:.0e}"))
}

// ---------------------------------------------------------------------------
// 2. Certificate of the |0>, |+> source

fn criterion_2() -> Outcome {
    let states = vec![HermitianOperator::projector(&ket_zero()), HermitianOperator::projector(&ket_plus())];
    let ms = MultiSource::multi_state(states.clone()).map_err(|e| e.to_string())?;
    let dual = dual_basis(&states).map_err(|e| e.to_string())?;
    let cert = SourceCertificate { frame: states.clone(), dual };
    // oracle: 𝟙 − (2/3)(P0 + P+) is orthogonal to both states
    let target = (&states[0] + &states[1]).scale(2.0 / 3.0);
    let rest = &HermitianOperator::identity(2) - &target;
    ensure(states.iter().all(|s| tr(&rest, s).abs() < 1e-15), || "oracle projection is not orthogonal".into())?;
    let dual_sum = sum(&cert.dual).map_err(|e| e.to_string())?;
    let sum_err = dual_sum.max_abs_diff(&target);
    ensure(sum_err <= TOL_REMARK, || format!("dual sum differs from (2/3)(P0+P+) by {sum_err:.2e}"))?;
    let rep = verify_source_certificate(&ms, &cert, DEFAULT_TOL).map_err(|e| e.to_string())?;
    ensure(rep.passed() && rep.max_residual() <= TOL_REMARK, || format!("report {rep:?}"))?;
    for i in 0..cert.dual.len() {
        let mut bad = cert.clone();
        bad.dual[i] = bad.dual[i].scale(1.1);
        let r = verify_source_certificate(&ms, &bad, DEFAULT_TOL).map_err(|e| e.to_string())?;
        ensure(!r.passed(), || format!("dual {i} scaled by 1.1 was accepted"))?;
    }
    Ok(format!("accepted with max residual {:.1e} <= {TOL_REMARK:.0e}; both perturbed duals rejected", rep.max_residual()))
}

// ---------------------------------------------------------------------------
// 3. Cube family over the octahedron frame

fn criterion_3() -> Outcome {
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let dirs = catalog::cube_directions();
    let mut worst = 0.0f64;
    let mut min_at_boundary = f64::NAN;
    for eta in [0.0, 0.2, 0.4, inv_sqrt3] {
        let ms = catalog::cube_multistate(eta);
        let v = decide(&Process::MultiSource(ms.clone()), &with_frames(&["octahedron"])).map_err(|e| e.to_string())?;
        ensure(v.tag == Tag::Classical, || format!("eta {eta}: {:?}", v.tag))?;
        let lp = fixed_frame_lp(&ms, &catalog::octahedron_states(), &DecideConfig::default()).map_err(|e| e.to_string())?;
        let FrameLp::Feasible { certificate: cert, .. } = lp else {
            return Err(format!("eta {eta}: octahedron LP infeasible"));
        };
        ensure(verify_source_certificate(&ms, &cert, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || {
            format!("eta {eta}: certificate fails")
        })?;
        let mut min_w = f64::INFINITY;
        for (k, branch) in ms.branches().iter().flatten().enumerate() {
            for (s, h) in cert.frame.iter().zip(&cert.dual) {
                // the frame element's axis and sign from its Bloch vector
                let b = pauli_coords(s);
                let axis = (1..4).max_by(|&i, &j| b[i].abs().total_cmp(&b[j].abs())).expect("three axes");
                let sign = b[axis].signum();
                let expected = 1.0 / 6.0 + sign * eta * dirs[k][axis - 1] / 2.0;
                ensure((expected - (1.0 / 6.0 + sign * dirs[k][axis - 1].signum() * eta / (2.0 * 3f64.sqrt()))).abs() < 1e-15, || {
                    "closed form mismatch".into()
                })?;
                let w = tr(h, &branch.state);
                min_w = min_w.min(w);
                worst = worst.max((w - expected).abs());
            }
        }
        if eta == inv_sqrt3 {
            min_at_boundary = min_w;
        }
    }
    ensure(worst <= TOL_CUBE_WEIGHT, || format!("weights off by {worst:.2e}"))?;
    ensure(min_at_boundary.abs() <= TOL_CUBE_WEIGHT, || format!("minimum weight at 1/sqrt3 is {min_at_boundary:.2e}"))?;
    for eta in [0.6, 0.8, 1.0] {
        let ms = catalog::cube_multistate(eta);
        let lp = fixed_frame_lp(&ms, &catalog::octahedron_states(), &DecideConfig::default()).map_err(|e| e.to_string())?;
        ensure(matches!(lp, FrameLp::Infeasible { .. }), || format!("eta {eta}: octahedron LP feasible"))?;
        let v = decide(&Process::MultiSource(ms), &with_frames(&["octahedron"])).map_err(|e| e.to_string())?;
        ensure(v.tag != Tag::Classical, || format!("eta {eta}: Classical via the octahedron"))?;
    }
    Ok(format!(
        "weights 1/6 +- eta/(2 sqrt3) within {worst:.1e} <= {TOL_CUBE_WEIGHT:.0e}; min weight at 1/sqrt3 {min_at_boundary:.1e}; LP infeasible for 0.6, 0.8, 1.0"
    ))
}

// ---------------------------------------------------------------------------
// 4. SIC and pentagon measurements

/// Vertices of `{x ≥ 0 : A x = b}`: every basic solution with `n − rank A` zero coordinates.
fn polytope_vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = a.ncols();
    let rank = a.clone().svd(false, false).rank(1e-10);
    let zeros = n - rank;
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != zeros {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) == 0).collect();
        let ab = a.select_columns(&cols);
        let normal = ab.transpose() * &ab;
        let Some(inv) = normal.clone().try_inverse() else { continue };
        if normal.clone().svd(false, false).rank(1e-10) < cols.len() {
            continue;
        }
        let xb = inv * ab.transpose() * b;
        if (&ab * &xb - b).norm() > 1e-9 || xb.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut x = DVector::zeros(n);
        for (j, &c) in cols.iter().enumerate() {
            x[c] = xb[j];
        }
        out.push(x);
    }
    out
}

/// Response-function polytope of a qubit measurement over a fixed parent POVM,
/// including the operational identities among the effects.
fn parent_polytope(effects: &[HermitianOperator], parent: &[HermitianOperator]) -> (DMatrix<f64>, DVector<f64>) {
    let nb = effects.len();
    let nl = parent.len();
    let var = |b: usize, l: usize| b * nl + l;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (b, m) in effects.iter().enumerate() {
        let mc = pauli_coords(m);
        for (j, &target) in mc.iter().enumerate() {
            let mut r = vec![0.0; nb * nl];
            for (l, g) in parent.iter().enumerate() {
                r[var(b, l)] = pauli_coords(g)[j];
            }
            rows.push((r, target));
        }
    }
    for l in 0..nl {
        let mut r = vec![0.0; nb * nl];
        for b in 0..nb {
            r[var(b, l)] = 1.0;
        }
        rows.push((r, 1.0));
    }
    // identities: null vectors of the Gram matrix of the effect coordinates
    let coords = DMatrix::from_fn(4, nb, |j, b| pauli_coords(&effects[b])[j]);
    let eig = (coords.transpose() * &coords).symmetric_eigen();
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev.abs() > 1e-10 {
            continue;
        }
        for l in 0..nl {
            let mut r = vec![0.0; nb * nl];
            for b in 0..nb {
                r[var(b, l)] = eig.eigenvectors[(b, k)];
            }
            rows.push((r, 0.0));
        }
    }
    let a = DMatrix::from_fn(rows.len(), nb * nl, |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    (a, b)
}

fn criterion_4() -> Outcome {
    let sic = catalog::sic_povm();
    let v = run(&Process::MultiMeasurement(sic.clone()))?;
    ensure(v.tag == Tag::Classical, || format!("SIC verdict {:?}", v.tag))?;
    let Some(Certificate::MultiMeasurement(c)) = &v.certificate else { return Err("SIC has no certificate".into()) };
    ensure(verify_measurement_certificate(&sic, c, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || "SIC certificate fails".into())?;
    let mut delta = 0.0f64;
    for m in sic.flat() {
        for f in &c.dual {
            let w = tr(&m, f);
            delta = delta.max(w.abs().min((w - 1.0).abs()));
        }
    }
    ensure(delta <= TOL_DELTA_WEIGHT, || format!("SIC weights are not 0/1 (off by {delta:.2e})"))?;

    let p1 = run(&Process::MultiMeasurement(catalog::pentagon(1.0)))?;
    ensure(p1.tag == Tag::Nonclassical && p1.rule.as_deref() == Some(rules::RANK_ONE_DEPENDENT.id), || {
        format!("pentagon 1: {:?} {:?}", p1.tag, p1.rule)
    })?;

    // oracle: the ±x/±z parent polytope has a vertex at eta = 0.3 and none at eta = 1
    let parent = vec![qubit(0.25, 0.25, 0.0, 0.0), qubit(0.25, -0.25, 0.0, 0.0), qubit(0.25, 0.0, 0.0, 0.25), qubit(0.25, 0.0, 0.0, -0.25)];
    let pent = catalog::pentagon(0.3);
    let (a, b) = parent_polytope(pent.setting(0), &parent);
    let vertices = polytope_vertices(&a, &b);
    ensure(!vertices.is_empty(), || "oracle: eta 0.3 polytope is empty".into())?;
    let (a1, b1) = parent_polytope(catalog::pentagon(1.0).setting(0), &parent);
    ensure(polytope_vertices(&a1, &b1).is_empty(), || "oracle: eta 1 polytope is nonempty".into())?;
    // closed-form point p(b|±x) = 1/5 ± (2 eta/5) cos θ_b, p(b|±z) = 1/5 ± (2 eta/5) sin θ_b
    let eta = 0.3;
    let mut x = DVector::zeros(20);
    for k in 0..5 {
        let t = 2.0 * PI * k as f64 / 5.0;
        let s = 2.0 * eta / 5.0;
        for (l, val) in [0.2 + s * t.cos(), 0.2 - s * t.cos(), 0.2 + s * t.sin(), 0.2 - s * t.sin()].into_iter().enumerate() {
            x[k * 4 + l] = val;
        }
    }
    let closed_form_residual = (&a * &x - &b).norm();

    let p3 = run(&Process::MultiMeasurement(pent.clone()))?;
    ensure(p3.tag == Tag::Classical, || format!("pentagon 0.3: {:?}", p3.tag))?;
    let Some(Certificate::MultiMeasurement(c3)) = &p3.certificate else { return Err("pentagon 0.3 has no certificate".into()) };
    ensure(verify_measurement_certificate(&pent, c3, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || "pentagon certificate fails".into())?;
    let same_parent = c3.parent.len() == 4 && parent.iter().all(|g| c3.parent.iter().any(|h| g.max_abs_diff(h) < 1e-9));
    ensure(same_parent, || "pentagon 0.3 certificate does not use the ±x/±z parent".into())?;
    Ok(format!(
        "SIC 0/1 weights within {delta:.1e}; pentagon 1 rank-one-dependent; pentagon 0.3 over ±x/±z ({} oracle vertices, closed-form point residual {closed_form_residual:.1e}, none at eta 1)",
        vertices.len()
    ))
}

// ---------------------------------------------------------------------------
// 5. Incompatibility

fn criterion_5() -> Outcome {
    let zx = catalog::zx_measurements();
    let v = run(&Process::MultiMeasurement(zx.clone()))?;
    ensure(v.tag == Tag::Nonclassical && v.rule.as_deref() == Some(rules::INCOMPATIBLE.id), || format!("Z/X: {:?} {:?}", v.tag, v.rule))?;
    let data = &v.witness.as_ref().ok_or("no witness")?.data;
    let ops: Vec<Vec<HermitianOperator>> = data["separating_operators"]
        .as_array()
        .ok_or("no separating operators")?
        .iter()
        .map(|row| row.as_array().ok_or("bad row".to_string())?.iter().map(matrix_from_json).collect())
        .collect::<Result<_, _>>()?;
    // any parent G gives Σ Tr[Y M] = Σ_λ Tr[G_λ Σ_y Y_{λ(y)|y}] ≤ 0, so a positive margin separates
    let margin: f64 = zx.effects().iter().zip(&ops).flat_map(|(ms, ys)| ms.iter().zip(ys).map(|(m, y)| tr(m, y))).sum();
    let mut top = f64::NEG_INFINITY;
    for a in 0..2 {
        for b in 0..2 {
            top = top.max((&ops[0][a] + &ops[1][b]).max_eigenvalue());
        }
    }
    ensure(margin > TOL_WITNESS && top <= TOL_WITNESS, || format!("margin {margin:.2e}, top eigenvalue {top:.2e}"))?;
    let zz = run(&Process::MultiMeasurement(catalog::zz_measurements()))?;
    ensure(zz.rule.as_deref() != Some(rules::INCOMPATIBLE.id), || "Z/Z flagged as incompatible".into())?;
    Ok(format!("Z/X separated with margin {margin:.3}, strategy eigenvalues <= {top:.1e}; Z/Z not flagged ({})", zz.tag.name()))
}

// ---------------------------------------------------------------------------
// 6. Steering of the Werner Z/X assemblage

/// Oracle tag: an explicit hidden-state model below 1/√2, a violated inequality above.
fn werner_oracle(ms: &MultiSource, w: f64) -> Result<bool, String> {
    let sig = |x: usize, a: usize| ms.setting(x)[a].subnormalized();
    let sgn = |a: usize| if a == 0 { 1.0 } else { -1.0 };
    if w <= FRAC_1_SQRT_2 {
        let mut err = 0.0f64;
        let hidden = |az: usize, ax: usize| qubit(0.125, 0.125 * w * sgn(ax), 0.0, 0.125 * w * sgn(az));
        for az in 0..2 {
            for ax in 0..2 {
                ensure(hidden(az, ax).min_eigenvalue() >= -1e-12, || "oracle hidden state not positive".into())?;
            }
        }
        for a in 0..2 {
            err = err.max((&hidden(a, 0) + &hidden(a, 1)).max_abs_diff(&sig(0, a)));
            err = err.max((&hidden(0, a) + &hidden(1, a)).max_abs_diff(&sig(1, a)));
        }
        ensure(err < 1e-12, || format!("oracle model misses the assemblage by {err:.2e}"))?;
        Ok(false)
    } else {
        let r = FRAC_1_SQRT_2;
        let f = |x: usize, a: usize| if x == 0 { qubit(r, 0.0, 0.0, -sgn(a)) } else { qubit(r, -sgn(a), 0.0, 0.0) };
        let mut low = f64::INFINITY;
        for a in 0..2 {
            for b in 0..2 {
                low = low.min((&f(0, a) + &f(1, b)).min_eigenvalue());
            }
        }
        let value: f64 = (0..2).flat_map(|x| (0..2).map(move |a| (x, a))).map(|(x, a)| tr(&f(x, a), &sig(x, a))).sum();
        ensure(low >= -1e-12 && value < 0.0, || format!("oracle inequality: floor {low:.2e}, value {value:.2e}"))?;
        ensure((value - (2f64.sqrt() - 2.0 * w)).abs() < 1e-12, || "oracle value differs from sqrt2 - 2w".into())?;
        Ok(true)
    }
}

fn lp_steerable(w: f64) -> Result<bool, String> {
    let ms = catalog::werner_zx_assemblage(w).map_err(|e| e.to_string())?;
    match unsteerable_lp(&ms, SteeringBudget::default()).map_err(|e| e.to_string())? {
        v if v.is_steerable() => Ok(true),
        v if v.is_unsteerable() => Ok(false),
        v => Err(format!("w {w}: {v:?}")),
    }
}

fn criterion_6() -> Outcome {
    let mut grid = 0;
    for i in 0..=30 {
        let w = 0.4 + 0.02 * i as f64;
        let ms = catalog::werner_zx_assemblage(w).map_err(|e| e.to_string())?;
        let oracle = werner_oracle(&ms, w)?;
        let lp = lp_steerable(w)?;
        ensure(oracle == lp, || format!("w {w:.2}: oracle steerable={oracle}, LP steerable={lp}"))?;
        if lp {
            let v = run(&Process::MultiSource(ms))?;
            ensure(v.tag == Tag::Nonclassical, || format!("w {w:.2}: steerable but {:?}", v.tag))?;
        }
        grid += 1;
    }
    let (mut lo, mut hi) = (0.5, 0.9);
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if lp_steerable(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let edge = 0.5 * (lo + hi);
    ensure((edge - FRAC_1_SQRT_2).abs() <= STEERING_BRACKET, || format!("bisection edge {edge:.6}"))?;
    ensure(!lp_steerable(FRAC_1_SQRT_2 - STEERING_BRACKET)?, || "steerable just below 1/sqrt2".into())?;
    ensure(lp_steerable(FRAC_1_SQRT_2 + STEERING_BRACKET)?, || "unsteerable just above 1/sqrt2".into())?;
    Ok(format!(
        "LP matches the oracle on {grid} grid points; bisection edge {edge:.6} (1/sqrt2 = {FRAC_1_SQRT_2:.6}, bracket {STEERING_BRACKET:.0e}); steerable points Nonclassical"
    ))
}

// ---------------------------------------------------------------------------
// 7. Bipartite states

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> HermitianOperator {
    let rank = rng.random_range(1..=d);
    let terms: Vec<HermitianOperator> = (0..rank)
        .map(|_| {
            let amps: Vec<Complex64> =
                (0..d).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let w: f64 = rng.sample(Exp1);
            HermitianOperator::projector(&ket_from(&amps.iter().map(|c| c / norm).collect::<Vec<_>>())).scale(w)
        })
        .collect();
    let s = sum(&terms).expect("non-empty");
    let t = s.trace();
    s.scale(1.0 / t)
}

fn criterion_7() -> Outcome {
    let bell = run(&Process::Bipartite(catalog::bell()))?;
    let npt = witness_f64(&bell, "partial_transpose_min_eigenvalue").ok_or("no NPT witness")?;
    ensure(bell.rule.as_deref() == Some(rules::NPT.id) && (npt + 0.5).abs() <= TOL_NPT, || format!("Bell: {:?} {npt}", bell.rule))?;

    let e4 = run(&Process::Bipartite(catalog::example4_state()))?;
    let probe = e4.witness.as_ref().and_then(|w| w.data["probe"].as_str().map(str::to_string));
    ensure(e4.tag == Tag::Nonclassical && e4.rule.as_deref() == Some(rules::STEERING_PROBE.id), || format!("ex4: {:?} {:?}", e4.tag, e4.rule))?;
    ensure(probe.as_deref() == Some("computational"), || format!("ex4 probe {probe:?}"))?;

    let discord = Process::Bipartite(catalog::discord_state());
    let dv = run(&discord)?;
    let cert = dv.certificate.as_ref().ok_or("discord state has no certificate")?;
    ensure(dv.tag == Tag::Classical && verify(&discord, cert, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || {
        format!("discord: {:?}", dv.tag)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..RANDOM_PRODUCTS {
        let (d1, d2) = [(2, 2), (2, 3), (3, 2)][i % 3];
        let p = Process::Bipartite(BipartiteState::product(&random_state(&mut rng, d1), &random_state(&mut rng, d2)));
        let v = run(&p)?;
        ensure(v.tag == Tag::Classical, || format!("random product {i}: {:?}", v.tag))?;
        if let Some(c) = &v.certificate {
            ensure(verify(&p, c, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || format!("random product {i}: certificate fails"))?;
        }
    }
    Ok(format!(
        "Bell NPT {npt:.9}; ex4 via the computational steering probe; discord state certified ({}); {RANDOM_PRODUCTS} random products Classical",
        dv.rule.as_deref().unwrap_or("?")
    ))
}

// ---------------------------------------------------------------------------
// 8. Channels

fn criterion_8() -> Outcome {
    let id = run(&Process::Channel(ChannelChoi::identity(2)))?;
    ensure(id.tag == Tag::Nonclassical, || format!("identity: {:?}", id.tag))?;
    let e5 = run(&Process::Channel(catalog::example5_channel()))?;
    ensure(e5.tag == Tag::Nonclassical && e5.rule.as_deref() == Some(rules::PUSHFORWARD_PROBE.id), || format!("ex5: {:?} {:?}", e5.tag, e5.rule))?;
    let dep = run(&Process::Channel(ChannelChoi::completely_depolarizing(2, 2)))?;
    ensure(dep.tag == Tag::Classical, || format!("depolarizing: {:?}", dep.tag))?;
    let e6 = catalog::example6_channel();
    let e4 = catalog::example4_state();
    let diff = e6.choi_state().rho().max_abs_diff(e4.rho());
    ensure(diff <= TOL_CHOI_MATCH, || format!("Choi of ex6 differs from ex4 by {diff:.2e}"))?;
    let v6 = run(&Process::Channel(e6))?;
    let v4 = run(&Process::Bipartite(e4))?;
    ensure(v6.tag == v4.tag, || format!("ex6 {:?} vs ex4 {:?}", v6.tag, v4.tag))?;
    Ok(format!(
        "identity {}; ex5 via pushforward; depolarizing Classical; Choi(ex6) = ex4 within {diff:.1e} <= {TOL_CHOI_MATCH:.0e}, both {}",
        id.rule.as_deref().unwrap_or("?"),
        v6.tag.name()
    ))
}

// ---------------------------------------------------------------------------
// 9. Transports

fn stochastic(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

fn mixture(weights: &[f64], ops: &[HermitianOperator]) -> HermitianOperator {
    sum(&weights.iter().zip(ops).map(|(w, o)| o.scale(*w)).collect::<Vec<_>>()).expect("non-empty")
}

/// Informationally complete qubit POVM: a randomly rotated, shrunk tetrahedron.
fn random_ic_povm(rng: &mut ChaCha8Rng) -> Vec<HermitianOperator> {
    let q: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    let rot = [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ];
    let r = rng.random_range(0.3..0.95);
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
        .iter()
        .map(|v| {
            let m: Vec<f64> = (0..3).map(|i| r * (0..3).map(|j| rot[i][j] * v[j]).sum::<f64>()).collect();
            qubit(0.25, 0.25 * m[0], 0.25 * m[1], 0.25 * m[2])
        })
        .collect()
}

fn passes(p: &Process, c: &Certificate) -> Result<bool, String> {
    Ok(verify(p, c, DEFAULT_TOL).map_err(|e| e.to_string())?.passed())
}

fn frame_diff(a: &[HermitianOperator], b: &[HermitianOperator]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut round_trip = 0.0f64;
    for i in 0..RANDOM_CERTIFICATES {
        // multi-source over a random linearly independent frame
        let d = 2 + i % 2;
        // at most as many frame states as branches, so the branches span the frame
        let n = rng.random_range(2..=(d * d).min(6));
        let frame: Vec<HermitianOperator> = (0..n).map(|_| random_state(&mut rng, d)).collect();
        let dual = dual_basis(&frame).map_err(|e| e.to_string())?;
        let branches: Vec<Vec<SourceBranch>> = (0..2)
            .map(|_| {
                let pa = stochastic(&mut rng, 3);
                pa.iter().map(|&p| SourceBranch::new(p, mixture(&stochastic(&mut rng, n), &frame))).collect()
            })
            .collect();
        let ms = MultiSource::new(d, branches).map_err(|e| e.to_string())?;
        let cert = SourceCertificate { frame, dual };
        let src = Process::MultiSource(ms.clone());
        ensure(passes(&src, &Certificate::MultiSource(cert.clone()))?, || format!("source {i}: seed certificate fails"))?;
        let flagged = flag_convexify(&src).map_err(|e| e.to_string())?;
        let fc = transport_flag(&Certificate::MultiSource(cert.clone()));
        ensure(passes(&flagged, &fc)?, || format!("source {i}: flag transport fails"))?;
        let Process::MultiSource(flat) = &flagged else { return Err("flag of a source is not a source".into()) };
        let Certificate::MultiSource(flat_cert) = &fc else { return Err("flag changed the theorem".into()) };
        let b = transport_dephase(flat_cert, flat).map_err(|e| e.to_string())?;
        let emb = dephase_embed(flat).map_err(|e| e.to_string())?;
        ensure(verify_bipartite_certificate(&emb, &b, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || format!("source {i}: dephase transport fails"))?;
        let back = SourceCertificate { frame: b.second.frame.clone(), dual: b.second.dual.clone() };
        ensure(verify_source_certificate(flat, &back, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || format!("source {i}: dephase inverse fails"))?;
        round_trip = round_trip.max(frame_diff(&back.frame, &cert.frame)).max(frame_diff(&back.dual, &cert.dual));

        // multi-measurement over a random informationally complete parent
        let parent = random_ic_povm(&mut rng);
        let fdual = dual_basis(&parent).map_err(|e| e.to_string())?;
        let resp: Vec<Vec<Vec<f64>>> = (0..2).map(|_| (0..4).map(|_| stochastic(&mut rng, 3)).collect()).collect();
        let effects: Vec<Vec<HermitianOperator>> = resp
            .iter()
            .map(|per_l| (0..3).map(|b| mixture(&per_l.iter().map(|p| p[b]).collect::<Vec<_>>(), &parent)).collect())
            .collect();
        let mm = MultiMeasurement::new(2, effects).map_err(|e| e.to_string())?;
        let mc = Certificate::MultiMeasurement(MeasurementCertificate { parent: parent.clone(), dual: fdual });
        let meas = Process::MultiMeasurement(mm);
        ensure(passes(&meas, &mc)?, || format!("measurement {i}: seed certificate fails"))?;
        let mflag = flag_convexify(&meas).map_err(|e| e.to_string())?;
        ensure(passes(&mflag, &transport_flag(&mc))?, || format!("measurement {i}: flag transport fails"))?;

        // measure-and-prepare channel with a frame certificate on both wires
        let dout = 2 + i % 2;
        let nout = rng.random_range(2..=4);
        let out_frame: Vec<HermitianOperator> = (0..nout).map(|_| random_state(&mut rng, dout)).collect();
        let out_dual = dual_basis(&out_frame).map_err(|e| e.to_string())?;
        let g = random_ic_povm(&mut rng);
        let f = dual_basis(&g).map_err(|e| e.to_string())?;
        let prepared: Vec<HermitianOperator> = g.iter().map(|_| mixture(&stochastic(&mut rng, nout), &out_frame)).collect();
        let e = ChannelChoi::measure_prepare(&g, &prepared).map_err(|e| e.to_string())?;
        let cc = ChannelCertificate { input_frame: f, input_dual: g, output_frame: out_frame, output_dual: out_dual };
        ensure(verify_channel_certificate(&e, &cc, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || format!("channel {i}: seed certificate fails"))?;
        let bc = transport_choi(&cc, &e).map_err(|e| e.to_string())?;
        ensure(verify_bipartite_certificate(&e.choi_state(), &bc, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || format!("channel {i}: Choi transport fails"))?;
        let back = transport_choi_inverse(&bc, &e).map_err(|e| e.to_string())?;
        ensure(verify_channel_certificate(&e, &back, DEFAULT_TOL).map_err(|e| e.to_string())?.passed(), || format!("channel {i}: Choi inverse fails"))?;
        for (x, y) in [
            (&back.input_frame, &cc.input_frame),
            (&back.input_dual, &cc.input_dual),
            (&back.output_frame, &cc.output_frame),
            (&back.output_dual, &cc.output_dual),
        ] {
            round_trip = round_trip.max(frame_diff(x, y));
        }
    }
    ensure(round_trip <= TOL_ROUND_TRIP, || format!("round-trip residual {round_trip:.2e}"))?;
    Ok(format!(
        "{RANDOM_CERTIFICATES} each of source (flag, dephase), measurement (flag), channel (Choi) certificates transported; round-trip residual {round_trip:.1e} <= {TOL_ROUND_TRIP:.0e}"
    ))
}

// ---------------------------------------------------------------------------
// 10. Consistency of the assemblage and its dephased form

fn criterion_10() -> Outcome {
    let ms = catalog::bb84_assemblage();
    let v = run(&Process::MultiSource(ms.clone()))?;
    ensure(v.tag == Tag::Nonclassical, || format!("assemblage: {:?}", v.tag))?;
    let st = unsteerable_lp(&ms, SteeringBudget::default()).map_err(|e| e.to_string())?;
    ensure(st.is_steerable(), || format!("steering LP: {st:?}"))?;
    let flat = flag_convexify(&Process::MultiSource(ms)).map_err(|e| e.to_string())?;
    let Process::MultiSource(flat) = flat else { return Err("flag of a source is not a source".into()) };
    let emb = run(&Process::Bipartite(dephase_embed(&flat).map_err(|e| e.to_string())?))?;
    ensure(emb.tag != Tag::Classical, || "dephased form is Classical".into())?;
    Ok(format!(
        "assemblage Nonclassical ({}) and steerable by the LP; dephased form {}",
        v.rule.as_deref().unwrap_or("?"),
        emb.tag.name()
    ))
}

// ---------------------------------------------------------------------------
// 11. Tripartite mixture of product vectors

fn criterion_11() -> Outcome {
    let v = run(&Process::Multipartite(catalog::tripartite_upb()))?;
    match v.tag {
        Tag::Nonclassical => Ok(format!("Nonclassical via {}", v.rule.as_deref().unwrap_or("?"))),
        Tag::Inconclusive => Ok("Inconclusive: no decisive rule fired, downgraded check 'never Classical' holds".into()),
        Tag::Classical => Err("Classical".into()),
    }
}

// ---------------------------------------------------------------------------
// 12. Determinism of the reproduce command

fn criterion_12() -> Outcome {
    let once = || {
        Command::new(env!("CARGO_BIN_EXE_gnc"))
            .args(["reproduce", "--all", "--seed", "7"])
            .output()
            .map_err(|e| e.to_string())
    };
    let a = once()?;
    let b = once()?;
    ensure(a.status.success(), || format!("exit {:?}: {}", a.status.code(), String::from_utf8_lossy(&a.stdout)))?;
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    ensure(a.stdout == b.stdout, || "outputs differ".into())?;
    Ok(format!(
        "{} bytes identical across runs; {}/{} rows pass",
        a.stdout.len(),
        report["passed"],
        report["total"]
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("BB84 nonclassicality", criterion_1),
        ("source certificate", criterion_2),
        ("cube family", criterion_3),
        ("SIC and pentagon", criterion_4),
        ("incompatibility", criterion_5),
        ("Werner steering threshold", criterion_6),
        ("bipartite verdicts", criterion_7),
        ("channel verdicts", criterion_8),
        ("certificate transports", criterion_9),
        ("assemblage consistency", criterion_10),
        ("tripartite example", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{ms:.0} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{ms:.0} ms]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
