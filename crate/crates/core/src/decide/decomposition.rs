//! Randomized search for separable decompositions with linearly independent
//! local families, and the frame certificate they induce.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::multisource::merge_equal;
use crate::certify::{steered_span, FramePair};
use crate::error::Result;
use crate::hermspace::{dual_basis, is_linearly_independent, CMatrix, HermitianOperator};

/// `ρ = Σ_t w_t ⊗_i states[t][i]` with normalized local states.
pub(crate) type Terms = Vec<(f64, Vec<HermitianOperator>)>;

const MATCH_TOL: f64 = 1e-10;

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let m = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    HermitianOperator::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0)).expect("Hermitian by construction")
}

/// `(⟨u| ⊗ 𝟙) M (|u⟩ ⊗ 𝟙)` for `M` on `d1 ⊗ r`.
fn compress_first(m: &CMatrix, d1: usize, r: usize, u: &DVector<Complex64>) -> CMatrix {
    let mut out = CMatrix::zeros(r, r);
    for a in 0..d1 {
        for b in 0..d1 {
            let c = u[a].conj() * u[b];
            if c.norm() == 0.0 {
                continue;
            }
            out += m.view((a * r, b * r), (r, r)) * c;
        }
    }
    out
}

fn close(a: &HermitianOperator, b: &HermitianOperator) -> bool {
    a.max_abs_diff(b) <= MATCH_TOL * (1.0 + a.frobenius_norm())
}

fn product_test(rho: &HermitianOperator, dims: &[usize]) -> Result<Option<Terms>> {
    let tr = rho.trace();
    let locals: Vec<HermitianOperator> =
        (0..dims.len()).map(|i| Ok(rho.partial_trace(dims, &[i])?.scale(1.0 / tr))).collect::<Result<_>>()?;
    let prod = HermitianOperator::kron_all(&locals).scale(tr);
    Ok(close(rho, &prod).then(|| vec![(tr, locals)]))
}

/// Splits a vector on `dims` into product factors when it has Schmidt rank one at every cut.
fn product_factors(v: &DVector<Complex64>, dims: &[usize]) -> Option<Vec<DVector<Complex64>>> {
    let mut rest = v.clone();
    let mut out = Vec::new();
    for (i, &d) in dims.iter().enumerate() {
        if i + 1 == dims.len() {
            out.push(rest.clone());
            break;
        }
        let r = rest.len() / d;
        let m = DMatrix::from_fn(d, r, |a, b| rest[a * r + b]);
        let svd = m.svd(true, true);
        let s = &svd.singular_values;
        let top = s.iter().fold(0.0f64, |a, b| a.max(*b));
        let idx = s.iter().position(|&x| x == top)?;
        if s.iter().enumerate().any(|(k, &x)| k != idx && x > 1e-8 * top) {
            return None;
        }
        let u = svd.u.as_ref()?.column(idx).into_owned();
        let vt = svd.v_t.as_ref()?.row(idx).transpose() * Complex64::new(top, 0.0);
        out.push(u);
        rest = vt;
    }
    Some(out)
}

fn eigen_products(rho: &HermitianOperator, dims: &[usize]) -> Option<Terms> {
    let (vals, vecs) = rho.eigen();
    let mut terms = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 1e-12 {
            continue;
        }
        let f = product_factors(&vecs.column(k).into_owned(), dims)?;
        let states = f.iter().map(|u| HermitianOperator::projector(&(u / Complex64::new(u.norm(), 0.0)))).collect();
        terms.push((lam, states));
    }
    Some(terms)
}

fn decompose(rho: &HermitianOperator, dims: &[usize], rng: &mut ChaCha8Rng, attempts: usize) -> Result<Option<Terms>> {
    let tr = rho.trace();
    if tr <= 1e-14 {
        return Ok(Some(Vec::new()));
    }
    if dims.len() == 1 {
        return Ok(Some(vec![(tr, vec![rho.scale(1.0 / tr)])]));
    }
    if let Some(t) = product_test(rho, dims)? {
        return Ok(Some(t));
    }
    for i in 0..dims.len() {
        let others: Vec<usize> = (0..dims.len()).filter(|&k| k != i).collect();
        let rest_dims: Vec<usize> = others.iter().map(|&k| dims[k]).collect();
        let r: usize = rest_dims.iter().product();
        let order: Vec<usize> = std::iter::once(i).chain(others.iter().copied()).collect();
        let permuted = rho.permute_systems(dims, &order)?;
        for _ in 0..attempts {
            let e = random_hermitian(r, rng);
            let steered = rho.contract(dims, &others, &e)?;
            let (_, u) = steered.eigen();
            let mut blocks = Vec::with_capacity(dims[i]);
            let mut rebuilt = HermitianOperator::zeros(rho.dim());
            for k in 0..dims[i] {
                let uk = u.column(k).into_owned();
                let b = HermitianOperator::new(compress_first(permuted.matrix(), dims[i], r, &uk))
                    .unwrap_or_else(|_| HermitianOperator::zeros(r));
                rebuilt = &rebuilt + &HermitianOperator::projector(&uk).kron(&b);
                blocks.push((uk, b));
            }
            if !close(&permuted, &rebuilt) {
                continue;
            }
            let mut terms = Vec::new();
            let mut ok = true;
            for (uk, b) in &blocks {
                match decompose(b, &rest_dims, rng, attempts)? {
                    Some(sub) => {
                        let p = HermitianOperator::projector(uk);
                        for (w, mut states) in sub {
                            states.insert(i, p.clone());
                            terms.push((w, states));
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(Some(terms));
            }
        }
    }
    Ok(eigen_products(rho, dims))
}

/// Frame pairs per party from a decomposition whose local families are linearly independent.
pub(crate) fn li_local_frames(rho: &HermitianOperator, dims: &[usize], terms: &Terms) -> Result<Option<Vec<FramePair>>> {
    let mut pairs = Vec::with_capacity(dims.len());
    for i in 0..dims.len() {
        let locals: Vec<HermitianOperator> = terms.iter().map(|(_, s)| s[i].clone()).collect();
        let (pool, _) = merge_equal(&locals);
        if !is_linearly_independent(&pool)? {
            return Ok(None);
        }
        let span = steered_span(rho, dims, i)?;
        let dual = dual_basis(&pool)?.iter().map(|d| span.project(d)).collect::<Result<Vec<_>>>()?;
        pairs.push(FramePair::new(pool, dual)?);
    }
    Ok(Some(pairs))
}

/// Seeded search for an LI-local decomposition; returns its frame pairs.
pub(crate) fn search(rho: &HermitianOperator, dims: &[usize], seed: u64, attempts: usize) -> Result<Option<Vec<FramePair>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match decompose(rho, dims, &mut rng, attempts)? {
        Some(terms) if !terms.is_empty() => li_local_frames(rho, dims, &terms),
        _ => Ok(None),
    }
}
