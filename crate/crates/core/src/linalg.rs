//! Dense real linear-algebra helpers shared by the span, identity and optimization code.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for rank decisions.
pub const EPS_RANK: f64 = 1e-9;

struct Decomp {
    u: DMatrix<f64>,
    s: DVector<f64>,
    vt: DMatrix<f64>,
}

/// SVD whose `vt` is square (the matrix is zero-padded when it has fewer rows than columns).
fn svd_full(a: &DMatrix<f64>) -> Decomp {
    let (n, m) = a.shape();
    let padded = if n < m {
        let mut p = DMatrix::zeros(m, m);
        p.view_mut((0, 0), (n, m)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(true, true);
    let mut u = svd.u.expect("u requested");
    if n < m {
        u = u.rows(0, n).into_owned();
    }
    Decomp { u, s: svd.singular_values, vt: svd.v_t.expect("v_t requested") }
}

fn cutoff(s: &DVector<f64>, rel: f64) -> f64 {
    let top = s.iter().fold(0.0f64, |m, v| m.max(*v));
    rel * top
}

pub fn rank(a: &DMatrix<f64>, rel: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = a.singular_values();
    let top = s.iter().fold(0.0f64, |m, v| m.max(*v));
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel * top).count()
}

/// Flips the sign so the entry of largest magnitude is positive (first index on ties).
pub fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0usize;
    let mut mag = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > mag + 1e-12 {
            mag = x.abs();
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Canonical orthonormal basis of the subspace with orthogonal projector `p`:
/// greedily Gram–Schmidt the projected standard basis vectors, largest residual first.
fn canonical_basis(p: &DMatrix<f64>, dim: usize) -> Vec<DVector<f64>> {
    let n = p.nrows();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for i in 0..n {
            let mut v = p.column(i).into_owned();
            for b in &out {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
            let nv = v.norm();
            if best.as_ref().is_none_or(|(bn, _)| nv > *bn + 1e-12) {
                best = Some((nv, v));
            }
        }
        let (nv, mut v) = best.expect("non-empty space");
        if nv < 1e-12 {
            break;
        }
        v /= nv;
        // one re-orthogonalization pass for stability
        for b in &out {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        v.normalize_mut();
        fix_sign(&mut v);
        out.push(v);
    }
    out
}

/// Orthonormal basis of `{x : a x = 0}` in canonical form.
pub fn nullspace(a: &DMatrix<f64>, rel: f64) -> Vec<DVector<f64>> {
    let m = a.ncols();
    if m == 0 {
        return Vec::new();
    }
    let d = svd_full(a);
    let cut = cutoff(&d.s, rel);
    let top = d.s.iter().fold(0.0f64, |mx, v| mx.max(*v));
    let mut null_rows = Vec::new();
    for i in 0..d.vt.nrows() {
        let sv = if i < d.s.len() { d.s[i] } else { 0.0 };
        if top == 0.0 || sv <= cut {
            null_rows.push(i);
        }
    }
    if null_rows.is_empty() {
        return Vec::new();
    }
    let mut p = DMatrix::zeros(m, m);
    for &i in &null_rows {
        let r = d.vt.row(i).transpose();
        p += &r * r.transpose();
    }
    canonical_basis(&p, null_rows.len())
}

/// Orthonormal basis (as matrix columns) of the column space of `a`, in canonical form.
pub fn range_basis(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let d = svd_full(a);
    let cut = cutoff(&d.s, rel);
    let top = d.s.iter().fold(0.0f64, |mx, v| mx.max(*v));
    if top == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let mut p = DMatrix::zeros(n, n);
    let mut r = 0;
    for i in 0..d.s.len().min(d.u.ncols()) {
        if d.s[i] > cut {
            let c = d.u.column(i).into_owned();
            p += &c * c.transpose();
            r += 1;
        }
    }
    let cols = canonical_basis(&p, r);
    DMatrix::from_columns(&cols)
}

/// Moore–Penrose pseudoinverse with relative singular-value cutoff.
pub fn pinv(a: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let (n, m) = a.shape();
    if n == 0 || m == 0 {
        return DMatrix::zeros(m, n);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let s = &svd.singular_values;
    let cut = cutoff(s, rel);
    let mut out = DMatrix::zeros(m, n);
    for i in 0..s.len() {
        if s[i] > cut && s[i] > 0.0 {
            let v = vt.row(i).transpose();
            let uc = u.column(i);
            out += (v * uc.transpose()) / s[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let ns = nullspace(&a, EPS_RANK);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&a * v).norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert!(ns[0].dot(&ns[1]).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_invertible_is_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let p = pinv(&a, EPS_RANK);
        assert!((&a * p - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn range_of_rank_one() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 1.0, 2.0]);
        let r = range_basis(&a, EPS_RANK);
        assert_eq!(r.ncols(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r[(0, 0)] - s).abs() < 1e-12 && (r[(2, 0)] - s).abs() < 1e-12);
    }
}
