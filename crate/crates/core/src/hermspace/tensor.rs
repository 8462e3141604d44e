//! Index bookkeeping for operators on tensor-product spaces.
//!
//! Composite indices follow the Kronecker convention: the first factor is the
//! most significant digit.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_dims(mat: &CMatrix, dims: &[usize]) -> Result<usize> {
    let total: usize = dims.iter().product();
    if mat.nrows() != mat.ncols() {
        return Err(Error::NotSquare { rows: mat.nrows(), cols: mat.ncols() });
    }
    if mat.nrows() != total {
        return Err(Error::DimensionMismatch { expected: total, found: mat.nrows() });
    }
    Ok(total)
}

fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

/// Reorders tensor factors: factor `p` of the output is factor `order[p]` of the input.
pub fn permute_systems(mat: &CMatrix, dims: &[usize], order: &[usize]) -> Result<CMatrix> {
    let total = check_dims(mat, dims)?;
    let n = dims.len();
    if order.len() != n {
        return Err(Error::Precondition(format!("permutation of length {} for {} systems", order.len(), n)));
    }
    let mut seen = vec![false; n];
    for &o in order {
        if o >= n || seen[o] {
            return Err(Error::Precondition("invalid permutation".into()));
        }
        seen[o] = true;
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let old_strides = strides(dims);
    // map new composite index -> old composite index
    let mut map = vec![0usize; total];
    let mut dig = vec![0usize; n];
    for (new_idx, slot) in map.iter_mut().enumerate() {
        digits(new_idx, &new_dims, &mut dig);
        let mut old = 0;
        for p in 0..n {
            old += dig[p] * old_strides[order[p]];
        }
        *slot = old;
    }
    Ok(CMatrix::from_fn(total, total, |i, j| mat[(map[i], map[j])]))
}

/// Partial trace keeping the listed systems (returned in increasing system order).
pub fn partial_trace(mat: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    check_dims(mat, dims)?;
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let mut order = keep_sorted.clone();
    order.extend(&traced);
    let permuted = permute_systems(mat, dims, &order)?;
    let dk: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    Ok(CMatrix::from_fn(dk, dk, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..dt {
            acc += permuted[(i * dt + t, j * dt + t)];
        }
        acc
    }))
}

/// Transposes the listed tensor factors.
pub fn partial_transpose(mat: &CMatrix, dims: &[usize], systems: &[usize]) -> Result<CMatrix> {
    let total = check_dims(mat, dims)?;
    let n = dims.len();
    let st = strides(dims);
    let mut out = CMatrix::zeros(total, total);
    let mut di = vec![0usize; n];
    let mut dj = vec![0usize; n];
    for i in 0..total {
        digits(i, dims, &mut di);
        for j in 0..total {
            digits(j, dims, &mut dj);
            let (mut ni, mut nj) = (0, 0);
            for k in 0..n {
                let (a, b) = if systems.contains(&k) { (dj[k], di[k]) } else { (di[k], dj[k]) };
                ni += a * st[k];
                nj += b * st[k];
            }
            out[(ni, nj)] = mat[(i, j)];
        }
    }
    Ok(out)
}

/// `Tr_measured[(E ⊗ 𝟙) M]` where `E` acts on the `measured` systems taken in the
/// given order; the result lives on the remaining systems in their original order.
pub fn contract(mat: &CMatrix, dims: &[usize], measured: &[usize], effect: &CMatrix) -> Result<CMatrix> {
    check_dims(mat, dims)?;
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !measured.contains(k)).collect();
    let dm: usize = measured.iter().map(|&k| dims[k]).product();
    let dr: usize = rest.iter().map(|&k| dims[k]).product();
    if effect.nrows() != dm || effect.ncols() != dm {
        return Err(Error::DimensionMismatch { expected: dm, found: effect.nrows() });
    }
    let mut order = measured.to_vec();
    order.extend(&rest);
    let permuted = permute_systems(mat, dims, &order)?;
    Ok(CMatrix::from_fn(dr, dr, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..dm {
            for l in 0..dm {
                let e = effect[(l, k)];
                if e != Complex64::new(0.0, 0.0) {
                    acc += permuted[(k * dr + i, l * dr + j)] * e;
                }
            }
        }
        acc
    }))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a, I: IntoIterator<Item = &'a CMatrix>>(mats: I) -> CMatrix {
    let mut acc = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for m in mats {
        acc = acc.kronecker(m);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn numbered(d: usize) -> CMatrix {
        CMatrix::from_fn(d, d, |i, j| Complex64::new((i * d + j) as f64, (i as f64) - (j as f64)))
    }

    #[test]
    fn partial_trace_of_product() {
        let a = numbered(2);
        let b = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.25), c(0.75), c(0.0)]));
        let ab = kron(&a, &b);
        let ra = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        assert!((ra - &a).norm() < 1e-12);
        let rb = partial_trace(&ab, &[2, 3], &[1]).unwrap();
        let tr_a = a.trace();
        assert!((rb - b.map(|x| x * tr_a)).norm() < 1e-12);
    }

    #[test]
    fn permutation_swaps_kron_factors() {
        let a = numbered(2);
        let b = numbered(3);
        let swapped = permute_systems(&kron(&a, &b), &[2, 3], &[1, 0]).unwrap();
        assert!((swapped - kron(&b, &a)).norm() < 1e-12);
    }

    #[test]
    fn contract_matches_definition() {
        let a = numbered(2);
        let b = numbered(2);
        let e = CMatrix::from_fn(2, 2, |i, j| Complex64::new(1.0 + i as f64, j as f64));
        let m = kron(&a, &b);
        // Tr_0[(E ⊗ 1)(A ⊗ B)] = Tr[E A] B
        let out = contract(&m, &[2, 2], &[0], &e).unwrap();
        let expect = b.map(|x| x * (&e * &a).trace());
        assert!((out - expect).norm() < 1e-12);
        let out1 = contract(&m, &[2, 2], &[1], &e).unwrap();
        let expect1 = a.map(|x| x * (&e * &b).trace());
        assert!((out1 - expect1).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product() {
        let a = numbered(2);
        let b = numbered(3);
        let pt = partial_transpose(&kron(&a, &b), &[2, 3], &[1]).unwrap();
        assert!((pt - kron(&a, &b.transpose())).norm() < 1e-12);
    }
}
