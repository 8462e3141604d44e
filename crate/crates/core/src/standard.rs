//! Frequently used kets, Pauli operators and Bloch-sphere parametrizations.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::hermspace::{CMatrix, HermitianOperator};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn ket(dim: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[i] = c(1.0, 0.0);
    v
}

pub fn ket_from(amps: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(amps)
}

pub fn ket_zero() -> DVector<Complex64> {
    ket(2, 0)
}

pub fn ket_one() -> DVector<Complex64> {
    ket(2, 1)
}

pub fn ket_plus() -> DVector<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ket_from(&[c(s, 0.0), c(s, 0.0)])
}

pub fn ket_minus() -> DVector<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ket_from(&[c(s, 0.0), c(-s, 0.0)])
}

pub fn kron_kets(kets: &[DVector<Complex64>]) -> DVector<Complex64> {
    let mut acc = DVector::from_element(1, c(1.0, 0.0));
    for k in kets {
        acc = acc.kronecker(k);
    }
    acc
}

pub fn pauli_x() -> HermitianOperator {
    HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]))
        .expect("Hermitian")
}

pub fn pauli_y() -> HermitianOperator {
    HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]))
        .expect("Hermitian")
}

pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::diagonal(&[1.0, -1.0])
}

pub fn paulis() -> [HermitianOperator; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// `s·𝟙 + t·(n·σ)` on a qubit.
pub fn bloch_operator(s: f64, t: f64, n: [f64; 3]) -> HermitianOperator {
    let [x, y, z] = n;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[c(s + t * z, 0.0), c(t * x, -t * y), c(t * x, t * y), c(s - t * z, 0.0)],
    );
    HermitianOperator::new(m).expect("Hermitian")
}

/// Qubit state `½(𝟙 + r·σ)`.
pub fn bloch_state(r: [f64; 3]) -> HermitianOperator {
    bloch_operator(0.5, 0.5, r)
}

/// Pure qubit state with the given Bloch direction (normalized internally).
pub fn bloch_pure(n: [f64; 3]) -> HermitianOperator {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    bloch_state([n[0] / norm, n[1] / norm, n[2] / norm])
}

pub fn maximally_mixed(d: usize) -> HermitianOperator {
    HermitianOperator::identity(d).scale(1.0 / d as f64)
}

/// `Σ_i |ii⟩ / √d`.
pub fn max_entangled_ket(d: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d * d);
    let s = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = c(s, 0.0);
    }
    v
}

pub fn bell_state() -> HermitianOperator {
    HermitianOperator::projector(&max_entangled_ket(2))
}

/// `w|Φ⁺⟩⟨Φ⁺| + (1−w)𝟙/4`.
pub fn werner_state(w: f64) -> HermitianOperator {
    &(&bell_state() * w) + &(&maximally_mixed(4) * (1.0 - w))
}

/// Fourier-basis vector `k` in dimension `d`.
pub fn fourier_ket(d: usize, k: usize) -> DVector<Complex64> {
    let s = 1.0 / (d as f64).sqrt();
    DVector::from_fn(d, |j, _| {
        let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
        c(s * phase.cos(), s * phase.sin())
    })
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// Complete set of mutually unbiased bases for prime `d` (computational basis first);
/// for other dimensions the computational and Fourier bases.
pub fn mub_kets(d: usize) -> Vec<Vec<DVector<Complex64>>> {
    let computational: Vec<_> = (0..d).map(|i| ket(d, i)).collect();
    let mut out = vec![computational];
    if d == 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        out.push(vec![ket_plus(), ket_minus()]);
        out.push(vec![ket_from(&[c(s, 0.0), c(0.0, s)]), ket_from(&[c(s, 0.0), c(0.0, -s)])]);
    } else if is_prime(d) {
        // |ψ_{a,b}⟩ = Σ_j ω^{a j² + b j} |j⟩ / √d
        let s = 1.0 / (d as f64).sqrt();
        for a in 0..d {
            let basis = (0..d)
                .map(|b| {
                    DVector::from_fn(d, |j, _| {
                        let e = (a * j * j + b * j) % d;
                        let phase = 2.0 * std::f64::consts::PI * e as f64 / d as f64;
                        c(s * phase.cos(), s * phase.sin())
                    })
                })
                .collect();
            out.push(basis);
        }
    } else if d > 1 {
        out.push((0..d).map(|k| fourier_ket(d, k)).collect());
    }
    out
}
