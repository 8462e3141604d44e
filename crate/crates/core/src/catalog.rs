//! Named example processes: BB84 families, noisy cube and pentagon families,
//! SIC, entangled and separable states, measure-and-prepare channels.

use std::f64::consts::PI;

use crate::error::Result;
use crate::hermspace::{sum, HermitianOperator};
use crate::processes::{BipartiteState, ChannelChoi, MultiMeasurement, MultiSource, MultipartiteState, SourceBranch};
use crate::standard::*;

fn proj(k: &nalgebra::DVector<num_complex::Complex64>) -> HermitianOperator {
    HermitianOperator::projector(k)
}

/// `|0⟩⟨0|, |1⟩⟨1|, |+⟩⟨+|, |−⟩⟨−|`.
pub fn bb84_states() -> Vec<HermitianOperator> {
    vec![proj(&ket_zero()), proj(&ket_one()), proj(&ket_plus()), proj(&ket_minus())]
}

/// The four BB84 states as a multi-state.
pub fn bb84_multistate() -> MultiSource {
    MultiSource::multi_state(bb84_states()).expect("valid multi-state")
}

/// The uniform source `{¼ ρ_i}` over the BB84 states.
pub fn bb84_source() -> MultiSource {
    MultiSource::source(&[0.25; 4], bb84_states()).expect("valid source")
}

/// Z/X assemblage `{{½|0⟩⟨0|, ½|1⟩⟨1|}, {½|+⟩⟨+|, ½|−⟩⟨−|}}`.
pub fn bb84_assemblage() -> MultiSource {
    let s = bb84_states();
    MultiSource::new(
        2,
        vec![
            vec![SourceBranch::new(0.5, s[0].clone()), SourceBranch::new(0.5, s[1].clone())],
            vec![SourceBranch::new(0.5, s[2].clone()), SourceBranch::new(0.5, s[3].clone())],
        ],
    )
    .expect("valid assemblage")
    .with_assemblage_flag(true)
}

/// Three pure states at 120° in the x–z plane.
pub fn trine_multistate() -> MultiSource {
    let states = (0..3)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 3.0;
            bloch_pure([t.sin(), 0.0, t.cos()])
        })
        .collect();
    MultiSource::multi_state(states).expect("valid multi-state")
}

/// Source `{½|0⟩⟨0|, ½|+⟩⟨+|}`.
pub fn zero_plus_source() -> MultiSource {
    MultiSource::source(&[0.5, 0.5], vec![proj(&ket_zero()), proj(&ket_plus())]).expect("valid source")
}

/// Unit vectors `(±1, ±1, ±1)/√3`, first sign varying slowest.
pub fn cube_directions() -> Vec<[f64; 3]> {
    let s = 1.0 / 3f64.sqrt();
    let mut v = Vec::with_capacity(8);
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            for c in [1.0, -1.0] {
                v.push([a * s, b * s, c * s]);
            }
        }
    }
    v
}

/// The eight states `½(𝟙 + η n̂)` at the cube vertices, as a multi-state.
pub fn cube_multistate(eta: f64) -> MultiSource {
    let states = cube_directions().iter().map(|n| bloch_state([eta * n[0], eta * n[1], eta * n[2]])).collect();
    MultiSource::multi_state(states).expect("valid multi-state")
}

/// Octahedron frame `½(𝟙 ± σ_i)` in the order `+x, −x, +y, −y, +z, −z`.
pub fn octahedron_states() -> Vec<HermitianOperator> {
    [[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]]
        .iter()
        .map(|&n| bloch_state(n))
        .collect()
}

/// Qubit SIC POVM `½|ψ_k⟩⟨ψ_k|` with tetrahedral Bloch vectors.
pub fn sic_povm() -> MultiMeasurement {
    let s = 1.0 / 3f64.sqrt();
    let effects = [[1., 1., 1.], [1., -1., -1.], [-1., 1., -1.], [-1., -1., 1.]]
        .iter()
        .map(|n: &[f64; 3]| bloch_operator(0.25, 0.25, [n[0] * s, n[1] * s, n[2] * s]))
        .collect();
    MultiMeasurement::single(effects).expect("valid POVM")
}

/// `M_b = (1/5)(𝟙 + η(cos θ_b σ_x + sin θ_b σ_z))`, `θ_b = 2πb/5`.
pub fn pentagon(eta: f64) -> MultiMeasurement {
    let effects = (0..5)
        .map(|b| {
            let t = 2.0 * PI * b as f64 / 5.0;
            bloch_operator(0.2, 0.2 * eta, [t.cos(), 0.0, t.sin()])
        })
        .collect();
    MultiMeasurement::single(effects).expect("valid POVM")
}

pub fn z_basis() -> Vec<HermitianOperator> {
    vec![proj(&ket_zero()), proj(&ket_one())]
}

pub fn x_basis() -> Vec<HermitianOperator> {
    vec![proj(&ket_plus()), proj(&ket_minus())]
}

pub fn zx_measurements() -> MultiMeasurement {
    MultiMeasurement::new(2, vec![z_basis(), x_basis()]).expect("valid multi-measurement")
}

pub fn zz_measurements() -> MultiMeasurement {
    MultiMeasurement::new(2, vec![z_basis(), z_basis()]).expect("valid multi-measurement")
}

pub fn bell() -> BipartiteState {
    BipartiteState::new(2, 2, bell_state()).expect("valid state")
}

pub fn werner(w: f64) -> BipartiteState {
    BipartiteState::new(2, 2, werner_state(w)).expect("valid state")
}

/// Assemblage obtained by measuring Z and X on the first half of a Werner state.
pub fn werner_zx_assemblage(w: f64) -> Result<MultiSource> {
    crate::processes::steer(&werner(w), &zx_measurements(), crate::processes::Side::First)
}

/// `¼ Σ_i |i⟩⟨i| ⊗ ρ_i` on `4 ⊗ 2` with the BB84 states on the qubit.
pub fn example4_state() -> BipartiteState {
    let terms: Vec<HermitianOperator> = bb84_states()
        .iter()
        .enumerate()
        .map(|(i, s)| HermitianOperator::basis_projector(4, i).kron(s).scale(0.25))
        .collect();
    BipartiteState::new(4, 2, sum(&terms).expect("non-empty")).expect("valid state")
}

/// `½|00⟩⟨00| + ½|1+⟩⟨1+|`.
pub fn discord_state() -> BipartiteState {
    let a = proj(&ket_zero()).kron(&proj(&ket_zero()));
    let b = proj(&ket_one()).kron(&proj(&ket_plus()));
    BipartiteState::new(2, 2, (&a + &b).scale(0.5)).expect("valid state")
}

/// Ququart-to-qubit channel measuring the computational basis and preparing the BB84 states.
pub fn example5_channel() -> ChannelChoi {
    let povm: Vec<HermitianOperator> = (0..4).map(|i| HermitianOperator::basis_projector(4, i)).collect();
    ChannelChoi::measure_prepare(&povm, &bb84_states()).expect("valid channel")
}

/// Qubit-to-ququart channel `X ↦ ½ Σ_k Tr[P_k X] |k⟩⟨k|` over the BB84 projectors.
pub fn example6_channel() -> ChannelChoi {
    let povm: Vec<HermitianOperator> = bb84_states().iter().map(|p| p.scale(0.5)).collect();
    let states: Vec<HermitianOperator> = (0..4).map(|k| HermitianOperator::basis_projector(4, k)).collect();
    ChannelChoi::measure_prepare(&povm, &states).expect("valid channel")
}

/// `¼ Σ_k |ψ_k⟩⟨ψ_k|` over `|000⟩, |−+1⟩, |1−+⟩, |+1−⟩`.
pub fn tripartite_upb() -> MultipartiteState {
    let (z, o, p, m) = (ket_zero(), ket_one(), ket_plus(), ket_minus());
    let vecs = [
        kron_kets(&[z.clone(), z.clone(), z]),
        kron_kets(&[m.clone(), p.clone(), o.clone()]),
        kron_kets(&[o.clone(), m.clone(), p.clone()]),
        kron_kets(&[p, o, m]),
    ];
    let terms: Vec<HermitianOperator> = vecs.iter().map(|v| proj(v).scale(0.25)).collect();
    MultipartiteState::new(vec![2, 2, 2], sum(&terms).expect("non-empty")).expect("valid state")
}

/// `|0⟩⟨0| ⊗ 𝟙/2 ⊗ |+⟩⟨+|`.
pub fn tripartite_product() -> MultipartiteState {
    let rho = HermitianOperator::kron_all(&[proj(&ket_zero()), maximally_mixed(2), proj(&ket_plus())]);
    MultipartiteState::new(vec![2, 2, 2], rho).expect("valid state")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{Process, ProcessKind};

    #[test]
    fn examples_validate() {
        let ps = [
            Process::MultiSource(bb84_multistate()),
            Process::MultiSource(bb84_assemblage()),
            Process::MultiSource(cube_multistate(1.0)),
            Process::MultiMeasurement(sic_povm()),
            Process::MultiMeasurement(pentagon(1.0)),
            Process::Bipartite(example4_state()),
            Process::Bipartite(discord_state()),
            Process::Channel(example5_channel()),
            Process::Channel(example6_channel()),
            Process::Multipartite(tripartite_upb()),
        ];
        for p in &ps {
            assert!(p.validate().is_valid(), "{:?}", p.kind());
        }
        assert_eq!(ps[1].kind(), ProcessKind::Assemblage);
    }

    #[test]
    fn upb_vectors_are_orthogonal() {
        let rho = tripartite_upb();
        assert!((rho.rho().purity() - 0.25).abs() < 1e-12);
    }
}
