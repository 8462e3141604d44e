//! Built-in state frames, parent POVMs and probe processes used by the deciders.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermspace::HermitianOperator;
use crate::processes::{MultiMeasurement, MultiSource, SourceBranch};
use crate::standard::{bloch_pure, mub_kets};

/// A named family of density operators.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedFrame {
    pub name: String,
    pub states: Vec<HermitianOperator>,
}

/// A named POVM.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedPovm {
    pub name: String,
    pub effects: Vec<HermitianOperator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedMeasurementProbe {
    pub name: String,
    pub probe: MultiMeasurement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedSourceProbe {
    pub name: String,
    pub probe: MultiSource,
}

fn golden() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn octahedron_dirs() -> Vec<[f64; 3]> {
    vec![[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]]
}

fn tetrahedron_dirs() -> Vec<[f64; 3]> {
    vec![[1., 1., 1.], [1., -1., -1.], [-1., 1., -1.], [-1., -1., 1.]]
}

fn cube_dirs() -> Vec<[f64; 3]> {
    let mut v = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                v.push([sx, sy, sz]);
            }
        }
    }
    v
}

fn icosahedron_dirs() -> Vec<[f64; 3]> {
    let g = golden();
    let mut v = Vec::new();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            v.push([0.0, s1, s2 * g]);
            v.push([s1, s2 * g, 0.0]);
            v.push([s2 * g, 0.0, s1]);
        }
    }
    v
}

fn pure_states(dirs: &[[f64; 3]]) -> Vec<HermitianOperator> {
    dirs.iter().map(|&n| bloch_pure(n)).collect()
}

fn projectors(kets: &[DVector<Complex64>]) -> Vec<HermitianOperator> {
    kets.iter().map(HermitianOperator::projector).collect()
}

/// Haar-random pure states from a fixed seed.
pub fn random_pure_states(d: usize, count: usize, seed: u64) -> Vec<HermitianOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = DVector::from_fn(d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let n = v.norm();
            HermitianOperator::projector(&(v / Complex64::new(n, 0.0)))
        })
        .collect()
}

/// State frames for dimension `d`, in the order the fixed-frame search tries them.
pub fn source_frames(d: usize, net_resolution: usize, seed: u64) -> Vec<NamedFrame> {
    let mut out = Vec::new();
    let mubs = mub_kets(d);
    out.push(NamedFrame { name: "computational".into(), states: projectors(&mubs[0]) });
    if d == 2 {
        out.push(NamedFrame { name: "octahedron".into(), states: pure_states(&octahedron_dirs()) });
        out.push(NamedFrame { name: "tetrahedron".into(), states: pure_states(&tetrahedron_dirs()) });
        out.push(NamedFrame { name: "cube".into(), states: pure_states(&cube_dirs()) });
        out.push(NamedFrame { name: "icosahedron".into(), states: pure_states(&icosahedron_dirs()) });
    } else if d > 2 {
        let all: Vec<_> = mubs.iter().flatten().cloned().collect();
        out.push(NamedFrame { name: "mub-states".into(), states: projectors(&all) });
    }
    if d > 1 && net_resolution > 0 {
        out.push(NamedFrame {
            name: format!("net-{net_resolution}"),
            states: random_pure_states(d, net_resolution, seed),
        });
    }
    out
}

/// Parent POVMs for dimension `d`, in the order the parent search tries them.
pub fn parent_povms(d: usize) -> Vec<NamedPovm> {
    let mut out = Vec::new();
    let mubs = mub_kets(d);
    let basis_names = ["z", "x", "y"];
    for (i, b) in mubs.iter().enumerate() {
        let name = if d == 2 { format!("basis-{}", basis_names[i]) } else { format!("mub-{i}") };
        out.push(NamedPovm { name, effects: projectors(b) });
    }
    if d == 2 {
        let octa = octahedron_dirs();
        for (name, axes) in [("pauli-xz", [0usize, 2]), ("pauli-xy", [0, 1]), ("pauli-yz", [1, 2])] {
            let effects = axes
                .iter()
                .flat_map(|&a| [octa[2 * a], octa[2 * a + 1]])
                .map(|n| bloch_pure(n).scale(0.5))
                .collect();
            out.push(NamedPovm { name: name.into(), effects });
        }
        let povm = |name: &str, dirs: Vec<[f64; 3]>| {
            let s = 2.0 / dirs.len() as f64;
            NamedPovm { name: name.into(), effects: pure_states(&dirs).into_iter().map(|e| e.scale(s)).collect() }
        };
        out.push(povm("octahedron", octahedron_dirs()));
        out.push(povm("sic", tetrahedron_dirs()));
        out.push(povm("cube", cube_dirs()));
        out.push(povm("icosahedron", icosahedron_dirs()));
    } else if d > 2 && mubs.len() > 1 {
        let s = 1.0 / mubs.len() as f64;
        let all: Vec<_> = mubs.iter().flatten().cloned().collect();
        out.push(NamedPovm {
            name: "mub-mixture".into(),
            effects: projectors(&all).into_iter().map(|e| e.scale(s)).collect(),
        });
        let pair: Vec<_> = mubs[..2].iter().flatten().cloned().collect();
        out.push(NamedPovm {
            name: "mub-pair-mixture".into(),
            effects: projectors(&pair).into_iter().map(|e| e.scale(0.5)).collect(),
        });
    }
    out
}

fn basis_measurement(kets: &[DVector<Complex64>]) -> Vec<HermitianOperator> {
    projectors(kets)
}

/// Multi-measurements used to steer a `d`-dimensional party.
pub fn measurement_probes(d: usize) -> Vec<NamedMeasurementProbe> {
    let mubs = mub_kets(d);
    let mut out = Vec::new();
    let mk = |name: &str, rows: Vec<Vec<HermitianOperator>>| NamedMeasurementProbe {
        name: name.into(),
        probe: MultiMeasurement::new(d, rows).expect("library measurement"),
    };
    out.push(mk("computational", vec![basis_measurement(&mubs[0])]));
    if d == 2 {
        out.push(mk("pauli-x", vec![basis_measurement(&mubs[1])]));
        out.push(mk("pauli-y", vec![basis_measurement(&mubs[2])]));
        out.push(mk("bb84-pair", vec![basis_measurement(&mubs[0]), basis_measurement(&mubs[1])]));
        let bb84: Vec<_> = mubs[..2].iter().flatten().cloned().collect();
        out.push(mk(
            "bb84-povm",
            vec![projectors(&bb84).into_iter().map(|e| e.scale(0.5)).collect()],
        ));
    } else if mubs.len() > 1 {
        out.push(mk("mub-pair", vec![basis_measurement(&mubs[0]), basis_measurement(&mubs[1])]));
    }
    out
}

/// The one-outcome measurement `{𝟙}`.
pub fn trivial_probe(d: usize) -> NamedMeasurementProbe {
    NamedMeasurementProbe {
        name: "trivial".into(),
        probe: MultiMeasurement::single(vec![HermitianOperator::identity(d)]).expect("identity effect"),
    }
}

/// Multi-sources fed into a channel input of dimension `d`.
pub fn source_probes(d: usize) -> Vec<NamedSourceProbe> {
    let mubs = mub_kets(d);
    let mut out = Vec::new();
    let uniform = |kets: &[DVector<Complex64>]| {
        let w = 1.0 / kets.len() as f64;
        kets.iter().map(|k| SourceBranch::new(w, HermitianOperator::projector(k))).collect::<Vec<_>>()
    };
    out.push(NamedSourceProbe {
        name: "computational".into(),
        probe: MultiSource::new(d, vec![uniform(&mubs[0])]).expect("library source"),
    });
    if mubs.len() > 1 {
        let pair: Vec<_> = mubs[..2].iter().flatten().cloned().collect();
        out.push(NamedSourceProbe {
            name: if d == 2 { "bb84".into() } else { "mub-pair".into() },
            probe: MultiSource::new(d, vec![uniform(&pair)]).expect("library source"),
        });
        let rows: Vec<_> = mubs.iter().map(|b| uniform(b)).collect();
        out.push(NamedSourceProbe {
            name: "mub-settings".into(),
            probe: MultiSource::new(d, rows).expect("library source").with_assemblage_flag(true),
        });
    }
    out
}

/// Names of the built-in state frames and parent POVMs for dimension `d`.
pub fn frame_names(d: usize, net_resolution: usize) -> (Vec<String>, Vec<String>) {
    (
        source_frames(d, net_resolution, 0).into_iter().map(|f| f.name).collect(),
        parent_povms(d).into_iter().map(|p| p.name).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermspace::sum;

    #[test]
    fn parents_are_povms() {
        for d in [2usize, 3, 4] {
            for p in parent_povms(d) {
                let s = sum(&p.effects).unwrap();
                assert!(s.max_abs_diff(&HermitianOperator::identity(d)) < 1e-12, "{}", p.name);
                assert!(p.effects.iter().all(|e| e.is_psd(1e-12)));
            }
        }
    }

    #[test]
    fn frames_are_states() {
        for f in source_frames(3, 5, 1) {
            assert!(f.states.iter().all(|s| (s.trace() - 1.0).abs() < 1e-12 && s.is_psd(1e-12)));
        }
        assert_eq!(source_frames(2, 0, 0)[4].states.len(), 12);
    }
}
