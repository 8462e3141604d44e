//! Named example processes with their expected verdicts.

use std::collections::BTreeMap;

use gnc_core::catalog;
use gnc_core::decide::Tag;
use gnc_core::processes::{dephase_embed, flag_convexify, ChannelChoi, Process};
use gnc_core::Result;
use serde::Serialize;

use crate::error::CliError;

/// How the observed verdict is compared with the expected tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// The observed tag must equal the expected one.
    Exact,
    /// Only the opposite decisive tag fails; Inconclusive passes.
    NeverOpposite,
}

/// Second process whose verdict must not contradict the first.
pub type Companion = fn(&Process) -> Result<Process>;

pub struct Entry {
    pub id: &'static str,
    /// Parameter name and default value.
    pub param: Option<(&'static str, f64)>,
    /// Parameter values reproduced by `reproduce --all`.
    pub instances: &'static [f64],
    pub locator: &'static str,
    pub build: fn(f64) -> Result<Process>,
    pub expect: fn(f64) -> Option<Tag>,
    pub policy: Policy,
    pub companion: Option<(&'static str, Companion)>,
}

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

fn cube_expect(eta: f64) -> Option<Tag> {
    if eta <= INV_SQRT3 + 1e-12 {
        Some(Tag::Classical)
    } else if (eta - 1.0).abs() < 1e-12 {
        Some(Tag::Nonclassical)
    } else {
        None
    }
}

fn pentagon_expect(eta: f64) -> Option<Tag> {
    if eta <= 0.3 {
        Some(Tag::Classical)
    } else if (eta - 1.0).abs() < 1e-12 {
        Some(Tag::Nonclassical)
    } else {
        None
    }
}

fn werner_expect(w: f64) -> Option<Tag> {
    (w > std::f64::consts::FRAC_1_SQRT_2 + 1e-3).then_some(Tag::Nonclassical)
}

fn dephased(p: &Process) -> Result<Process> {
    let Process::MultiSource(flat) = flag_convexify(p)? else {
        unreachable!("flag-convexified multi-source")
    };
    Ok(Process::Bipartite(dephase_embed(&flat)?))
}

fn choi_of(p: &Process) -> Result<Process> {
    match p {
        Process::Channel(e) => Ok(Process::Bipartite(e.choi_state())),
        _ => unreachable!("channel entry"),
    }
}

pub static ENTRIES: &[Entry] = &[
    Entry {
        id: "bb84",
        param: None,
        instances: &[],
        locator: "worked example: the four BB84 states as a multi-state",
        build: |_| Ok(Process::MultiSource(catalog::bb84_multistate())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "bb84-source",
        param: None,
        instances: &[],
        locator: "worked example: the uniform BB84 source",
        build: |_| Ok(Process::MultiSource(catalog::bb84_source())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "zero-plus-source",
        param: None,
        instances: &[],
        locator: "remark on the multi-source structure theorem: the source of |0> and |+>",
        build: |_| Ok(Process::MultiSource(catalog::zero_plus_source())),
        expect: |_| Some(Tag::Classical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "trine",
        param: None,
        instances: &[],
        locator: "corollary on linearly independent states",
        build: |_| Ok(Process::MultiSource(catalog::trine_multistate())),
        expect: |_| Some(Tag::Classical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "cube@eta",
        param: Some(("eta", INV_SQRT3)),
        instances: &[0.0, 0.2, 0.4, INV_SQRT3, 1.0],
        locator: "worked example: noisy cube of qubit states",
        build: |eta| Ok(Process::MultiSource(catalog::cube_multistate(eta))),
        expect: cube_expect,
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "sic",
        param: None,
        instances: &[],
        locator: "rank-1 symmetric informationally complete qubit POVM",
        build: |_| Ok(Process::MultiMeasurement(catalog::sic_povm())),
        expect: |_| Some(Tag::Classical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "pentagon@eta",
        param: Some(("eta", 1.0)),
        instances: &[0.3, 1.0],
        locator: "worked example: noisy pentagon measurement",
        build: |eta| Ok(Process::MultiMeasurement(catalog::pentagon(eta))),
        expect: pentagon_expect,
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "zx-measurements",
        param: None,
        instances: &[],
        locator: "consistency examples: Z and X measurements are incompatible",
        build: |_| Ok(Process::MultiMeasurement(catalog::zx_measurements())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "werner-zx@w",
        param: Some(("w", 1.0)),
        instances: &[0.75, 1.0],
        locator: "corollary on steerable assemblages: Z/X steering of a Werner state",
        build: |w| Ok(Process::MultiSource(catalog::werner_zx_assemblage(w)?)),
        expect: werner_expect,
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "consistency-assemblage",
        param: None,
        instances: &[],
        locator: "consistency examples: BB84 assemblage and its dephased bipartite form",
        build: |_| Ok(Process::MultiSource(catalog::bb84_assemblage())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: Some(("flag-dephase", dephased)),
    },
    Entry {
        id: "bell",
        param: None,
        instances: &[],
        locator: "corollary: entangled bipartite states are nonclassical",
        build: |_| Ok(Process::Bipartite(catalog::bell())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "ex4-separable",
        param: None,
        instances: &[],
        locator: "worked example: separable state steering a qubit to the BB84 states",
        build: |_| Ok(Process::Bipartite(catalog::example4_state())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "discord-classical",
        param: None,
        instances: &[],
        locator: "two-qubit state with nonzero discord that is classical",
        build: |_| Ok(Process::Bipartite(catalog::discord_state())),
        expect: |_| Some(Tag::Classical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "identity-channel",
        param: None,
        instances: &[],
        locator: "corollary: non-entanglement-breaking channels are nonclassical",
        build: |_| Ok(Process::Channel(ChannelChoi::identity(2))),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "ex5-channel",
        param: None,
        instances: &[],
        locator: "worked example: entanglement-breaking channel preparing BB84 states",
        build: |_| Ok(Process::Channel(catalog::example5_channel())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "ex6-channel",
        param: None,
        instances: &[],
        locator: "worked example: measure-and-prepare channel Choi-isomorphic to the separable BB84 state",
        build: |_| Ok(Process::Channel(catalog::example6_channel())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::Exact,
        companion: Some(("choi", choi_of)),
    },
    Entry {
        id: "depolarizing",
        param: None,
        instances: &[],
        locator: "completely depolarizing qubit channel",
        build: |_| Ok(Process::Channel(ChannelChoi::completely_depolarizing(2, 2))),
        expect: |_| Some(Tag::Classical),
        policy: Policy::Exact,
        companion: None,
    },
    Entry {
        id: "tripartite-upb",
        param: None,
        instances: &[],
        locator: "tripartite example: mixture of four orthogonal product vectors",
        build: |_| Ok(Process::Multipartite(catalog::tripartite_upb())),
        expect: |_| Some(Tag::Nonclassical),
        policy: Policy::NeverOpposite,
        companion: None,
    },
    Entry {
        id: "tripartite-product",
        param: None,
        instances: &[],
        locator: "product tripartite state",
        build: |_| Ok(Process::Multipartite(catalog::tripartite_product())),
        expect: |_| Some(Tag::Classical),
        policy: Policy::Exact,
        companion: None,
    },
];

/// A registry entry resolved to a parameter value.
pub struct Resolved {
    pub entry: &'static Entry,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
}

impl Resolved {
    pub fn build(&self) -> Result<Process> {
        (self.entry.build)(self.value)
    }

    pub fn expected(&self) -> Option<Tag> {
        (self.entry.expect)(self.value)
    }
}

fn base(id: &str) -> &str {
    id.split('@').next().unwrap_or(id)
}

/// Looks up `id`, `name@value` or `name`, with `--param` overrides.
pub fn resolve(id: &str, overrides: &BTreeMap<String, f64>) -> std::result::Result<Resolved, CliError> {
    let name = base(id);
    let entry = ENTRIES
        .iter()
        .find(|e| e.id == id || base(e.id) == name)
        .ok_or_else(|| CliError::parse(format!("unknown example id '{id}'")))?;
    let mut params = BTreeMap::new();
    let mut value = 0.0;
    if let Some((pname, default)) = entry.param {
        value = default;
        if let Some(v) = id.split_once('@').map(|(_, v)| v).filter(|v| *v != pname) {
            value = v.parse().map_err(|_| CliError::parse(format!("bad parameter value in '{id}'")))?;
        }
        if let Some(v) = overrides.get(pname) {
            value = *v;
        }
        params.insert(pname.to_string(), value);
    }
    if let Some(k) = overrides.keys().find(|k| entry.param.is_none_or(|(p, _)| p != k.as_str())) {
        return Err(CliError::parse(format!("example '{}' has no parameter '{k}'", entry.id)));
    }
    Ok(Resolved { entry, params, value })
}

/// Every row reproduced by `reproduce --all`, in registry order.
pub fn all_rows() -> Vec<Resolved> {
    let mut out = Vec::new();
    for entry in ENTRIES {
        match entry.param {
            None => out.push(Resolved { entry, params: BTreeMap::new(), value: 0.0 }),
            Some((pname, _)) => {
                for &v in entry.instances {
                    out.push(Resolved { entry, params: BTreeMap::from([(pname.to_string(), v)]), value: v });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_validate() {
        for r in all_rows() {
            let p = r.build().unwrap();
            assert!(p.validate().is_valid(), "{}", r.entry.id);
            assert!(r.expected().is_some(), "{}", r.entry.id);
        }
    }

    #[test]
    fn resolution_forms() {
        let none = BTreeMap::new();
        assert_eq!(resolve("cube@eta", &none).unwrap().value, INV_SQRT3);
        assert_eq!(resolve("cube@0.2", &none).unwrap().value, 0.2);
        assert_eq!(resolve("cube", &BTreeMap::from([("eta".to_string(), 0.4)])).unwrap().value, 0.4);
        assert_eq!(resolve("nope", &none).err().unwrap().code, 3);
        assert!(resolve("bb84", &BTreeMap::from([("eta".to_string(), 0.4)])).is_err());
    }
}
