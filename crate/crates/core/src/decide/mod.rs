//! Three-valued classification of processes: Classical with a verified frame
//! certificate, Nonclassical with a witness naming the triggering rule, or
//! Inconclusive.

mod bipartite;
mod channel;
mod decomposition;
mod general;
pub mod library;
pub mod lp;
mod multimeasurement;
mod multisource;
pub mod psd;
pub mod steering;

use serde::{Deserialize, Serialize};

use crate::certify::{Certificate, DEFAULT_TOL};
use crate::error::Result;
use crate::processes::{BipartiteState, Process};

pub use bipartite::decide_bipartite_state;
pub use channel::decide_channel;
pub use general::{decide_general, decide_multipartite_state};
pub use lp::{lp_feasible, FarkasCertificate, LinearProgram, LpFeasibility, LpOutcome, VarKind};
pub use multimeasurement::{decide_multimeasurement, joint_measurability, parent_povm_lp, JointMeasurability};
pub use multisource::{decide_multisource, fixed_frame_lp, FrameLp};
pub use psd::{psd_feasible, PsdOutcome, PsdProblem};
pub use steering::{unsteerable_lp, SteeringBudget, SteeringVerdict, SteeringWitness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    Classical,
    Nonclassical,
    Inconclusive,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::Classical => "Classical",
            Tag::Nonclassical => "Nonclassical",
            Tag::Inconclusive => "Inconclusive",
        }
    }
}

/// A decision rule and the result it rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: &'static str,
    pub locator: &'static str,
}

/// Stable rule identifiers.
pub mod rules {
    use super::Rule;

    pub const LINEARLY_INDEPENDENT: Rule = Rule {
        id: "linearly-independent",
        locator: "corollary: linearly independent states on a single system are classical",
    };
    pub const THREE_STATES: Rule = Rule {
        id: "three-states",
        locator: "corollary: a family that fits inside a simplex within the state space is classical",
    };
    pub const PURE_DEPENDENT: Rule = Rule {
        id: "pure-dependent",
        locator: "corollary: pure states are classical if and only if they are linearly independent",
    };
    pub const STEERABLE: Rule = Rule {
        id: "steerable",
        locator: "corollary: every steerable assemblage is nonclassical",
    };
    pub const FIXED_FRAME: Rule = Rule {
        id: "fixed-frame",
        locator: "multi-source structure theorem: frame decomposition of the subnormalized states",
    };
    pub const RANK_ONE_INDEPENDENT: Rule = Rule {
        id: "rank-one-independent",
        locator: "corollary: rank-1 effects are classical if and only if they are linearly independent",
    };
    pub const RANK_ONE_DEPENDENT: Rule = Rule {
        id: "rank-one-dependent",
        locator: "corollary: rank-1 effects are classical if and only if they are linearly independent",
    };
    pub const INCOMPATIBLE: Rule = Rule {
        id: "incompatible",
        locator: "corollary: every set of incompatible measurements is nonclassical",
    };
    pub const PARENT_POVM: Rule = Rule {
        id: "parent-povm",
        locator: "multi-measurement structure theorem: effects decomposed over a parent POVM",
    };
    pub const NPT: Rule = Rule {
        id: "npt",
        locator: "corollary: an entangled bipartite state is nonclassical",
    };
    pub const TWO_QUBIT: Rule = Rule {
        id: "two-qubit-separable",
        locator: "proposition: a two-qubit state is classical if and only if it is separable",
    };
    pub const STEERING_PROBE: Rule = Rule {
        id: "steering-probe",
        locator: "proposition: every multi-source steered from a classical state is classical",
    };
    pub const LI_LOCAL: Rule = Rule {
        id: "li-local-decomposition",
        locator: "corollary: a separable decomposition with linearly independent local states is classical",
    };
    pub const CHOI_NPT: Rule = Rule {
        id: "choi-npt",
        locator: "corollary: a non-entanglement-breaking channel is nonclassical",
    };
    pub const PUSHFORWARD_PROBE: Rule = Rule {
        id: "pushforward-probe",
        locator: "proposition: the image of every multi-source under a classical channel is classical",
    };
    pub const PULLBACK_PROBE: Rule = Rule {
        id: "pullback-probe",
        locator: "proposition: the preimage of every multi-measurement under a classical channel is classical",
    };
    pub const CHOI_STATE: Rule = Rule {
        id: "choi-state",
        locator: "lemma: a process and its Choi-isomorphic state are classical together",
    };
    pub const NPT_BIPARTITION: Rule = Rule {
        id: "npt-bipartition",
        locator: "associated-state theorem with the entanglement corollary",
    };
    pub const PARTY_PROBE: Rule = Rule {
        id: "party-probe",
        locator: "associated-state theorem: steering of one party by product measurements on the rest",
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub rule: String,
    pub locator: String,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tag: Tag,
    /// Rule that settled the verdict.
    pub rule: Option<String>,
    pub locator: Option<String>,
    pub certificate: Option<Certificate>,
    /// Why a Classical verdict carries no certificate, or what the certificate refers to.
    pub certificate_note: Option<String>,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<String>,
}

impl Verdict {
    fn classical(rule: Rule, cert: Certificate, diagnostics: Vec<String>) -> Self {
        Verdict {
            tag: Tag::Classical,
            rule: Some(rule.id.into()),
            locator: Some(rule.locator.into()),
            certificate: Some(cert),
            certificate_note: None,
            witness: None,
            diagnostics,
        }
    }

    fn classical_by_theorem(rule: Rule, note: String, diagnostics: Vec<String>) -> Self {
        Verdict {
            tag: Tag::Classical,
            rule: Some(rule.id.into()),
            locator: Some(rule.locator.into()),
            certificate: None,
            certificate_note: Some(note),
            witness: None,
            diagnostics,
        }
    }

    fn nonclassical(rule: Rule, data: serde_json::Value, diagnostics: Vec<String>) -> Self {
        Verdict {
            tag: Tag::Nonclassical,
            rule: Some(rule.id.into()),
            locator: Some(rule.locator.into()),
            certificate: None,
            certificate_note: None,
            witness: Some(Witness { rule: rule.id.into(), locator: rule.locator.into(), data }),
            diagnostics,
        }
    }

    fn inconclusive(diagnostics: Vec<String>) -> Self {
        Verdict {
            tag: Tag::Inconclusive,
            rule: None,
            locator: None,
            certificate: None,
            certificate_note: None,
            witness: None,
            diagnostics,
        }
    }

    pub fn is_classical(&self) -> bool {
        self.tag == Tag::Classical
    }

    pub fn is_nonclassical(&self) -> bool {
        self.tag == Tag::Nonclassical
    }

    pub fn is_inconclusive(&self) -> bool {
        self.tag == Tag::Inconclusive
    }
}

/// Tuning knobs of the deciders.
#[derive(Clone, Debug, PartialEq)]
pub struct DecideConfig {
    /// Certificate verification tolerance.
    pub tol: f64,
    /// Seed of the randomized decomposition search and random frame nets.
    pub seed: u64,
    /// Restricts the fixed-frame and parent searches to these library names.
    pub frames: Option<Vec<String>>,
    /// Restricts steering, pushforward and pullback probes to these library names.
    pub probes: Option<Vec<String>>,
    /// Number of random pure states in the net frame (dimension 3 and up).
    pub net_resolution: usize,
    pub lp_max_iterations: usize,
    pub psd_max_iterations: usize,
    pub steering: SteeringBudget,
    /// Strategy cap of the steering test when run inside a probe.
    pub probe_max_strategies: usize,
    /// Random restarts per party in the decomposition search.
    pub decomposition_attempts: usize,
    /// Reports nonsingular bipartite states that end up Inconclusive.
    pub experimental_nonsingular: bool,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            seed: 0,
            frames: None,
            probes: None,
            net_resolution: 24,
            lp_max_iterations: 200_000,
            psd_max_iterations: 3000,
            steering: SteeringBudget::default(),
            probe_max_strategies: 64,
            decomposition_attempts: 3,
            experimental_nonsingular: false,
        }
    }
}

impl DecideConfig {
    fn frame_allowed(&self, name: &str) -> bool {
        self.frames.as_ref().is_none_or(|f| f.iter().any(|n| n == name))
    }

    fn probe_allowed(&self, name: &str) -> bool {
        self.probes.as_ref().is_none_or(|f| f.iter().any(|n| n == name))
    }
}

/// Probe mode skips the fixed-frame searches, whose failure proves nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Full,
    Probe,
}

fn ensure_valid(p: &Process) -> Result<()> {
    p.check_dimension_limit()?;
    p.validate().into_result()
}

/// Runs the decider matching the process type.
pub fn decide(process: &Process, cfg: &DecideConfig) -> Result<Verdict> {
    match process {
        Process::MultiSource(ms) => decide_multisource(ms, cfg),
        Process::MultiMeasurement(mm) => decide_multimeasurement(mm, cfg),
        Process::Bipartite(b) => decide_bipartite_state(b, cfg),
        Process::Multipartite(m) if m.num_parties() == 2 => {
            decide_bipartite_state(&BipartiteState::try_from(m.clone())?, cfg)
        }
        Process::Multipartite(m) => decide_multipartite_state(m, cfg),
        Process::Channel(e) => decide_channel(e, cfg),
        Process::Instrument(mi) => decide_general(mi, cfg),
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}
