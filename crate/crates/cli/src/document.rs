//! JSON process documents: operators as row-major `[re, im]` pairs.

use std::collections::BTreeMap;

use gnc_core::hermspace::HermitianOperator;
use gnc_core::processes::{
    BipartiteState, ChannelChoi, MultiInstrument, MultiMeasurement, MultiSource, MultipartiteState, Process, ProcessKind,
    SourceBranch,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DOCUMENT_VERSION: &str = "gnc-process/1";

/// A complex matrix as rows of `[re, im]` pairs.
pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocKind {
    State,
    MultiState,
    Source,
    MultiSource,
    Assemblage,
    Effect,
    Measurement,
    MultiMeasurement,
    BipartiteState,
    MultipartiteState,
    Channel,
    Instrument,
    MultiInstrument,
    MultipartiteMultiInstrument,
}

impl DocKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CliError::parse(format!("unknown process kind '{s}'")))
    }

    fn from_process_kind(k: ProcessKind) -> Self {
        match k {
            ProcessKind::State => DocKind::State,
            ProcessKind::MultiState => DocKind::MultiState,
            ProcessKind::Source => DocKind::Source,
            ProcessKind::MultiSource => DocKind::MultiSource,
            ProcessKind::Assemblage => DocKind::Assemblage,
            ProcessKind::Measurement => DocKind::Measurement,
            ProcessKind::MultiMeasurement => DocKind::MultiMeasurement,
            ProcessKind::BipartiteState => DocKind::BipartiteState,
            ProcessKind::MultipartiteState => DocKind::MultipartiteState,
            ProcessKind::Channel => DocKind::Channel,
            ProcessKind::Instrument => DocKind::Instrument,
            ProcessKind::MultiInstrument => DocKind::MultiInstrument,
            ProcessKind::MultipartiteMultiInstrument => DocKind::MultipartiteMultiInstrument,
        }
    }
}

/// Quantum input and output wire dimensions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocShape {
    #[serde(default)]
    pub inputs: Vec<usize>,
    #[serde(default)]
    pub outputs: Vec<usize>,
}

/// Registry generator that produced the document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// On-disk process description.
///
/// `operators[x][a]` holds, by kind: states (normalized when `weights` is
/// present, subnormalized otherwise), effects, the joint state, the Choi
/// operator on output ⊗ input, or instrument Choi operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessDocument {
    pub version: String,
    pub kind: DocKind,
    pub shape: DocShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    pub operators: Vec<Vec<RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comb: Option<bool>,
    /// Wire names of an associated multipartite state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn matrix(raw: &RawMatrix) -> Result<HermitianOperator, CliError> {
    HermitianOperator::from_pairs(raw).map_err(CliError::from)
}

fn single_dim(v: &[usize], what: &str) -> Result<usize, CliError> {
    match v {
        [d] => Ok(*d),
        _ => Err(CliError::parse(format!("shape.{what} must list exactly one dimension"))),
    }
}

fn single_operator(ops: &[Vec<RawMatrix>]) -> Result<HermitianOperator, CliError> {
    match ops {
        [row] if row.len() == 1 => matrix(&row[0]),
        _ => Err(CliError::parse("expected exactly one operator, as [[matrix]]")),
    }
}

impl ProcessDocument {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: ProcessDocument = serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
        if doc.version != DOCUMENT_VERSION {
            return Err(CliError::parse(format!(
                "unsupported document version '{}' (expected '{DOCUMENT_VERSION}')",
                doc.version
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    /// Builds the process; fails on malformed payloads or violated invariants.
    pub fn to_process(&self) -> Result<Process, CliError> {
        let ops = &self.operators;
        if ops.is_empty() || ops.iter().any(Vec::is_empty) {
            return Err(CliError::parse("operators must hold at least one non-empty setting"));
        }
        let grid = || -> Result<Vec<Vec<HermitianOperator>>, CliError> {
            ops.iter().map(|row| row.iter().map(matrix).collect()).collect()
        };
        let process = match self.kind {
            DocKind::State | DocKind::MultiState | DocKind::Source | DocKind::MultiSource | DocKind::Assemblage => {
                let d = single_dim(&self.shape.outputs, "outputs")?;
                let states = grid()?;
                let ms = match &self.weights {
                    Some(w) => {
                        if w.len() != states.len() || w.iter().zip(&states).any(|(a, b)| a.len() != b.len()) {
                            return Err(CliError::parse("weights must match the operators layout"));
                        }
                        let branches = states
                            .into_iter()
                            .zip(w)
                            .map(|(row, wr)| row.into_iter().zip(wr).map(|(s, &p)| SourceBranch::new(p, s)).collect())
                            .collect();
                        MultiSource::new(d, branches)?
                    }
                    None => MultiSource::from_subnormalized(d, states)?,
                };
                Process::MultiSource(ms.with_assemblage_flag(self.kind == DocKind::Assemblage))
            }
            DocKind::Effect => {
                let d = single_dim(&self.shape.inputs, "inputs")?;
                let e = single_operator(ops)?;
                if e.dim() != d {
                    return Err(CliError::parse(format!("effect has dimension {}, shape says {d}", e.dim())));
                }
                Process::MultiMeasurement(MultiMeasurement::from_effect(e)?)
            }
            DocKind::Measurement | DocKind::MultiMeasurement => {
                let d = single_dim(&self.shape.inputs, "inputs")?;
                Process::MultiMeasurement(MultiMeasurement::new(d, grid()?)?)
            }
            DocKind::BipartiteState => match self.shape.outputs.as_slice() {
                [d1, d2] => Process::Bipartite(BipartiteState::new(*d1, *d2, single_operator(ops)?)?),
                _ => return Err(CliError::parse("shape.outputs of a bipartite state must list two dimensions")),
            },
            DocKind::MultipartiteState => {
                Process::Multipartite(MultipartiteState::new(self.shape.outputs.clone(), single_operator(ops)?)?)
            }
            DocKind::Channel => {
                let din = single_dim(&self.shape.inputs, "inputs")?;
                let dout = single_dim(&self.shape.outputs, "outputs")?;
                Process::Channel(ChannelChoi::new(din, dout, single_operator(ops)?)?)
            }
            DocKind::Instrument | DocKind::MultiInstrument | DocKind::MultipartiteMultiInstrument => {
                let mi = MultiInstrument::new(self.shape.inputs.clone(), self.shape.outputs.clone(), grid()?)?;
                let mi = if self.comb == Some(true) { mi.with_comb()? } else { mi };
                Process::Instrument(mi)
            }
        };
        process.check_dimension_limit()?;
        process.validate().into_result()?;
        Ok(process)
    }

    /// Serializes a process; multi-sources are written with weights and normalized states.
    pub fn from_process(p: &Process, generator: Option<Generator>) -> Self {
        let raw = |o: &HermitianOperator| o.to_pairs();
        let shape = p.shape();
        let mut weights = None;
        let mut comb = None;
        let operators: Vec<Vec<RawMatrix>> = match p {
            Process::MultiSource(ms) => {
                weights = Some(ms.branches().iter().map(|r| r.iter().map(|b| b.weight).collect()).collect());
                ms.branches().iter().map(|r| r.iter().map(|b| raw(&b.state)).collect()).collect()
            }
            Process::MultiMeasurement(mm) => mm.effects().iter().map(|r| r.iter().map(raw).collect()).collect(),
            Process::Bipartite(b) => vec![vec![raw(b.rho())]],
            Process::Multipartite(m) => vec![vec![raw(m.rho())]],
            Process::Channel(e) => vec![vec![raw(e.choi())]],
            Process::Instrument(mi) => {
                if mi.is_comb() {
                    comb = Some(true);
                }
                mi.branches().iter().map(|r| r.iter().map(raw).collect()).collect()
            }
        };
        ProcessDocument {
            version: DOCUMENT_VERSION.into(),
            kind: DocKind::from_process_kind(p.kind()),
            shape: DocShape { inputs: shape.quantum_in, outputs: shape.quantum_out },
            weights,
            operators,
            generator,
            comb,
            labels: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gnc_core::catalog;

    #[test]
    fn round_trip_preserves_processes() {
        let ps = [
            Process::MultiSource(catalog::bb84_assemblage()),
            Process::MultiMeasurement(catalog::pentagon(0.3)),
            Process::Bipartite(catalog::example4_state()),
            Process::Channel(catalog::example5_channel()),
            Process::Multipartite(catalog::tripartite_upb()),
        ];
        for p in ps {
            let doc = ProcessDocument::from_process(&p, None);
            let back = ProcessDocument::from_json(&doc.to_json()).unwrap().to_process().unwrap();
            assert_eq!(back.kind(), p.kind());
            assert_eq!(ProcessDocument::from_process(&back, None), doc);
        }
    }

    #[test]
    fn effect_is_completed() {
        let doc = ProcessDocument {
            version: DOCUMENT_VERSION.into(),
            kind: DocKind::Effect,
            shape: DocShape { inputs: vec![2], outputs: vec![] },
            weights: None,
            operators: vec![vec![vec![vec![[0.25, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.5, 0.0]]]]],
            generator: None,
            comb: None,
            labels: None,
        };
        match doc.to_process().unwrap() {
            Process::MultiMeasurement(mm) => assert_eq!(mm.setting(0).len(), 2),
            p => panic!("{:?}", p.kind()),
        }
    }
}
