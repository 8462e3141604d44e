//! Typed process descriptions, validity checks, and the compositional transforms
//! between them (steering, pullback, pushforward, Choi, flag-convexification,
//! dephased embedding and associated states).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermspace::{linear_combination, sum, HermitianOperator};

/// Eigenvalue floor for positivity checks.
pub const EPS_PSD: f64 = 1e-9;
/// Tolerance for trace and normalization conditions.
pub const EPS_TR: f64 = 1e-8;
/// Largest supported dimension per subsystem.
pub const MAX_SUBSYSTEM_DIM: usize = 16;
/// Weights at or below this are treated as absent branches.
pub const EPS_WEIGHT: f64 = 1e-12;

/// Declared type of a process: quantum wires and classical variable ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    pub quantum_in: Vec<usize>,
    pub quantum_out: Vec<usize>,
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
}

/// One branch `p(a|x) ρ_{a|x}` of a multi-source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceBranch {
    pub weight: f64,
    pub state: HermitianOperator,
}

impl SourceBranch {
    pub fn new(weight: f64, state: HermitianOperator) -> Self {
        Self { weight, state }
    }

    pub fn subnormalized(&self) -> HermitianOperator {
        self.state.scale(self.weight)
    }

    pub fn is_present(&self) -> bool {
        self.weight > EPS_WEIGHT
    }
}

/// Setting-indexed ensembles `{p(a|x), ρ_{a|x}}` on one quantum output.
/// Outcome ranges may differ between settings.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSource {
    dim: usize,
    branches: Vec<Vec<SourceBranch>>,
    assemblage: bool,
}

impl MultiSource {
    pub fn new(dim: usize, branches: Vec<Vec<SourceBranch>>) -> Result<Self> {
        if branches.is_empty() || branches.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidProcess("every setting needs at least one outcome".into()));
        }
        for b in branches.iter().flatten() {
            if b.state.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: b.state.dim() });
            }
            if !b.weight.is_finite() {
                return Err(Error::InvalidProcess("non-finite weight".into()));
            }
        }
        Ok(Self { dim, branches, assemblage: false })
    }

    /// A source (single setting) from weights and states.
    pub fn source(weights: &[f64], states: Vec<HermitianOperator>) -> Result<Self> {
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: weights.len() });
        }
        let dim = states.first().ok_or(Error::EmptyFamily)?.dim();
        let br = weights.iter().zip(states).map(|(&w, s)| SourceBranch::new(w, s)).collect();
        Self::new(dim, vec![br])
    }

    /// One state per setting, each prepared with certainty.
    pub fn multi_state(states: Vec<HermitianOperator>) -> Result<Self> {
        let dim = states.first().ok_or(Error::EmptyFamily)?.dim();
        Self::new(dim, states.into_iter().map(|s| vec![SourceBranch::new(1.0, s)]).collect())
    }

    /// Builds from subnormalized operators `p(a|x)ρ_{a|x}` (zero operators become absent branches).
    pub fn from_subnormalized(dim: usize, ops: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        let branches = ops
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|op| {
                        let w = op.trace();
                        if w > EPS_WEIGHT {
                            SourceBranch::new(w, op.scale(1.0 / w))
                        } else {
                            SourceBranch::new(0.0, HermitianOperator::identity(dim).scale(1.0 / dim as f64))
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(dim, branches)
    }

    pub fn with_assemblage_flag(mut self, flag: bool) -> Self {
        self.assemblage = flag;
        self
    }

    pub fn is_assemblage(&self) -> bool {
        self.assemblage
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_settings(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Vec<SourceBranch>] {
        &self.branches
    }

    pub fn setting(&self, x: usize) -> &[SourceBranch] {
        &self.branches[x]
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape {
            quantum_in: vec![],
            quantum_out: vec![self.dim],
            settings: vec![self.branches.len()],
            outcomes: vec![self.branches.iter().map(Vec::len).max().unwrap_or(0)],
        }
    }

    /// Flattened `(a, x)` labels in setting-major order.
    pub fn labels(&self) -> Vec<(usize, usize)> {
        self.branches
            .iter()
            .enumerate()
            .flat_map(|(x, row)| (0..row.len()).map(move |a| (a, x)))
            .collect()
    }

    /// Subnormalized operators in the order of [`MultiSource::labels`].
    pub fn subnormalized_flat(&self) -> Vec<HermitianOperator> {
        self.branches.iter().flatten().map(SourceBranch::subnormalized).collect()
    }

    /// `Σ_a p(a|x) ρ_{a|x}`.
    pub fn marginal(&self, x: usize) -> HermitianOperator {
        sum(&self.branches[x].iter().map(SourceBranch::subnormalized).collect::<Vec<_>>())
            .expect("non-empty setting")
    }

    /// Largest Frobenius distance between setting marginals.
    pub fn signaling_defect(&self) -> f64 {
        let m0 = self.marginal(0);
        (1..self.num_settings())
            .map(|x| (&self.marginal(x) - &m0).frobenius_norm())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        for (x, row) in self.branches.iter().enumerate() {
            let mut total = 0.0;
            for (a, b) in row.iter().enumerate() {
                if b.weight < -EPS_PSD {
                    r.push(format!("weight p({a}|{x}) negative"), -b.weight);
                }
                total += b.weight;
                check_state(&mut r, &format!("state ({a},{x})"), &b.state);
            }
            if (total - 1.0).abs() > EPS_TR {
                r.push(format!("weights of setting {x} sum to {total}"), (total - 1.0).abs());
            }
        }
        if self.assemblage {
            let d = self.signaling_defect();
            if d > EPS_TR {
                r.push("assemblage marginals depend on the setting".into(), d);
            }
        }
        r
    }
}

fn check_state(r: &mut ValidationReport, what: &str, s: &HermitianOperator) {
    let m = s.min_eigenvalue();
    if m < -EPS_PSD {
        r.push(format!("{what} is not positive semidefinite"), -m);
    }
    let t = s.trace();
    if (t - 1.0).abs() > EPS_TR {
        r.push(format!("{what} has trace {t}"), (t - 1.0).abs());
    }
}

/// Setting-indexed POVMs `{M_{b|y}}` on one quantum input.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiMeasurement {
    dim: usize,
    effects: Vec<Vec<HermitianOperator>>,
}

impl MultiMeasurement {
    pub fn new(dim: usize, effects: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        if effects.is_empty() || effects.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidProcess("every setting needs at least one outcome".into()));
        }
        for e in effects.iter().flatten() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
            }
        }
        Ok(Self { dim, effects })
    }

    pub fn single(effects: Vec<HermitianOperator>) -> Result<Self> {
        let dim = effects.first().ok_or(Error::EmptyFamily)?.dim();
        Self::new(dim, vec![effects])
    }

    /// Two-outcome measurement `{E, 𝟙 − E}`.
    pub fn from_effect(e: HermitianOperator) -> Result<Self> {
        let comp = &HermitianOperator::identity(e.dim()) - &e;
        Self::single(vec![e, comp])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_settings(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[Vec<HermitianOperator>] {
        &self.effects
    }

    pub fn setting(&self, y: usize) -> &[HermitianOperator] {
        &self.effects[y]
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape {
            quantum_in: vec![self.dim],
            quantum_out: vec![],
            settings: vec![self.effects.len()],
            outcomes: vec![self.effects.iter().map(Vec::len).max().unwrap_or(0)],
        }
    }

    pub fn labels(&self) -> Vec<(usize, usize)> {
        self.effects
            .iter()
            .enumerate()
            .flat_map(|(y, row)| (0..row.len()).map(move |b| (b, y)))
            .collect()
    }

    pub fn flat(&self) -> Vec<HermitianOperator> {
        self.effects.iter().flatten().cloned().collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let id = HermitianOperator::identity(self.dim);
        for (y, row) in self.effects.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                let (lo, hi) = (e.min_eigenvalue(), e.max_eigenvalue());
                if lo < -EPS_PSD {
                    r.push(format!("effect ({b},{y}) is not positive semidefinite"), -lo);
                }
                if hi > 1.0 + EPS_PSD {
                    r.push(format!("effect ({b},{y}) exceeds the identity"), hi - 1.0);
                }
            }
            let total = sum(row).expect("non-empty");
            let dev = total.max_abs_diff(&id);
            if dev > EPS_TR {
                r.push(format!("effects of setting {y} do not sum to the identity"), dev);
            }
        }
        r
    }
}

/// A state on several quantum systems.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipartiteState {
    dims: Vec<usize>,
    rho: HermitianOperator,
}

impl MultipartiteState {
    pub fn new(dims: Vec<usize>, rho: HermitianOperator) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidProcess("subsystem dimensions must be positive".into()));
        }
        if total != rho.dim() {
            return Err(Error::DimensionMismatch { expected: total, found: rho.dim() });
        }
        Ok(Self { dims, rho })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<HermitianOperator> {
        self.rho.partial_trace(&self.dims, keep)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        check_state(&mut r, "state", &self.rho);
        r
    }

    /// Drops dimension-one factors.
    pub fn squeezed(&self) -> Self {
        let dims: Vec<usize> = self.dims.iter().copied().filter(|&d| d > 1).collect();
        let dims = if dims.is_empty() { vec![1] } else { dims };
        Self { dims, rho: self.rho.clone() }
    }
}

/// A state on two quantum systems.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    d1: usize,
    d2: usize,
    rho: HermitianOperator,
}

/// Which factor of a bipartite state a measurement acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::First => 0,
            Side::Second => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }
}

impl BipartiteState {
    pub fn new(d1: usize, d2: usize, rho: HermitianOperator) -> Result<Self> {
        if d1 * d2 != rho.dim() {
            return Err(Error::DimensionMismatch { expected: d1 * d2, found: rho.dim() });
        }
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidProcess("subsystem dimensions must be positive".into()));
        }
        Ok(Self { d1, d2, rho })
    }

    pub fn product(a: &HermitianOperator, b: &HermitianOperator) -> Self {
        Self { d1: a.dim(), d2: b.dim(), rho: a.kron(b) }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    pub fn dim_of(&self, side: Side) -> usize {
        match side {
            Side::First => self.d1,
            Side::Second => self.d2,
        }
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn reduced(&self, side: Side) -> HermitianOperator {
        self.rho
            .partial_trace(&[self.d1, self.d2], &[side.index()])
            .expect("consistent dims")
    }

    pub fn partial_transpose(&self) -> HermitianOperator {
        self.rho.partial_transpose(&[self.d1, self.d2], &[1]).expect("consistent dims")
    }

    pub fn swapped(&self) -> Self {
        let rho = self.rho.permute_systems(&[self.d1, self.d2], &[1, 0]).expect("consistent dims");
        Self { d1: self.d2, d2: self.d1, rho }
    }

    /// `Tr_side[(E ⊗ 𝟙) ρ]` (or `(𝟙 ⊗ E)` for the second side).
    pub fn steer_operator(&self, side: Side, effect: &HermitianOperator) -> Result<HermitianOperator> {
        self.rho.contract(&[self.d1, self.d2], &[side.index()], effect)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        check_state(&mut r, "state", &self.rho);
        r
    }
}

impl From<BipartiteState> for MultipartiteState {
    fn from(b: BipartiteState) -> Self {
        MultipartiteState { dims: vec![b.d1, b.d2], rho: b.rho }
    }
}

impl TryFrom<MultipartiteState> for BipartiteState {
    type Error = Error;
    fn try_from(m: MultipartiteState) -> Result<Self> {
        if m.dims.len() != 2 {
            return Err(Error::InvalidProcess(format!("expected 2 parties, found {}", m.dims.len())));
        }
        BipartiteState::new(m.dims[0], m.dims[1], m.rho)
    }
}

/// A channel stored as its trace-one Choi state, output factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelChoi {
    din: usize,
    dout: usize,
    choi: HermitianOperator,
}

impl ChannelChoi {
    pub fn new(din: usize, dout: usize, choi: HermitianOperator) -> Result<Self> {
        if din * dout != choi.dim() {
            return Err(Error::DimensionMismatch { expected: din * dout, found: choi.dim() });
        }
        Ok(Self { din, dout, choi })
    }

    /// From Kraus operators of shape `dout × din`.
    pub fn from_kraus(kraus: &[crate::hermspace::CMatrix]) -> Result<Self> {
        let k0 = kraus.first().ok_or(Error::EmptyFamily)?;
        let (dout, din) = k0.shape();
        let mut acc = crate::hermspace::CMatrix::zeros(dout * din, dout * din);
        let scale = num_complex::Complex64::new(1.0 / din as f64, 0.0);
        for k in kraus {
            if k.shape() != (dout, din) {
                return Err(Error::DimensionMismatch { expected: dout, found: k.nrows() });
            }
            let mut v = nalgebra::DVector::<num_complex::Complex64>::zeros(dout * din);
            for i in 0..din {
                for o in 0..dout {
                    v[o * din + i] += k[(o, i)];
                }
            }
            acc += &v * v.adjoint();
        }
        Self::new(din, dout, HermitianOperator::from_computed(acc * scale))
    }

    /// `X ↦ Σ_k Tr[G_k X] σ_k`.
    pub fn measure_prepare(povm: &[HermitianOperator], states: &[HermitianOperator]) -> Result<Self> {
        if povm.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: povm.len(), found: states.len() });
        }
        let din = povm.first().ok_or(Error::EmptyFamily)?.dim();
        let dout = states[0].dim();
        let terms: Vec<HermitianOperator> = povm.iter().zip(states).map(|(g, s)| s.kron(&g.transpose())).collect();
        let choi = sum(&terms)?.scale(1.0 / din as f64);
        Self::new(din, dout, choi)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(&[crate::hermspace::CMatrix::identity(d, d)]).expect("valid")
    }

    /// `X ↦ Tr[X] 𝟙/dout`.
    pub fn completely_depolarizing(din: usize, dout: usize) -> Self {
        let choi = HermitianOperator::identity(din * dout).scale(1.0 / (din * dout) as f64);
        Self { din, dout, choi }
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    /// The Choi state as a bipartite state (output ⊗ input).
    pub fn choi_state(&self) -> BipartiteState {
        BipartiteState { d1: self.dout, d2: self.din, rho: self.choi.clone() }
    }

    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        channel_apply(self, x)
    }

    /// Heisenberg-picture map `M ↦ 𝓔†(M)`.
    pub fn adjoint(&self, m: &HermitianOperator) -> Result<HermitianOperator> {
        if m.dim() != self.dout {
            return Err(Error::DimensionMismatch { expected: self.dout, found: m.dim() });
        }
        let t = self.choi.contract(&[self.dout, self.din], &[0], m)?;
        Ok(t.transpose().scale(self.din as f64))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let m = self.choi.min_eigenvalue();
        if m < -EPS_PSD {
            r.push("Choi operator is not positive semidefinite".into(), -m);
        }
        let red = self.choi.partial_trace(&[self.dout, self.din], &[1]).expect("dims");
        let target = HermitianOperator::identity(self.din).scale(1.0 / self.din as f64);
        let dev = red.max_abs_diff(&target);
        if dev > EPS_TR {
            r.push("channel is not trace preserving".into(), dev);
        }
        r
    }
}

/// `𝓔(X) = dA·Tr_A[(𝟙_B ⊗ Xᵀ) choi]`.
pub fn channel_apply(e: &ChannelChoi, x: &HermitianOperator) -> Result<HermitianOperator> {
    if x.dim() != e.din {
        return Err(Error::DimensionMismatch { expected: e.din, found: x.dim() });
    }
    let out = e.choi.contract(&[e.dout, e.din], &[1], &x.transpose())?;
    Ok(out.scale(e.din as f64))
}

/// Setting-indexed instruments on several quantum inputs and outputs, stored as
/// subnormalized Choi operators on `outputs ⊗ inputs` with normalized trace.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiInstrument {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    branches: Vec<Vec<HermitianOperator>>,
    /// Inputs `[A1, A2]`, outputs `[B1, B2]`, with `B1` emitted before `A2` arrives.
    comb: bool,
}

impl MultiInstrument {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>, branches: Vec<Vec<HermitianOperator>>) -> Result<Self> {
        if branches.is_empty() || branches.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidProcess("every setting needs at least one outcome".into()));
        }
        let total: usize = inputs.iter().chain(&outputs).product();
        for op in branches.iter().flatten() {
            if op.dim() != total {
                return Err(Error::DimensionMismatch { expected: total, found: op.dim() });
            }
        }
        Ok(Self { inputs, outputs, branches, comb: false })
    }

    /// Declares the two-step comb layout; requires two inputs and two outputs.
    pub fn with_comb(mut self) -> Result<Self> {
        if self.inputs.len() != 2 || self.outputs.len() != 2 {
            return Err(Error::Precondition("comb layout needs two inputs and two outputs".into()));
        }
        self.comb = true;
        Ok(self)
    }

    pub fn is_comb(&self) -> bool {
        self.comb
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn din(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn dout(&self) -> usize {
        self.outputs.iter().product()
    }

    /// Subsystem dims of a branch operator: outputs then inputs.
    pub fn wire_dims(&self) -> Vec<usize> {
        self.outputs.iter().chain(&self.inputs).copied().collect()
    }

    pub fn branches(&self) -> &[Vec<HermitianOperator>] {
        &self.branches
    }

    pub fn num_settings(&self) -> usize {
        self.branches.len()
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape {
            quantum_in: self.inputs.clone(),
            quantum_out: self.outputs.clone(),
            settings: vec![self.branches.len()],
            outcomes: vec![self.branches.iter().map(Vec::len).max().unwrap_or(0)],
        }
    }

    /// Applies branch `(c, z)` to a product-free input operator on all inputs.
    pub fn apply_branch(&self, z: usize, c: usize, x: &HermitianOperator) -> Result<HermitianOperator> {
        let din = self.din();
        if x.dim() != din {
            return Err(Error::DimensionMismatch { expected: din, found: x.dim() });
        }
        let dims = [self.dout(), din];
        let out = self.branches[z][c].contract(&dims, &[1], &x.transpose())?;
        Ok(out.scale(din as f64))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let din = self.din();
        let dout = self.dout();
        let target = HermitianOperator::identity(din).scale(1.0 / din as f64);
        for (z, row) in self.branches.iter().enumerate() {
            for (c, op) in row.iter().enumerate() {
                let m = op.min_eigenvalue();
                if m < -EPS_PSD {
                    r.push(format!("branch ({c},{z}) is not positive semidefinite"), -m);
                }
            }
            let total = sum(row).expect("non-empty");
            let red = total.partial_trace(&[dout, din], &[1]).expect("dims");
            let dev = red.max_abs_diff(&target);
            if dev > EPS_TR {
                r.push(format!("setting {z} is not trace preserving"), dev);
            }
        }
        r
    }
}

/// Table-I classification of a process by its type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    State,
    MultiState,
    Source,
    MultiSource,
    Assemblage,
    Measurement,
    MultiMeasurement,
    BipartiteState,
    MultipartiteState,
    Channel,
    Instrument,
    MultiInstrument,
    MultipartiteMultiInstrument,
}

impl ProcessKind {
    pub fn name(self) -> &'static str {
        match self {
            ProcessKind::State => "state",
            ProcessKind::MultiState => "multi-state",
            ProcessKind::Source => "source",
            ProcessKind::MultiSource => "multi-source",
            ProcessKind::Assemblage => "assemblage",
            ProcessKind::Measurement => "measurement",
            ProcessKind::MultiMeasurement => "multi-measurement",
            ProcessKind::BipartiteState => "bipartite-state",
            ProcessKind::MultipartiteState => "multipartite-state",
            ProcessKind::Channel => "channel",
            ProcessKind::Instrument => "instrument",
            ProcessKind::MultiInstrument => "multi-instrument",
            ProcessKind::MultipartiteMultiInstrument => "multipartite-multi-instrument",
        }
    }
}

/// Any process in scope.
#[derive(Clone, Debug, PartialEq)]
pub enum Process {
    MultiSource(MultiSource),
    MultiMeasurement(MultiMeasurement),
    Bipartite(BipartiteState),
    Multipartite(MultipartiteState),
    Channel(ChannelChoi),
    Instrument(MultiInstrument),
}

impl Process {
    pub fn kind(&self) -> ProcessKind {
        match self {
            Process::MultiSource(ms) => {
                if ms.is_assemblage() && ms.num_settings() > 1 {
                    ProcessKind::Assemblage
                } else {
                    let single_outcome = ms.branches().iter().all(|r| r.len() == 1);
                    match (ms.num_settings() > 1, single_outcome) {
                        (false, true) => ProcessKind::State,
                        (true, true) => ProcessKind::MultiState,
                        (false, false) => ProcessKind::Source,
                        (true, false) => ProcessKind::MultiSource,
                    }
                }
            }
            Process::MultiMeasurement(mm) => {
                if mm.num_settings() > 1 {
                    ProcessKind::MultiMeasurement
                } else {
                    ProcessKind::Measurement
                }
            }
            Process::Bipartite(_) => ProcessKind::BipartiteState,
            Process::Multipartite(m) => {
                if m.num_parties() == 2 {
                    ProcessKind::BipartiteState
                } else {
                    ProcessKind::MultipartiteState
                }
            }
            Process::Channel(_) => ProcessKind::Channel,
            Process::Instrument(mi) => {
                if mi.inputs.len() + mi.outputs.len() > 2 {
                    ProcessKind::MultipartiteMultiInstrument
                } else if mi.num_settings() > 1 {
                    ProcessKind::MultiInstrument
                } else {
                    ProcessKind::Instrument
                }
            }
        }
    }

    pub fn shape(&self) -> SystemShape {
        match self {
            Process::MultiSource(ms) => ms.shape(),
            Process::MultiMeasurement(mm) => mm.shape(),
            Process::Bipartite(b) => SystemShape {
                quantum_in: vec![],
                quantum_out: vec![b.d1, b.d2],
                settings: vec![],
                outcomes: vec![],
            },
            Process::Multipartite(m) => SystemShape {
                quantum_in: vec![],
                quantum_out: m.dims.clone(),
                settings: vec![],
                outcomes: vec![],
            },
            Process::Channel(c) => SystemShape {
                quantum_in: vec![c.din],
                quantum_out: vec![c.dout],
                settings: vec![],
                outcomes: vec![],
            },
            Process::Instrument(mi) => mi.shape(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            Process::MultiSource(ms) => ms.validate(),
            Process::MultiMeasurement(mm) => mm.validate(),
            Process::Bipartite(b) => b.validate(),
            Process::Multipartite(m) => m.validate(),
            Process::Channel(c) => c.validate(),
            Process::Instrument(mi) => mi.validate(),
        }
    }

    /// Fails when any quantum subsystem exceeds [`MAX_SUBSYSTEM_DIM`].
    pub fn check_dimension_limit(&self) -> Result<()> {
        let shape = self.shape();
        for &d in shape.quantum_in.iter().chain(&shape.quantum_out) {
            if d > MAX_SUBSYSTEM_DIM {
                return Err(Error::DimensionLimit { dim: d, limit: MAX_SUBSYSTEM_DIM });
            }
        }
        Ok(())
    }
}

/// Every violated invariant with its magnitude.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub what: String,
    pub magnitude: f64,
}

impl ValidationReport {
    fn push(&mut self, what: String, magnitude: f64) {
        self.issues.push(ValidationIssue { what, magnitude });
    }

    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    /// Converts a non-empty report into an error.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            let msg = self
                .issues
                .iter()
                .map(|i| format!("{} ({:.3e})", i.what, i.magnitude))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidProcess(msg))
        }
    }
}

pub fn validate(p: &Process) -> ValidationReport {
    p.validate()
}

/// Steers `rho` by measuring `mm` on `side`; the result lives on the other side.
pub fn steer(rho: &BipartiteState, mm: &MultiMeasurement, side: Side) -> Result<MultiSource> {
    let d = rho.dim_of(side);
    if mm.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: mm.dim() });
    }
    let ops = mm
        .effects()
        .iter()
        .map(|row| row.iter().map(|e| rho.steer_operator(side, e)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiSource::from_subnormalized(rho.dim_of(side.other()), ops)?.with_assemblage_flag(true))
}

/// Effective multi-measurement `𝓔†(M_{b|y})` on the channel input.
pub fn pullback(e: &ChannelChoi, mm: &MultiMeasurement) -> Result<MultiMeasurement> {
    if mm.dim() != e.dout {
        return Err(Error::DimensionMismatch { expected: e.dout, found: mm.dim() });
    }
    let effects = mm
        .effects()
        .iter()
        .map(|row| row.iter().map(|m| e.adjoint(m)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    MultiMeasurement::new(e.din, effects)
}

/// Effective multi-source `𝓔(ρ_{a|x})` with weights kept.
pub fn pushforward(e: &ChannelChoi, ms: &MultiSource) -> Result<MultiSource> {
    if ms.dim() != e.din {
        return Err(Error::DimensionMismatch { expected: e.din, found: ms.dim() });
    }
    let branches = ms
        .branches()
        .iter()
        .map(|row| {
            row.iter()
                .map(|b| Ok(SourceBranch::new(b.weight, channel_apply(e, &b.state)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiSource::new(e.dout, branches)?.with_assemblage_flag(ms.is_assemblage()))
}

/// Flat outcome index of `(outcome, setting)` after flag-convexification.
pub fn flag_index(outcome_counts: &[usize], outcome: usize, setting: usize) -> usize {
    outcome_counts[..setting].iter().sum::<usize>() + outcome
}

/// Turns the setting into part of the outcome by uniform sampling.
pub fn flag_convexify(p: &Process) -> Result<Process> {
    match p {
        Process::MultiSource(ms) => {
            let nx = ms.num_settings() as f64;
            let row = ms
                .branches()
                .iter()
                .flatten()
                .map(|b| SourceBranch::new(b.weight / nx, b.state.clone()))
                .collect();
            Ok(Process::MultiSource(MultiSource::new(ms.dim(), vec![row])?))
        }
        Process::MultiMeasurement(mm) => {
            let ny = mm.num_settings() as f64;
            let row = mm.effects().iter().flatten().map(|e| e.scale(1.0 / ny)).collect();
            Ok(Process::MultiMeasurement(MultiMeasurement::new(mm.dim(), vec![row])?))
        }
        Process::Instrument(mi) => {
            let nz = mi.num_settings() as f64;
            let row = mi.branches().iter().flatten().map(|o| o.scale(1.0 / nz)).collect();
            Ok(Process::Instrument(MultiInstrument::new(mi.inputs.clone(), mi.outputs.clone(), vec![row])?))
        }
        _ => Err(Error::Precondition("process has no classical setting".into())),
    }
}

/// `Σ_c p(c)|c⟩⟨c| ⊗ ρ_c` for a single-setting source.
pub fn dephase_embed(s: &MultiSource) -> Result<BipartiteState> {
    if s.num_settings() != 1 {
        return Err(Error::Precondition("dephased embedding needs a single-setting source".into()));
    }
    let row = s.setting(0);
    let dc = row.len();
    let terms: Vec<HermitianOperator> = row
        .iter()
        .enumerate()
        .map(|(c, b)| HermitianOperator::basis_projector(dc, c).kron(&b.subnormalized()))
        .collect();
    BipartiteState::new(dc, s.dim(), sum(&terms)?)
}

/// Views any process as a multi-instrument (Choi operators on outputs ⊗ inputs).
pub fn to_instrument(p: &Process) -> Result<MultiInstrument> {
    match p {
        Process::MultiSource(ms) => {
            let br = ms
                .branches()
                .iter()
                .map(|row| row.iter().map(SourceBranch::subnormalized).collect())
                .collect();
            MultiInstrument::new(vec![], vec![ms.dim()], br)
        }
        Process::MultiMeasurement(mm) => {
            let d = mm.dim() as f64;
            let br = mm
                .effects()
                .iter()
                .map(|row| row.iter().map(|m| m.transpose().scale(1.0 / d)).collect())
                .collect();
            MultiInstrument::new(vec![mm.dim()], vec![], br)
        }
        Process::Bipartite(b) => MultiInstrument::new(vec![], vec![b.d1, b.d2], vec![vec![b.rho.clone()]]),
        Process::Multipartite(m) => MultiInstrument::new(vec![], m.dims.clone(), vec![vec![m.rho.clone()]]),
        Process::Channel(c) => MultiInstrument::new(vec![c.din], vec![c.dout], vec![vec![c.choi.clone()]]),
        Process::Instrument(mi) => Ok(mi.clone()),
    }
}

/// Labelled factors of an associated state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociatedState {
    pub labels: Vec<String>,
    pub state: MultipartiteStateData,
}

/// Serializable view of a multipartite state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipartiteStateData {
    pub dims: Vec<usize>,
    pub rho: HermitianOperator,
}

impl AssociatedState {
    pub fn multipartite(&self) -> MultipartiteState {
        MultipartiteState { dims: self.state.dims.clone(), rho: self.state.rho.clone() }
    }
}

/// The state `Σ_{cz} (1/|Z|)|z⟩⟨z| ⊗ |c⟩⟨c| ⊗ ρ_{c|z}` with factors ordered
/// settings, outcomes, outputs, inputs; trivial factors are omitted.
pub fn associated_state(p: &Process) -> Result<AssociatedState> {
    let mi = to_instrument(p)?;
    let nz = mi.num_settings();
    let nc = mi.branches().iter().map(Vec::len).max().unwrap_or(1);
    let mut labels = Vec::new();
    let mut dims = Vec::new();
    if nz > 1 {
        labels.push("Z".to_string());
        dims.push(nz);
    }
    if nc > 1 {
        labels.push("C".to_string());
        dims.push(nc);
    }
    for (j, &d) in mi.outputs.iter().enumerate() {
        if d > 1 {
            labels.push(format!("B{}", j + 1));
            dims.push(d);
        }
    }
    for (i, &d) in mi.inputs.iter().enumerate() {
        if d > 1 {
            labels.push(format!("A{}", i + 1));
            dims.push(d);
        }
    }
    let mut terms = Vec::new();
    let mut weights = Vec::new();
    for (z, row) in mi.branches().iter().enumerate() {
        for (c, op) in row.iter().enumerate() {
            let mut t = op.clone();
            if nc > 1 {
                t = HermitianOperator::basis_projector(nc, c).kron(&t);
            }
            if nz > 1 {
                t = HermitianOperator::basis_projector(nz, z).kron(&t);
            }
            terms.push(t);
            weights.push(1.0 / nz as f64);
        }
    }
    let rho = linear_combination(&weights, &terms)?;
    if dims.is_empty() {
        dims.push(1);
        labels.push("trivial".into());
    }
    Ok(AssociatedState { labels, state: MultipartiteStateData { dims, rho } })
}
