//! Finite-sampling estimation of the mean variation error.
//!
//! For each circuit length `m`:
//!
//! 1. draw `N_m` circuits from the gate-set ([`ExperimentSampler`]);
//! 2. run each `K_m` times on the noisy gate-set ([`simulate_counts`]);
//! 3. compute the ideal outcome distribution;
//! 4. take the total variation distance between observed frequencies and the
//!    ideal distribution ([`empirical_delta_d`]) and average over circuits;
//!
//! and repeat over a list of lengths ([`estimate_mve_curve`]).
//!
//! # Randomness
//!
//! There is one master seed. The generator for circuit `index` at length `m`
//! is seeded with a SplitMix64 hash of `(seed, m, mode, index, block)`, where
//! block 0 draws the circuit and block 1 draws its shots. No generator is
//! shared between circuits, so results do not depend on execution order.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::distr::{weighted::WeightedIndex, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{
    amplitude_damping, depolarizing, theta_from_infidelity, unitary_z_error, CliffordGroup, ErrorModel,
};
use crate::error::{invalid, Error, Result};
use crate::exec::try_map_indexed;
use crate::gateset::{circuit_probabilities, GateSet};
use crate::metrics::{self, tv_values, MvePoint, Sampler};
use crate::stats::summarize;

pub use crate::gateset::ExperimentSpec;

/// Circuit family to average over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every `(state, gates, measurement)` combination, uniformly.
    Generic,
    /// Sequences composing to the identity, measured in the basis of the state.
    /// The final inverting gate counts toward `m`.
    SelfInverting,
}

impl Mode {
    fn tag(self) -> u64 {
        match self {
            Mode::Generic => 0x47,
            Mode::SelfInverting => 0x53,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Generic => write!(f, "generic"),
            Mode::SelfInverting => write!(f, "self_inverting"),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the generator for one `(seed, m, mode, index, block)` cell.
pub fn stream_seed(seed: u64, m: usize, mode: Mode, index: u64, block: u64) -> u64 {
    [m as u64, mode.tag(), index, block]
        .iter()
        .fold(splitmix64(seed), |h, &x| splitmix64(h ^ splitmix64(x)))
}

pub fn stream_rng(seed: u64, m: usize, mode: Mode, index: u64, block: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, m, mode, index, block))
}

/// Composition and inverse tables for a gate list that forms a group.
/// `compose(a, b)` is the index of `G_a · G_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateGroup {
    identity: usize,
    inverse: Vec<usize>,
    compose: Vec<Vec<usize>>,
}

impl GateGroup {
    pub fn from_clifford(group: &CliffordGroup) -> Self {
        Self {
            identity: group.identity_index(),
            inverse: group.inverse_table().to_vec(),
            compose: group.composition_table().to_vec(),
        }
    }

    /// Discovers the group structure of the gate list numerically. Products
    /// are matched to gates within `1e-8` relative to the largest entry.
    pub fn from_gateset(gs: &GateSet) -> Result<Self> {
        let gates: Vec<_> = gs.gates().iter().map(|g| g.ptm.matrix()).collect();
        if gates.is_empty() {
            return invalid("self-inverting circuits need a non-empty gate list");
        }
        let scale = gates.iter().map(|g| g.amax()).fold(1.0, f64::max);
        let tol = 1e-8 * scale;
        let find = |m: &nalgebra::DMatrix<f64>| -> Option<usize> {
            let hits: Vec<usize> = gates
                .iter()
                .enumerate()
                .filter(|(_, g)| (m - **g).amax() <= tol)
                .map(|(k, _)| k)
                .collect();
            (hits.len() == 1).then(|| hits[0])
        };
        let d = gates[0].nrows();
        let identity = find(&nalgebra::DMatrix::identity(d, d))
            .ok_or_else(|| Error::InvalidArgument("gate list contains no unique identity element".into()))?;
        let mut compose = Vec::with_capacity(gates.len());
        for a in &gates {
            let row = gates
                .iter()
                .map(|b| find(&(*a * *b)))
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| Error::InvalidArgument("gate list is not closed under composition".into()))?;
            compose.push(row);
        }
        let inverse = compose
            .iter()
            .map(|row| row.iter().position(|&k| k == identity))
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| Error::InvalidArgument("gate list lacks inverses".into()))?;
        Ok(Self { identity, inverse, compose })
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.compose[a][b]
    }

    /// Index of the gate inverting the chronological sequence `gates`.
    pub fn inverse_of_sequence(&self, gates: &[usize]) -> usize {
        let total = gates.iter().fold(self.identity, |acc, &g| self.compose[g][acc]);
        self.inverse[total]
    }

    pub fn len(&self) -> usize {
        self.inverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverse.is_empty()
    }
}

/// A state/measurement pair whose `outcome` occurs with certainty on the
/// empty circuit of the ideal gate-set (the state is an effect of the POVM).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReturnPair {
    pub state: usize,
    pub povm: usize,
    pub outcome: usize,
}

fn return_pairs(ideal: &GateSet) -> Result<Vec<ReturnPair>> {
    let mut pairs = Vec::new();
    for state in 0..ideal.states().len() {
        for povm in 0..ideal.povms().len() {
            let p = circuit_probabilities(ideal, &ExperimentSpec::new(state, vec![], povm))?;
            if let Some(outcome) = p.values.iter().position(|&x| x >= 1.0 - 1e-9) {
                pairs.push(ReturnPair { state, povm, outcome });
            }
        }
    }
    Ok(pairs)
}

/// Draws or enumerates circuits of a given length from an ideal gate-set.
#[derive(Clone, Debug)]
pub struct ExperimentSampler {
    mode: Mode,
    n_states: usize,
    n_gates: usize,
    n_povms: usize,
    group: Option<GateGroup>,
    pairs: Vec<ReturnPair>,
}

impl ExperimentSampler {
    pub fn new(ideal: &GateSet, mode: Mode) -> Result<Self> {
        let (group, pairs) = match mode {
            Mode::Generic => (None, Vec::new()),
            Mode::SelfInverting => {
                let group = GateGroup::from_gateset(ideal)?;
                let pairs = return_pairs(ideal)?;
                if pairs.is_empty() {
                    return invalid("no state is an effect of any measurement");
                }
                (Some(group), pairs)
            }
        };
        Ok(Self {
            mode,
            n_states: ideal.states().len(),
            n_gates: ideal.gates().len(),
            n_povms: ideal.povms().len(),
            group,
            pairs,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn group(&self) -> Option<&GateGroup> {
        self.group.as_ref()
    }

    pub fn return_pairs(&self) -> &[ReturnPair] {
        &self.pairs
    }

    fn check_length(&self, m: usize) -> Result<()> {
        if self.mode == Mode::SelfInverting && m == 0 {
            return invalid("self-inverting circuits need m >= 1 for the inverting gate");
        }
        if self.mode == Mode::Generic && m > 0 && self.n_gates == 0 {
            return invalid("gate-set has no gates");
        }
        Ok(())
    }

    /// Size of the circuit family at length `m`.
    pub fn family_size(&self, m: usize) -> f64 {
        match self.mode {
            Mode::Generic => self.n_states as f64 * (self.n_gates as f64).powi(m as i32) * self.n_povms as f64,
            Mode::SelfInverting => self.pairs.len() as f64 * (self.n_gates as f64).powi(m.saturating_sub(1) as i32),
        }
    }

    fn close(&self, pair: ReturnPair, mut gates: Vec<usize>) -> ExperimentSpec {
        let group = self.group.as_ref().expect("self-inverting sampler has a group");
        gates.push(group.inverse_of_sequence(&gates));
        ExperimentSpec::new(pair.state, gates, pair.povm)
    }

    /// Circuit `index` of the stream `(seed, m, mode)`.
    pub fn sample(&self, m: usize, seed: u64, index: u64) -> Result<ExperimentSpec> {
        self.check_length(m)?;
        let mut rng = stream_rng(seed, m, self.mode, index, 0);
        Ok(match self.mode {
            Mode::Generic => {
                let state = rng.random_range(0..self.n_states);
                let gates = (0..m).map(|_| rng.random_range(0..self.n_gates)).collect();
                let povm = rng.random_range(0..self.n_povms);
                ExperimentSpec::new(state, gates, povm)
            }
            Mode::SelfInverting => {
                let pair = self.pairs[rng.random_range(0..self.pairs.len())];
                let gates = (0..m - 1).map(|_| rng.random_range(0..self.n_gates)).collect();
                self.close(pair, gates)
            }
        })
    }

    /// The `k`-th member of the family in mixed-radix order.
    pub fn enumerate(&self, m: usize, mut k: u64) -> Result<ExperimentSpec> {
        self.check_length(m)?;
        let mut digit = |radix: usize| {
            let d = (k % radix as u64) as usize;
            k /= radix as u64;
            d
        };
        Ok(match self.mode {
            Mode::Generic => {
                let state = digit(self.n_states);
                let povm = digit(self.n_povms);
                let gates = (0..m).map(|_| digit(self.n_gates)).collect();
                ExperimentSpec::new(state, gates, povm)
            }
            Mode::SelfInverting => {
                let pair = self.pairs[digit(self.pairs.len())];
                let gates = (0..m - 1).map(|_| digit(self.n_gates)).collect();
                self.close(pair, gates)
            }
        })
    }

    /// Outcome index that must survive for a self-inverting circuit.
    pub fn survival_outcome(&self, spec: &ExperimentSpec) -> Option<usize> {
        self.pairs.iter().find(|p| p.state == spec.state && p.povm == spec.povm).map(|p| p.outcome)
    }
}

/// One circuit drawn from `(seed, m, mode)` at position `index`.
pub fn sample_experiment(gs: &GateSet, m: usize, mode: Mode, seed: u64, index: u64) -> Result<ExperimentSpec> {
    ExperimentSampler::new(gs, mode)?.sample(m, seed, index)
}

/// Outcome counts of `shots` repetitions of one circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    counts: Vec<u64>,
    shots: u64,
}

impl ShotResult {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let shots: u64 = counts.iter().sum();
        if shots == 0 {
            return invalid("shot result has no shots");
        }
        Ok(Self { counts, shots })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }
}

/// Multinomial draw of `shots` outcomes from the noisy circuit distribution.
pub fn simulate_counts(noisy: &GateSet, spec: &ExperimentSpec, shots: u64, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return invalid("shots must be at least 1");
    }
    let probs = circuit_probabilities(noisy, spec)?;
    if probs.is_violation() {
        return Err(Error::State(format!("circuit distribution is invalid: {:?}", probs.values)));
    }
    // Per-shot categorical draws keep counts continuous in the probabilities:
    // gauge-equivalent gate-sets, whose probabilities differ only by rounding,
    // observe the same counts.
    let sampler = WeightedIndex::new(&probs.values)
        .map_err(|e| Error::State(format!("circuit distribution is invalid: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.values.len()];
    for _ in 0..shots {
        counts[sampler.sample(&mut rng)] += 1;
    }
    ShotResult::new(counts)
}

/// Plug-in estimate of the per-circuit error: TV distance between observed
/// frequencies and the ideal distribution. Biased upward by
/// `O(√(outcomes / shots))`.
pub fn empirical_delta_d(ideal: &GateSet, spec: &ExperimentSpec, result: &ShotResult) -> Result<f64> {
    let probs = circuit_probabilities(ideal, spec)?;
    if probs.values.len() != result.counts.len() {
        return invalid(format!(
            "{} counts for a {}-outcome measurement",
            result.counts.len(),
            probs.values.len()
        ));
    }
    tv_values(&result.frequencies(), &probs.values)
}

/// Repetitions per circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    /// Exact probabilities, no shot noise.
    Exact,
    Count(u64),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(k) => s.serialize_u64(*k),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("shots must be positive or \"exact\"")),
            Raw::Count(k) => Ok(Shots::Count(k)),
            Raw::Word(w) if w == "exact" => Ok(Shots::Exact),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a shot count or \"exact\", got \"{w}\""))),
        }
    }
}

/// Error-model descriptor in configuration documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ErrorModelSpec {
    Depolarizing { r: f64 },
    /// Either `theta` directly or the infidelity `r` it should produce.
    UnitaryZ {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
    },
    AmplitudeDamping { gamma: f64 },
}

impl ErrorModelSpec {
    pub fn build(&self) -> Result<ErrorModel> {
        match *self {
            ErrorModelSpec::Depolarizing { r } => depolarizing(r),
            ErrorModelSpec::UnitaryZ { theta: Some(t), r: None } => unitary_z_error(t),
            ErrorModelSpec::UnitaryZ { theta: None, r: Some(r) } => unitary_z_error(theta_from_infidelity(r)?),
            ErrorModelSpec::UnitaryZ { .. } => invalid("unitary_z needs exactly one of theta or r"),
            ErrorModelSpec::AmplitudeDamping { gamma } => amplitude_damping(gamma),
        }
    }
}

/// Protocol configuration; echoed into every [`MveCurve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub ms: Vec<usize>,
    pub n_circuits: usize,
    pub shots: Shots,
    pub mode: Mode,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_model: Option<ErrorModelSpec>,
}

impl CurveConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MveCurve {
    pub points: Vec<MvePoint>,
    pub config: CurveConfig,
}

impl MveCurve {
    pub fn ms(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

/// Estimates the MVE at every length in `config.ms`. Points come back sorted
/// by `m` with duplicates removed.
pub fn estimate_mve_curve(ideal: &GateSet, noisy: &GateSet, config: &CurveConfig) -> Result<MveCurve> {
    if config.n_circuits == 0 {
        return invalid("n_circuits must be positive");
    }
    if config.ms.is_empty() {
        return invalid("no circuit lengths given");
    }
    let mut ms = config.ms.clone();
    ms.sort_unstable();
    ms.dedup();
    metrics::check_compatible(ideal, noisy)?;
    let sampler = ExperimentSampler::new(ideal, config.mode)?;
    let points = ms
        .iter()
        .map(|&m| match config.shots {
            Shots::Exact => metrics::mve_with_sampler(
                ideal,
                noisy,
                &sampler,
                m,
                &Sampler::MonteCarlo { n_circuits: config.n_circuits, seed: config.seed },
            ),
            Shots::Count(k) => {
                let values = try_map_indexed(config.n_circuits, |i| {
                    let spec = sampler.sample(m, config.seed, i as u64)?;
                    let counts = simulate_counts(noisy, &spec, k, stream_seed(config.seed, m, config.mode, i as u64, 1))?;
                    empirical_delta_d(ideal, &spec, &counts)
                })?;
                let s = summarize(&values);
                Ok(MvePoint {
                    m,
                    mean: s.mean,
                    std: s.standard_error(),
                    n_circuits: config.n_circuits,
                    mode: config.mode,
                    exact_probabilities: false,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MveCurve { points, config: CurveConfig { ms, ..config.clone() } })
}

/// Hoeffding sample size `⌈ln(2/δ) / (2ε²)⌉` for estimating the mean of a
/// `[0, 1]`-valued variable to within `ε` with failure probability `δ`.
/// Independent of the number of qubits.
pub fn hoeffding_sample_size(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon = {epsilon} outside (0, 1)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta = {delta} outside (0, 1)"));
    }
    Ok(((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// Sums counts over the blocks of `partition`, which must cover every
/// outcome exactly once.
pub fn coarse_grain(result: &ShotResult, partition: &[Vec<usize>]) -> Result<ShotResult> {
    let n = result.counts.len();
    let mut seen = vec![false; n];
    for block in partition {
        if block.is_empty() {
            return invalid("empty block in partition");
        }
        for &k in block {
            if k >= n {
                return invalid(format!("outcome {k} out of range ({n} outcomes)"));
            }
            if std::mem::replace(&mut seen[k], true) {
                return invalid(format!("outcome {k} appears in more than one block"));
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return invalid(format!("outcome {k} is not covered by the partition"));
    }
    let counts = partition.iter().map(|b| b.iter().map(|&k| result.counts[k]).sum()).collect();
    ShotResult::new(counts)
}

/// Coarse-grains a probability vector with the same partition convention.
pub fn coarse_grain_probabilities(probs: &[f64], partition: &[Vec<usize>]) -> Vec<f64> {
    partition.iter().map(|b| b.iter().map(|&k| probs[k]).sum()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `y = slope·m + intercept`.
    Linear,
    /// `y = prefactor·m^exponent`, fitted on log-log axes.
    PowerLaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ScalingFit {
    Linear { slope: f64, intercept: f64, residual: f64 },
    PowerLaw { prefactor: f64, exponent: f64, residual: f64 },
}

impl ScalingFit {
    /// Growth exponent: the fitted one for power laws, 1 for lines.
    pub fn exponent(&self) -> f64 {
        match *self {
            ScalingFit::Linear { .. } => 1.0,
            ScalingFit::PowerLaw { exponent, .. } => exponent,
        }
    }

    /// Sum of squared residuals in the fitted coordinates.
    pub fn residual(&self) -> f64 {
        match *self {
            ScalingFit::Linear { residual, .. } | ScalingFit::PowerLaw { residual, .. } => residual,
        }
    }

    pub fn slope(&self) -> Option<f64> {
        match *self {
            ScalingFit::Linear { slope, .. } => Some(slope),
            ScalingFit::PowerLaw { .. } => None,
        }
    }
}

fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae are equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    Ok((slope, intercept, residual))
}

/// Least-squares fit of mean versus `m`.
pub fn fit_scaling(points: &[MvePoint], model: FitModel) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    let x: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean).collect();
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::Fit("all means are zero".into()));
    }
    match model {
        FitModel::Linear => {
            let (slope, intercept, residual) = least_squares(&x, &y)?;
            Ok(ScalingFit::Linear { slope, intercept, residual })
        }
        FitModel::PowerLaw => {
            if x.iter().zip(&y).any(|(a, b)| *a <= 0.0 || *b <= 0.0) {
                return Err(Error::Fit("power-law fit needs positive m and mean".into()));
            }
            let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
            let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
            let (exponent, log_prefactor, residual) = least_squares(&lx, &ly)?;
            Ok(ScalingFit::PowerLaw { prefactor: log_prefactor.exp(), exponent, residual })
        }
    }
}

/// Lookup from a gate label to its index.
pub fn gate_index(gs: &GateSet) -> HashMap<&str, usize> {
    gs.gates().iter().enumerate().map(|(k, g)| (g.label.as_str(), k)).collect()
}
