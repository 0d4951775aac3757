//! Gate-sets, gauge transformations and canonical-constraint validation.
//!
//! A [`GateSet`] holds PL vectors for states, transfer matrices for gates and
//! two-or-more-outcome POVMs whose effects are stored as PL duals. A gauge
//! transformation `B` acts as
//!
//! ```text
//! |ρ⟩⟩ → B|ρ⟩⟩,   ⟨⟨E| → ⟨⟨E|B⁻¹,   G → B G B⁻¹
//! ```
//!
//! which leaves every circuit probability `⟨⟨E|G_m⋯G_1|ρ⟩⟩` unchanged.
//!
//! Measurements in the amplitude-damping example are given by the traceless
//! part `M` of the "+" effect, so `E_± = I/2 ± M`. With that reading the
//! dual `(0, 0, 0, ε₂/√2)` is a Z readout with signal-to-noise `ε₂`.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pl::{choi_from_ptm, ptm_from_unitary, to_pl_dual, HermMat, PlDual, PlVector, Ptm};

/// Negative probabilities above `-TOL_PROB` are treated as rounding noise.
pub const TOL_PROB: f64 = 1e-9;
/// Eigenvalue slack for validation, relative to the matrix norm.
pub const TOL_EIG: f64 = 1e-10;
/// Trace and trace-preservation slack for validation.
pub const TOL_TRACE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub label: String,
    pub vector: PlVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub label: String,
    pub ptm: Ptm,
}

/// A measurement with one PL dual per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    label: String,
    effects: Vec<PlDual>,
}

impl Povm {
    pub fn new(label: impl Into<String>, effects: Vec<PlDual>) -> Result<Self> {
        let label = label.into();
        if effects.len() < 2 {
            return invalid(format!("POVM '{label}' needs at least two outcomes"));
        }
        let n = effects[0].n_qubits();
        if effects.iter().any(|e| e.n_qubits() != n) {
            return invalid(format!("POVM '{label}' mixes qubit counts"));
        }
        Ok(Self { label, effects })
    }

    /// Two-outcome POVM `E_± = (I ± O)/2` for an observable with spectrum in `[-1, 1]`.
    pub fn from_observable(label: impl Into<String>, observable: &HermMat) -> Result<Self> {
        let d = observable.dim();
        let id = DMatrix::<C64>::identity(d, d);
        let half = C64::new(0.5, 0.0);
        let plus = HermMat::new((&id + observable.matrix()) * half)?;
        let minus = HermMat::new((&id - observable.matrix()) * half)?;
        Self::new(label, vec![to_pl_dual(&plus)?, to_pl_dual(&minus)?])
    }

    /// Two-outcome POVM `E_± = I/2 ± M` from the dual of the traceless part `M`
    /// of the "+" effect.
    pub fn from_traceless_effect(label: impl Into<String>, m: &PlDual) -> Result<Self> {
        let n = m.n_qubits();
        let half_identity = 0.5 * 2f64.powf(n as f64 / 2.0);
        let mut plus = m.coords().clone();
        let mut minus = -m.coords().clone();
        plus[0] += half_identity - m.coords()[0];
        minus[0] += half_identity + m.coords()[0];
        Self::new(label, vec![PlDual::new(n, plus)?, PlDual::new(n, minus)?])
    }

    /// Computational-basis measurement on `n` qubits.
    pub fn computational(label: impl Into<String>, n_qubits: usize) -> Result<Self> {
        let d = 1 << n_qubits;
        let effects = (0..d)
            .map(|k| {
                let diag: Vec<f64> = (0..d).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
                to_pl_dual(&HermMat::from_real_diagonal(&diag)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, effects)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn effects(&self) -> &[PlDual] {
        &self.effects
    }

    pub fn n_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.effects[0].n_qubits()
    }
}

/// One circuit: a state, gates in chronological order, and a measurement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub state: usize,
    pub gates: Vec<usize>,
    pub povm: usize,
}

impl ExperimentSpec {
    pub fn new(state: usize, gates: Vec<usize>, povm: usize) -> Self {
        Self { state, gates, povm }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSet {
    n_qubits: usize,
    states: Vec<State>,
    gates: Vec<Gate>,
    povms: Vec<Povm>,
}

fn check_unique<'a>(kind: &str, labels: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return invalid(format!("duplicate {kind} label '{l}'"));
        }
    }
    Ok(())
}

impl GateSet {
    pub fn new(n_qubits: usize, states: Vec<State>, gates: Vec<Gate>, povms: Vec<Povm>) -> Result<Self> {
        if n_qubits < 1 {
            return invalid("qubit count must be at least 1");
        }
        if states.is_empty() || povms.is_empty() {
            return invalid("a gate-set needs at least one state and one measurement");
        }
        for s in &states {
            if s.vector.n_qubits() != n_qubits {
                return invalid(format!("state '{}' acts on {} qubit(s), expected {n_qubits}", s.label, s.vector.n_qubits()));
            }
        }
        for g in &gates {
            if g.ptm.n_qubits() != n_qubits {
                return invalid(format!("gate '{}' acts on {} qubit(s), expected {n_qubits}", g.label, g.ptm.n_qubits()));
            }
        }
        for p in &povms {
            if p.n_qubits() != n_qubits {
                return invalid(format!("POVM '{}' acts on {} qubit(s), expected {n_qubits}", p.label, p.n_qubits()));
            }
        }
        check_unique("state", states.iter().map(|s| s.label.as_str()))?;
        check_unique("gate", gates.iter().map(|g| g.label.as_str()))?;
        check_unique("POVM", povms.iter().map(|p| p.label.as_str()))?;
        Ok(Self { n_qubits, states, gates, povms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    /// Same states and POVMs with every gate replaced by `f(gate)`.
    pub fn map_gates(&self, mut f: impl FnMut(&Ptm) -> Result<Ptm>) -> Result<GateSet> {
        let gates = self
            .gates
            .iter()
            .map(|g| Ok(Gate { label: g.label.clone(), ptm: f(&g.ptm)? }))
            .collect::<Result<Vec<_>>>()?;
        GateSet::new(self.n_qubits, self.states.clone(), gates, self.povms.clone())
    }

    /// `|S| · |G|^m · |M|`, as a float since it overflows quickly.
    pub fn experiment_count(&self, m: usize) -> f64 {
        self.states.len() as f64 * (self.gates.len() as f64).powi(m as i32) * self.povms.len() as f64
    }

    pub fn check_spec(&self, spec: &ExperimentSpec) -> Result<()> {
        if spec.state >= self.states.len() {
            return invalid(format!("state index {} out of range ({} states)", spec.state, self.states.len()));
        }
        if spec.povm >= self.povms.len() {
            return invalid(format!("POVM index {} out of range ({} POVMs)", spec.povm, self.povms.len()));
        }
        if let Some(&g) = spec.gates.iter().find(|&&g| g >= self.gates.len()) {
            return invalid(format!("gate index {g} out of range ({} gates)", self.gates.len()));
        }
        Ok(())
    }

    /// `G_m ⋯ G_1 |ρ⟩⟩` for the circuit's state and gates.
    pub fn evolve(&self, spec: &ExperimentSpec) -> Result<DVector<f64>> {
        self.check_spec(spec)?;
        let mut v = self.states[spec.state].vector.coords().clone();
        for &g in &spec.gates {
            v = self.gates[g].ptm.matrix() * v;
        }
        Ok(v)
    }

    pub fn to_document(&self) -> GateSetDocument {
        GateSetDocument {
            n_qubits: self.n_qubits,
            states: self
                .states
                .iter()
                .map(|s| StateDocument { label: s.label.clone(), coords: s.vector.as_slice().to_vec() })
                .collect(),
            gates: self
                .gates
                .iter()
                .map(|g| {
                    let m = g.ptm.matrix();
                    GateDocument {
                        label: g.label.clone(),
                        matrix: (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect(),
                    }
                })
                .collect(),
            povms: self
                .povms
                .iter()
                .map(|p| PovmDocument {
                    label: p.label.clone(),
                    effects: p.effects.iter().map(|e| e.as_slice().to_vec()).collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &GateSetDocument) -> Result<Self> {
        let n = doc.n_qubits;
        let label_err = |kind: &str, label: &str, e: Error| Error::InvalidArgument(format!("{kind} '{label}': {e}"));
        let states = doc
            .states
            .iter()
            .map(|s| {
                let vector = PlVector::new(n, DVector::from_column_slice(&s.coords))
                    .map_err(|e| label_err("state", &s.label, e))?;
                Ok(State { label: s.label.clone(), vector })
            })
            .collect::<Result<Vec<_>>>()?;
        let gates = doc
            .gates
            .iter()
            .map(|g| {
                let rows = g.matrix.len();
                if g.matrix.iter().any(|r| r.len() != rows) {
                    return Err(label_err("gate", &g.label, Error::InvalidArgument("matrix is not square".into())));
                }
                let flat: Vec<f64> = g.matrix.iter().flatten().copied().collect();
                let ptm = Ptm::new(n, DMatrix::from_row_slice(rows, rows, &flat))
                    .map_err(|e| label_err("gate", &g.label, e))?;
                Ok(Gate { label: g.label.clone(), ptm })
            })
            .collect::<Result<Vec<_>>>()?;
        let povms = doc
            .povms
            .iter()
            .map(|p| {
                let effects = p
                    .effects
                    .iter()
                    .map(|e| PlDual::new(n, DVector::from_column_slice(e)))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| label_err("POVM", &p.label, e))?;
                Povm::new(p.label.clone(), effects)
            })
            .collect::<Result<Vec<_>>>()?;
        GateSet::new(n, states, gates, povms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("gate-set documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GateSetDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// Plain-text (JSON) form of a gate-set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSetDocument {
    pub n_qubits: usize,
    pub states: Vec<StateDocument>,
    pub gates: Vec<GateDocument>,
    pub povms: Vec<PovmDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub label: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDocument {
    pub label: String,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmDocument {
    pub label: String,
    pub effects: Vec<Vec<f64>>,
}

/// An invertible real matrix acting on a gate-set, with its cached inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    n_qubits: usize,
    b: DMatrix<f64>,
    b_inv: DMatrix<f64>,
    condition_number: f64,
}

impl GaugeTransform {
    pub fn new(n_qubits: usize, b: DMatrix<f64>) -> Result<Self> {
        let d = 1usize << (2 * n_qubits);
        if n_qubits < 1 || b.nrows() != d || b.ncols() != d {
            return invalid(format!("gauge matrix must be {d}x{d}, got {}x{}", b.nrows(), b.ncols()));
        }
        if b.iter().any(|x| !x.is_finite()) {
            return invalid("gauge matrix has non-finite entries");
        }
        let sv = b.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smin <= f64::EPSILON * smax * d as f64 {
            return Err(Error::SingularGauge(format!("smallest singular value {smin:e}")));
        }
        let b_inv = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularGauge("matrix inversion failed".into()))?;
        let residual = (&b * &b_inv - DMatrix::<f64>::identity(d, d)).amax();
        if residual > 1e-10 {
            return Err(Error::SingularGauge(format!("B·B⁻¹ deviates from identity by {residual:e}")));
        }
        Ok(Self { n_qubits, b, b_inv, condition_number: smax / smin })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = 1usize << (2 * n_qubits);
        Self { n_qubits, b: DMatrix::identity(d, d), b_inv: DMatrix::identity(d, d), condition_number: 1.0 }
    }

    /// Trace-preserving affine form `[[1, 0], [x, y]]`.
    pub fn affine_trace_preserving(n_qubits: usize, x: &[f64], y: &DMatrix<f64>) -> Result<Self> {
        let d = 1usize << (2 * n_qubits);
        if x.len() != d - 1 || y.nrows() != d - 1 || y.ncols() != d - 1 {
            return invalid(format!("affine gauge needs x of length {} and a {0}x{0} block", d - 1));
        }
        let mut b = DMatrix::zeros(d, d);
        b[(0, 0)] = 1.0;
        for i in 1..d {
            b[(i, 0)] = x[i - 1];
            for j in 1..d {
                b[(i, j)] = y[(i - 1, j - 1)];
            }
        }
        Self::new(n_qubits, b)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.b_inv
    }

    /// 2-norm condition number `σ_max / σ_min`.
    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// The transform that applies `self` and then `next`, i.e. `B_next · B_self`.
    pub fn then(&self, next: &GaugeTransform) -> Result<GaugeTransform> {
        if self.n_qubits != next.n_qubits {
            return invalid("composing gauge transforms of different sizes");
        }
        GaugeTransform::new(self.n_qubits, &next.b * &self.b)
    }
}

/// `B = diag(1, q, q, q)`, the single-qubit family that commutes with every unitary channel.
pub fn gauge_matrix_q(q: f64) -> Result<GaugeTransform> {
    if q == 0.0 {
        return Err(Error::SingularGauge("q = 0".into()));
    }
    if !q.is_finite() {
        return invalid("q must be finite");
    }
    let b = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, q, q, q]));
    let b_inv = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1.0 / q, 1.0 / q, 1.0 / q]));
    let condition_number = q.abs().max(1.0) / q.abs().min(1.0);
    Ok(GaugeTransform { n_qubits: 1, b, b_inv, condition_number })
}

/// Transforms every element of `gs` by `t`; labels are preserved.
pub fn apply_gauge(gs: &GateSet, t: &GaugeTransform) -> Result<GateSet> {
    if gs.n_qubits != t.n_qubits {
        return invalid(format!(
            "{}-qubit gauge transform applied to {}-qubit gate-set",
            t.n_qubits, gs.n_qubits
        ));
    }
    let n = gs.n_qubits;
    let b_inv_t = t.b_inv.transpose();
    let states = gs
        .states
        .iter()
        .map(|s| Ok(State { label: s.label.clone(), vector: PlVector::new(n, &t.b * s.vector.coords())? }))
        .collect::<Result<Vec<_>>>()?;
    let gates = gs
        .gates
        .iter()
        .map(|g| Ok(Gate { label: g.label.clone(), ptm: Ptm::new(n, &t.b * g.ptm.matrix() * &t.b_inv)? }))
        .collect::<Result<Vec<_>>>()?;
    let povms = gs
        .povms
        .iter()
        .map(|p| {
            let effects = p
                .effects
                .iter()
                .map(|e| PlDual::new(n, &b_inv_t * e.coords()))
                .collect::<Result<Vec<_>>>()?;
            Povm::new(p.label.clone(), effects)
        })
        .collect::<Result<Vec<_>>>()?;
    GateSet::new(n, states, gates, povms)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbabilityStatus {
    /// Nonnegative and normalized within [`TOL_PROB`].
    Valid,
    /// Tiny negative entries were clamped to zero and the vector renormalized.
    Clamped,
    /// Not a distribution; values are returned unchanged.
    Violation { min: f64, sum: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Probabilities {
    pub values: Vec<f64>,
    pub status: ProbabilityStatus,
}

impl Probabilities {
    pub fn is_violation(&self) -> bool {
        matches!(self.status, ProbabilityStatus::Violation { .. })
    }
}

pub(crate) fn classify_probabilities(raw: Vec<f64>) -> Probabilities {
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > TOL_PROB || min <= -TOL_PROB || raw.iter().any(|p| !p.is_finite()) {
        return Probabilities { values: raw, status: ProbabilityStatus::Violation { min, sum } };
    }
    if min >= 0.0 {
        return Probabilities { values: raw, status: ProbabilityStatus::Valid };
    }
    let clamped: Vec<f64> = raw.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    Probabilities { values: clamped.iter().map(|p| p / total).collect(), status: ProbabilityStatus::Clamped }
}

/// `p_i = ⟨⟨E_i| G_m ⋯ G_1 |ρ⟩⟩` for each effect of the circuit's POVM.
pub fn circuit_probabilities(gs: &GateSet, spec: &ExperimentSpec) -> Result<Probabilities> {
    let v = gs.evolve(spec)?;
    let raw = gs.povms[spec.povm].effects.iter().map(|e| e.coords().dot(&v)).collect();
    Ok(classify_probabilities(raw))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    State,
    Gate,
    Povm,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ElementKind::State => "state",
            ElementKind::Gate => "gate",
            ElementKind::Povm => "povm",
        })
    }
}

/// Outcome of the canonical-constraint check for one gate-set element.
///
/// `passed` is `is_density` for states, `is_cptp` for gates and `is_povm`
/// for measurements. `worst_eigenvalue` is the most negative eigenvalue of
/// the density matrix, of the Choi matrix, or of `E` and `I - E` over all
/// effects. `trace_deviation` is `|Tr ρ - 1|`, the distance of the first
/// transfer-matrix row from `(1, 0, …)`, or the largest entry of `Σ E - I`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementRecord {
    pub label: String,
    pub kind: ElementKind,
    pub passed: bool,
    pub worst_eigenvalue: f64,
    pub trace_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: Vec<ElementRecord>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ElementRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn record(&self, kind: ElementKind, label: &str) -> Option<&ElementRecord> {
        self.records.iter().find(|r| r.kind == kind && r.label == label)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            let predicate = match r.kind {
                ElementKind::State => "is_density",
                ElementKind::Gate => "is_cptp",
                ElementKind::Povm => "is_povm",
            };
            writeln!(
                f,
                "{:<5} {:<16} {}={:<5} worst_eigenvalue={:e} trace_deviation={:e}",
                r.kind, r.label, predicate, r.passed, r.worst_eigenvalue, r.trace_deviation
            )?;
        }
        write!(f, "{}", if self.all_passed() { "all elements pass" } else { "canonical constraints violated" })
    }
}

fn eig_slack(m: &HermMat) -> f64 {
    TOL_EIG * m.max_abs().max(1.0)
}

fn validate_state(s: &State) -> ElementRecord {
    let rho = s.vector.to_operator();
    let worst = rho.eigenvalues()[0];
    let trace_dev = (rho.trace() - 1.0).abs();
    ElementRecord {
        label: s.label.clone(),
        kind: ElementKind::State,
        passed: worst >= -eig_slack(&rho) && trace_dev <= TOL_TRACE,
        worst_eigenvalue: worst,
        trace_deviation: trace_dev,
    }
}

fn validate_gate(g: &Gate) -> ElementRecord {
    let choi = choi_from_ptm(&g.ptm);
    let worst = choi.eigenvalues()[0];
    let tp_dev = g.ptm.trace_preservation_deviation();
    ElementRecord {
        label: g.label.clone(),
        kind: ElementKind::Gate,
        passed: worst >= -eig_slack(&choi) && tp_dev <= TOL_TRACE,
        worst_eigenvalue: worst,
        trace_deviation: tp_dev,
    }
}

fn validate_povm(p: &Povm) -> ElementRecord {
    let d = 1usize << p.n_qubits();
    let mut sum = DMatrix::<C64>::zeros(d, d);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for e in &p.effects {
        let op = e.to_operator();
        let ev = op.eigenvalues();
        let low = ev[0];
        let high = 1.0 - ev[ev.len() - 1];
        worst = worst.min(low).min(high);
        ok &= low.min(high) >= -eig_slack(&op);
        sum += op.matrix();
    }
    sum -= DMatrix::<C64>::identity(d, d);
    let dev = sum.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    ElementRecord {
        label: p.label.clone(),
        kind: ElementKind::Povm,
        passed: ok && dev <= TOL_TRACE,
        worst_eigenvalue: worst,
        trace_deviation: dev,
    }
}

/// Checks every element against the canonical constraints: density matrices,
/// CPTP gates and valid POVMs.
pub fn validate_gateset(gs: &GateSet) -> ValidationReport {
    let mut records = Vec::with_capacity(gs.states.len() + gs.gates.len() + gs.povms.len());
    records.extend(gs.states.iter().map(validate_state));
    records.extend(gs.gates.iter().map(validate_gate));
    records.extend(gs.povms.iter().map(validate_povm));
    ValidationReport { records }
}

fn check_range(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&x) {
        return invalid(format!("{name} = {x} outside [{lo}, {hi}]"));
    }
    Ok(())
}

/// Amplitude damping towards a state with Bloch z-component `q`:
/// diagonal `(1, √(1-γ), √(1-γ), 1-γ)` plus `qγ` in the `(Z, I)` entry.
pub fn amplitude_damping_ptm(gamma: f64, q: f64) -> Result<Ptm> {
    check_range("gamma", gamma, 0.0, 1.0)?;
    check_range("q", q, -1.0, 1.0)?;
    let s = (1.0 - gamma).sqrt();
    #[rustfmt::skip]
    let entries = [
        1.0,       0.0, 0.0, 0.0,
        0.0,       s,   0.0, 0.0,
        0.0,       0.0, s,   0.0,
        q * gamma, 0.0, 0.0, 1.0 - gamma,
    ];
    Ptm::from_row_slice(1, &entries)
}

/// Dual `(0, 0, 0, ε₂/√2)`: the traceless part of a Z readout with signal-to-noise `ε₂`.
pub fn readout_dual(eps2: f64) -> PlDual {
    PlDual::new(1, DVector::from_column_slice(&[0.0, 0.0, 0.0, eps2 * FRAC_1_SQRT_2])).expect("fixed size")
}

/// Noisy amplitude-damping gate-set: a Z-polarized state with polarization
/// `eps1`, gates `U·A_γ` for each labelled unitary, and a Z readout with
/// signal-to-noise `eps2`.
pub fn build_theta(eps1: f64, eps2: f64, gamma: f64, unitaries: &[(String, DMatrix<C64>)]) -> Result<GateSet> {
    check_range("eps1", eps1, -1.0, 1.0)?;
    check_range("eps2", eps2, -1.0, 1.0)?;
    check_range("gamma", gamma, 0.0, 1.0)?;
    let damping = amplitude_damping_ptm(gamma, 1.0)?;
    let state = State {
        label: "rho".into(),
        vector: PlVector::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, eps1 * FRAC_1_SQRT_2])?,
    };
    let gates = unitaries
        .iter()
        .map(|(label, u)| Ok(Gate { label: label.clone(), ptm: ptm_from_unitary(u)?.dot(&damping)? }))
        .collect::<Result<Vec<_>>>()?;
    let povm = Povm::from_traceless_effect("M", &readout_dual(eps2))?;
    GateSet::new(1, vec![state], gates, vec![povm])
}

/// The ideal gate-set: pure `|0⟩`, perfect unitaries, perfect Z readout.
pub fn ideal_phi(unitaries: &[(String, DMatrix<C64>)]) -> Result<GateSet> {
    build_theta(1.0, 1.0, 0.0, unitaries)
}

/// Result of [`canonical_q_range`]: the claimed magnitude interval
/// `[|ε₂|, 1]` alongside the one found by scanning `validate_gateset`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QRange {
    pub claimed: (f64, f64),
    /// Smallest and largest scanned `|q|` for which both `±q` pass, if any.
    pub empirical: Option<(f64, f64)>,
    /// Whether every passing `|q|` between the endpoints also passed.
    pub contiguous: bool,
    /// `ε₂ = 0`: the readout carries no information and `q = 0` is singular.
    pub degenerate: bool,
    pub step: f64,
}

/// Scans `|q| ∈ {step, 2·step, …, q_max}` and reports where the gauge-transformed
/// amplitude-damping gate-set satisfies all canonical constraints.
pub fn canonical_q_range(eps1: f64, eps2: f64, gamma: f64, step: f64, q_max: f64) -> Result<QRange> {
    check_range("eps2", eps2, -1.0, 1.0)?;
    if step <= 0.0 || q_max < step {
        return invalid("scan needs 0 < step <= q_max");
    }
    let unitaries = vec![("I".to_string(), DMatrix::identity(2, 2))];
    let theta = build_theta(eps1, eps2, gamma, &unitaries)?;
    let steps = (q_max / step).round() as usize;
    let mut passing = Vec::new();
    for k in 1..=steps {
        let q = k as f64 * step;
        let ok = [q, -q].iter().all(|&qq| {
            gauge_matrix_q(qq)
                .and_then(|t| apply_gauge(&theta, &t))
                .map(|gs| validate_gateset(&gs).all_passed())
                .unwrap_or(false)
        });
        passing.push((k, ok));
    }
    let first = passing.iter().find(|(_, ok)| *ok).map(|(k, _)| *k);
    let last = passing.iter().rev().find(|(_, ok)| *ok).map(|(k, _)| *k);
    let (empirical, contiguous) = match (first, last) {
        (Some(a), Some(b)) => {
            let contiguous = passing.iter().filter(|(k, _)| (a..=b).contains(k)).all(|(_, ok)| *ok);
            (Some((a as f64 * step, b as f64 * step)), contiguous)
        }
        _ => (None, true),
    };
    Ok(QRange { claimed: (eps2.abs(), 1.0), empirical, contiguous, degenerate: eps2 == 0.0, step })
}
