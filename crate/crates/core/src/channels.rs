//! Error channels, standard gates and the single-qubit Clifford group.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gateset::{amplitude_damping_ptm, Gate, GateSet, Povm, State};
use crate::pl::{ptm_from_unitary, PlVector, Ptm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Depolarizing,
    UnitaryZ,
    AmplitudeDamping,
    Custom,
}

/// A fixed single-qubit error channel applied after every gate.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel {
    kind: ErrorKind,
    /// `r`, `θ` or `γ` depending on the kind; NaN for custom channels.
    parameter: f64,
    ptm: Ptm,
}

impl ErrorModel {
    pub fn kind(&self) -> ErrorKind {
        self.kind
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn ptm(&self) -> &Ptm {
        &self.ptm
    }

    pub fn custom(ptm: Ptm) -> Self {
        Self { kind: ErrorKind::Custom, parameter: f64::NAN, ptm }
    }

    /// The identity channel on `n` qubits.
    pub fn none(n_qubits: usize) -> Self {
        Self::custom(Ptm::identity(n_qubits))
    }
}

/// `ρ ↦ (1 - 2r) ρ + r Tr[ρ] I`, transfer matrix `diag(1, 1-2r, 1-2r, 1-2r)`.
pub fn depolarizing(r: f64) -> Result<ErrorModel> {
    if !(0.0..=0.5).contains(&r) {
        return invalid(format!("depolarizing rate {r} outside [0, 1/2]"));
    }
    let p = 1.0 - 2.0 * r;
    let ptm = Ptm::new(1, DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[1.0, p, p, p])))?;
    Ok(ErrorModel { kind: ErrorKind::Depolarizing, parameter: r, ptm })
}

/// Rotation angle whose Z-conjugation error has average infidelity `r`:
/// `θ = arccos √(1 - 3r/2)`.
pub fn theta_from_infidelity(r: f64) -> Result<f64> {
    if !(0.0..=2.0 / 3.0).contains(&r) {
        return invalid(format!("infidelity {r} outside [0, 2/3]"));
    }
    Ok((1.0 - 1.5 * r).sqrt().acos())
}

/// Conjugation by `e^{-iθZ}`: rotates the Bloch XY-plane by `2θ`.
pub fn unitary_z_error(theta: f64) -> Result<ErrorModel> {
    if !theta.is_finite() {
        return invalid("rotation angle must be finite");
    }
    let ptm = ptm_from_unitary(&rz(theta))?;
    Ok(ErrorModel { kind: ErrorKind::UnitaryZ, parameter: theta, ptm })
}

/// Amplitude damping towards `|0⟩` with strength `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<ErrorModel> {
    Ok(ErrorModel { kind: ErrorKind::AmplitudeDamping, parameter: gamma, ptm: amplitude_damping_ptm(gamma, 1.0)? })
}

/// Replaces every gate `G` by `E·G`; states and measurements are untouched.
pub fn apply_error_model(gs: &GateSet, em: &ErrorModel) -> Result<GateSet> {
    if em.ptm.n_qubits() != gs.n_qubits() {
        return invalid(format!(
            "{}-qubit error model applied to {}-qubit gate-set",
            em.ptm.n_qubits(),
            gs.n_qubits()
        ));
    }
    gs.map_gates(|g| em.ptm.dot(g))
}

/// Average gate fidelity of `a` against a unitary target:
/// `F = (Tr[Vᵀ A] + d) / (d² + d)` with `d = 2^n`.
pub fn avg_gate_fidelity(a: &Ptm, target: &Ptm) -> Result<f64> {
    if a.n_qubits() != target.n_qubits() {
        return invalid("fidelity between transfer matrices of different sizes");
    }
    if !target.is_orthogonal(1e-10) {
        return invalid("target is not a unitary channel (transfer matrix not orthogonal)");
    }
    let d = (1u64 << a.n_qubits()) as f64;
    let overlap = target.matrix().component_mul(a.matrix()).sum();
    Ok((overlap + d) / (d * d + d))
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn hadamard() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]) * c(FRAC_1_SQRT_2)
}

pub fn phase_s() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), C64::new(0.0, 1.0)])
}

/// `e^{-iθZ}`.
pub fn rz(theta: f64) -> DMatrix<C64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[C64::from_polar(1.0, -theta), c(0.0), c(0.0), C64::from_polar(1.0, theta)],
    )
}

/// `e^{-iθ n·σ}` for a unit axis `n`.
pub fn axis_rotation(theta: f64, axis: [f64; 3]) -> DMatrix<C64> {
    let (s, co) = theta.sin_cos();
    let [x, y, z] = axis;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(co, -s * z),
            C64::new(-s * y, -s * x),
            C64::new(s * y, -s * x),
            C64::new(co, s * z),
        ],
    )
}

type SignedPermutation = [[i8; 4]; 4];

fn to_signed(ptm: &Ptm) -> SignedPermutation {
    let mut out = [[0i8; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = ptm.matrix()[(i, j)].round() as i8;
        }
    }
    out
}

fn signed_product(a: &SignedPermutation, b: &SignedPermutation) -> SignedPermutation {
    let mut out = [[0i8; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn signed_to_ptm(m: &SignedPermutation) -> Ptm {
    Ptm::new(1, DMatrix::from_fn(4, 4, |i, j| m[i][j] as f64)).expect("4x4")
}

const IDENTITY: SignedPermutation = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

/// The 24 single-qubit Clifford channels as signed-permutation transfer
/// matrices, with exact composition and inverse tables.
///
/// Ordering: breadth-first over words in `{H, S}` starting from the
/// identity; within one word length, elements are sorted lexicographically
/// by their row-major integer entries. Index 0 is the identity.
/// `compose(a, b)` is the index of `A_a · A_b` (apply `b`, then `a`).
#[derive(Clone, Debug)]
pub struct CliffordGroup {
    elements: Vec<Ptm>,
    signed: Vec<SignedPermutation>,
    inverse_table: Vec<usize>,
    composition_table: Vec<Vec<usize>>,
}

impl CliffordGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Ptm] {
        &self.elements
    }

    pub fn element(&self, index: usize) -> &Ptm {
        &self.elements[index]
    }

    /// Integer entries of element `index`.
    pub fn signed_matrix(&self, index: usize) -> &[[i8; 4]; 4] {
        &self.signed[index]
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    pub fn inverse(&self, index: usize) -> usize {
        self.inverse_table[index]
    }

    pub fn compose(&self, a: usize, b: usize) -> usize {
        self.composition_table[a][b]
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inverse_table
    }

    pub fn composition_table(&self) -> &[Vec<usize>] {
        &self.composition_table
    }
}

/// Closure of `{H, S}` under composition.
pub fn clifford_group_1q() -> CliffordGroup {
    let generators = [
        to_signed(&ptm_from_unitary(&hadamard()).expect("unitary")),
        to_signed(&ptm_from_unitary(&phase_s()).expect("unitary")),
    ];
    let mut signed = vec![IDENTITY];
    let mut index: HashMap<SignedPermutation, usize> = HashMap::from([(IDENTITY, 0)]);
    let mut frontier = vec![IDENTITY];
    while !frontier.is_empty() {
        let mut layer: Vec<SignedPermutation> = Vec::new();
        for elem in &frontier {
            for g in &generators {
                let next = signed_product(g, elem);
                if !index.contains_key(&next) && !layer.contains(&next) {
                    layer.push(next);
                }
            }
        }
        layer.sort();
        for m in &layer {
            index.insert(*m, signed.len());
            signed.push(*m);
        }
        frontier = layer;
    }
    let composition_table: Vec<Vec<usize>> = signed
        .iter()
        .map(|a| signed.iter().map(|b| index[&signed_product(a, b)]).collect())
        .collect();
    let inverse_table = composition_table
        .iter()
        .map(|row| row.iter().position(|&k| k == 0).expect("group element has an inverse"))
        .collect();
    CliffordGroup { elements: signed.iter().map(signed_to_ptm).collect(), signed, inverse_table, composition_table }
}

/// `{|0⟩⟨0|, Cl_1, Z measurement}` with gates labelled `C0`..`C23` in group order.
pub fn clifford_gateset(group: &CliffordGroup) -> Result<GateSet> {
    let state = State { label: "zero".into(), vector: PlVector::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])? };
    let gates = group
        .elements()
        .iter()
        .enumerate()
        .map(|(k, ptm)| Gate { label: format!("C{k}"), ptm: ptm.clone() })
        .collect();
    GateSet::new(1, vec![state], gates, vec![Povm::computational("Z", 1)?])
}
