//! Distances between outcome distributions and channels, and the mean
//! variation error (MVE) of a noisy gate-set relative to an ideal one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::try_map_indexed;
use crate::gateset::{circuit_probabilities, classify_probabilities, ExperimentSpec, GateSet, TOL_PROB};
use crate::pl::{basis_matrices, trace_of_product, HermMat, Ptm};
use crate::protocol::{ExperimentSampler, Mode};
use crate::stats::summarize;

/// Default cap on the number of circuits enumerated exhaustively.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

/// A probability distribution over a finite outcome set.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDist {
    probs: Vec<f64>,
}

impl OutcomeDist {
    /// Accepts entries down to `-1e-9` (clamped) and a sum within `1e-9` of 1.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("empty distribution");
        }
        let p = classify_probabilities(probs);
        if p.is_violation() {
            return invalid(format!("not a probability distribution (tolerance {TOL_PROB}): {:?}", p.values));
        }
        Ok(Self { probs: p.values })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub(crate) fn tv_values(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return invalid(format!("distributions over {} and {} outcomes", p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `½ Σ_i |p_i − q_i|`.
pub fn tv_distance(p: &OutcomeDist, q: &OutcomeDist) -> Result<f64> {
    tv_values(&p.probs, &q.probs)
}

/// Ideal and noisy gate-sets must index the same circuits and outcomes.
pub fn check_compatible(ideal: &GateSet, noisy: &GateSet) -> Result<()> {
    if ideal.n_qubits() != noisy.n_qubits() {
        return invalid(format!("{}-qubit ideal vs {}-qubit noisy gate-set", ideal.n_qubits(), noisy.n_qubits()));
    }
    let shape = |gs: &GateSet| {
        (
            gs.states().len(),
            gs.gates().len(),
            gs.povms().iter().map(|p| p.n_outcomes()).collect::<Vec<_>>(),
        )
    };
    if shape(ideal) != shape(noisy) {
        return invalid("ideal and noisy gate-sets have different element counts or outcome counts");
    }
    Ok(())
}

/// Per-circuit error `δd = ½ Σ_i |p̃_i − p_i|` between the noisy and ideal
/// outcome distributions of one circuit.
pub fn delta_d(ideal: &GateSet, noisy: &GateSet, spec: &ExperimentSpec) -> Result<f64> {
    let p = circuit_probabilities(ideal, spec)?;
    let q = circuit_probabilities(noisy, spec)?;
    tv_values(&q.values, &p.values)
}

/// How circuits are chosen for the average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sampler {
    /// Every circuit of the family, refused above `budget` circuits.
    Enumeration { budget: u64 },
    /// `n_circuits` uniform draws from the `(seed, m, mode)` stream.
    MonteCarlo { n_circuits: usize, seed: u64 },
}

impl Sampler {
    pub fn enumeration() -> Self {
        Sampler::Enumeration { budget: DEFAULT_ENUMERATION_BUDGET }
    }
}

/// MVE at one circuit length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MvePoint {
    pub m: usize,
    pub mean: f64,
    /// Standard error of `mean`.
    pub std: f64,
    pub n_circuits: usize,
    pub mode: Mode,
    /// Whether per-circuit errors used exact probabilities (no shot noise).
    pub exact_probabilities: bool,
}

/// Mean of `δd` over the circuits of length `m` selected by `sampler`.
pub fn mve(ideal: &GateSet, noisy: &GateSet, m: usize, sampler: &Sampler, mode: Mode) -> Result<MvePoint> {
    check_compatible(ideal, noisy)?;
    let circuits = ExperimentSampler::new(ideal, mode)?;
    mve_with_sampler(ideal, noisy, &circuits, m, sampler)
}

/// [`mve`] with a prepared circuit sampler; skips the compatibility check.
pub fn mve_with_sampler(
    ideal: &GateSet,
    noisy: &GateSet,
    circuits: &ExperimentSampler,
    m: usize,
    sampler: &Sampler,
) -> Result<MvePoint> {
    let (values, exhaustive) = match *sampler {
        Sampler::Enumeration { budget } => {
            let count = circuits.family_size(m);
            if count.is_nan() || count > budget as f64 {
                return Err(Error::ResourceLimit { requested: count, budget });
            }
            let values = try_map_indexed(count as usize, |k| {
                delta_d(ideal, noisy, &circuits.enumerate(m, k as u64)?)
            })?;
            (values, true)
        }
        Sampler::MonteCarlo { n_circuits, seed } => {
            if n_circuits == 0 {
                return invalid("n_circuits must be positive");
            }
            let values = try_map_indexed(n_circuits, |i| delta_d(ideal, noisy, &circuits.sample(m, seed, i as u64)?))?;
            (values, false)
        }
    };
    let s = summarize(&values);
    Ok(MvePoint {
        m,
        mean: s.mean,
        std: if exhaustive { s.population_error() } else { s.standard_error() },
        n_circuits: values.len(),
        mode: circuits.mode(),
        exact_probabilities: true,
    })
}

/// Noisy probability of the outcome that occurs with certainty in the ideal
/// circuit (the return probability of a self-inverting sequence).
pub fn survival_probability(ideal: &GateSet, noisy: &GateSet, spec: &ExperimentSpec) -> Result<f64> {
    let p = circuit_probabilities(ideal, spec)?;
    let k = p
        .values
        .iter()
        .position(|&x| x >= 1.0 - TOL_PROB)
        .ok_or_else(|| Error::InvalidArgument("ideal circuit has no certain outcome".into()))?;
    Ok(circuit_probabilities(noisy, spec)?.values[k])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamondOptions {
    /// Random starting inputs, in addition to the maximally entangled state.
    pub starts: usize,
    pub max_iter: usize,
    /// Stop a run once an iteration improves the value by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        Self { starts: 32, max_iter: 2000, tol: 1e-15, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiamondDistance {
    /// `½ ‖A − B‖⋄`.
    pub value: f64,
    /// Optimal input on system ⊗ ancilla.
    pub input: DVector<C64>,
}

/// Half the diamond norm of `A − B` for single-qubit channels, by alternating
/// maximization over pure inputs on system ⊗ ancilla. Each run is monotone;
/// the best of several seeded starts is returned.
pub fn diamond_distance(a: &Ptm, b: &Ptm) -> Result<DiamondDistance> {
    diamond_distance_with(a, b, &DiamondOptions::default())
}

pub fn diamond_distance_with(a: &Ptm, b: &Ptm, opts: &DiamondOptions) -> Result<DiamondDistance> {
    if a.n_qubits() != 1 || b.n_qubits() != 1 {
        return Err(Error::UnsupportedDimension(format!(
            "diamond distance is implemented for single-qubit channels, got {} and {} qubits",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    let extended = a.sub(b)?.kron(&Ptm::identity(1)).into_matrix();
    let extended_t = extended.transpose();
    let basis = basis_matrices(2);
    let coords = |h: &DMatrix<C64>| DVector::from_iterator(16, basis.iter().map(|p| trace_of_product(p, h).re));
    let operator = |c: &DVector<f64>| {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        for (ci, p) in c.iter().zip(&basis) {
            m += p * C64::new(*ci, 0.0);
        }
        HermMat::new_unchecked(2, m)
    };
    // Value of ψ and the Helstrom operator W = Σ sign(λ) vv† of Δ(ψψ†).
    let evaluate = |psi: &DVector<C64>| {
        let rho = psi * psi.adjoint();
        let delta = operator(&(&extended * coords(&rho)));
        let (vals, vecs) = delta.eigen();
        let mut w = DMatrix::<C64>::zeros(4, 4);
        for (k, l) in vals.iter().enumerate() {
            let v = vecs.column(k);
            w += v * v.adjoint() * C64::new(l.signum() * (*l != 0.0) as u8 as f64, 0.0);
        }
        (0.5 * vals.iter().map(|l| l.abs()).sum::<f64>(), w)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DVector::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
    let mut best: Option<DiamondDistance> = None;
    for start in 0..=opts.starts {
        let mut psi = if start == 0 {
            bell.clone()
        } else {
            let v = DVector::from_fn(4, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            let n = v.norm();
            v / C64::new(n, 0.0)
        };
        let (mut value, mut w) = evaluate(&psi);
        for _ in 0..opts.max_iter {
            let x = operator(&(&extended_t * coords(&w)));
            let (_, vecs) = x.eigen();
            let next = vecs.column(3).into_owned();
            let (v2, w2) = evaluate(&next);
            if v2 <= value + opts.tol {
                if v2 > value {
                    value = v2;
                    psi = next;
                }
                break;
            }
            value = v2;
            w = w2;
            psi = next;
        }
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(DiamondDistance { value, input: psi });
        }
    }
    Ok(best.expect("at least one start"))
}
