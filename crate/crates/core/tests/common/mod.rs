//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use gaugeset::gateset::{Gate, GateSet, GaugeTransform, Povm, State};
use gaugeset::pl::{pauli_basis, ptm_from_kraus, to_pl_dual, to_pl_state, HermMat, KrausSet, Ptm};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar-ish random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> DMatrix<C64> {
    ginibre(rng, d, d).qr().q()
}

/// Random density matrix of full rank.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> HermMat {
    let g = ginibre(rng, d, d);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let mut rho = rho / tr;
    // Enforce exact Hermiticity after rounding.
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    HermMat::new(rho).unwrap()
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> HermMat {
    let g = ginibre(rng, d, d);
    HermMat::new((&g + g.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

/// Random CPTP channel with `k` Kraus operators, from a random isometry.
pub fn random_kraus<R: Rng>(rng: &mut R, d: usize, k: usize) -> KrausSet {
    let v = ginibre(rng, d * k, d).qr().q();
    let ops = (0..k).map(|i| v.view((i * d, 0), (d, d)).into_owned()).collect();
    KrausSet::trace_preserving(ops).unwrap()
}

/// Random projective measurement in a random basis.
pub fn random_basis_povm<R: Rng>(rng: &mut R, label: &str, n_qubits: usize) -> Povm {
    let d = 1 << n_qubits;
    let u = random_unitary(rng, d);
    let effects = (0..d)
        .map(|k| {
            let v = u.column(k).into_owned();
            to_pl_dual(&HermMat::projector(&v).unwrap()).unwrap()
        })
        .collect();
    Povm::new(label, effects).unwrap()
}

/// Random gate-set with CPTP gates, full-rank states and projective POVMs.
pub fn random_gateset<R: Rng>(rng: &mut R, n_qubits: usize, n_gates: usize) -> GateSet {
    let d = 1 << n_qubits;
    let states = (0..2)
        .map(|k| State { label: format!("rho{k}"), vector: to_pl_state(&random_density(rng, d)).unwrap() })
        .collect();
    let gates = (0..n_gates)
        .map(|k| Gate { label: format!("G{k}"), ptm: ptm_from_kraus(&random_kraus(rng, d, 2)).unwrap() })
        .collect();
    let povms = (0..2).map(|k| random_basis_povm(rng, &format!("M{k}"), n_qubits)).collect();
    GateSet::new(n_qubits, states, gates, povms).unwrap()
}

/// `B = I + c·G/‖G‖₂` for a Gaussian `G`, so `cond(B) ≤ (1 + c)/(1 − c)`.
pub fn well_conditioned_gauge<R: Rng>(rng: &mut R, n_qubits: usize, c: f64) -> GaugeTransform {
    let d = 1 << (2 * n_qubits);
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let norm = g.singular_values().max();
    let b = DMatrix::identity(d, d) + g * (c / norm);
    GaugeTransform::new(n_qubits, b).unwrap()
}

/// Matrix trace norm of a Hermitian matrix via its eigenvalues.
pub fn hermitian_trace_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().map(|x| x.abs()).sum()
}

/// Action of a single-qubit transfer matrix on an arbitrary 2×2 operator,
/// computed from the unnormalized Pauli expansion.
pub fn ptm_action(d: &Ptm, x: &DMatrix<C64>) -> DMatrix<C64> {
    let basis = pauli_basis(1).unwrap();
    let coeffs: Vec<C64> = basis.iter().map(|p| (p.matrix() * x).trace()).collect();
    let mut out = DMatrix::<C64>::zeros(2, 2);
    for (i, pi) in basis.iter().enumerate() {
        let mut c = C64::new(0.0, 0.0);
        for (j, cj) in coeffs.iter().enumerate() {
            c += cj * d.matrix()[(i, j)];
        }
        out += pi.matrix() * c;
    }
    out
}

/// `½‖((A − B) ⊗ id)(ψψ†)‖₁` for the Schmidt-form input
/// `√λ|e₀⟩|0⟩ + √(1−λ)|e₁⟩|1⟩`, `e₀ = (cos θ/2, sin θ/2)`.
pub fn grid_objective(diff: &Ptm, theta: f64, lambda: f64) -> f64 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = [
        DVector::from_vec(vec![C64::new(c, 0.0), C64::new(s, 0.0)]),
        DVector::from_vec(vec![C64::new(-s, 0.0), C64::new(c, 0.0)]),
    ];
    let w = [lambda.sqrt(), (1.0 - lambda).max(0.0).sqrt()];
    let mut out = DMatrix::<C64>::zeros(4, 4);
    for k in 0..2 {
        for l in 0..2 {
            let block = ptm_action(diff, &(&e[k] * e[l].adjoint())) * C64::new(w[k] * w[l], 0.0);
            // system ⊗ ancilla: block (a, b) of the 4×4 output is ⟨a|·|b⟩ on the system,
            // ancilla entry |k⟩⟨l|.
            for a in 0..2 {
                for b in 0..2 {
                    out[(2 * a + k, 2 * b + l)] += block[(a, b)];
                }
            }
        }
    }
    0.5 * hermitian_trace_norm(&out)
}

/// Half diamond distance of two Z-covariant single-qubit channels by grid
/// search over `(θ, λ)` followed by successive zooms around the best cell.
/// Z-covariance removes the azimuthal angle from the search.
pub fn grid_diamond(a: &Ptm, b: &Ptm) -> f64 {
    let diff = a.sub(b).unwrap();
    let n = 101;
    let (mut t_lo, mut t_hi, mut l_lo, mut l_hi) = (0.0, std::f64::consts::PI, 0.0, 1.0);
    let mut best = (0.0, 0.0, 0.0);
    for _ in 0..8 {
        for i in 0..n {
            for j in 0..n {
                let t = t_lo + (t_hi - t_lo) * i as f64 / (n - 1) as f64;
                let l = l_lo + (l_hi - l_lo) * j as f64 / (n - 1) as f64;
                let v = grid_objective(&diff, t, l);
                if v > best.0 {
                    best = (v, t, l);
                }
            }
        }
        let (dt, dl) = (4.0 * (t_hi - t_lo) / (n - 1) as f64, 4.0 * (l_hi - l_lo) / (n - 1) as f64);
        t_lo = (best.1 - dt).max(0.0);
        t_hi = (best.1 + dt).min(std::f64::consts::PI);
        l_lo = (best.2 - dl).max(0.0);
        l_hi = (best.2 + dl).min(1.0);
    }
    best.0
}
