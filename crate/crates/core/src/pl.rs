//! Pauli-Liouville representation engine.
//!
//! Operators on `n` qubits are expanded in the normalized Pauli basis
//! `P = ⊗_k σ_k / √2`, ordered lexicographically as `(I, X, Y, Z)^{⊗n}` with
//! the first qubit as the most significant digit. In that basis
//!
//! * a Hermitian operator `ρ` becomes the real vector `|ρ⟩⟩_i = Tr[ρ P_i]`,
//! * a measurement operator `M` becomes the dual `⟨⟨M|_i = Tr[P_i M]*`,
//! * a linear map `G` becomes the transfer matrix `A_ij = Tr[P_i G(P_j)]`,
//!
//! and `⟨⟨M|A|ρ⟩⟩ = Tr[M† G(ρ)]`.
//!
//! Choi matrices use the convention `J(G) = Σ_ab |a⟩⟨b| ⊗ G(|a⟩⟨b|)` (input
//! factor first), so `Tr J = 2^n` for trace-preserving maps and the identity
//! channel has the single nonzero eigenvalue `2^n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Hermiticity tolerance for [`HermMat`] construction.
pub const TOL_HERM: f64 = 1e-12;
/// Trace-preservation tolerance for Kraus sets.
pub const TOL_TP: f64 = 1e-10;
/// Largest imaginary residue dropped when converting to real coordinates.
pub const TOL_IMAG: f64 = 1e-12;

fn pl_dim(n_qubits: usize) -> usize {
    1 << (2 * n_qubits)
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return invalid(format!("dimension {dim} is not a power of two >= 2"));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn qubits_for_pl_dim(len: usize) -> Result<usize> {
    let n = qubits_for_dim(len)?;
    if n % 2 != 0 {
        return invalid(format!("length {len} is not a power of four"));
    }
    Ok(n / 2)
}

/// `Tr[a b]` without forming the product.
pub(crate) fn trace_of_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

fn real_part_checked(z: C64, scale: f64, what: &str) -> Result<f64> {
    if z.im.abs() > TOL_IMAG * scale.max(1.0) {
        return invalid(format!("{what} has imaginary residue {:e}", z.im));
    }
    Ok(z.re)
}

fn max_abs(mat: &DMatrix<C64>) -> f64 {
    mat.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A Hermitian `2^n × 2^n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMat {
    n_qubits: usize,
    mat: DMatrix<C64>,
}

impl HermMat {
    /// Checks squareness, power-of-two dimension and Hermiticity within
    /// [`TOL_HERM`].
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() {
            return invalid(format!("matrix is {}x{}, not square", mat.nrows(), mat.ncols()));
        }
        let n_qubits = qubits_for_dim(mat.nrows())?;
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix has non-finite entries");
        }
        let scale = max_abs(&mat).max(1.0);
        for i in 0..mat.nrows() {
            for j in i..mat.ncols() {
                let dev = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                if dev > TOL_HERM * scale {
                    return invalid(format!(
                        "matrix is not Hermitian: entry ({i},{j}) deviates by {dev:e}"
                    ));
                }
            }
        }
        Ok(Self { n_qubits, mat })
    }

    pub(crate) fn new_unchecked(n_qubits: usize, mat: DMatrix<C64>) -> Self {
        Self { n_qubits, mat }
    }

    /// Real diagonal matrix, e.g. a classical mixture in the computational basis.
    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::new(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector(psi: &DVector<C64>) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigenvalues (ascending) with matching eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, c| eig.eigenvectors[(i, order[c])]);
        (values, vectors)
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|x| x.abs()).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }
}

macro_rules! pl_coords {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            n_qubits: usize,
            coords: DVector<f64>,
        }

        impl $name {
            pub fn new(n_qubits: usize, coords: DVector<f64>) -> Result<Self> {
                if n_qubits < 1 {
                    return invalid("qubit count must be at least 1");
                }
                if coords.len() != pl_dim(n_qubits) {
                    return invalid(format!(
                        "expected {} coordinates for {} qubit(s), got {}",
                        pl_dim(n_qubits),
                        n_qubits,
                        coords.len()
                    ));
                }
                if coords.iter().any(|x| !x.is_finite()) {
                    return invalid("coordinates must be finite");
                }
                Ok(Self { n_qubits, coords })
            }

            /// Infers the qubit count from the slice length.
            pub fn from_slice(coords: &[f64]) -> Result<Self> {
                let n = qubits_for_pl_dim(coords.len())?;
                Self::new(n, DVector::from_column_slice(coords))
            }

            pub fn n_qubits(&self) -> usize {
                self.n_qubits
            }

            pub fn coords(&self) -> &DVector<f64> {
                &self.coords
            }

            pub fn as_slice(&self) -> &[f64] {
                self.coords.as_slice()
            }

            /// Operator `Σ_i c_i P_i`.
            pub fn to_operator(&self) -> HermMat {
                operator_from_coords(self.n_qubits, &self.coords)
            }
        }
    };
}

pl_coords!(PlVector, "PL coordinates `Tr[ρ P_i]` of a Hermitian operator.");
pl_coords!(PlDual, "PL coordinates `Tr[P_i M]*` of a dual functional (a measurement operator).");

impl PlDual {
    /// Euclidean pairing `⟨⟨self|v⟩⟩`, equal to `Tr[M† ρ]`.
    pub fn pair(&self, v: &PlVector) -> Result<f64> {
        if self.n_qubits != v.n_qubits {
            return invalid(format!(
                "pairing {}-qubit dual with {}-qubit vector",
                self.n_qubits, v.n_qubits
            ));
        }
        Ok(self.coords.dot(&v.coords))
    }
}

/// Real transfer matrix of a linear map on `n`-qubit operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptm {
    n_qubits: usize,
    mat: DMatrix<f64>,
}

impl Ptm {
    pub fn new(n_qubits: usize, mat: DMatrix<f64>) -> Result<Self> {
        if n_qubits < 1 {
            return invalid("qubit count must be at least 1");
        }
        let d = pl_dim(n_qubits);
        if mat.nrows() != d || mat.ncols() != d {
            return invalid(format!(
                "expected a {d}x{d} transfer matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            ));
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return invalid("transfer matrix has non-finite entries");
        }
        Ok(Self { n_qubits, mat })
    }

    /// Infers the qubit count from the matrix size.
    pub fn from_matrix(mat: DMatrix<f64>) -> Result<Self> {
        let n = qubits_for_pl_dim(mat.nrows())?;
        Self::new(n, mat)
    }

    pub fn from_row_slice(n_qubits: usize, entries: &[f64]) -> Result<Self> {
        let d = pl_dim(n_qubits);
        if entries.len() != d * d {
            return invalid(format!("expected {} entries, got {}", d * d, entries.len()));
        }
        Self::new(n_qubits, DMatrix::from_row_slice(d, d, entries))
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = pl_dim(n_qubits);
        Self { n_qubits, mat: DMatrix::identity(d, d) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Side length `4^n`.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    fn check_same(&self, other: &Ptm) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return invalid(format!(
                "mixing {}-qubit and {}-qubit transfer matrices",
                self.n_qubits, other.n_qubits
            ));
        }
        Ok(())
    }

    /// Matrix product `self · rhs`: apply `rhs` first, then `self`.
    pub fn dot(&self, rhs: &Ptm) -> Result<Ptm> {
        self.check_same(rhs)?;
        Ok(Ptm { n_qubits: self.n_qubits, mat: &self.mat * &rhs.mat })
    }

    pub fn sub(&self, rhs: &Ptm) -> Result<Ptm> {
        self.check_same(rhs)?;
        Ok(Ptm { n_qubits: self.n_qubits, mat: &self.mat - &rhs.mat })
    }

    pub fn transpose(&self) -> Ptm {
        Ptm { n_qubits: self.n_qubits, mat: self.mat.transpose() }
    }

    /// Transfer matrix of `self ⊗ rhs` (self on the leading qubits).
    pub fn kron(&self, rhs: &Ptm) -> Ptm {
        Ptm { n_qubits: self.n_qubits + rhs.n_qubits, mat: self.mat.kronecker(&rhs.mat) }
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    /// First row equals `(1, 0, …, 0)` within `tol`.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_deviation() <= tol
    }

    pub fn trace_preservation_deviation(&self) -> f64 {
        (0..self.dim())
            .map(|j| (self.mat[(0, j)] - if j == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// `A Aᵀ = I` within `tol`, elementwise.
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let prod = &self.mat * self.mat.transpose();
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        (prod - id).iter().all(|x| x.abs() <= tol)
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &Ptm) -> f64 {
        self.mat.iter().zip(other.mat.iter()).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// A list of Kraus operators `{K_k}` acting as `ρ ↦ Σ_k K_k ρ K_k†`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    n_qubits: usize,
    operators: Vec<DMatrix<C64>>,
}

impl KrausSet {
    pub fn new(operators: Vec<DMatrix<C64>>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))?;
        let dim = first.nrows();
        let n_qubits = qubits_for_dim(dim)?;
        for (k, op) in operators.iter().enumerate() {
            if op.nrows() != dim || op.ncols() != dim {
                return invalid(format!(
                    "Kraus operator {k} is {}x{}, expected {dim}x{dim}",
                    op.nrows(),
                    op.ncols()
                ));
            }
        }
        Ok(Self { n_qubits, operators })
    }

    /// Like [`KrausSet::new`] but rejects sets with `Σ K†K ≠ I` beyond [`TOL_TP`].
    pub fn trace_preserving(operators: Vec<DMatrix<C64>>) -> Result<Self> {
        let set = Self::new(operators)?;
        let dev = set.completeness_deviation();
        if dev > TOL_TP {
            return invalid(format!("Kraus set is not trace preserving (deviation {dev:e})"));
        }
        Ok(set)
    }

    /// Unitary channel `ρ ↦ U ρ U†`.
    pub fn unitary(u: DMatrix<C64>) -> Result<Self> {
        Self::trace_preserving(vec![u])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn operators(&self) -> &[DMatrix<C64>] {
        &self.operators
    }

    /// Largest entry of `|Σ K†K − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for k in &self.operators {
            sum += k.adjoint() * k;
        }
        sum -= DMatrix::<C64>::identity(d, d);
        max_abs(&sum)
    }

    /// Applies the channel to a full matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for k in &self.operators {
            out += k * rho * k.adjoint();
        }
        out
    }
}

/// Single-qubit Pauli matrix `σ_k` (unnormalized), `k ∈ {0,1,2,3}` for I, X, Y, Z.
pub fn sigma(k: usize) -> DMatrix<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match k {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -i, i, o],
        3 => [l, o, o, -l],
        _ => panic!("Pauli index {k} out of range"),
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

pub(crate) fn basis_matrices(n_qubits: usize) -> Vec<DMatrix<C64>> {
    let single: Vec<DMatrix<C64>> =
        (0..4).map(|k| sigma(k) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).collect();
    let mut basis = vec![DMatrix::from_element(1, 1, C64::new(1.0, 0.0))];
    for _ in 0..n_qubits {
        basis = basis
            .iter()
            .flat_map(|b| single.iter().map(move |s| b.kronecker(s)))
            .collect();
    }
    basis
}

/// Normalized Pauli basis on `n` qubits, `4^n` matrices in lexicographic
/// `(I, X, Y, Z)^{⊗n}` order.
pub fn pauli_basis(n_qubits: usize) -> Result<Vec<HermMat>> {
    if n_qubits < 1 {
        return invalid("qubit count must be at least 1");
    }
    Ok(basis_matrices(n_qubits).into_iter().map(|m| HermMat::new_unchecked(n_qubits, m)).collect())
}

fn operator_from_coords(n_qubits: usize, coords: &DVector<f64>) -> HermMat {
    let d = 1 << n_qubits;
    let mut mat = DMatrix::<C64>::zeros(d, d);
    for (c, p) in coords.iter().zip(basis_matrices(n_qubits)) {
        if *c != 0.0 {
            mat += p * C64::new(*c, 0.0);
        }
    }
    HermMat::new_unchecked(n_qubits, mat)
}

fn coords_of(op: &HermMat, what: &str) -> Result<DVector<f64>> {
    let scale = op.max_abs();
    let basis = basis_matrices(op.n_qubits);
    let mut coords = DVector::zeros(basis.len());
    for (i, p) in basis.iter().enumerate() {
        coords[i] = real_part_checked(trace_of_product(op.matrix(), p), scale, what)?;
    }
    Ok(coords)
}

/// `|ρ⟩⟩_i = Tr[ρ P_i]`.
pub fn to_pl_state(rho: &HermMat) -> Result<PlVector> {
    Ok(PlVector { n_qubits: rho.n_qubits, coords: coords_of(rho, "state coordinate")? })
}

/// `⟨⟨M|_i = Tr[P_i M]*`.
pub fn to_pl_dual(m: &HermMat) -> Result<PlDual> {
    Ok(PlDual { n_qubits: m.n_qubits, coords: coords_of(m, "dual coordinate")? })
}

/// Inverse of [`to_pl_state`]: `Σ_i v_i P_i`.
pub fn from_pl(v: &PlVector) -> HermMat {
    v.to_operator()
}

/// `A_ij = Tr[P_i Σ_k K_k P_j K_k†]`.
pub fn ptm_from_kraus(kraus: &KrausSet) -> Result<Ptm> {
    let basis = basis_matrices(kraus.n_qubits);
    let d = basis.len();
    let mut mat = DMatrix::zeros(d, d);
    for (j, pj) in basis.iter().enumerate() {
        let image = kraus.apply(pj);
        let scale = max_abs(&image);
        for (i, pi) in basis.iter().enumerate() {
            mat[(i, j)] = real_part_checked(trace_of_product(pi, &image), scale, "transfer matrix entry")?;
        }
    }
    Ptm::new(kraus.n_qubits, mat)
}

/// Transfer matrix of the unitary channel `ρ ↦ U ρ U†`.
pub fn ptm_from_unitary(u: &DMatrix<C64>) -> Result<Ptm> {
    ptm_from_kraus(&KrausSet::unitary(u.clone())?)
}

/// `A · v`.
pub fn apply_ptm(a: &Ptm, v: &PlVector) -> Result<PlVector> {
    if a.n_qubits != v.n_qubits {
        return invalid(format!(
            "applying {}-qubit transfer matrix to {}-qubit vector",
            a.n_qubits, v.n_qubits
        ));
    }
    Ok(PlVector { n_qubits: v.n_qubits, coords: &a.mat * &v.coords })
}

/// Chronological composition `G_m ⋯ G_1` of `[G_1, …, G_m]`; the empty list
/// yields the identity on `n_qubits`.
pub fn compose_ptms(n_qubits: usize, ptms: &[Ptm]) -> Result<Ptm> {
    let mut acc = Ptm::identity(n_qubits);
    for (k, g) in ptms.iter().enumerate() {
        if g.n_qubits != n_qubits {
            return invalid(format!("transfer matrix {k} acts on {} qubit(s), expected {n_qubits}", g.n_qubits));
        }
        acc = Ptm { n_qubits, mat: &g.mat * &acc.mat };
    }
    Ok(acc)
}

/// Choi matrix `J = Σ_ij A_ij P_jᵀ ⊗ P_i`, normalized so `Tr J = 2^n` for
/// trace-preserving maps. Always Hermitian since `A` is real.
pub fn choi_from_ptm(a: &Ptm) -> HermMat {
    let basis = basis_matrices(a.n_qubits);
    let d = 1 << (2 * a.n_qubits);
    let mut mat = DMatrix::<C64>::zeros(d, d);
    for (i, pi) in basis.iter().enumerate() {
        for (j, pj) in basis.iter().enumerate() {
            let coef = a.mat[(i, j)];
            if coef != 0.0 {
                mat += pj.transpose().kronecker(pi) * C64::new(coef, 0.0);
            }
        }
    }
    // Symmetrize away rounding so downstream eigen-solvers see an exactly Hermitian matrix.
    let herm = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
    HermMat::new_unchecked(2 * a.n_qubits, herm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn herm(rows: usize, entries: &[C64]) -> HermMat {
        HermMat::new(DMatrix::from_row_slice(rows, rows, entries)).unwrap()
    }

    fn amplitude_damping_kraus(gamma: f64) -> KrausSet {
        let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
        let k1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
        KrausSet::trace_preserving(vec![k0, k1]).unwrap()
    }

    fn hadamard() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]) * c(FRAC_1_SQRT_2)
    }

    #[test]
    fn single_qubit_basis_is_normalized_paulis() {
        let basis = pauli_basis(1).unwrap();
        assert_eq!(basis.len(), 4);
        for (k, p) in basis.iter().enumerate() {
            let expected = sigma(k) * c(FRAC_1_SQRT_2);
            assert_eq!(p.matrix(), &expected);
        }
        let x = basis[1].matrix();
        assert_abs_diff_eq!(trace_of_product(x, x).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_qubit_basis_is_orthonormal() {
        let basis = pauli_basis(2).unwrap();
        assert_eq!(basis.len(), 16);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = trace_of_product(&a.matrix().adjoint(), b.matrix());
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(expected)).norm() < 1e-12, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn zero_qubits_rejected() {
        assert!(matches!(pauli_basis(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn state_coordinates() {
        let zero = HermMat::from_real_diagonal(&[1.0, 0.0]).unwrap();
        let v = to_pl_state(&zero).unwrap();
        for (got, want) in v.as_slice().iter().zip([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }

        let mixed = HermMat::from_real_diagonal(&[0.5, 0.5]).unwrap();
        let v = to_pl_state(&mixed).unwrap();
        assert_abs_diff_eq!(v.as_slice()[0], FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(v.as_slice()[1..].iter().all(|x| x.abs() < 1e-15));

        let rho = herm(2, &[c(0.5), c(0.15), c(0.15), c(0.5)]);
        let v = to_pl_state(&rho).unwrap();
        let want = [FRAC_1_SQRT_2, 0.3 * FRAC_1_SQRT_2, 0.0, 0.0];
        for (got, want) in v.as_slice().iter().zip(want) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(HermMat::new(m), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dual_coordinates_and_pairing() {
        let z = HermMat::new(sigma(3)).unwrap();
        let dz = to_pl_dual(&z).unwrap();
        for (got, want) in dz.as_slice().iter().zip([0.0, 0.0, 0.0, 2f64.sqrt()]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        let id = HermMat::new(sigma(0)).unwrap();
        let di = to_pl_dual(&id).unwrap();
        assert_abs_diff_eq!(di.as_slice()[0], 2f64.sqrt(), epsilon = 1e-15);

        let zero = to_pl_state(&HermMat::from_real_diagonal(&[1.0, 0.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(dz.pair(&zero).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn from_pl_inverts_state_map() {
        let v = PlVector::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let rho = from_pl(&v);
        let want = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!((rho.matrix() - want).iter().all(|z| z.norm() < 1e-15));

        let v = PlVector::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, 0.9 * FRAC_1_SQRT_2]).unwrap();
        let rho = from_pl(&v);
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix()[(1, 1)].re, 0.05, epsilon = 1e-15);
        assert!(rho.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn identity_kraus_gives_identity_ptm() {
        let ptm = ptm_from_kraus(&KrausSet::unitary(DMatrix::identity(2, 2)).unwrap()).unwrap();
        assert!(ptm.max_abs_diff(&Ptm::identity(1)) < 1e-15);
    }

    #[test]
    fn amplitude_damping_kraus_matches_closed_form() {
        let ptm = ptm_from_kraus(&amplitude_damping_kraus(0.1)).unwrap();
        let s = 0.9f64.sqrt();
        #[rustfmt::skip]
        let want = Ptm::from_row_slice(1, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, s,   0.0, 0.0,
            0.0, 0.0, s,   0.0,
            0.1, 0.0, 0.0, 0.9,
        ]).unwrap();
        assert!(ptm.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn hadamard_ptm_swaps_x_and_z() {
        let ptm = ptm_from_unitary(&hadamard()).unwrap();
        // Oracle: conjugate every Pauli directly and read off coefficients.
        let h = hadamard();
        for j in 1..4 {
            let image = &h * sigma(j) * h.adjoint();
            for i in 1..4 {
                let coef = trace_of_product(&sigma(i), &image).re / 2.0;
                assert_abs_diff_eq!(ptm.matrix()[(i, j)], coef, epsilon = 1e-12);
            }
        }
        #[rustfmt::skip]
        let want = Ptm::from_row_slice(1, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, -1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        ]).unwrap();
        assert!(ptm.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn kraus_dimension_mismatch() {
        let err = KrausSet::new(vec![DMatrix::identity(2, 2), DMatrix::identity(4, 4)]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn apply_amplitude_damping() {
        let s = 0.8;
        #[rustfmt::skip]
        let a = Ptm::from_row_slice(1, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, s,   0.0, 0.0,
            0.0, 0.0, s,   0.0,
            0.36, 0.0, 0.0, 0.64,
        ]).unwrap();
        let zero = PlVector::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let out = apply_ptm(&a, &zero).unwrap();
        for (got, want) in out.as_slice().iter().zip(zero.as_slice()) {
            assert_abs_diff_eq!(*got, *want, epsilon = 1e-15);
        }
        let mixed = PlVector::from_slice(&[FRAC_1_SQRT_2, 0.0, 0.0, 0.0]).unwrap();
        let out = apply_ptm(&a, &mixed).unwrap();
        assert_abs_diff_eq!(out.as_slice()[3], 0.36 * FRAC_1_SQRT_2, epsilon = 1e-15);

        let two = PlVector::new(2, DVector::zeros(16)).unwrap();
        assert!(apply_ptm(&a, &two).is_err());
        assert_eq!(apply_ptm(&Ptm::identity(2), &two).unwrap(), two);
    }

    #[test]
    fn composition_of_self_inverse_gates() {
        assert_eq!(compose_ptms(1, &[]).unwrap(), Ptm::identity(1));
        let h = ptm_from_unitary(&hadamard()).unwrap();
        assert!(compose_ptms(1, &[h.clone(), h.clone()]).unwrap().max_abs_diff(&Ptm::identity(1)) < 1e-12);

        let x90 = (DMatrix::identity(2, 2) - sigma(1) * C64::new(0.0, 1.0)) * c(FRAC_1_SQRT_2);
        let x90 = ptm_from_unitary(&x90).unwrap();
        let four = vec![x90.clone(); 4];
        assert!(compose_ptms(1, &four).unwrap().max_abs_diff(&Ptm::identity(1)) < 1e-12);
        assert!(compose_ptms(2, &four).is_err());
    }

    #[test]
    fn choi_of_identity_and_full_depolarizer() {
        let ev = choi_from_ptm(&Ptm::identity(1)).eigenvalues();
        let want = [0.0, 0.0, 0.0, 2.0];
        for (got, want) in ev.iter().zip(want) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = 1.0;
        let dep = Ptm::new(1, m).unwrap();
        let j = choi_from_ptm(&dep);
        assert_abs_diff_eq!(j.trace(), 2.0, epsilon = 1e-12);
        for e in j.eigenvalues() {
            assert_abs_diff_eq!(e, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn amplitude_damping_choi_is_psd_on_grid() {
        for k in 0..=20 {
            let gamma = k as f64 / 20.0;
            let ptm = ptm_from_kraus(&amplitude_damping_kraus(gamma)).unwrap();
            let j = choi_from_ptm(&ptm);
            assert_abs_diff_eq!(j.trace(), 2.0, epsilon = 1e-12);
            assert!(j.eigenvalues()[0] > -1e-10, "gamma = {gamma}");
        }
    }
}
