//! Dense complex linear algebra for qubit-register operators.
//!
//! Storage is row-major. Tensor factor 0 is the most significant bit of a
//! basis index, so `kron(a, b)` puts `a` on the leading qubits.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for structural checks (Hermiticity, idempotence, unitarity).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for spectral assertions.
pub const SPECTRAL_TOL: f64 = 1e-8;

const DEFAULT_DIM_CAP: usize = 1 << 14;

/// Largest row or column count a tensor product may produce.
///
/// Defaults to 2^14 and can be overridden with the `NDQV_DIM_CAP` environment
/// variable. The value is read once per process.
pub fn dim_cap() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("NDQV_DIM_CAP")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
            .unwrap_or(DEFAULT_DIM_CAP)
    })
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Size(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = r(1.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Size(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Square matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            assert_eq!(row.len(), m, "ragged matrix literal");
            data.extend_from_slice(row);
        }
        Matrix { rows: n, cols: m, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(rows * cols, data.len());
        Matrix { rows, cols, data: data.iter().map(|&x| r(x)).collect() }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// `|u><v|`
    pub fn outer(u: &StateVector, v: &StateVector) -> Self {
        let mut m = Self::zeros(u.dim(), v.dim());
        for (i, a) in u.amplitudes().iter().enumerate() {
            for (j, b) in v.amplitudes().iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn kron(&self, other: &Matrix) -> Result<Matrix> {
        self.kron_capped(other, dim_cap())
    }

    pub fn kron_capped(&self, other: &Matrix, cap: usize) -> Result<Matrix> {
        let rows = self.rows.checked_mul(other.rows);
        let cols = self.cols.checked_mul(other.cols);
        let (rows, cols) = match (rows, cols) {
            (Some(r), Some(c)) if r <= cap && c <= cap => (r, c),
            _ => {
                return Err(Error::Size(format!(
                    "kron of {}x{} and {}x{} exceeds dimension cap {cap}",
                    self.rows, self.cols, other.rows, other.cols
                )))
            }
        };
        let mut out = Matrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    let row = (i * other.rows + k) * cols + j * other.cols;
                    for l in 0..other.cols {
                        out.data[row + l] = a * other[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Matrix {
        self.scale(r(s))
    }

    /// Entrywise max-abs norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_max`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        let zero = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == zero {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector shape mismatch");
        let amps = (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v.amplitudes()).map(|(a, b)| a * b).sum())
            .collect();
        StateVector { amps }
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Matrix {
        (self + &self.dagger()).scale_real(0.5)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Hermitian and idempotent within `tol` (entrywise).
    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_square() && self.is_hermitian(tol) && self.matmul(self).max_abs_diff(self) <= tol
    }

    /// `‖A†A − I‖_max ≤ tol`
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.dagger().matmul(self).max_abs_diff(&Matrix::identity(self.rows)) <= tol
    }

    /// The block `(I ⊗ <0…0|) A (I ⊗ |0…0>)` when the trailing `ancillas`
    /// qubits are an ancilla register.
    pub fn ancilla_zero_block(&self, ancillas: usize) -> Matrix {
        let a = 1usize << ancillas;
        assert!(self.rows.is_multiple_of(a) && self.cols.is_multiple_of(a));
        let (n, m) = (self.rows / a, self.cols / a);
        let mut out = Matrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                out[(i, j)] = self[(i * a, j * a)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Result<Matrix> {
    let mut acc = Matrix::identity(1);
    for f in factors {
        acc = acc.kron(f)?;
    }
    Ok(acc)
}

/// Pure state in a finite-dimensional Hilbert space.
///
/// Normalization is not enforced by the type: unnormalized vectors appear as
/// intermediate results of Kraus operators and are labelled as such by callers.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.amps.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
        write!(f, "StateVector[{}]", parts.join(", "))
    }
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Size("empty state vector".into()));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("amplitudes must be finite".into()));
        }
        Ok(StateVector { amps })
    }

    pub fn from_real(amps: &[f64]) -> Self {
        StateVector { amps: amps.iter().map(|&x| r(x)).collect() }
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector { amps: vec![C64::new(0.0, 0.0); dim] }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[index] = r(1.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(self.scale(r(1.0 / n)))
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn scale(&self, s: C64) -> StateVector {
        StateVector { amps: self.amps.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim());
        StateVector { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim());
        StateVector { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a - b).collect() }
    }

    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        let dim = self.dim() * other.dim();
        if dim > dim_cap() {
            return Err(Error::Size(format!("state dimension {dim} exceeds cap {}", dim_cap())));
        }
        let mut amps = Vec::with_capacity(dim);
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { amps })
    }

    /// `self ⊗ |0…0>` on `ancillas` extra qubits.
    pub fn with_ancillas(&self, ancillas: usize) -> Result<StateVector> {
        self.kron(&StateVector::basis(1 << ancillas, 0))
    }

    /// Amplitudes whose trailing `ancillas` bits are all zero.
    pub fn ancilla_zero_component(&self, ancillas: usize) -> StateVector {
        let a = 1usize << ancillas;
        StateVector { amps: self.amps.iter().step_by(a).copied().collect() }
    }

    /// `|self><self|`
    pub fn projector(&self) -> Matrix {
        Matrix::outer(self, self)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Multiplies by a global phase so the first amplitude with magnitude
    /// above `tol` is real and positive.
    pub fn canonical_phase(&self, tol: f64) -> StateVector {
        match self.amps.iter().find(|z| z.norm() > tol) {
            Some(z) => self.scale(z.conj() / z.norm()),
            None => self.clone(),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Matrix);

impl DensityMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Size(format!("density matrix must be square, got {}x{}", m.rows, m.cols)));
        }
        if !m.is_hermitian(STRUCTURAL_TOL) {
            return Err(Error::Contract("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
            return Err(Error::Contract(format!("density matrix trace is {tr}, expected 1")));
        }
        let eig = hermitian_eigs(&m)?;
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -SPECTRAL_TOL {
            return Err(Error::Contract(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(m))
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        DensityMatrix(psi.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(Matrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `<psi|rho|psi>`
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        psi.inner(&self.0.apply(psi)).re
    }
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Full spectrum of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Deterministic for a fixed input: the sweep order is fixed, ties in the
/// sorted spectrum keep diagonal order, and each eigenvector is phased so its
/// largest component is real and positive.
pub fn hermitian_eigs(a: &Matrix) -> Result<EigenResult> {
    hermitian_eigs_with_tol(a, STRUCTURAL_TOL)
}

pub fn hermitian_eigs_with_tol(a: &Matrix, herm_tol: f64) -> Result<EigenResult> {
    if !a.is_square() || a.rows == 0 {
        return Err(Error::Size(format!(
            "eigendecomposition needs a non-empty square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let defect = a.hermiticity_defect();
    if defect > herm_tol {
        return Err(Error::Contract(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let n = a.rows;
    // Work on the exact Hermitian part so round-off asymmetry cannot accumulate.
    let mut m = a.hermitian_part().data;
    let mut v = Matrix::identity(n).data;
    let zero = C64::new(0.0, 0.0);

    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = f64::EPSILON * frob.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag <= target * 1e-3 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let jpp = r(cs);
                let jpq = r(sn);
                let jqp = phase.conj() * (-sn);
                let jqq = phase.conj() * cs;

                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp * jpp + akq * jqp;
                    m[k * n + q] = akp * jpq + akq * jqq;
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * jpp + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * jqq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    m[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                m[p * n + q] = zero;
                m[q * n + p] = zero;
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].re.total_cmp(&m[i * n + i].re).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| m[i * n + i].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| {
            let amps: Vec<C64> = (0..n).map(|k| v[k * n + col]).collect();
            let peak = amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sv = StateVector { amps };
            sv.canonical_phase(peak * (1.0 - 1e-9))
        })
        .collect();
    Ok(EigenResult { eigenvalues, eigenvectors })
}

/// Orthonormal basis of the orthogonal complement of `psi` (unit vector),
/// obtained by Gram–Schmidt over the computational basis in index order.
pub fn orthocomplement_basis(psi: &StateVector) -> Vec<StateVector> {
    let dim = psi.dim();
    let mut basis: Vec<StateVector> = vec![psi.clone()];
    for idx in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = StateVector::basis(dim, idx);
        for b in &basis {
            let ov = b.inner(&e);
            e = e.sub(&b.scale(ov));
        }
        // Second pass for numerical orthogonality.
        for b in &basis {
            let ov = b.inner(&e);
            e = e.sub(&b.scale(ov));
        }
        if e.norm() > 1e-8 {
            basis.push(e.normalized().expect("nonzero by check"));
        }
    }
    basis.remove(0);
    basis
}

pub mod gates {
    //! Single-qubit constant matrices.
    use super::{c, r, Matrix};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn identity() -> Matrix {
        Matrix::identity(2)
    }

    pub fn pauli_x() -> Matrix {
        Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Matrix {
        Matrix::from_rows(&[&[r(0.0), c(0.0, -1.0)], &[c(0.0, 1.0), r(0.0)]])
    }

    pub fn pauli_z() -> Matrix {
        Matrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn hadamard() -> Matrix {
        Matrix::from_real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
    }

    /// diag(1, i)
    pub fn phase() -> Matrix {
        Matrix::diag(&[r(1.0), c(0.0, 1.0)])
    }

    /// `|0><0|`
    pub fn proj0() -> Matrix {
        Matrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])
    }

    /// `|1><1|`
    pub fn proj1() -> Matrix {
        Matrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0])
    }
}
