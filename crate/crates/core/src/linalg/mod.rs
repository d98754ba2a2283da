//! Dense complex matrices at qubit scale.
//!
//! Everything here works on small square matrices (2, 4, 8 or 16 rows).
//! Storage is row-major `Complex64`, so the real and imaginary parts of each
//! entry are held explicitly.

mod eig;
mod io;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::tol::TOL;

pub use eig::{eig_hermitian, sqrt_psd, HermEig};
pub use io::{parse_matrix, MatrixFile, MatrixFileError};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitianInput { residual: f64 },
    #[error("matrix has non-positive trace {trace}")]
    ZeroTrace { trace: f64 },
    #[error("not a density matrix: {reason}")]
    NotAState { reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Which tensor factor of a two-qubit operator to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged or non-square input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Row-major flat constructor.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "data length does not match dim²");
        Self { dim, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has wrong length");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// |ψ⟩⟨ψ| for an amplitude vector (not normalized here).
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    /// Matrix unit E_ab.
    pub fn unit(dim: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(a, b)] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Real part of the trace; the imaginary part vanishes for Hermitian input.
    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Hilbert-Schmidt inner product Re tr(A†B).
    pub fn inner(&self, other: &Self) -> f64 {
        self.check_same_dim(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// tr(AB) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        self.check_same_dim(other);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.check_same_dim(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |M - M†|
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// (M + M†)/2
    pub fn hermitize(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// ⟨ψ|M|ψ⟩
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let mpsi = self.apply(psi);
        psi.iter().zip(&mpsi).map(|(a, b)| a.conj() * b).sum()
    }

    /// U M U†
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(
            self.dim, other.dim,
            "dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
    }
}

/// Kronecker product: `(A⊗B)[(i·dB+k),(j·dB+l)] = A[i,j]·B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = CMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two amplitude vectors.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Partial trace of a two-qubit operator, returning the 2×2 operator on the
/// remaining qubit.
pub fn partial_trace(m: &CMatrix, traced: Subsystem) -> CMatrix {
    assert_eq!(m.dim(), 4, "partial_trace expects a two-qubit (4×4) operator");
    let mut out = CMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = ZERO;
            for k in 0..2 {
                acc += match traced {
                    // keep B: sum over A index
                    Subsystem::A => m[(k * 2 + i, k * 2 + j)],
                    // keep A: sum over B index
                    Subsystem::B => m[(i * 2 + k, j * 2 + k)],
                };
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Clips negative eigenvalues to zero and rescales to the original trace.
pub fn psd_project(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let trace = m.trace_re();
    if trace <= 0.0 {
        return Err(LinalgError::ZeroTrace { trace });
    }
    let eig = eig_hermitian(m)?;
    if eig.values[0] >= 0.0 {
        return Ok(m.hermitize());
    }
    let clipped: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(LinalgError::ZeroTrace { trace: total });
    }
    let scaled: Vec<f64> = clipped.iter().map(|l| l * trace / total).collect();
    Ok(eig.reassemble(&scaled))
}

/// Checks Hermiticity, unit trace and positivity within `slack`.
pub fn check_state(m: &CMatrix, slack: f64) -> Result<(), LinalgError> {
    let residual = m.hermiticity_residual();
    if residual > slack.max(TOL.hermitian_input) {
        return Err(LinalgError::NotAState {
            reason: format!("Hermiticity residual {residual:.3e}"),
        });
    }
    let tr = m.trace_re();
    if (tr - 1.0).abs() > slack.max(TOL.psd_slack) {
        return Err(LinalgError::NotAState {
            reason: format!("trace {tr}"),
        });
    }
    let lmin = eig_hermitian(&m.hermitize())?.values[0];
    if lmin < -slack {
        return Err(LinalgError::NotAState {
            reason: format!("negative eigenvalue {lmin:.3e}"),
        });
    }
    Ok(())
}

/// tr(ρ·ψ) for a rank-one projector ψ.
pub fn overlap_fidelity(rho: &CMatrix, psi: &CMatrix) -> f64 {
    rho.trace_product(psi).re.clamp(0.0, 1.0)
}

/// Uhlmann fidelity tr√(√ρ σ √ρ), validating both arguments at the default slack.
pub fn uhlmann_fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, LinalgError> {
    uhlmann_fidelity_with_slack(rho, sigma, TOL.psd_slack)
}

/// Uhlmann fidelity with an explicit positivity slack, for rounded data.
pub fn uhlmann_fidelity_with_slack(
    rho: &CMatrix,
    sigma: &CMatrix,
    slack: f64,
) -> Result<f64, LinalgError> {
    check_state(rho, slack)?;
    check_state(sigma, slack)?;
    let sqrt_rho = sqrt_psd(&rho.hermitize())?;
    let inner = (&(&sqrt_rho * &sigma.hermitize()) * &sqrt_rho).hermitize();
    let eig = eig_hermitian(&inner)?;
    let f: f64 = eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Pauli matrix σ_k with σ_0 = I, σ_1 = X, σ_2 = Y, σ_3 = Z.
pub fn pauli(k: usize) -> CMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match k {
        0 => CMatrix::identity(2),
        1 => CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        2 => CMatrix::from_rows(&[vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]]),
        3 => CMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, c(-1.0, 0.0)]]),
        _ => panic!("Pauli index {k} out of range 0..=3"),
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_dim(rhs);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_dim(rhs);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        &self + &rhs
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        &self - &rhs
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.check_same_dim(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-1.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.check_same_dim(rhs);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self[(i, k)];
                if aik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, s: f64) -> CMatrix {
        self.scale(s)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}×{})[", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let v = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn singlet() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::outer(&[ZERO, c(s, 0.0), c(-s, 0.0), ZERO])
    }

    #[test]
    fn kron_identities() {
        assert!(kron(&CMatrix::identity(2), &CMatrix::identity(2)).max_abs_diff(&CMatrix::identity(4)) == 0.0);
        let zz = kron(&pauli(3), &pauli(3));
        assert_eq!(zz, CMatrix::diag(&[1.0, -1.0, -1.0, 1.0]));
        let p0 = CMatrix::diag(&[1.0, 0.0]);
        let p1 = CMatrix::diag(&[0.0, 1.0]);
        assert_eq!(kron(&p0, &p1), CMatrix::diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn partial_trace_of_singlet_is_maximally_mixed() {
        let half = CMatrix::identity(2).scale(0.5);
        assert!(partial_trace(&singlet(), Subsystem::A).max_abs_diff(&half) < 1e-15);
        assert!(partial_trace(&singlet(), Subsystem::B).max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_of_walkoff_mixture() {
        let walkoff = CMatrix::diag(&[0.0, 0.5, 0.5, 0.0]);
        let half = CMatrix::identity(2).scale(0.5);
        assert!(partial_trace(&walkoff, Subsystem::A).max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_picks_the_right_factor() {
        let a = CMatrix::from_rows(&[vec![c(0.7, 0.0), c(0.1, 0.2)], vec![c(0.1, -0.2), c(0.3, 0.0)]]);
        let b = CMatrix::diag(&[0.25, 0.75]);
        let ab = kron(&a, &b);
        assert!(partial_trace(&ab, Subsystem::B).max_abs_diff(&a) < 1e-15);
        assert!(partial_trace(&ab, Subsystem::A).max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn psd_project_clips_and_rescales() {
        let m = CMatrix::diag(&[1.1, -0.1]);
        let p = psd_project(&m).unwrap();
        assert!(p.max_abs_diff(&CMatrix::diag(&[1.0, 0.0])) < 1e-12);
        // trace is preserved
        assert!((p.trace_re() - 1.0).abs() < 1e-12);

        let psd = CMatrix::diag(&[0.3, 0.7]);
        assert!(psd_project(&psd).unwrap().max_abs_diff(&psd) < 1e-12);
    }

    #[test]
    fn psd_project_rejects_nonpositive_trace() {
        let m = CMatrix::diag(&[0.5, -0.5]);
        assert!(matches!(psd_project(&m), Err(LinalgError::ZeroTrace { .. })));
    }

    #[test]
    fn uhlmann_reduces_to_overlap_for_pure_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CMatrix::outer(&[c(s, 0.0), c(s, 0.0)]);
        let zero = CMatrix::diag(&[1.0, 0.0]);
        let f = uhlmann_fidelity(&plus, &zero).unwrap();
        assert!((f - s).abs() < 1e-10, "{f}");
        assert!((uhlmann_fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_rejects_non_states() {
        let bad = CMatrix::diag(&[1.2, -0.2]);
        let ok = CMatrix::diag(&[0.5, 0.5]);
        assert!(matches!(uhlmann_fidelity(&bad, &ok), Err(LinalgError::NotAState { .. })));
    }

    #[test]
    fn hermitize_and_residual() {
        let m = CMatrix::from_rows(&[vec![ONE, c(0.0, 1.0)], vec![ZERO, ONE]]);
        assert!((m.hermiticity_residual() - 1.0).abs() < 1e-15);
        assert!(m.hermitize().is_hermitian(TOL.hermitian));
    }
}
