//! Dense complex linear algebra for the small operators used throughout the crate.
//!
//! Every matrix is a [`ComplexMatrix`], a thin immutable wrapper around a
//! `nalgebra` dense matrix of `Complex64`. Composite indices on `C^N ⊗ C^N`
//! follow one global convention: `a * N + b`, where `a` indexes subsystem 1
//! and `b` indexes subsystem 2.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest admissible row or column count of any matrix produced by [`kron`].
pub const MAX_DIM: usize = 4096;

/// Default relative Hermiticity tolerance for [`hermitian_spectrum`].
pub const HERMIT_TOL: f64 = 1e-10;

// Below this relative asymmetry a matrix is treated as exactly Hermitian
// when choosing the trace-norm route.
const HERMITIAN_ROUTE_TOL: f64 = 1e-13;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// Wraps a nalgebra matrix. Entries are checked for finiteness.
    pub fn from_nalgebra(m: DMatrix<C64>) -> Result<Self> {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// Checked matrix product.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// `tr(self · rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Result<C64> {
        if self.cols() != rhs.rows() || self.rows() != rhs.cols() {
            return Err(Error::Dimension(format!(
                "trace of product {}x{} · {}x{} undefined",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * rhs.0[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::Dimension(format!("vector of length {} against {} columns", v.len(), self.cols())));
        }
        Ok((0..self.rows()).map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum()).collect())
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> Result<C64> {
        let mv = self.apply(v)?;
        Ok(inner(v, &mv))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.0.shape() != other.0.shape() {
            return f64::INFINITY;
        }
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `M − M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermiticity within `tol` relative to `max(1, max |M_ij|)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.max_abs().max(1.0)
    }

    /// Largest entrywise modulus of `U†U − I`.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.0.adjoint() * &self.0;
        Self(g).max_abs_diff(&Self::identity(self.rows()))
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// `⟨u|v⟩ = Σ conj(u_i) v_i`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Tensor product of two vectors under the global index convention.
pub fn kron_vec(u: &[C64], v: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for a in u {
        for b in v {
            out.push(a * b);
        }
    }
    out
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{what} requires a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    Ok(m.rows())
}

/// `A ⊗ B` with `(A⊗B)[i·rB+k, j·cB+l] = A[i,j]·B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) if r <= MAX_DIM && c <= MAX_DIM => Ok(ComplexMatrix(a.0.kronecker(&b.0))),
        _ => Err(Error::Size {
            rows: a.rows().saturating_mul(b.rows()),
            cols: a.cols().saturating_mul(b.cols()),
            max: MAX_DIM,
        }),
    }
}

/// Which tensor factor a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on `C^d ⊗ C^d` over the given subsystem.
pub fn partial_trace(m: &ComplexMatrix, local_dim: usize, over: Subsystem) -> Result<ComplexMatrix> {
    let n = require_square(m, "partial trace")?;
    if local_dim == 0 || local_dim * local_dim != n {
        return Err(Error::Dimension(format!("partial trace: {n}x{n} is not ({local_dim}²)x({local_dim}²)")));
    }
    let d = local_dim;
    let out = match over {
        Subsystem::Second => ComplexMatrix::from_fn(d, d, |a, b| (0..d).map(|c| m.get(a * d + c, b * d + c)).sum()),
        Subsystem::First => ComplexMatrix::from_fn(d, d, |c, e| (0..d).map(|a| m.get(a * d + c, a * d + e)).sum()),
    };
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors; column `k` belongs to `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("spectrum of a non-empty matrix")
    }

    /// `Q Λ Q†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let q = &self.vectors;
        let lam = ComplexMatrix::from_real_diagonal(&self.values);
        &(q * &lam) * &q.adjoint()
    }
}

pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<HermitianSpectrum> {
    hermitian_spectrum_with_tol(m, HERMIT_TOL)
}

pub fn hermitian_spectrum_with_tol(m: &ComplexMatrix, hermit_tol: f64) -> Result<HermitianSpectrum> {
    require_square(m, "Hermitian eigensolve")?;
    let scale = m.max_abs().max(1.0);
    let dev = m.hermitian_deviation();
    if dev > hermit_tol * scale {
        return Err(Error::NotHermitian(dev / scale));
    }
    let eig = SymmetricEigen::new(m.hermitian_part().0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("Hermitian eigensolve produced non-finite eigenvalues".into()));
    }
    let n = m.rows();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(HermitianSpectrum { values, vectors })
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.0.clone(), false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Trace norm `tr √(M†M)`, the sum of singular values.
///
/// Hermitian inputs go through the eigensolver (`Σ|λ_i|`); everything else
/// through an SVD, which keeps tiny singular values accurate.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    require_square(m, "trace norm")?;
    if m.is_hermitian(HERMITIAN_ROUTE_TOL) {
        let spec = hermitian_spectrum_with_tol(m, HERMITIAN_ROUTE_TOL)?;
        Ok(spec.values.iter().map(|v| v.abs()).sum())
    } else {
        Ok(singular_values(m)?.iter().sum())
    }
}

/// `exp(iH)` for Hermitian `H`, through its spectral decomposition.
pub fn unitary_exp(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = hermitian_spectrum(h)?;
    let n = h.rows();
    let q = &spec.vectors;
    let phases: Vec<C64> = spec.values.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let qd = ComplexMatrix::from_fn(n, n, |i, k| q.get(i, k) * phases[k]);
    Ok(&qd * &q.adjoint())
}
