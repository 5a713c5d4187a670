//! Fixed structural operators of two coupled spin-`j` particles, `N = 2j + 1`.
//!
//! The local basis is `|j, m⟩` ordered with `m` descending: index `k` carries
//! `m = j − k`. This ordering is part of the state-file format.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::matkit::{hermitian_spectrum, kron, ComplexMatrix, C64, ONE, ZERO};

fn require_even(n: usize, min: usize) -> Result<()> {
    if !n.is_multiple_of(2) || n < min {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

/// Spin matrices `(ĵ_x, ĵ_y, ĵ_z)` of the spin-`(N−1)/2` irrep.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
}

impl SpinOperators {
    pub fn components(&self) -> [&ComplexMatrix; 3] {
        [&self.jx, &self.jy, &self.jz]
    }
}

/// Ladder-operator construction of the spin matrices; works for any `N ≥ 1`.
pub fn spin_operators(n: usize) -> SpinOperators {
    let j = (n as f64 - 1.0) / 2.0;
    let m_of = |k: usize| j - k as f64;
    // ⟨j, m+1| J+ |j, m⟩ sits at row k−1, column k.
    let jplus = ComplexMatrix::from_fn(n, n, |r, c| {
        if c >= 1 && r == c - 1 {
            let m = m_of(c);
            C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus).scale(0.5);
    let jy = (&jplus - &jminus).scale_complex(C64::new(0.0, -0.5));
    let jz = ComplexMatrix::from_real_diagonal(&(0..n).map(m_of).collect::<Vec<_>>());
    SpinOperators { jx, jy, jz }
}

/// `⟨j,m'|V|j,m⟩ = (−1)^{j−m} δ_{m',−m}`: real, unitary and skew-symmetric for even `N`.
pub fn time_reversal_unitary(n: usize) -> Result<ComplexMatrix> {
    require_even(n, 2)?;
    // Column k (m = j − k) maps to row N−1−k (m' = −m) with sign (−1)^k.
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        if r + c == n - 1 {
            if c % 2 == 0 {
                ONE
            } else {
                -ONE
            }
        } else {
            ZERO
        }
    }))
}

/// Swap `F(e_a ⊗ e_b) = e_b ⊗ e_a` on `C^N ⊗ C^N`.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    let d = n * n;
    ComplexMatrix::from_fn(d, d, |r, c| {
        let (a, b) = (c / n, c % n);
        if r == b * n + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// `Ĵ² = Σ_a (ĵ_a ⊗ I + I ⊗ ĵ_a)²` on the composite space.
pub fn total_spin_squared(n: usize) -> Result<ComplexMatrix> {
    let ops = spin_operators(n);
    let id = ComplexMatrix::identity(n);
    let mut acc = ComplexMatrix::zeros(n * n, n * n);
    for op in ops.components() {
        let total = &kron(op, &id)? + &kron(&id, op)?;
        acc = &acc + &(&total * &total);
    }
    Ok(acc)
}

/// Total-spin projectors `P_J`, `J = 0..N−1`.
///
/// `Ĵ²` is block diagonal in the total magnetic number `M`, and inside the
/// `M` block each `J ≥ |M|` occurs exactly once with eigenvalue `J(J+1)`.
/// Each block is diagonalized separately and `P_J` collects the `J`-th
/// eigenvector of every block. The gaps are at least 2, so the result stays
/// accurate to roundoff at any `N`, and projectors carry no phase choice.
pub fn total_spin_projectors(n: usize) -> Result<Vec<ComplexMatrix>> {
    require_even(n, 4)?;
    let j2 = total_spin_squared(n)?;
    let d = n * n;
    let mut projectors = vec![ComplexMatrix::zeros(d, d); n];
    // local indices a, b carry m = j − a and m = j − b, so M = 2j − (a + b)
    for s in 0..(2 * n - 1) {
        let sector: Vec<usize> = (0..n).filter(|&a| s >= a && s - a < n).map(|a| a * n + (s - a)).collect();
        let block = ComplexMatrix::from_fn(sector.len(), sector.len(), |r, c| j2.get(sector[r], sector[c]));
        let spec = hermitian_spectrum(&block)?;
        let j_min = s.abs_diff(n - 1);
        for (i, &value) in spec.values.iter().enumerate() {
            let big_j = j_min + i;
            let expected = (big_j * (big_j + 1)) as f64;
            if (value - expected).abs() > 1e-6 {
                return Err(Error::Numerical(format!("J² eigenvalue {value} where {expected} was expected")));
            }
            let v = spec.vectors.column(i);
            let p = &mut projectors[big_j];
            for (r, &row) in sector.iter().enumerate() {
                for (c, &col) in sector.iter().enumerate() {
                    p.set(row, col, p.get(row, col) + v[r] * v[c].conj());
                }
            }
        }
    }
    Ok(projectors)
}

/// The same projectors as Lagrange polynomials in `Ĵ²`,
/// `P_J = Π_{K≠J} (Ĵ² − K(K+1)) / (J(J+1) − K(K+1))`.
///
/// Rounding errors are amplified by the later factors: about 1e-13 at
/// `N = 8` but 1e-8 at `N = 16`. Kept as an independent check on
/// [`total_spin_projectors`].
pub fn total_spin_projectors_lagrange(n: usize) -> Result<Vec<ComplexMatrix>> {
    require_even(n, 4)?;
    let j2 = total_spin_squared(n)?;
    let id = ComplexMatrix::identity(n * n);
    let casimir = |k: usize| (k * (k + 1)) as f64;
    Ok((0..n)
        .map(|big_j| {
            (0..n).filter(|&k| k != big_j).fold(id.clone(), |p, k| {
                let factor = (&j2 - &id.scale(casimir(k))).scale(1.0 / (casimir(big_j) - casimir(k)));
                (&p * &factor).hermitian_part()
            })
        })
        .collect())
}

/// Clebsch–Gordan singlet `N^{-1/2} Σ_m (−1)^{j−m} |j,m⟩ ⊗ |j,−m⟩`.
pub fn singlet_vector(n: usize) -> Result<Vec<C64>> {
    require_even(n, 4)?;
    let amp = 1.0 / (n as f64).sqrt();
    let mut v = vec![ZERO; n * n];
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        v[k * n + (n - 1 - k)] = C64::new(sign * amp, 0.0);
    }
    Ok(v)
}

/// `ϑB = V Bᵀ V†`.
pub fn time_reverse_with(v: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if b.rows() != v.rows() || b.cols() != v.cols() {
        return Err(Error::Dimension(format!(
            "time reversal of a {}x{} operator on C^{}",
            b.rows(),
            b.cols(),
            v.rows()
        )));
    }
    Ok(&(v * &b.transpose()) * &v.adjoint())
}

/// Precomputed operators for one even local dimension `N ≥ 4`.
#[derive(Debug)]
pub struct CoupledSpinSystem {
    n: usize,
    spin: SpinOperators,
    v: ComplexMatrix,
    swap: ComplexMatrix,
    singlet: Vec<C64>,
    projectors: Vec<ComplexMatrix>,
}

impl CoupledSpinSystem {
    pub fn new(n: usize) -> Result<Self> {
        require_even(n, 4)?;
        Ok(Self {
            n,
            spin: spin_operators(n),
            v: time_reversal_unitary(n)?,
            swap: swap_operator(n),
            singlet: singlet_vector(n)?,
            projectors: total_spin_projectors(n)?,
        })
    }

    /// Process-wide cached instance for `n`.
    pub fn shared(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CoupledSpinSystem>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(sys) = cache.lock().expect("spin system cache poisoned").get(&n) {
            return Ok(Arc::clone(sys));
        }
        let built = Arc::new(Self::new(n)?);
        let mut guard = cache.lock().expect("spin system cache poisoned");
        Ok(Arc::clone(guard.entry(n).or_insert(built)))
    }

    /// Local dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Composite dimension `N²`.
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Spin quantum number `j = (N − 1)/2`.
    pub fn spin(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }

    pub fn spin_operators(&self) -> &SpinOperators {
        &self.spin
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn swap(&self) -> &ComplexMatrix {
        &self.swap
    }

    pub fn singlet(&self) -> &[C64] {
        &self.singlet
    }

    /// `P_0 = |ψ₀⟩⟨ψ₀|`.
    pub fn singlet_projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.singlet)
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn projector(&self, total_spin: usize) -> &ComplexMatrix {
        &self.projectors[total_spin]
    }

    /// `ϑB = V Bᵀ V†` for an operator on `C^N`.
    pub fn time_reverse(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        time_reverse_with(&self.v, b)
    }

    /// The antiunitary time reversal of a vector, `θφ = V φ*`.
    pub fn time_reverse_vector(&self, phi: &[C64]) -> Result<Vec<C64>> {
        let conj: Vec<C64> = phi.iter().map(|z| z.conj()).collect();
        self.v.apply(&conj)
    }
}
