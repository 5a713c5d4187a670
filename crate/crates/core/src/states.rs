//! Bipartite states on `C^N ⊗ C^N`: the family `ρ(λ)`, Werner and isotropic
//! states, random samplers and pure-state Schmidt analysis.
//!
//! Isotropic states use the singlet `P₀` as their maximally entangled
//! reference, so `f = tr(P₀ ρ_f)`. Every maximally entangled state is
//! product-unitarily equivalent to it.

use nalgebra::{DMatrix, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matkit::{hermitian_spectrum, partial_trace, vector_norm, ComplexMatrix, Subsystem, C64};
use crate::spinspace::CoupledSpinSystem;

/// Validation tolerance for density matrices (Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-10;

/// Unit-norm tolerance for pure states.
pub const PURE_TOL: f64 = 1e-12;

fn check_local_dim(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

/// Seeded generator with an independent stream per index.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_local: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`STATE_TOL`].
    pub fn new(n_local: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_local_dim(n_local)?;
        let d = n_local * n_local;
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::Dimension(format!(
                "density matrix for N={n_local} must be {d}x{d}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_spectrum(&matrix)?.min();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { n_local, matrix })
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).map(|z| z.re).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Debug)]
pub struct PureState {
    n_local: usize,
    vector: Vec<C64>,
}

impl PureState {
    pub fn new(n_local: usize, vector: Vec<C64>) -> Result<Self> {
        check_local_dim(n_local)?;
        if vector.len() != n_local * n_local {
            return Err(Error::Dimension(format!(
                "pure state for N={n_local} needs {} amplitudes, got {}",
                n_local * n_local,
                vector.len()
            )));
        }
        let norm = vector_norm(&vector);
        if norm == 0.0 {
            return Err(Error::Domain("zero vector is not a state".into()));
        }
        if (norm - 1.0).abs() > PURE_TOL {
            return Err(Error::InvalidState(format!("norm is {norm}, expected 1")));
        }
        Ok(Self { n_local, vector })
    }

    /// Normalizes `vector` first; only the zero vector is rejected.
    pub fn normalized(n_local: usize, vector: Vec<C64>) -> Result<Self> {
        let norm = vector_norm(&vector);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(n_local, vector.into_iter().map(|z| z / norm).collect())
    }

    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { n_local: self.n_local, matrix: ComplexMatrix::projector(&self.vector) }
    }
}

/// `|ψ⟩ = Σ_i α_i |φ_i⟩ ⊗ |χ_i⟩`.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    /// Nonincreasing, nonnegative.
    pub coefficients: Vec<f64>,
    /// Column `i` is `|φ_i⟩`.
    pub basis_1: ComplexMatrix,
    /// Column `i` is `|χ_i⟩`.
    pub basis_2: ComplexMatrix,
}

impl SchmidtForm {
    pub fn reconstruct(&self) -> Vec<C64> {
        let n = self.basis_1.rows();
        let mut v = vec![C64::default(); n * n];
        for (i, &alpha) in self.coefficients.iter().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    v[a * n + b] += self.basis_1.get(a, i) * self.basis_2.get(b, i) * alpha;
                }
            }
        }
        v
    }
}

pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtForm> {
    let n = psi.n_local;
    // coefficient matrix Ψ[a, b] = ψ[a·N + b] = Σ σ_i u_i[a] conj(v_i[b])
    let coeff = DMatrix::from_fn(n, n, |a, b| psi.vector[a * n + b]);
    let svd = SVD::try_new(coeff, true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V†");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let basis_1 = ComplexMatrix::from_fn(n, n, |a, i| u[(a, order[i])]);
    // row k of V† is v_k†, so χ_k = conj(v_k) = transpose of that row
    let basis_2 = ComplexMatrix::from_fn(n, n, |b, i| v_t[(order[i], b)]);
    Ok(SchmidtForm { coefficients, basis_1, basis_2 })
}

/// `√(2 Σ_{i≠j} α_i² α_j²) = √(2(1 − Σ α_i⁴))` for normalized coefficients.
pub fn concurrence_from_coefficients(alpha: &[f64]) -> f64 {
    let s2: f64 = alpha.iter().map(|a| a * a).sum();
    let s4: f64 = alpha.iter().map(|a| a.powi(4)).sum();
    (2.0 * (s2 * s2 - s4)).max(0.0).sqrt()
}

/// Shannon entropy (base 2) of `α_i²`, with `0 log 0 = 0`.
pub fn entropy_from_coefficients(alpha: &[f64]) -> f64 {
    alpha.iter().map(|a| a * a).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum::<f64>().max(0.0)
}

pub fn concurrence_pure(psi: &PureState) -> Result<f64> {
    Ok(concurrence_from_coefficients(&schmidt_decompose(psi)?.coefficients))
}

pub fn eof_pure(psi: &PureState) -> Result<f64> {
    Ok(entropy_from_coefficients(&schmidt_decompose(psi)?.coefficients))
}

/// `√(2(1 − tr ρ₁²))` through the reduced state, independent of the SVD.
pub fn concurrence_via_reduced_state(psi: &PureState) -> Result<f64> {
    let rho = ComplexMatrix::projector(&psi.vector);
    let r1 = partial_trace(&rho, psi.n_local, Subsystem::Second)?;
    let purity = r1.trace_product(&r1)?.re;
    Ok((2.0 * (1.0 - purity)).max(0.0).sqrt())
}

/// `ρ₀ = 2/(N(N+1)) · (I + F)/2`.
pub fn werner_state(sys: &CoupledSpinSystem) -> Result<DensityMatrix> {
    let n = sys.n() as f64;
    let d = sys.dim();
    let ps = (&ComplexMatrix::identity(d) + sys.swap()).scale(0.5);
    Ok(DensityMatrix { n_local: sys.n(), matrix: ps.scale(2.0 / (n * (n + 1.0))) })
}

/// `ρ(λ) = λ P₀ + (1 − λ) ρ₀`.
pub fn family_state(sys: &CoupledSpinSystem, lambda: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("λ = {lambda} outside [0, 1]")));
    }
    let werner = werner_state(sys)?;
    let m = &sys.singlet_projector().scale(lambda) + &werner.matrix.scale(1.0 - lambda);
    Ok(DensityMatrix { n_local: sys.n(), matrix: m })
}

/// `ρ_f = f P₀ + (1 − f)(I − P₀)/(N² − 1)`.
pub fn isotropic_state(sys: &CoupledSpinSystem, fidelity: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Domain(format!("fidelity {fidelity} outside [0, 1]")));
    }
    let d = sys.dim();
    let p0 = sys.singlet_projector();
    let rest = &ComplexMatrix::identity(d) - &p0;
    let m = &p0.scale(fidelity) + &rest.scale((1.0 - fidelity) / (d as f64 - 1.0));
    Ok(DensityMatrix { n_local: sys.n(), matrix: m })
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector in `C^dim`.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = vector_norm(&v);
        if norm > 0.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_pure(n_local: usize, rng: &mut impl Rng) -> Result<PureState> {
    check_local_dim(n_local)?;
    PureState::normalized(n_local, random_unit_vector(n_local * n_local, rng))
}

/// Random product vector `|a⟩ ⊗ |b⟩`.
pub fn random_product_pure(n_local: usize, rng: &mut impl Rng) -> Result<PureState> {
    check_local_dim(n_local)?;
    let a = random_unit_vector(n_local, rng);
    let b = random_unit_vector(n_local, rng);
    PureState::normalized(n_local, crate::matkit::kron_vec(&a, &b))
}

/// Ginibre state `GG†/tr(GG†)` with `G` of shape `N² × rank`.
pub fn random_density(n_local: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    check_local_dim(n_local)?;
    let d = n_local * n_local;
    if rank == 0 || rank > d {
        return Err(Error::Domain(format!("rank {rank} outside [1, {d}]")));
    }
    let g = ComplexMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let ggt = &g * &g.adjoint();
    let tr = ggt.trace().re;
    Ok(DensityMatrix { n_local, matrix: ggt.scale(1.0 / tr).hermitian_part() })
}

/// Convex mixture of `terms` random product states with uniform-simplex weights.
pub fn random_separable(n_local: usize, terms: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    check_local_dim(n_local)?;
    if terms == 0 {
        return Err(Error::Domain("a mixture needs at least one term".into()));
    }
    let d = n_local * n_local;
    let weights: Vec<f64> = (0..terms).map(|_| -rng.random_range(f64::EPSILON..1.0f64).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut m = ComplexMatrix::zeros(d, d);
    for w in weights {
        let psi = random_product_pure(n_local, rng)?;
        m = &m + &ComplexMatrix::projector(psi.vector()).scale(w / total);
    }
    Ok(DensityMatrix { n_local, matrix: m.hermitian_part() })
}

/// Haar unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    ComplexMatrix::from_fn(n, n, |i, k| {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        q[(i, k)] * phase
    })
}

pub fn random_product_unitary(n: usize, rng: &mut impl Rng) -> (ComplexMatrix, ComplexMatrix) {
    let u1 = random_unitary(n, rng);
    let u2 = random_unitary(n, rng);
    (u1, u2)
}
