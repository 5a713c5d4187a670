use serde::{Deserialize, Serialize};

use super::{lift_on_2, require_composite, LocalMap};
use crate::error::{Error, Result};
use crate::matkit::{kron, ComplexMatrix};
use crate::spinspace::CoupledSpinSystem;

/// Unitarity tolerance for the local factors of a twist.
pub const UNITARY_TOL: f64 = 1e-10;

/// The three equivalent constructions of `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessForm {
    /// `N (I ⊗ Φ) P₀`.
    Lifted,
    /// `I − N P₀ − F`.
    Swap,
    /// `−(N−2) P₀ + 2 Σ_{J even ≥ 2} P_J`.
    Spectral,
}

impl WitnessForm {
    pub const ALL: [WitnessForm; 3] = [WitnessForm::Lifted, WitnessForm::Swap, WitnessForm::Spectral];
}

/// The entanglement witness built from `Φ` for one local dimension.
#[derive(Clone, Debug)]
pub struct Witness {
    n: usize,
    matrix: ComplexMatrix,
    form: WitnessForm,
}

impl Witness {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn form(&self) -> WitnessForm {
        self.form
    }
}

pub fn build_witness(sys: &CoupledSpinSystem, form: WitnessForm) -> Result<Witness> {
    let n = sys.n();
    let d = sys.dim();
    let p0 = sys.singlet_projector();
    let matrix = match form {
        WitnessForm::Lifted => lift_on_2(LocalMap::Phi, &p0, sys)?.scale(n as f64),
        WitnessForm::Swap => &(&ComplexMatrix::identity(d) - &p0.scale(n as f64)) - sys.swap(),
        WitnessForm::Spectral => {
            let even = sys
                .projectors()
                .iter()
                .enumerate()
                .skip(2)
                .step_by(2)
                .fold(ComplexMatrix::zeros(d, d), |acc, (_, p)| &acc + p);
            &even.scale(2.0) - &sys.projector(0).scale((n - 2) as f64)
        }
    };
    Ok(Witness { n, matrix: matrix.hermitian_part(), form })
}

/// `tr(Wρ)`; the witness functional is `f_W(ρ) = −tr(Wρ)`.
pub fn witness_value(w: &Witness, rho: &ComplexMatrix) -> Result<f64> {
    let d = w.n * w.n;
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::Dimension(format!("witness on {d}x{d} against {}x{}", rho.rows(), rho.cols())));
    }
    Ok(w.matrix.trace_product(rho)?.re)
}

/// `(U₁ ⊗ U₂) W (U₁ ⊗ U₂)†`.
pub fn twisted_witness(w: &Witness, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<ComplexMatrix> {
    for u in [u1, u2] {
        if u.rows() != w.n || u.cols() != w.n {
            return Err(Error::Dimension(format!("local unitary must be {0}x{0}", w.n)));
        }
        let dev = u.unitary_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
    }
    let u = kron(u1, u2)?;
    Ok((&(&u * &w.matrix) * &u.adjoint()).hermitian_part())
}

// Used by the optimizer, which keeps its unitaries exact by construction.
pub(super) fn twisted_value(w: &Witness, u: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    // tr(U W U† ρ) = tr(W · U†ρU)
    let rotated = &(&u.adjoint() * rho) * u;
    w.matrix.trace_product(&rotated).map(|z| z.re).unwrap_or(f64::INFINITY)
}

pub(super) fn check_state_dim(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<()> {
    require_composite(rho, sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::{hermitian_spectrum, kron_vec, vector_norm, C64};
    use crate::states;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_forms_agree() {
        for n in [4, 6, 8] {
            let sys = CoupledSpinSystem::shared(n).unwrap();
            let ws: Vec<_> = WitnessForm::ALL.iter().map(|&f| build_witness(&sys, f).unwrap()).collect();
            assert!(ws[0].matrix().max_abs_diff(ws[1].matrix()) < 1e-10, "N={n}");
            assert!(ws[1].matrix().max_abs_diff(ws[2].matrix()) < 1e-10, "N={n}");
            for w in &ws {
                assert!((w.matrix().trace().re - (n * (n - 2)) as f64).abs() < 1e-10);
                assert!(w.matrix().is_hermitian(1e-12));
            }
        }
    }

    #[test]
    fn n4_spectrum() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let spec = hermitian_spectrum(w.matrix()).unwrap();
        let expected: Vec<f64> =
            std::iter::once(-2.0).chain(std::iter::repeat_n(0.0, 10)).chain(std::iter::repeat_n(2.0, 5)).collect();
        for (a, b) in spec.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
        // the negative eigenvector is the singlet
        let v0 = spec.vectors.column(0);
        let overlap = crate::matkit::inner(&v0, sys.singlet()).norm();
        assert!((overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singlet_expectation() {
        for n in [4, 6, 8] {
            let sys = CoupledSpinSystem::shared(n).unwrap();
            let w = build_witness(&sys, WitnessForm::Lifted).unwrap();
            let e = w.matrix().expectation(sys.singlet()).unwrap().re;
            assert!((e + (n as f64 - 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn werner_and_family_values() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let werner = states::werner_state(&sys).unwrap();
        assert!(witness_value(&w, werner.matrix()).unwrap().abs() < 1e-14);
        let iso = states::isotropic_state(&sys, 1.0).unwrap();
        assert!((witness_value(&w, iso.matrix()).unwrap() + 2.0).abs() < 1e-12);
        assert!(witness_value(&w, &ComplexMatrix::identity(9)).is_err());
    }

    #[test]
    fn isotropic_witness_value_formula() {
        // tr(Wρ_f) = (N−2)(1−Nf)/(N−1)
        for n in [4usize, 6] {
            let sys = CoupledSpinSystem::shared(n).unwrap();
            let w = build_witness(&sys, WitnessForm::Swap).unwrap();
            let nf = n as f64;
            for f in [0.0, 0.1, 0.3, 0.77, 1.0] {
                let rho = states::isotropic_state(&sys, f).unwrap();
                let expected = (nf - 2.0) * (1.0 - nf * f) / (nf - 1.0);
                assert!((witness_value(&w, rho.matrix()).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn twist_by_identity_is_noop() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let id = ComplexMatrix::identity(4);
        assert!(twisted_witness(&w, &id, &id).unwrap().max_abs_diff(w.matrix()) < 1e-15);
    }

    #[test]
    fn twist_preserves_spectrum_and_pairing() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (u1, u2) = states::random_product_unitary(4, &mut rng);
        let wu = twisted_witness(&w, &u1, &u2).unwrap();
        let a = hermitian_spectrum(w.matrix()).unwrap();
        let b = hermitian_spectrum(&wu).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
        let rho = states::random_density(4, 5, &mut rng).unwrap();
        let u = kron(&u1, &u2).unwrap();
        let rho_u = &(&u * rho.matrix()) * &u.adjoint();
        let lhs = wu.trace_product(&rho_u).unwrap().re;
        let rhs = witness_value(&w, rho.matrix()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn twist_rejects_non_unitary() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let id = ComplexMatrix::identity(4);
        let bad = id.scale(1.01);
        assert!(matches!(twisted_witness(&w, &bad, &id), Err(Error::NotUnitary(_))));
        assert!(twisted_witness(&w, &ComplexMatrix::identity(3), &id).is_err());
    }

    #[test]
    fn nonnegative_on_random_product_vectors() {
        let sys = CoupledSpinSystem::shared(6).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..200 {
            let a = states::random_unit_vector(6, &mut rng);
            let b = states::random_unit_vector(6, &mut rng);
            let v = kron_vec(&a, &b);
            assert!((vector_norm(&v) - 1.0).abs() < 1e-12);
            let e: C64 = w.matrix().expectation(&v).unwrap();
            assert!(e.re >= -1e-10);
        }
    }
}
