//! Minimization of `tr(W_U ρ)` over product unitaries `U = U₁ ⊗ U₂`.
//!
//! Each restart runs a Nelder–Mead search over Hermitian generators
//! (`U_k = exp(iH_k) U_k⁰`, `N²` real parameters per side) and then polishes
//! the simplex optimum with Riemannian steepest descent using the exact
//! gradient `tr₂ C`, `tr₁ C`, where `C = i[W_U, ρ]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::witness::{check_state_dim, twisted_value};
use super::Witness;
use crate::error::{Error, Result};
use crate::matkit::{kron, partial_trace, unitary_exp, ComplexMatrix, Subsystem, C64};
use crate::spinspace::CoupledSpinSystem;
use crate::states::random_unitary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimizeBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl MinimizeBudget {
    pub const DEFAULT_RESTARTS: usize = 8;
    pub const DEFAULT_ITERATIONS: usize = 500;

    pub fn with_seed(seed: u64) -> Self {
        Self { restarts: Self::DEFAULT_RESTARTS, iterations: Self::DEFAULT_ITERATIONS, seed }
    }
}

/// Best twist found.
#[derive(Clone, Debug)]
pub struct WitnessMinimum {
    /// `min_U tr(W_U ρ)` as found; never above `tr(Wρ)`.
    pub value: f64,
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    /// Index of the restart that produced the optimum (0 starts at the identity).
    pub restart: usize,
}

pub fn minimize_witness(
    w: &Witness,
    rho: &ComplexMatrix,
    sys: &CoupledSpinSystem,
    budget: MinimizeBudget,
) -> Result<WitnessMinimum> {
    check_state_dim(rho, sys)?;
    if w.n() != sys.n() {
        return Err(Error::Dimension(format!("witness for N={} used with N={}", w.n(), sys.n())));
    }
    if budget.restarts == 0 {
        return Err(Error::Domain("minimize_witness needs at least one restart".into()));
    }
    let n = sys.n();
    let problem = Problem { w, rho: &rho.hermitian_part(), n };

    let results: Vec<Result<WitnessMinimum>> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let (u1, u2) = if r == 0 {
                (ComplexMatrix::identity(n), ComplexMatrix::identity(n))
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
                rng.set_stream(r as u64);
                (random_unitary(n, &mut rng), random_unitary(n, &mut rng))
            };
            problem.run(u1, u2, budget.iterations, r)
        })
        .collect();

    let mut best: Option<WitnessMinimum> = None;
    for res in results {
        let cand = res?;
        if best.as_ref().is_none_or(|b| cand.value < b.value) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one restart"))
}

struct Problem<'a> {
    w: &'a Witness,
    rho: &'a ComplexMatrix,
    n: usize,
}

impl Problem<'_> {
    fn value(&self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> f64 {
        match kron(u1, u2) {
            Ok(u) => twisted_value(self.w, &u, self.rho),
            Err(_) => f64::INFINITY,
        }
    }

    fn run(&self, u1: ComplexMatrix, u2: ComplexMatrix, iterations: usize, restart: usize) -> Result<WitnessMinimum> {
        let n = self.n;
        let start_value = self.value(&u1, &u2);
        let mut best = WitnessMinimum { value: start_value, u1: u1.clone(), u2: u2.clone(), restart };
        if iterations == 0 {
            return Ok(best);
        }

        let p = n * n;
        let objective = |x: &[f64]| match self.twist(&u1, &u2, x) {
            Ok((a, b)) => self.value(&a, &b),
            Err(_) => f64::INFINITY,
        };
        let (x, fx) = nelder_mead(objective, &vec![0.0; 2 * p], 0.5, iterations);
        if fx < best.value {
            let (a, b) = self.twist(&u1, &u2, &x)?;
            best = WitnessMinimum { value: self.value(&a, &b), u1: a, u2: b, restart };
        }

        let (a, b) = self.descend(best.u1.clone(), best.u2.clone(), iterations)?;
        let value = self.value(&a, &b);
        if value < best.value {
            best = WitnessMinimum { value, u1: a, u2: b, restart };
        }
        Ok(best)
    }

    fn twist(&self, u1: &ComplexMatrix, u2: &ComplexMatrix, x: &[f64]) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let p = self.n * self.n;
        let g1 = hermitian_from_params(self.n, &x[..p]);
        let g2 = hermitian_from_params(self.n, &x[p..]);
        Ok((&unitary_exp(&g1)? * u1, &unitary_exp(&g2)? * u2))
    }

    /// Local Riemannian gradients `(tr₂ C, tr₁ C)` with `C = i[W_U, ρ]`.
    fn gradient(&self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let u = kron(u1, u2)?;
        let wu = &(&u * self.w.matrix()) * &u.adjoint();
        let comm = &(&wu * self.rho) - &(self.rho * &wu);
        let c = comm.scale_complex(C64::new(0.0, 1.0)).hermitian_part();
        Ok((partial_trace(&c, self.n, Subsystem::Second)?, partial_trace(&c, self.n, Subsystem::First)?))
    }

    fn descend(
        &self,
        mut u1: ComplexMatrix,
        mut u2: ComplexMatrix,
        iterations: usize,
    ) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let mut f = self.value(&u1, &u2);
        let mut step = 0.5;
        for _ in 0..iterations {
            let (g1, g2) = self.gradient(&u1, &u2)?;
            let gnorm2 = g1.frobenius_norm().powi(2) + g2.frobenius_norm().powi(2);
            if gnorm2 < 1e-26 {
                break;
            }
            // Armijo backtracking along exp(−i t g)
            let mut accepted = false;
            for _ in 0..40 {
                let c1 = &unitary_exp(&g1.scale(-step))? * &u1;
                let c2 = &unitary_exp(&g2.scale(-step))? * &u2;
                let fc = self.value(&c1, &c2);
                if fc <= f - 1e-4 * step * gnorm2 {
                    u1 = c1;
                    u2 = c2;
                    f = fc;
                    accepted = true;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok((u1, u2))
    }
}

/// Hermitian `N×N` matrix from `N²` reals: the diagonal first, then the real
/// and imaginary parts of each upper-triangular entry.
pub(crate) fn hermitian_from_params(n: usize, x: &[f64]) -> ComplexMatrix {
    debug_assert_eq!(x.len(), n * n);
    let mut entries = vec![C64::default(); n * n];
    for i in 0..n {
        entries[i * n + i] = C64::new(x[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = C64::new(x[k], x[k + 1]);
            entries[i * n + j] = z;
            entries[j * n + i] = z.conj();
            k += 2;
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| entries[i * n + j])
}

/// Nelder–Mead with the standard coefficients, starting from an axis-aligned
/// simplex of edge `step` around `x0`. Returns the best vertex and its value.
fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..dim {
        let mut x = x0.to_vec();
        x[k] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };

    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> =
            (0..dim).map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64).collect();

        let xr = lerp(&centroid, &worst.0, -REFLECT);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &worst.0, -EXPAND);
            let fe = f(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = lerp(&centroid, &xr, CONTRACT);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = lerp(&centroid, &worst.0, CONTRACT);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x = lerp(&best, &v.0, SHRINK);
            let fx = f(&x);
            *v = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{build_witness, twisted_witness, witness_value, WitnessForm};
    use crate::states;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, fx) = nelder_mead(|x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 400);
        assert!(fx < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn generator_parametrization_is_hermitian_and_complete() {
        let x: Vec<f64> = (0..16).map(|k| k as f64 * 0.1 - 0.7).collect();
        let h = hermitian_from_params(4, &x);
        assert!(h.is_hermitian(0.0));
        assert_eq!(h.get(0, 0).re, x[0]);
        assert_eq!(h.get(0, 1), C64::new(x[4], x[5]));
        assert_eq!(h.get(3, 2), C64::new(x[14], -x[15]));
    }

    #[test]
    fn identity_start_without_iterations_returns_plain_value() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let rho = states::family_state(&sys, 0.3).unwrap();
        let budget = MinimizeBudget { restarts: 1, iterations: 0, seed: 1 };
        let m = minimize_witness(&w, rho.matrix(), &sys, budget).unwrap();
        assert_eq!(m.value, witness_value(&w, rho.matrix()).unwrap());
        assert_eq!(m.restart, 0);
    }

    #[test]
    fn zero_restarts_rejected() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let rho = states::werner_state(&sys).unwrap();
        let budget = MinimizeBudget { restarts: 0, iterations: 10, seed: 1 };
        assert!(minimize_witness(&w, rho.matrix(), &sys, budget).is_err());
    }

    #[test]
    fn singlet_minimum_reaches_witness_floor() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let p0 = sys.singlet_projector();
        let m = minimize_witness(&w, &p0, &sys, MinimizeBudget { restarts: 2, iterations: 100, seed: 3 }).unwrap();
        assert!(m.value <= -2.0 + 1e-12);
    }

    #[test]
    fn result_is_reproducible_and_reevaluates() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let w = build_witness(&sys, WitnessForm::Swap).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let rho = states::random_density(4, 4, &mut rng).unwrap();
        let budget = MinimizeBudget { restarts: 3, iterations: 150, seed: 5 };
        let a = minimize_witness(&w, rho.matrix(), &sys, budget).unwrap();
        let b = minimize_witness(&w, rho.matrix(), &sys, budget).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.u1, b.u1);
        let wu = twisted_witness(&w, &a.u1, &a.u2).unwrap();
        let re = wu.trace_product(rho.matrix()).unwrap().re;
        assert!((re - a.value).abs() < 1e-10);
        assert!(a.value <= witness_value(&w, rho.matrix()).unwrap());
    }
}
