//! Lower bounds on concurrence and entanglement of formation.
//!
//! Any convex functional `f` with `f(|ψ⟩⟨ψ|) ≤ Σ_{i≠j} α_i α_j` yields
//! `C(ρ) ≥ √(2/(N(N−1))) f(ρ)`. Three such functionals are used here:
//! `||T₂ρ|| − 1`, `||Rρ|| − 1` and `−tr(Wρ)`.
//!
//! The entanglement-of-formation bound is `co[R](Λ₀)`, with `co[R]` taken in
//! the Terhal–Vollbrecht piecewise form (exact on the curved branch, a chord
//! on `[4(N−1)/N, N]`). That form rests on their conjecture about the convex
//! hull of `R`. All logarithms are base 2.

use serde::{Deserialize, Serialize};

use crate::criteria::{
    build_witness, minimize_witness, partial_transpose_norm, realign_norm, witness_value, MinimizeBudget, WitnessForm,
};
use crate::error::{Error, Result};
use crate::oracle::family_trace_norms_closed_form;
use crate::spinspace::CoupledSpinSystem;
use crate::states::{family_state, DensityMatrix};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BoundOptions {
    /// Also minimize `tr(W_U ρ)` over product unitaries.
    pub optimize: Option<MinimizeBudget>,
}

/// Which functionals enter `Λ₀` for the entanglement-of-formation bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EofMode {
    /// `max{||T₂ρ||, ||Rρ||, 1 − tr(Wρ)}`.
    Witness,
    /// `max{||T₂ρ||, ||Rρ||}`.
    Legacy,
}

/// All criterion functionals and the bounds derived from them for one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n_local: usize,
    /// `||T₂ρ|| − 1` (raw, may be negative).
    pub f_ppt: f64,
    /// `||Rρ|| − 1` (raw).
    pub f_realign: f64,
    /// `−tr(Wρ)` (raw).
    pub f_witness: f64,
    /// `−min_U tr(W_U ρ)`, when optimization was requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_witness_optimized: Option<f64>,
    pub concurrence_lower: f64,
    pub lambda0: f64,
    pub eof_lower: f64,
    pub lambda0_legacy: f64,
    pub eof_lower_legacy: f64,
}

/// `√(2/(N(N−1)))`.
pub fn concurrence_prefactor(n: usize) -> f64 {
    let n = n as f64;
    (2.0 / (n * (n - 1.0))).sqrt()
}

fn check_dim(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

fn check_unit_interval(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{what} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Functional values this close to zero are roundoff in the trace norms
/// and count as zero when forming bounds.
pub const FUNCTIONAL_NOISE: f64 = 1e-12;

fn positive_part(f: f64) -> f64 {
    if f > FUNCTIONAL_NOISE {
        f
    } else {
        0.0
    }
}

fn clamp_lambda0(x: f64, n: usize) -> f64 {
    x.clamp(1.0, n as f64)
}

impl BoundReport {
    /// Assembles a report from raw functional values.
    pub fn from_functionals(n: usize, f_ppt: f64, f_realign: f64, f_witness: f64, f_opt: Option<f64>) -> Result<Self> {
        check_dim(n)?;
        let best_f = [Some(f_ppt), Some(f_realign), Some(f_witness), f_opt]
            .into_iter()
            .flatten()
            .fold(f64::NEG_INFINITY, f64::max);
        let concurrence_lower = concurrence_prefactor(n) * positive_part(best_f);
        let lambda0 = clamp_lambda0(1.0 + positive_part(best_f), n);
        let lambda0_legacy = clamp_lambda0(1.0 + positive_part(f_ppt.max(f_realign)), n);
        Ok(Self {
            n_local: n,
            f_ppt,
            f_realign,
            f_witness,
            f_witness_optimized: f_opt,
            concurrence_lower,
            lambda0,
            eof_lower: convex_hull_r(lambda0, n)?,
            lambda0_legacy,
            eof_lower_legacy: convex_hull_r(lambda0_legacy, n)?,
        })
    }
}

/// Evaluates every functional on `rho` and the bounds they imply.
pub fn concurrence_lower_bound(
    rho: &DensityMatrix,
    sys: &CoupledSpinSystem,
    options: &BoundOptions,
) -> Result<BoundReport> {
    if rho.n_local() != sys.n() {
        return Err(Error::Dimension(format!("state for N={} against system N={}", rho.n_local(), sys.n())));
    }
    let m = rho.matrix();
    let f_ppt = partial_transpose_norm(m, sys)? - 1.0;
    let f_realign = realign_norm(m, sys)? - 1.0;
    let w = build_witness(sys, WitnessForm::Swap)?;
    let f_witness = -witness_value(&w, m)?;
    let f_opt = match options.optimize {
        Some(budget) => Some(-minimize_witness(&w, m, sys, budget)?.value),
        None => None,
    };
    BoundReport::from_functionals(sys.n(), f_ppt, f_realign, f_witness, f_opt)
}

/// `co[R](Λ₀)` for the selected combination of functionals.
pub fn eof_lower_bound(
    rho: &DensityMatrix,
    sys: &CoupledSpinSystem,
    options: &BoundOptions,
    mode: EofMode,
) -> Result<f64> {
    let report = concurrence_lower_bound(rho, sys, options)?;
    Ok(match mode {
        EofMode::Witness => report.eof_lower,
        EofMode::Legacy => report.eof_lower_legacy,
    })
}

/// `H₂(x) = −x log x − (1−x) log(1−x)`, with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

fn check_lambda(lambda: f64, n: usize) -> Result<()> {
    check_dim(n)?;
    if !(1.0..=n as f64).contains(&lambda) {
        return Err(Error::Domain(format!("Λ = {lambda} outside [1, {n}]")));
    }
    Ok(())
}

/// `γ(Λ) = [√Λ + √((N−1)(N−Λ))]² / N²`.
pub fn gamma(lambda: f64, n: usize) -> Result<f64> {
    check_lambda(lambda, n)?;
    let nf = n as f64;
    let s = lambda.sqrt() + ((nf - 1.0) * (nf - lambda)).sqrt();
    Ok((s * s / (nf * nf)).min(1.0))
}

/// Minimal Schmidt entropy at fixed `Σ_ij α_i α_j = Λ`:
/// `R(Λ) = H₂(γ) + (1 − γ) log(N − 1)`.
pub fn min_entropy_r(lambda: f64, n: usize) -> Result<f64> {
    let g = gamma(lambda, n)?;
    Ok(binary_entropy(g) + (1.0 - g) * ((n - 1) as f64).log2())
}

/// Breakpoint `4(N−1)/N` between the curved and linear branches of `co[R]`.
pub fn hull_breakpoint(n: usize) -> f64 {
    4.0 * (n as f64 - 1.0) / n as f64
}

/// Convex hull `co[R](Λ₀)` in its piecewise form.
pub fn convex_hull_r(lambda0: f64, n: usize) -> Result<f64> {
    check_lambda(lambda0, n)?;
    if lambda0 <= hull_breakpoint(n) {
        min_entropy_r(lambda0, n)
    } else {
        Ok(hull_linear_branch(lambda0, n))
    }
}

/// `log(N−1)/(N−2) · (Λ₀ − N) + log N`.
pub fn hull_linear_branch(lambda0: f64, n: usize) -> f64 {
    let nf = n as f64;
    (nf - 1.0).log2() / (nf - 2.0) * (lambda0 - nf) + nf.log2()
}

/// Analytic bounds for `ρ(λ)` at one `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCurvePoint {
    pub lambda: f64,
    pub bound_witness: f64,
    pub bound_ppt: f64,
    pub bound_realign: f64,
    pub bound_upper: f64,
    pub eof_new: f64,
    pub eof_old: f64,
    pub eof_upper: f64,
    /// Unclamped formula values behind the three lower bounds.
    pub raw_witness: f64,
    pub raw_ppt: f64,
    pub raw_realign: f64,
}

/// Piecewise closed forms for the bounds on `ρ(λ)`.
pub fn family_bounds_closed_form(n: usize, lambda: f64) -> Result<FamilyCurvePoint> {
    check_dim(n)?;
    check_unit_interval(lambda, "λ")?;
    let nf = n as f64;
    let pre = (2.0 * (nf - 1.0) / nf).sqrt();
    let low = 1.0 / (nf + 2.0);

    let raw_witness = pre * (nf - 2.0) / (nf - 1.0) * lambda;
    let raw_ppt = if lambda <= low {
        0.0
    } else if lambda <= 0.5 {
        pre * (nf - 2.0) / (nf * (nf - 1.0)) * ((nf + 2.0) * lambda - 1.0)
    } else {
        pre * (nf * lambda - 1.0) / (nf - 1.0)
    };
    let raw_realign =
        if lambda <= low { pre * (-2.0 * lambda) / (nf - 1.0) } else { pre * (nf * lambda - 1.0) / (nf - 1.0) };

    let (ppt_norm, realign_norm) = family_trace_norms_closed_form(n, lambda)?;
    let witness_norm = 1.0 + (nf - 2.0) * lambda;
    let lambda0_new = clamp_lambda0(ppt_norm.max(realign_norm).max(witness_norm), n);
    let lambda0_old = clamp_lambda0(ppt_norm.max(realign_norm), n);

    Ok(FamilyCurvePoint {
        lambda,
        bound_witness: raw_witness.max(0.0),
        bound_ppt: raw_ppt.max(0.0),
        bound_realign: raw_realign.max(0.0),
        bound_upper: pre * lambda,
        eof_new: convex_hull_r(lambda0_new, n)?,
        eof_old: convex_hull_r(lambda0_old, n)?,
        eof_upper: lambda * nf.log2(),
        raw_witness,
        raw_ppt,
        raw_realign,
    })
}

/// One `λ` of the family sweep computed through the numeric pipeline: the
/// state is built, the criteria are evaluated on it and the bounds follow.
/// The two upper bounds come from the explicit decomposition of `ρ(λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySweepRow {
    pub lambda: f64,
    #[serde(rename = "tr_W_rho")]
    pub tr_w_rho: f64,
    pub bound_witness: f64,
    #[serde(rename = "norm_T2")]
    pub norm_t2: f64,
    pub bound_ppt: f64,
    #[serde(rename = "norm_R")]
    pub norm_r: f64,
    pub bound_realign: f64,
    pub bound_upper: f64,
    pub eof_new: f64,
    pub eof_old: f64,
    pub eof_upper: f64,
}

impl FamilySweepRow {
    pub const HEADER: [&'static str; 11] = [
        "lambda",
        "tr_W_rho",
        "bound_witness",
        "norm_T2",
        "bound_ppt",
        "norm_R",
        "bound_realign",
        "bound_upper",
        "eof_new",
        "eof_old",
        "eof_upper",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.lambda,
            self.tr_w_rho,
            self.bound_witness,
            self.norm_t2,
            self.bound_ppt,
            self.norm_r,
            self.bound_realign,
            self.bound_upper,
            self.eof_new,
            self.eof_old,
            self.eof_upper,
        ]
    }
}

pub fn family_bounds_numeric(sys: &CoupledSpinSystem, lambda: f64) -> Result<FamilySweepRow> {
    let rho = family_state(sys, lambda)?;
    let n = sys.n();
    let m = rho.matrix();
    let w = build_witness(sys, WitnessForm::Swap)?;
    let tr_w_rho = witness_value(&w, m)?;
    let norm_t2 = partial_transpose_norm(m, sys)?;
    let norm_r = realign_norm(m, sys)?;
    let report = BoundReport::from_functionals(n, norm_t2 - 1.0, norm_r - 1.0, -tr_w_rho, None)?;
    let pre = concurrence_prefactor(n);
    let nf = n as f64;
    Ok(FamilySweepRow {
        lambda,
        tr_w_rho,
        bound_witness: pre * positive_part(-tr_w_rho),
        norm_t2,
        bound_ppt: pre * positive_part(norm_t2 - 1.0),
        norm_r,
        bound_realign: pre * positive_part(norm_r - 1.0),
        bound_upper: (2.0 * (nf - 1.0) / nf).sqrt() * lambda,
        eof_new: report.eof_lower,
        eof_old: report.eof_lower_legacy,
        eof_upper: lambda * nf.log2(),
    })
}

/// Exact concurrence of isotropic states next to the PPT and witness bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicReference {
    pub exact: f64,
    pub ppt_bound: f64,
    pub witness_bound: f64,
}

pub fn isotropic_reference(n: usize, fidelity: f64) -> Result<IsotropicReference> {
    check_dim(n)?;
    check_unit_interval(fidelity, "fidelity")?;
    let nf = n as f64;
    let excess = (fidelity - 1.0 / nf).max(0.0);
    let scale = (2.0 * nf / (nf - 1.0)).sqrt();
    Ok(IsotropicReference {
        exact: scale * excess,
        // √(2/(N(N−1))) (||T₂ρ_f|| − 1) with ||T₂ρ_f|| = N f above 1/N
        ppt_bound: concurrence_prefactor(n) * (nf * fidelity - 1.0).max(0.0),
        witness_bound: scale * (nf - 2.0) / (nf - 1.0) * excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{self, seeded_rng};
    use proptest::prelude::*;

    const SQRT_1_6: f64 = 0.408_248_290_463_863;

    #[test]
    fn binary_entropy_edges() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn r_endpoints() {
        for n in [4usize, 6, 8] {
            assert_eq!(min_entropy_r(1.0, n).unwrap(), 0.0);
            assert!((min_entropy_r(n as f64, n).unwrap() - (n as f64).log2()).abs() < 1e-12);
        }
        assert!(min_entropy_r(0.99, 4).is_err());
        assert!(min_entropy_r(4.01, 4).is_err());
        assert!(min_entropy_r(2.0, 5).is_err());
    }

    fn r_by_hand(lambda: f64) -> f64 {
        // N = 4, evaluated without the library helpers
        let g = (lambda.sqrt() + (3.0 * (4.0 - lambda)).sqrt()).powi(2) / 16.0;
        -g * g.log2() - (1.0 - g) * (1.0 - g).log2() + (1.0 - g) * 3f64.log2()
    }

    #[test]
    fn r_at_two() {
        assert!((gamma(2.0, 4).unwrap() - 0.933_013).abs() < 1e-6);
        let r = min_entropy_r(2.0, 4).unwrap();
        assert!((r - r_by_hand(2.0)).abs() < 1e-14);
        assert!((r - 0.46076).abs() < 1e-5);
    }

    #[test]
    fn hull_values() {
        assert!((convex_hull_r(4.0, 4).unwrap() - 2.0).abs() < 1e-12);
        assert!((min_entropy_r(3.0, 4).unwrap() - hull_linear_branch(3.0, 4)).abs() < 1e-9);
        assert!((gamma(1.5, 4).unwrap() - 0.981_762_7).abs() < 1e-6);
        let v = convex_hull_r(1.5, 4).unwrap();
        assert!((v - r_by_hand(1.5)).abs() < 1e-14);
        assert!((v - 0.16032).abs() < 1e-4);
        assert!(convex_hull_r(0.5, 4).is_err());
    }

    #[test]
    fn hull_continuous_at_breakpoint() {
        for n in [4usize, 6, 8, 10] {
            let b = hull_breakpoint(n);
            assert!((min_entropy_r(b, n).unwrap() - hull_linear_branch(b, n)).abs() < 1e-9, "N={n}");
        }
    }

    proptest! {
        #[test]
        fn hull_is_convex(n in prop::sample::select(vec![4usize, 6, 8]), t in 0.0f64..1.0, h in 1e-4f64..0.2) {
            let lo = 1.0;
            let hi = n as f64;
            let x = lo + h + t * (hi - lo - 2.0 * h);
            let f = |z: f64| convex_hull_r(z, n).unwrap();
            prop_assert!(f(x - h) + f(x + h) - 2.0 * f(x) >= -1e-10);
        }

        #[test]
        fn r_is_monotone(n in prop::sample::select(vec![4usize, 6, 8]), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let hi = n as f64;
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            let x = 1.0 + x * (hi - 1.0);
            let y = 1.0 + y * (hi - 1.0);
            prop_assert!(min_entropy_r(x, n).unwrap() <= min_entropy_r(y, n).unwrap() + 1e-12);
        }
    }

    #[test]
    fn closed_form_crossing_and_endpoints() {
        let p = family_bounds_closed_form(4, 0.5).unwrap();
        assert!((p.bound_witness - SQRT_1_6).abs() < 1e-12);
        assert!((p.bound_ppt - SQRT_1_6).abs() < 1e-12);
        let p = family_bounds_closed_form(4, 0.25).unwrap();
        assert!(p.raw_realign.abs() < 1e-15);
        let p = family_bounds_closed_form(4, 1.0).unwrap();
        assert!((p.bound_ppt - 1.5f64.sqrt()).abs() < 1e-12);
        assert!((p.bound_upper - 1.5f64.sqrt()).abs() < 1e-12);
        assert!((p.eof_new - 2.0).abs() < 1e-12);
        assert!(family_bounds_closed_form(4, 1.1).is_err());
        assert!(family_bounds_closed_form(5, 0.5).is_err());
    }

    #[test]
    fn closed_form_lambda0_matches_family_expression() {
        // Λ₀ = max{Nλ, (N−2)λ + 1} for the family
        for n in [4usize, 6, 8] {
            for k in 0..=100 {
                let l = k as f64 / 100.0;
                let nf = n as f64;
                let lam0 = (nf * l).max((nf - 2.0) * l + 1.0);
                let p = family_bounds_closed_form(n, l).unwrap();
                assert!((p.eof_new - convex_hull_r(lam0, n).unwrap()).abs() < 1e-12);
                assert!(p.eof_new >= p.eof_old - 1e-15);
                assert!(p.bound_upper + 1e-9 >= p.bound_witness.max(p.bound_ppt).max(p.bound_realign));
            }
        }
    }

    #[test]
    fn report_on_family_states() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let opts = BoundOptions::default();
        let r = concurrence_lower_bound(&family_state(&sys, 0.1).unwrap(), &sys, &opts).unwrap();
        assert!((r.concurrence_lower - 0.081_649_658).abs() < 1e-8);
        assert!(r.f_ppt <= 1e-9 && r.f_realign < 0.0);

        let r = concurrence_lower_bound(&family_state(&sys, 0.75).unwrap(), &sys, &opts).unwrap();
        assert!((r.concurrence_lower - 0.816_496_58).abs() < 1e-8);
        assert!((concurrence_prefactor(4) * r.f_witness - 0.612_372_4).abs() < 1e-7);

        let r = concurrence_lower_bound(&family_state(&sys, 0.25).unwrap(), &sys, &opts).unwrap();
        assert!((r.lambda0 - 1.5).abs() < 1e-10);
        assert!((r.lambda0_legacy - 1.25).abs() < 1e-10);
        assert!((r.eof_lower - 0.16032).abs() < 1e-4);
        assert!((r.eof_lower_legacy - 0.05185).abs() < 1e-4);
        assert_eq!(
            eof_lower_bound(&family_state(&sys, 0.25).unwrap(), &sys, &opts, EofMode::Legacy).unwrap(),
            r.eof_lower_legacy
        );
    }

    #[test]
    fn report_invariants() {
        let r = BoundReport::from_functionals(4, 0.3, -0.2, 0.5, Some(0.7)).unwrap();
        assert!((r.concurrence_lower - concurrence_prefactor(4) * 0.7).abs() < 1e-15);
        assert!((r.lambda0 - 1.7).abs() < 1e-15);
        assert!((r.lambda0_legacy - 1.3).abs() < 1e-15);
        let r = BoundReport::from_functionals(4, -0.1, -0.2, -0.5, None).unwrap();
        assert_eq!(r.concurrence_lower, 0.0);
        assert_eq!(r.lambda0, 1.0);
        assert_eq!(r.eof_lower, 0.0);
        let r = BoundReport::from_functionals(4, 9.0, 0.0, 0.0, None).unwrap();
        assert_eq!(r.lambda0, 4.0);
    }

    #[test]
    fn maximally_mixed_has_no_bound() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let rho = states::isotropic_state(&sys, 1.0 / 16.0).unwrap();
        let r = concurrence_lower_bound(&rho, &sys, &BoundOptions::default()).unwrap();
        assert_eq!(r.concurrence_lower, 0.0);
        assert_eq!(r.eof_lower, 0.0);
    }

    #[test]
    fn separable_product_state_has_zero_bound() {
        let sys = CoupledSpinSystem::shared(4).unwrap();
        let psi = states::random_product_pure(4, &mut seeded_rng(3, 0)).unwrap();
        let r = concurrence_lower_bound(&psi.density(), &sys, &BoundOptions::default()).unwrap();
        assert!(r.concurrence_lower < 1e-9);
        assert!(r.eof_lower < 1e-7);
    }

    #[test]
    fn isotropic_reference_values() {
        for n in [4usize, 6] {
            let r = isotropic_reference(n, 1.0 / n as f64).unwrap();
            assert_eq!((r.exact, r.ppt_bound, r.witness_bound), (0.0, 0.0, 0.0));
        }
        let r = isotropic_reference(4, 1.0).unwrap();
        assert!((r.exact - 1.224_744_87).abs() < 1e-8);
        assert!((r.witness_bound - 0.816_496_58).abs() < 1e-8);
        assert!((r.ppt_bound - r.exact).abs() < 1e-14);
        for f in [0.3, 0.5, 0.9] {
            let r = isotropic_reference(6, f).unwrap();
            assert!((r.witness_bound / r.exact - 4.0 / 5.0).abs() < 1e-12);
        }
        assert!(isotropic_reference(4, -0.1).is_err());
    }

    #[test]
    fn numeric_sweep_matches_closed_form() {
        for n in [4usize, 6] {
            let sys = CoupledSpinSystem::shared(n).unwrap();
            for k in 0..=20 {
                let l = k as f64 / 20.0;
                let a = family_bounds_numeric(&sys, l).unwrap();
                let b = family_bounds_closed_form(n, l).unwrap();
                // the legacy Λ₀ is always set by the PPT norm on this family
                assert!(a.norm_t2 >= a.norm_r - 1e-12, "N={n} λ={l}");
                for (x, y) in [
                    (a.bound_witness, b.bound_witness),
                    (a.bound_ppt, b.bound_ppt),
                    (a.bound_realign, b.bound_realign),
                    (a.bound_upper, b.bound_upper),
                    (a.eof_new, b.eof_new),
                    (a.eof_old, b.eof_old),
                    (a.eof_upper, b.eof_upper),
                ] {
                    assert!((x - y).abs() < 1e-9, "N={n} λ={l}: {x} vs {y}");
                }
            }
        }
    }
}
