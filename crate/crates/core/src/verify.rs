//! Self-checks comparing the numeric pipeline against the analytic oracles.
//!
//! Each suite returns a list of [`Check`]s carrying the largest deviation
//! seen and the tolerance it was held to. Suites that sample random states
//! need a seed; the others are deterministic.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{family_bounds_closed_form, family_bounds_numeric};
use crate::criteria::{
    build_witness, lift_on_2, partial_transpose_norm, realign_norm, twisted_witness, witness_value, LocalMap,
    WitnessForm,
};
use crate::error::{Error, Result};
use crate::matkit::{hermitian_spectrum, C64};
use crate::oracle::{
    appendix_a_value, cluster_eigenvalues, family_trace_norms_closed_form, family_witness_closed_form,
    witness_spectrum_closed_form, AppendixAConfig, CLUSTER_TOL,
};
use crate::spinspace::CoupledSpinSystem;
use crate::states::{family_state, random_product_unitary, random_pure, random_unitary, schmidt_decompose, seeded_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Witness,
    AppendixA,
    AppendixB,
    Figures,
    All,
}

impl Suite {
    pub fn needs_seed(self) -> bool {
        matches!(self, Suite::AppendixA | Suite::All)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub n: usize,
    /// Random draws for the sampling suites.
    pub samples: usize,
    pub seed: Option<u64>,
    /// Replaces every built-in tolerance when set.
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_error, tolerance, passed: max_error <= tolerance }
    }
}

struct Ctx<'a> {
    cfg: &'a VerifyConfig,
    out: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, name: &str, max_error: f64, tolerance: f64) {
        let tol = self.cfg.tol.unwrap_or(tolerance);
        let err = if max_error.is_nan() { f64::INFINITY } else { max_error };
        self.out.push(Check::new(format!("{name} (N={})", self.cfg.n), err, tol));
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    if suite.needs_seed() && cfg.seed.is_none() {
        return Err(Error::Domain("this suite samples random states and needs a seed".into()));
    }
    if cfg.samples == 0 && suite.needs_seed() {
        return Err(Error::Domain("samples must be at least 1".into()));
    }
    let sys = CoupledSpinSystem::shared(cfg.n)?;
    let mut ctx = Ctx { cfg, out: Vec::new() };
    match suite {
        Suite::Witness => witness_suite(&mut ctx, &sys)?,
        Suite::AppendixA => appendix_a_suite(&mut ctx, &sys)?,
        Suite::AppendixB => appendix_b_suite(&mut ctx, &sys)?,
        Suite::Figures => figures_suite(&mut ctx, &sys)?,
        Suite::All => {
            witness_suite(&mut ctx, &sys)?;
            appendix_a_suite(&mut ctx, &sys)?;
            appendix_b_suite(&mut ctx, &sys)?;
            figures_suite(&mut ctx, &sys)?;
        }
    }
    Ok(ctx.out)
}

fn witness_suite(ctx: &mut Ctx, sys: &CoupledSpinSystem) -> Result<()> {
    let n = sys.n();
    let forms: Vec<_> = WitnessForm::ALL.iter().map(|&f| build_witness(sys, f)).collect::<Result<_>>()?;
    let diff = forms[0].matrix().max_abs_diff(forms[1].matrix()).max(forms[1].matrix().max_abs_diff(forms[2].matrix()));
    ctx.push("witness: three constructions agree", diff, 1e-10);

    let spec = hermitian_spectrum(forms[1].matrix())?;
    let expected = witness_spectrum_closed_form(n)?;
    let mut flat = Vec::with_capacity(n * n);
    for &(v, m) in &expected {
        flat.extend(std::iter::repeat_n(v, m));
    }
    let eig_err = spec.values.iter().zip(&flat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ctx.push("witness: spectrum matches closed form", eig_err, 1e-9);

    let clusters = cluster_eigenvalues(&spec.values, CLUSTER_TOL);
    let mult_ok = clusters.len() == expected.len() && clusters.iter().zip(&expected).all(|(a, b)| a.1 == b.1);
    ctx.push("witness: eigenvalue multiplicities", if mult_ok { 0.0 } else { 1.0 }, 0.0);

    let tr = forms[1].matrix().trace().re;
    ctx.push("witness: tr W = N(N-2)", (tr - (n * (n - 2)) as f64).abs(), 1e-10);
    Ok(())
}

fn appendix_a_suite(ctx: &mut Ctx, sys: &CoupledSpinSystem) -> Result<()> {
    let n = sys.n();
    let seed = ctx.cfg.seed.expect("checked by run_suite");
    let samples = ctx.cfg.samples;

    // random orthonormal frames, one ChaCha stream per sample
    let frame_stats: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<(f64, f64)> {
            let mut rng = seeded_rng(seed, s as u64);
            let b1 = random_unitary(n, &mut rng);
            let b2 = random_unitary(n, &mut rng);
            let i = s % n;
            let j = (s / n + 1 + i) % n;
            let t = appendix_a_value(&AppendixAConfig::from_frames(&b1, &b2, i, j)?, sys)?;
            let factor_err = (C64::new(t.value[0], t.value[1]) - C64::new(t.factored[0], t.factored[1])).norm();
            Ok(((t.modulus() - 1.0).max(0.0), factor_err))
        })
        .collect::<Result<_>>()?;
    let excess = frame_stats.iter().map(|p| p.0).fold(0.0, f64::max);
    let factor = frame_stats.iter().map(|p| p.1).fold(0.0, f64::max);
    ctx.push("appendixA: |A_ij| <= 1 on random frames", excess, 1e-12);
    ctx.push("appendixA: factored form of A_ij", factor, 1e-12);

    // −⟨ψ|W_U|ψ⟩ ≤ Σ_{i≠j} α_i α_j for random pure states and random twists
    let w = build_witness(sys, WitnessForm::Swap)?;
    let pure_stats: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let mut rng = seeded_rng(seed, (samples + s) as u64);
            let psi = random_pure(n, &mut rng)?;
            let alpha = schmidt_decompose(&psi)?.coefficients;
            let total: f64 = alpha.iter().sum();
            let cross = total * total - alpha.iter().map(|a| a * a).sum::<f64>();
            let plain = -w.matrix().expectation(psi.vector())?.re;
            let (u1, u2) = random_product_unitary(n, &mut rng);
            let twisted = -twisted_witness(&w, &u1, &u2)?.expectation(psi.vector())?.re;
            Ok((plain.max(twisted) - cross).max(0.0))
        })
        .collect::<Result<_>>()?;
    ctx.push("appendixA: -<psi|W_U|psi> <= sum_{i!=j} a_i a_j", pure_stats.into_iter().fold(0.0, f64::max), 1e-10);
    Ok(())
}

fn lambda_grid() -> impl Iterator<Item = f64> {
    (0..=100).map(|k| k as f64 / 100.0)
}

fn appendix_b_suite(ctx: &mut Ctx, sys: &CoupledSpinSystem) -> Result<()> {
    let n = sys.n();
    let w = build_witness(sys, WitnessForm::Swap)?;
    let rows: Vec<(f64, f64, f64)> = lambda_grid()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| -> Result<(f64, f64, f64)> {
            let rho = family_state(sys, l)?;
            let (t2, r) = family_trace_norms_closed_form(n, l)?;
            let e_t2 = (partial_transpose_norm(rho.matrix(), sys)? - t2).abs();
            let e_r = (realign_norm(rho.matrix(), sys)? - r).abs();
            let e_w = (witness_value(&w, rho.matrix())? - family_witness_closed_form(n, l)?).abs();
            Ok((e_t2, e_r, e_w))
        })
        .collect::<Result<_>>()?;
    ctx.push("appendixB: ||T2 rho(lambda)||", rows.iter().map(|r| r.0).fold(0.0, f64::max), 1e-9);
    ctx.push("appendixB: ||R rho(lambda)||", rows.iter().map(|r| r.1).fold(0.0, f64::max), 1e-9);
    ctx.push("appendixB: tr(W rho(lambda))", rows.iter().map(|r| r.2).fold(0.0, f64::max), 1e-12);

    // PPT yet detected by W on (0, 1/(N+2)]
    let edge = 1.0 / (n as f64 + 2.0);
    let mut worst_eig = 0.0f64;
    let mut worst_w = f64::NEG_INFINITY;
    for k in 1..=20 {
        let l = edge * k as f64 / 20.0;
        let rho = family_state(sys, l)?;
        let t2 = lift_on_2(LocalMap::Transpose, rho.matrix(), sys)?;
        worst_eig = worst_eig.min(hermitian_spectrum(&t2)?.min());
        worst_w = worst_w.max(witness_value(&w, rho.matrix())?);
    }
    ctx.push("appendixB: rho(lambda) is PPT below 1/(N+2)", (-worst_eig).max(0.0), 1e-10);
    ctx.push("appendixB: W detects rho(lambda) below 1/(N+2)", if worst_w < 0.0 { 0.0 } else { worst_w }, 0.0);
    Ok(())
}

fn figures_suite(ctx: &mut Ctx, sys: &CoupledSpinSystem) -> Result<()> {
    let n = sys.n();
    let rows: Vec<_> = lambda_grid()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| Ok((family_bounds_numeric(sys, l)?, family_bounds_closed_form(n, l)?)))
        .collect::<Result<_>>()?;
    let mut conc = 0.0f64;
    let mut eof = 0.0f64;
    let mut order = 0.0f64;
    for (a, b) in &rows {
        conc = conc
            .max((a.bound_witness - b.bound_witness).abs())
            .max((a.bound_ppt - b.bound_ppt).abs())
            .max((a.bound_realign - b.bound_realign).abs());
        eof = eof.max((a.eof_new - b.eof_new).abs()).max((a.eof_old - b.eof_old).abs());
        order = order.max(a.eof_old - a.eof_new).max(a.eof_new - a.eof_upper);
    }
    ctx.push("figures: concurrence bounds, pipeline vs closed form", conc, 1e-9);
    ctx.push("figures: eof bounds, pipeline vs closed form", eof, 1e-9);
    ctx.push("figures: eof_old <= eof_new <= eof_upper", order.max(0.0), 1e-12);

    let half = family_bounds_numeric(sys, 0.5)?;
    ctx.push("figures: witness and PPT bounds cross at 1/2", (half.bound_witness - half.bound_ppt).abs(), 1e-9);
    let top = family_bounds_numeric(sys, 1.0)?;
    ctx.push("figures: eof_new(1) = log2 N", (top.eof_new - (n as f64).log2()).abs(), 1e-9);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> VerifyConfig {
        VerifyConfig { n, samples: 200, seed: Some(1), tol: None }
    }

    #[test]
    fn all_suites_pass_n4() {
        let checks = run_suite(Suite::All, &cfg(4)).unwrap();
        assert!(checks.len() >= 15);
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn appendix_b_passes_n6() {
        for c in run_suite(Suite::AppendixB, &cfg(6)).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn seed_required_for_sampling() {
        let c = VerifyConfig { seed: None, ..cfg(4) };
        assert!(run_suite(Suite::AppendixA, &c).is_err());
        assert!(run_suite(Suite::Witness, &c).is_ok());
    }

    #[test]
    fn tolerance_override_can_fail_a_check() {
        let c = VerifyConfig { tol: Some(-1.0), ..cfg(4) };
        assert!(run_suite(Suite::Witness, &c).unwrap().iter().all(|c| !c.passed));
    }

    #[test]
    fn odd_dimension_rejected() {
        assert!(run_suite(Suite::Witness, &cfg(5)).is_err());
    }
}
