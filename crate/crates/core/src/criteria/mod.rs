//! Separability criteria on `C^N ⊗ C^N`: the positive map `Φ`, its lifting to
//! the composite system, partial transposition and time reversal,
//! realignment, and the witness `W` derived from `Φ`.

mod optimize;
mod witness;

pub use optimize::{minimize_witness, MinimizeBudget, WitnessMinimum};
pub use witness::{build_witness, twisted_witness, witness_value, Witness, WitnessForm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkit::{trace_norm, ComplexMatrix, C64};
use crate::spinspace::CoupledSpinSystem;

/// Tolerance for every strict-inequality verdict.
pub const VERDICT_TOL: f64 = 1e-9;

/// Positive map `ΦB = (tr B) I − B − ϑB`.
pub fn phi_apply(b: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<ComplexMatrix> {
    let tb = sys.time_reverse(b)?;
    let n = sys.n();
    let id = ComplexMatrix::identity(n).scale_complex(b.trace());
    Ok(&(&id - b) - &tb)
}

/// Local maps that can be lifted to `I ⊗ Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalMap {
    Transpose,
    TimeReverse,
    Phi,
}

impl LocalMap {
    fn apply(self, b: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<ComplexMatrix> {
        match self {
            LocalMap::Transpose => Ok(b.transpose()),
            LocalMap::TimeReverse => sys.time_reverse(b),
            LocalMap::Phi => phi_apply(b, sys),
        }
    }
}

fn require_composite(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<()> {
    let d = sys.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::Dimension(format!(
            "expected a {d}x{d} operator on C^{0} ⊗ C^{0}, got {1}x{2}",
            sys.n(),
            rho.rows(),
            rho.cols()
        )));
    }
    Ok(())
}

/// `(I ⊗ Λ) ρ`, applied block by block over the subsystem-1 indices.
pub fn lift_on_2(map: LocalMap, rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<ComplexMatrix> {
    require_composite(rho, sys)?;
    let n = sys.n();
    let d = sys.dim();
    let mut out = vec![C64::default(); d * d];
    for a in 0..n {
        for b in 0..n {
            let block = ComplexMatrix::from_fn(n, n, |c, e| rho.get(a * n + c, b * n + e));
            let mapped = map.apply(&block, sys)?;
            for c in 0..n {
                for e in 0..n {
                    out[(a * n + c) * d + b * n + e] = mapped.get(c, e);
                }
            }
        }
    }
    ComplexMatrix::from_row_major(d, d, out)
}

/// `||T₂ρ||`.
pub fn partial_transpose_norm(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<f64> {
    trace_norm(&lift_on_2(LocalMap::Transpose, rho, sys)?)
}

/// `||ϑ₂ρ||`; equal to [`partial_transpose_norm`] since `ϑ` and `T` are unitarily equivalent.
pub fn partial_time_reversal_norm(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<f64> {
    trace_norm(&lift_on_2(LocalMap::TimeReverse, rho, sys)?)
}

/// Realignment in the form `Rρ = ϑ₂(Fρ)`.
pub fn realign(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<ComplexMatrix> {
    require_composite(rho, sys)?;
    lift_on_2(LocalMap::TimeReverse, &(sys.swap() * rho), sys)
}

/// Realignment by index reshuffling, `M[(i,j),(k,l)] = ρ[(i,k),(j,l)]`.
///
/// Differs from [`realign`] by a unitary change of basis, so the two share
/// trace norms but not entries.
pub fn realign_reshuffle(rho: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let d = n * n;
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::Dimension(format!("reshuffle expects {d}x{d}, got {}x{}", rho.rows(), rho.cols())));
    }
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        rho.get(i * n + k, j * n + l)
    }))
}

/// `||Rρ||` using the canonical form.
pub fn realign_norm(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<f64> {
    trace_norm(&realign(rho, sys)?)
}

/// Outcome of the three separability tests on one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaVerdict {
    pub ppt_violated: bool,
    pub realignment_violated: bool,
    /// `tr(Wρ)`.
    pub witness_value: f64,
    pub witness_detects: bool,
    pub trace_norm_t2: f64,
    pub trace_norm_r: f64,
}

impl CriteriaVerdict {
    pub fn from_values(trace_norm_t2: f64, trace_norm_r: f64, witness_value: f64) -> Self {
        Self {
            ppt_violated: trace_norm_t2 > 1.0 + VERDICT_TOL,
            realignment_violated: trace_norm_r > 1.0 + VERDICT_TOL,
            witness_value,
            witness_detects: witness_value < -VERDICT_TOL,
            trace_norm_t2,
            trace_norm_r,
        }
    }

    /// Detected by `W` and by neither trace-norm criterion.
    pub fn witness_only(&self) -> bool {
        self.witness_detects && !self.ppt_violated && !self.realignment_violated
    }

    pub fn any_detects(&self) -> bool {
        self.witness_detects || self.ppt_violated || self.realignment_violated
    }
}

pub fn evaluate_criteria(rho: &ComplexMatrix, sys: &CoupledSpinSystem) -> Result<CriteriaVerdict> {
    let w = build_witness(sys, WitnessForm::Swap)?;
    evaluate_criteria_with(rho, sys, &w)
}

/// [`evaluate_criteria`] with a prebuilt witness, for batch use.
pub fn evaluate_criteria_with(rho: &ComplexMatrix, sys: &CoupledSpinSystem, w: &Witness) -> Result<CriteriaVerdict> {
    let t2 = partial_transpose_norm(rho, sys)?;
    let r = realign_norm(rho, sys)?;
    let wv = witness_value(w, rho)?;
    Ok(CriteriaVerdict::from_values(t2, r, wv))
}
