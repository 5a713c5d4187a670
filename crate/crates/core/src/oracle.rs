//! Closed-form reference values used to check the numeric pipeline: trace
//! norms and witness values on `ρ(λ)`, the spectrum of `W`, and the overlap
//! quantity `A_ij` that controls the pure-state witness inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkit::{inner, vector_norm, ComplexMatrix, C64, ZERO};
use crate::spinspace::CoupledSpinSystem;

/// Tolerance used to group eigenvalues when counting multiplicities.
pub const CLUSTER_TOL: f64 = 1e-6;

fn check(n: usize, lambda: f64) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(n));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("λ = {lambda} outside [0, 1]")));
    }
    Ok(())
}

/// `(||T₂ρ(λ)||, ||Rρ(λ)||)` from their piecewise closed forms.
pub fn family_trace_norms_closed_form(n: usize, lambda: f64) -> Result<(f64, f64)> {
    check(n, lambda)?;
    let nf = n as f64;
    let low = 1.0 / (nf + 2.0);
    let ppt = if lambda <= low {
        0.0
    } else if lambda <= 0.5 {
        (nf - 2.0) / nf * ((nf + 2.0) * lambda - 1.0)
    } else {
        nf * lambda - 1.0
    };
    let realign = if lambda <= low { -2.0 * lambda } else { nf * lambda - 1.0 };
    Ok((1.0 + ppt, 1.0 + realign))
}

/// The same two norms from the eigenvalue sums over total spin `J`, before
/// the piecewise simplification.
pub fn family_trace_norms_spin_sums(n: usize, lambda: f64) -> Result<(f64, f64)> {
    check(n, lambda)?;
    let nf = n as f64;
    let mix = (1.0 - lambda) / (nf + 1.0);
    let mut ppt = (1.0 - 2.0 * lambda).abs() / nf;
    let mut realign = 1.0 / nf;
    for big_j in 1..n {
        let weight = (2 * big_j + 1) as f64 / nf;
        let sign = if big_j % 2 == 0 { -1.0 } else { 1.0 };
        ppt += weight * (sign * lambda + mix).abs();
        realign += weight * (-sign * lambda + mix).abs();
    }
    Ok((ppt, realign))
}

/// `tr(Wρ(λ)) = −λ(N−2)`.
pub fn family_witness_closed_form(n: usize, lambda: f64) -> Result<f64> {
    check(n, lambda)?;
    Ok(-lambda * (n as f64 - 2.0))
}

/// Eigenvalues of `W` with multiplicities, ascending: `−(N−2)` once, `0` on
/// odd `J`, `2` on even `J ≥ 2`.
pub fn witness_spectrum_closed_form(n: usize) -> Result<Vec<(f64, usize)>> {
    check(n, 0.0)?;
    let odd: usize = (1..n).step_by(2).map(|j| 2 * j + 1).sum();
    let even: usize = (2..n).step_by(2).map(|j| 2 * j + 1).sum();
    Ok(vec![(-(n as f64 - 2.0), 1), (0.0, odd), (2.0, even)])
}

/// Groups sorted eigenvalues closer than `tol` to their neighbour into
/// `(mean, multiplicity)` pairs.
pub fn cluster_eigenvalues(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &v in sorted {
        match out.last_mut() {
            Some((sum, count, _)) if v - last <= tol => {
                *sum += v;
                *count += 1;
            }
            _ => out.push((v, 1, v)),
        }
        last = v;
    }
    out.into_iter().map(|(sum, count, _)| (sum / count as f64, count)).collect()
}

/// Four unit vectors of `C^N` entering `A_ij`: `φ_i, φ_j` from the first
/// Schmidt basis and `χ_i, χ_j` from the second.
#[derive(Clone, Debug)]
pub struct AppendixAConfig {
    pub phi_i: Vec<C64>,
    pub phi_j: Vec<C64>,
    pub chi_i: Vec<C64>,
    pub chi_j: Vec<C64>,
}

const UNIT_TOL: f64 = 1e-10;

impl AppendixAConfig {
    pub fn new(phi_i: Vec<C64>, phi_j: Vec<C64>, chi_i: Vec<C64>, chi_j: Vec<C64>) -> Result<Self> {
        let n = phi_i.len();
        for (name, v) in [("φ_i", &phi_i), ("φ_j", &phi_j), ("χ_i", &chi_i), ("χ_j", &chi_j)] {
            if v.len() != n {
                return Err(Error::Dimension(format!("{name} has length {}, expected {n}", v.len())));
            }
            let norm = vector_norm(v);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::Domain(format!("{name} is not normalized (norm {norm})")));
            }
        }
        Ok(Self { phi_i, phi_j, chi_i, chi_j })
    }

    /// Columns `i` and `j` of two orthonormal frames.
    pub fn from_frames(basis_1: &ComplexMatrix, basis_2: &ComplexMatrix, i: usize, j: usize) -> Result<Self> {
        Self::new(basis_1.column(i), basis_1.column(j), basis_2.column(i), basis_2.column(j))
    }
}

/// `A_ij` together with the quantities of its bounding argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixATerms {
    /// `⟨φ_i|χ_j⟩⟨χ_i|φ_j⟩ + ⟨φ_i|θχ_i⟩⟨θχ_j|φ_j⟩`.
    pub value: [f64; 2],
    /// The same quantity in the factored form `μ[ab-term − cd-term]`.
    pub factored: [f64; 2],
    /// `⟨χ_j|θχ_i⟩`, the component of `θχ_i` along `χ_j`.
    pub parallel: [f64; 2],
    /// `|μ|`, the norm of the component of `θχ_i` orthogonal to `χ_j`.
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl AppendixATerms {
    pub fn modulus(&self) -> f64 {
        C64::new(self.value[0], self.value[1]).norm()
    }

    /// `ab + cd`, which dominates `|A_ij|`.
    pub fn overlap_bound(&self) -> f64 {
        self.a * self.b + self.c * self.d
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Any unit vector orthogonal to `v` (used only when `θχ_i ∥ χ_j`).
fn orthogonal_unit(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    for k in 0..n {
        let mut e = vec![ZERO; n];
        e[k] = C64::new(1.0, 0.0);
        let proj = inner(v, &e);
        let r: Vec<C64> = e.iter().zip(v).map(|(x, y)| x - y * proj).collect();
        let norm = vector_norm(&r);
        if norm > 0.5 {
            return r.into_iter().map(|z| z / norm).collect();
        }
    }
    unreachable!("some basis vector has a large orthogonal component")
}

pub fn appendix_a_value(cfg: &AppendixAConfig, sys: &CoupledSpinSystem) -> Result<AppendixATerms> {
    if cfg.phi_i.len() != sys.n() {
        return Err(Error::Dimension(format!("vectors of C^{} against N={}", cfg.phi_i.len(), sys.n())));
    }
    let theta_chi_i = sys.time_reverse_vector(&cfg.chi_i)?;
    let theta_chi_j = sys.time_reverse_vector(&cfg.chi_j)?;
    let theta_phi_j = sys.time_reverse_vector(&cfg.phi_j)?;

    let direct = inner(&cfg.phi_i, &cfg.chi_j) * inner(&cfg.chi_i, &cfg.phi_j)
        + inner(&cfg.phi_i, &theta_chi_i) * inner(&theta_chi_j, &cfg.phi_j);

    // θχ_i = λ χ_j + μ χ_j^⊥ with μ ≥ 0 real
    let parallel = inner(&cfg.chi_j, &theta_chi_i);
    let residual: Vec<C64> = theta_chi_i.iter().zip(&cfg.chi_j).map(|(t, c)| t - c * parallel).collect();
    let mu = vector_norm(&residual);
    let chi_perp = if mu > 1e-12 { residual.iter().map(|z| z / mu).collect() } else { orthogonal_unit(&cfg.chi_j) };

    let phi_i_chi_j = inner(&cfg.phi_i, &cfg.chi_j);
    let phi_i_perp = inner(&cfg.phi_i, &chi_perp);
    let tphi_j_perp = inner(&theta_phi_j, &chi_perp);
    let tphi_j_chi_j = inner(&theta_phi_j, &cfg.chi_j);
    let factored = (phi_i_chi_j * tphi_j_perp - phi_i_perp * tphi_j_chi_j) * mu;

    Ok(AppendixATerms {
        value: pair(direct),
        factored: pair(factored),
        parallel: pair(parallel),
        mu,
        a: phi_i_chi_j.norm(),
        b: tphi_j_perp.norm(),
        c: phi_i_perp.norm(),
        d: tphi_j_chi_j.norm(),
    })
}
