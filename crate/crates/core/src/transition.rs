//! Bound state below the bath continuum and the phase it signals.
//!
//! The pole condition `e = ω₀ − D(e)` is solved on `e < 0` through
//! `g(e) = e − ω₀ + D(e)`, which increases strictly there. A root exists iff
//! `g(0) > 0`, i.e. `D(0) > ω₀` (`η > η_c` for a continuum).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{critical_coupling, SelfEnergy, SpectralModel, SystemParams};
use crate::error::{Error, Result};

/// Relative distance to `η_c` below which the pole is treated as marginal.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Normal,
    BoundState,
}

/// Pole analysis at one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub eta: f64,
    pub eta_c: f64,
    /// Bound-state energy; absent in the normal phase.
    pub e1: Option<f64>,
    /// Residue `𝒵₁ = c₀²`; absent in the normal phase.
    pub c0sq: Option<f64>,
    pub phase: Phase,
    /// `|η − η_c|/η_c < 10⁻⁹`: reported as normal, the pole sits at `e = 0`.
    pub boundary: bool,
    /// Long-time populations `(⟨0|ρ|0⟩, ⟨1|ρ|1⟩)` after a Fock-1 start:
    /// `(1 − c₀⁴, c₀⁴)` or `(1, 0)`.
    pub rho_inf_diag: (f64, f64),
}

fn g<S: SelfEnergy + ?Sized>(source: &S, params: &SystemParams, e: f64) -> Result<f64> {
    Ok(e - params.omega0 + source.self_energy(e)?)
}

/// Bound-state energy `e₁ < 0`, or `None` when `g(0) ≤ 0`.
///
/// Bracketed bisection to `10⁻¹²`, then two Newton steps with the analytic
/// slope. For a discrete bath this is the lowest eigenvalue of the
/// one-excitation Hamiltonian whenever that is negative.
pub fn find_bound_state<S: SelfEnergy + ?Sized>(
    source: &S,
    params: &SystemParams,
) -> Result<Option<f64>> {
    if source.support_floor() < 0.0 {
        return Err(Error::domain(
            "find_bound_state",
            "bath support extends below 0",
        ));
    }
    let mut hi = 0.0;
    let g_hi = g(source, params, hi)?;
    if g_hi <= 0.0 {
        return Ok(None);
    }
    let mut lo = -(params.omega0 + source.self_energy(-params.omega0)? + 1.0);
    while g(source, params, lo)? >= 0.0 {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(Error::domain("find_bound_state", "no sign change below 0"));
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(source, params, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..2 {
        let step = g(source, params, e)? / (1.0 + source.self_energy_slope(e)?);
        let next = e - step;
        if next < 0.0 && next.is_finite() {
            e = next;
        }
    }
    Ok(Some(e))
}

/// `c₀² = [1 + D′(e₁)]⁻¹` with `D′(e) = Σᵢ Cᵢ²/(e−ωᵢ)²` (or its continuum
/// integral).
///
/// `e1` must lie below the spectrum: `e1 < 0` for a continuum, `e1 < ω_min`
/// for a discrete bath.
pub fn residue_weight<S: SelfEnergy + ?Sized>(source: &S, e1: f64) -> Result<f64> {
    if !(e1 < source.support_floor()) {
        return Err(Error::domain(
            "residue_weight",
            format!(
                "e1 = {e1} must lie below the bath spectrum (< {})",
                source.support_floor()
            ),
        ));
    }
    Ok(1.0 / (1.0 + source.self_energy_slope(e1)?))
}

/// Pole report at one coupling, given `η_c` of the unit model.
pub fn pole_report(
    model: &SpectralModel,
    params: &SystemParams,
    eta: f64,
    eta_c: f64,
) -> Result<PoleReport> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::param("bath.eta", "must be finite and >= 0"));
    }
    let normal = |boundary| PoleReport {
        eta,
        eta_c,
        e1: None,
        c0sq: None,
        phase: Phase::Normal,
        boundary,
        rho_inf_diag: (1.0, 0.0),
    };
    if ((eta - eta_c) / eta_c).abs() < BOUNDARY_TOLERANCE {
        return Ok(normal(true));
    }
    let source = model.with_eta(eta);
    match find_bound_state(&source, params)? {
        None => Ok(normal(false)),
        Some(e1) => {
            let c0sq = residue_weight(&source, e1)?;
            let c4 = c0sq * c0sq;
            Ok(PoleReport {
                eta,
                eta_c,
                e1: Some(e1),
                c0sq: Some(c0sq),
                phase: Phase::BoundState,
                boundary: false,
                rho_inf_diag: (1.0 - c4, c4),
            })
        }
    }
}

/// Sweep over couplings (`model.eta` is ignored). Entries fail
/// independently; a failing `η_c` fails every entry.
pub fn transition_report(
    model: &SpectralModel,
    params: &SystemParams,
    eta_values: &[f64],
) -> Vec<Result<PoleReport>> {
    let eta_c = match critical_coupling(model, params) {
        Ok(x) => x,
        Err(e) => {
            let msg = e.to_string();
            return eta_values
                .iter()
                .map(|_| Err(Error::domain("critical_coupling", msg.clone())))
                .collect();
        }
    };
    eta_values
        .par_iter()
        .map(|&eta| pole_report(model, params, eta, eta_c))
        .collect()
}
