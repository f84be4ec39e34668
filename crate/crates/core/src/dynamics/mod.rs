//! Exact propagation of the system mode: the Green function `u(t)`, the
//! response integrals `Iᵢ(t)`, the thermal kernel `v(t)`, the phase-space
//! propagators `Φ(t)`, `ℳᵢ(t)` and the covariance evolution, for both the
//! number-conserving (resonant) coupling and quantum Brownian motion (QBM).

mod covariance;
mod propagator;
mod qbm;
pub mod spectrum;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{DiscreteBath, SystemParams};
use crate::error::{Error, Result};
use crate::Mat2;

pub use covariance::{covariance_evolve, CovarianceMatrix};
pub use propagator::{
    mode_matrices, phi_from_u, propagator_u, propagator_u_volterra, response_integrals, thermal_v,
};
pub use qbm::{qbm_propagate, qbm_sigma, qbm_sigma_series, PhiSeries, QbmPropagation};
pub use spectrum::{one_excitation_spectrum, OneExcitationSpectrum};

/// System–bath coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingModel {
    /// `Σᵢ Cᵢ (a bᵢ† + a† bᵢ)`
    #[default]
    Resonant,
    /// `Σᵢ gᵢ q qᵢ`
    Qbm,
}

/// How `u(t)` is obtained for the resonant model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum URoute {
    /// Spectral sum over the one-excitation eigensystem.
    #[default]
    Diagonalization,
    /// Time stepping of the memory equation.
    Volterra,
}

/// Uniform time grid: `steps` steps of size `dt`, every `store_every`-th
/// point stored (including `t = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub store_every: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64, store_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(
                "evolution.dt",
                format!("must be > 0, got {dt}"),
            ));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::param(
                "evolution.t_max",
                format!("must be >= 0, got {t_max}"),
            ));
        }
        if store_every == 0 {
            return Err(Error::param("evolution.store_every", "must be >= 1"));
        }
        let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
        Ok(Self {
            dt,
            steps,
            store_every,
        })
    }

    /// `min(10⁻³/ω₀, 0.05/ω_max)`: resolves both the system and the fastest
    /// bath mode.
    pub fn default_dt(bath: &DiscreteBath, params: &SystemParams) -> f64 {
        let w_max = bath.omegas().last().copied().unwrap_or(params.omega0);
        (1e-3 / params.omega0).min(0.05 / w_max)
    }

    pub fn t_max(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn stored_steps(&self) -> Vec<usize> {
        (0..=self.steps).step_by(self.store_every).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.stored_steps()
            .into_iter()
            .map(|n| n as f64 * self.dt)
            .collect()
    }
}

/// What a [`PropagatorRecord`] keeps besides `u`, `v` and `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RecordOptions {
    pub route: URoute,
    /// Keep the per-mode response integrals `Iᵢ(t)` (resonant model).
    pub store_response: bool,
    /// Keep the per-mode matrices `ℳᵢ(t)`.
    pub store_mode_matrices: bool,
}

/// Time series of the exact propagator objects on the stored times.
#[derive(Debug, Clone)]
pub struct PropagatorRecord {
    model: CouplingModel,
    params: SystemParams,
    bath: DiscreteBath,
    times: Vec<f64>,
    u: Option<Vec<Complex64>>,
    response: Option<Vec<Vec<Complex64>>>,
    v: Option<Vec<f64>>,
    phi: Vec<Mat2>,
    mode_matrices: Option<Vec<Vec<Mat2>>>,
    sigma: Option<Vec<Mat2>>,
}

impl PropagatorRecord {
    pub fn build(
        model: CouplingModel,
        bath: &DiscreteBath,
        params: &SystemParams,
        grid: &TimeGrid,
        opts: &RecordOptions,
    ) -> Result<Self> {
        match model {
            CouplingModel::Resonant => Self::resonant(bath, params, grid, opts),
            CouplingModel::Qbm => Self::qbm(bath, params, grid, opts),
        }
    }

    /// Resonant model: `u`, `v`, `Φ` and optionally `Iᵢ`, `ℳᵢ`.
    pub fn resonant(
        bath: &DiscreteBath,
        params: &SystemParams,
        grid: &TimeGrid,
        opts: &RecordOptions,
    ) -> Result<Self> {
        let times = grid.times();
        let need_response = opts.store_response || opts.store_mode_matrices;
        let occupations = bath.occupations();
        let (u, response, v) = match opts.route {
            URoute::Diagonalization => {
                let spectrum = one_excitation_spectrum(bath, params);
                let u: Vec<Complex64> = times.iter().map(|t| spectrum.propagator(*t)).collect();
                if need_response {
                    let response = spectrum.response(&times);
                    let v = thermal_v(bath, &response);
                    (u, Some(response), v)
                } else {
                    let v = spectrum.thermal_kernel(&occupations, &times);
                    (u, None, v)
                }
            }
            URoute::Volterra => {
                let (u, response) = propagator::volterra(bath, params, grid)?;
                let v = thermal_v(bath, &response);
                (u, need_response.then_some(response), v)
            }
        };
        let phi = phi_from_u(&u, params);
        let mode_matrices = match (&response, opts.store_mode_matrices) {
            (Some(r), true) => Some(mode_matrices(bath, params, r)),
            _ => None,
        };
        let response = if opts.store_response { response } else { None };
        Ok(Self {
            model: CouplingModel::Resonant,
            params: *params,
            bath: bath.clone(),
            times,
            u: Some(u),
            response,
            v: Some(v),
            phi,
            mode_matrices,
            sigma: None,
        })
    }

    /// QBM: `Φ`, `σ` and optionally `ℳᵢ`.
    pub fn qbm(
        bath: &DiscreteBath,
        params: &SystemParams,
        grid: &TimeGrid,
        opts: &RecordOptions,
    ) -> Result<Self> {
        let run = qbm::integrate(bath, params, grid, opts.store_mode_matrices)?;
        let sigma = qbm_sigma_series(bath, params, &run.fine, &grid.stored_steps());
        Ok(Self {
            model: CouplingModel::Qbm,
            params: *params,
            bath: bath.clone(),
            times: grid.times(),
            u: None,
            response: None,
            v: None,
            phi: run.phi,
            mode_matrices: run.mode_matrices,
            sigma: Some(sigma),
        })
    }

    pub fn model(&self) -> CouplingModel {
        self.model
    }
    pub fn params(&self) -> &SystemParams {
        &self.params
    }
    pub fn bath(&self) -> &DiscreteBath {
        &self.bath
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    /// `u(t)`; resonant model only.
    pub fn u(&self) -> Option<&[Complex64]> {
        self.u.as_deref()
    }
    /// `Iᵢ(t)` laid out `[mode][time]`, when stored.
    pub fn response(&self) -> Option<&[Vec<Complex64>]> {
        self.response.as_deref()
    }
    /// `v(t)`; resonant model only.
    pub fn v(&self) -> Option<&[f64]> {
        self.v.as_deref()
    }
    pub fn phi(&self) -> &[Mat2] {
        &self.phi
    }
    /// `ℳᵢ(t)` laid out `[mode][time]`, when stored.
    pub fn mode_matrices(&self) -> Option<&[Vec<Mat2>]> {
        self.mode_matrices.as_deref()
    }
    /// Noise matrix `σ(t)`; QBM only.
    pub fn sigma(&self) -> Option<&[Mat2]> {
        self.sigma.as_deref()
    }

    /// Index of a stored time.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        let k = self.times.partition_point(|s| *s < t - tol);
        if k < self.times.len() && (self.times[k] - t).abs() <= tol {
            Ok(k)
        } else {
            Err(Error::TimeNotInRecord { t })
        }
    }

    /// Noise contribution to the covariance at stored index `k`:
    /// `(1 + 2v − |u|²) 𝒜₀` (resonant) or `σ` (QBM).
    pub fn noise(&self, k: usize) -> Mat2 {
        match self.model {
            CouplingModel::Resonant => {
                let u = self.u.as_ref().expect("resonant record")[k];
                let v = self.v.as_ref().expect("resonant record")[k];
                CovarianceMatrix::vacuum(&self.params).matrix() * (1.0 + 2.0 * v - u.norm_sqr())
            }
            CouplingModel::Qbm => self.sigma.as_ref().expect("qbm record")[k],
        }
    }

    /// `max_t |1 − |u|² − Σᵢ |Iᵢ|²|`, when the response is stored.
    pub fn sum_rule_defect(&self) -> Option<f64> {
        let u = self.u.as_ref()?;
        let response = self.response.as_ref()?;
        Some(
            (0..self.times.len())
                .map(|k| {
                    let s: f64 = response.iter().map(|r| r[k].norm_sqr()).sum();
                    (1.0 - u[k].norm_sqr() - s).abs()
                })
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests;
