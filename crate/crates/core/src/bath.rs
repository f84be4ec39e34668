//! Bath description: continuum spectral densities, their discretization into
//! finite mode sets, the real self-energy and the critical coupling.
//!
//! The continuum law is `S(ω) = η ω^s f(ω/ω_c)` on `ω > 0`. A discrete bath
//! realizes `S(ω) = 2π Σᵢ Cᵢ² δ(ω − ωᵢ)`; discretization uses
//! `Cᵢ² = S(ωᵢ) wᵢ / 2π` with quadrature weights `wᵢ`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

/// Cut-off function `f(x)` of the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// `f(x) = e^{-x}`
    #[default]
    Exponential,
    /// `f(x) = e^{-x²}`
    Gaussian,
    /// `f(x) = Θ(1 - x)`
    Hard,
}

impl Cutoff {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Cutoff::Exponential => (-x).exp(),
            Cutoff::Gaussian => (-x * x).exp(),
            Cutoff::Hard => {
                if x <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Default discretization window `ω_max / ω_c`.
    pub fn default_omega_max_factor(self) -> f64 {
        match self {
            Cutoff::Exponential => 40.0,
            Cutoff::Gaussian => 6.0,
            Cutoff::Hard => 1.0,
        }
    }
}

/// Continuum spectral density `S(ω) = η ω^s f(ω/ω_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub eta: f64,
    pub s: f64,
    pub omega_c: f64,
    pub cutoff: Cutoff,
}

impl SpectralModel {
    pub fn new(eta: f64, s: f64, omega_c: f64, cutoff: Cutoff) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::param("bath.eta", format!("must be >= 0, got {eta}")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param("bath.s", format!("must be > 0, got {s}")));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::param(
                "bath.omega_c",
                format!("must be > 0, got {omega_c}"),
            ));
        }
        Ok(Self {
            eta,
            s,
            omega_c,
            cutoff,
        })
    }

    /// Ohmic (`s = 1`) bath with exponential cut-off.
    pub fn ohmic(eta: f64, omega_c: f64) -> Self {
        Self {
            eta,
            s: 1.0,
            omega_c,
            cutoff: Cutoff::Exponential,
        }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn spectral(&self, omega: f64) -> f64 {
        eval_spectral(self, omega)
    }

    /// Upper limit beyond which the spectral weight is negligible (or zero).
    fn integration_limit(&self) -> f64 {
        match self.cutoff {
            Cutoff::Exponential => (60.0 + 2.0 * self.s) * self.omega_c,
            Cutoff::Gaussian => (10.0 + self.s.sqrt()) * self.omega_c,
            Cutoff::Hard => self.omega_c,
        }
    }

    /// `∫ dω S(ω) g(ω) / 2π` over the support, with the low-frequency
    /// substitution `ω = x^{1/s}` on `[0, min(ω_c, ω_top)]`.
    ///
    /// `g_scaled(ω)` must return `ω · g(ω)`: the Jacobian of the substitution
    /// turns `ω^s dω` into `ω dx / s`, which removes the `ω^{s-1}` endpoint
    /// behaviour of `S(ω)/ω`-type integrands.
    ///
    /// `scale`, when given, is the width of a near-threshold peak; extra
    /// panel breaks are placed around it.
    fn weighted_integral<G: Fn(f64) -> f64>(&self, g_scaled: G, scale: Option<f64>) -> Result<f64> {
        if self.eta == 0.0 {
            return Ok(0.0);
        }
        let top = self.integration_limit();
        let split = self.omega_c.min(top);
        let s = self.s;
        let wc = self.omega_c;
        let cutoff = self.cutoff;
        let opts = QuadOptions::default();
        let x_split = split.powf(s);
        let mut breaks = vec![0.0, 0.25 * x_split, x_split];
        if let Some(w) = scale {
            for k in [0.25, 1.0, 4.0, 16.0] {
                let x = (k * w).powf(s);
                if x < 0.25 * x_split {
                    breaks.push(x);
                }
            }
            breaks.sort_by(f64::total_cmp);
        }
        let low = quad::integrate(
            |x: f64| {
                let omega = x.powf(1.0 / s);
                cutoff.eval(omega / wc) * g_scaled(omega) / s
            },
            &breaks,
            opts,
        )?;
        let high = if top > split {
            let n = 16;
            let breaks: Vec<f64> = (0..=n)
                .map(|k| split + (top - split) * k as f64 / n as f64)
                .collect();
            quad::integrate(
                |omega: f64| omega.powf(s - 1.0) * cutoff.eval(omega / wc) * g_scaled(omega),
                &breaks,
                opts,
            )?
        } else {
            0.0
        };
        Ok(self.eta * (low + high) / (2.0 * PI))
    }

    /// `∫ S(ω) dω / 2π`, the total squared coupling.
    pub fn total_weight(&self) -> Result<f64> {
        self.weighted_integral(|omega| omega, None)
    }
}

/// `S(ω)`; identically zero for `ω ≤ 0`.
pub fn eval_spectral(model: &SpectralModel, omega: f64) -> f64 {
    if omega <= 0.0 || model.eta == 0.0 {
        return 0.0;
    }
    model.eta * omega.powf(model.s) * model.cutoff.eval(omega / model.omega_c)
}

/// Frequency and mass of the system mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega0: f64,
    pub mass: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            mass: 1.0,
        }
    }
}

impl SystemParams {
    pub fn new(omega0: f64, mass: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::param(
                "system.omega0",
                format!("must be > 0, got {omega0}"),
            ));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param(
                "system.mass",
                format!("must be > 0, got {mass}"),
            ));
        }
        Ok(Self { omega0, mass })
    }

    /// `m ω₀`
    pub fn m_omega(&self) -> f64 {
        self.mass * self.omega0
    }
}

/// Quadrature scheme used by [`discretize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Gauss–Legendre nodes on `[0, ω_max]`.
    #[default]
    GaussLegendre,
    /// Uniform cells, node at each cell centre.
    Midpoint,
    /// Closed uniform rule with a node at `ω = 0`. That node carries no
    /// coupling and is dropped; the rule is rejected for sub-Ohmic baths.
    Trapezoid,
}

impl Scheme {
    fn has_zero_node(self) -> bool {
        matches!(self, Scheme::Trapezoid)
    }
}

/// Finite set of bath modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    omegas: Vec<f64>,
    couplings: Vec<f64>,
    masses: Vec<f64>,
    temperature: f64,
}

impl DiscreteBath {
    /// Unit bath-mode masses, zero temperature.
    pub fn new(omegas: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        let n = omegas.len();
        Self::with_masses(omegas, couplings, vec![1.0; n], 0.0)
    }

    pub fn with_masses(
        omegas: Vec<f64>,
        couplings: Vec<f64>,
        masses: Vec<f64>,
        temperature: f64,
    ) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::param("bath.n_modes", "at least one mode required"));
        }
        if couplings.len() != omegas.len() || masses.len() != omegas.len() {
            return Err(Error::param(
                "bath",
                format!(
                    "array lengths differ: {} frequencies, {} couplings, {} masses",
                    omegas.len(),
                    couplings.len(),
                    masses.len()
                ),
            ));
        }
        if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::param(
                "bath.omegas",
                "frequencies must be finite and > 0",
            ));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "bath.omegas",
                "frequencies must be strictly increasing",
            ));
        }
        if couplings.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::param(
                "bath.couplings",
                "couplings must be finite and >= 0",
            ));
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::param("bath.masses", "masses must be finite and > 0"));
        }
        check_temperature(temperature)?;
        Ok(Self {
            omegas,
            couplings,
            masses,
            temperature,
        })
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        self.temperature = temperature;
        Ok(self)
    }

    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Σᵢ Cᵢ²
    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|c| c * c).sum()
    }

    /// Bose occupation `n(ωᵢ)` of every mode at the bath temperature.
    pub fn occupations(&self) -> Vec<f64> {
        self.omegas
            .iter()
            .map(|w| bose(*w, self.temperature))
            .collect()
    }

    /// Position couplings `gᵢ = 2 Cᵢ √(m ω₀ mᵢ ωᵢ)` of the QBM Hamiltonian
    /// `Σᵢ gᵢ q qᵢ`.
    pub fn qbm_couplings(&self, params: &SystemParams) -> Vec<f64> {
        self.couplings
            .iter()
            .zip(&self.omegas)
            .zip(&self.masses)
            .map(|((c, w), m)| 2.0 * c * (params.m_omega() * m * w).sqrt())
            .collect()
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param(
            "bath.temperature",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    Ok(())
}

/// Bose function `1/(e^{ω/T} − 1)`, zero at `T = 0`.
pub fn bose(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// `coth(ω/2T) = 1 + 2 n(ω)`.
pub fn coth_factor(omega: f64, temperature: f64) -> f64 {
    1.0 + 2.0 * bose(omega, temperature)
}

/// Temperature at which `n(ω) = occupation`.
pub fn temperature_for_occupation(omega: f64, occupation: f64) -> f64 {
    if occupation <= 0.0 {
        return 0.0;
    }
    omega / (1.0 / occupation).ln_1p()
}

/// Discretize a continuum law into `n_modes` modes on `[0, factor·ω_c]`,
/// the interval ending at `ω_c` for a hard cutoff.
pub fn discretize(
    model: &SpectralModel,
    n_modes: usize,
    omega_max_factor: f64,
    scheme: Scheme,
) -> Result<DiscreteBath> {
    if n_modes == 0 {
        return Err(Error::param("bath.n_modes", "must be >= 1"));
    }
    if !(omega_max_factor > 0.0 && omega_max_factor.is_finite()) {
        return Err(Error::param(
            "bath.omega_max_factor",
            format!("must be > 0, got {omega_max_factor}"),
        ));
    }
    if scheme.has_zero_node() && model.s < 1.0 {
        return Err(Error::param(
            "bath.scheme",
            format!(
                "{scheme:?} places a node at omega = 0, which cannot resolve the \
                 integrable singularity of the self-energy for s = {} < 1",
                model.s
            ),
        ));
    }
    // nothing lies past a hard edge; nodes there would be dead modes
    let omega_max = match model.cutoff {
        Cutoff::Hard => omega_max_factor.min(1.0) * model.omega_c,
        _ => omega_max_factor * model.omega_c,
    };
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match scheme {
        Scheme::GaussLegendre => {
            let (x, w) = quad::gauss_legendre(n_modes);
            let half = 0.5 * omega_max;
            (
                x.iter().map(|x| half * (x + 1.0)).collect(),
                w.iter().map(|w| half * w).collect(),
            )
        }
        Scheme::Midpoint => {
            let h = omega_max / n_modes as f64;
            (
                (0..n_modes).map(|k| (k as f64 + 0.5) * h).collect(),
                vec![h; n_modes],
            )
        }
        Scheme::Trapezoid => {
            let h = omega_max / n_modes as f64;
            let mut w = vec![h; n_modes];
            w[n_modes - 1] = 0.5 * h;
            (
                (1..=n_modes)
                    .map(|k| (k as f64 / n_modes as f64) * omega_max)
                    .collect(),
                w,
            )
        }
    };
    let couplings = nodes
        .iter()
        .zip(&weights)
        .map(|(w, q)| (eval_spectral(model, *w) * q / (2.0 * PI)).sqrt())
        .collect();
    DiscreteBath::new(nodes, couplings)
}

/// Anything that defines the real self-energy `D(e) = ∫ S(ω)/(2π(ω − e)) dω`
/// below its spectral support.
pub trait SelfEnergy {
    /// `D(e)`.
    fn self_energy(&self, e: f64) -> Result<f64>;
    /// `D′(e) = ∫ S(ω)/(2π(ω − e)²) dω`.
    fn self_energy_slope(&self, e: f64) -> Result<f64>;
    /// Lower edge of the spectral support; `D` is evaluated only below it.
    fn support_floor(&self) -> f64;
}

impl SelfEnergy for SpectralModel {
    fn self_energy(&self, e: f64) -> Result<f64> {
        // e = 0 stays integrable for s > 0
        if !(e <= 0.0) {
            return Err(Error::domain(
                "self_energy_real",
                format!("energy {e} must be <= 0 for a continuum bath"),
            ));
        }
        self.weighted_integral(|omega| omega / (omega - e), Some(-e))
    }

    fn self_energy_slope(&self, e: f64) -> Result<f64> {
        if !(e < 0.0) {
            return Err(Error::domain(
                "self_energy_slope",
                format!("energy {e} must be < 0 for a continuum bath"),
            ));
        }
        self.weighted_integral(|omega| omega / ((omega - e) * (omega - e)), Some(-e))
    }

    fn support_floor(&self) -> f64 {
        0.0
    }
}

impl SelfEnergy for DiscreteBath {
    fn self_energy(&self, e: f64) -> Result<f64> {
        if !(e < self.omegas[0]) {
            return Err(Error::domain(
                "self_energy_real",
                format!(
                    "energy {e} must lie below the lowest mode {}",
                    self.omegas[0]
                ),
            ));
        }
        Ok(self
            .omegas
            .iter()
            .zip(&self.couplings)
            .map(|(w, c)| c * c / (w - e))
            .sum())
    }

    fn self_energy_slope(&self, e: f64) -> Result<f64> {
        if !(e < self.omegas[0]) {
            return Err(Error::domain(
                "self_energy_slope",
                format!(
                    "energy {e} must lie below the lowest mode {}",
                    self.omegas[0]
                ),
            ));
        }
        Ok(self
            .omegas
            .iter()
            .zip(&self.couplings)
            .map(|(w, c)| c * c / ((w - e) * (w - e)))
            .sum())
    }

    fn support_floor(&self) -> f64 {
        self.omegas[0]
    }
}

/// `D(e)` for a continuum model or a discrete bath.
pub fn self_energy_real<S: SelfEnergy + ?Sized>(source: &S, e: f64) -> Result<f64> {
    source.self_energy(e)
}

/// Coupling `η_c = ω₀ / D(0)|_{η=1}` at which the bound state appears.
pub fn critical_coupling(model: &SpectralModel, params: &SystemParams) -> Result<f64> {
    let unit = model.with_eta(1.0);
    let d0 = unit.self_energy(0.0)?;
    if !(d0 > 0.0 && d0.is_finite()) {
        return Err(Error::domain(
            "critical_coupling",
            format!("D(0) at unit coupling is {d0}"),
        ));
    }
    Ok(params.omega0 / d0)
}
