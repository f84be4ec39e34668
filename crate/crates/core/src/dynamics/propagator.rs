use num_complex::Complex64;
use rayon::prelude::*;

use super::{one_excitation_spectrum, TimeGrid, URoute};
use crate::bath::{DiscreteBath, SystemParams};
use crate::error::{Error, Result};
use crate::quad::exp_moments;
use crate::Mat2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `u(t)` at the given times.
///
/// The Volterra route steps `i∂ₜu = ω₀u − i∫₀ᵗK(t−τ)u(τ)dτ` with the default
/// step `min(10⁻³/ω₀, 0.05/ω_max)`, refined so that it divides every
/// interval between requested times.
pub fn propagator_u(
    bath: &DiscreteBath,
    params: &SystemParams,
    times: &[f64],
    route: URoute,
) -> Result<Vec<Complex64>> {
    check_times(times)?;
    match route {
        URoute::Diagonalization => {
            let spectrum = one_excitation_spectrum(bath, params);
            Ok(times.par_iter().map(|t| spectrum.propagator(*t)).collect())
        }
        URoute::Volterra => {
            propagator_u_volterra(bath, params, times, TimeGrid::default_dt(bath, params))
        }
    }
}

/// Volterra route with an explicit maximal step.
pub fn propagator_u_volterra(
    bath: &DiscreteBath,
    params: &SystemParams,
    times: &[f64],
    max_dt: f64,
) -> Result<Vec<Complex64>> {
    check_times(times)?;
    if !(max_dt > 0.0) {
        return Err(Error::param("evolution.dt", "must be > 0"));
    }
    let mut state = MemoryState::new(bath, params);
    let mut out = Vec::with_capacity(times.len());
    out.push(state.u);
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let n = (span / max_dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for k in 0..n {
            state.step(h, w[0] + k as f64 * h)?;
        }
        out.push(state.u);
    }
    Ok(out)
}

/// Volterra route on a [`TimeGrid`]; also returns `Iᵢ = Cᵢ Fᵢ` at the
/// stored times, `[mode][time]`.
pub(crate) fn volterra(
    bath: &DiscreteBath,
    params: &SystemParams,
    grid: &TimeGrid,
) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let mut state = MemoryState::new(bath, params);
    let stored = grid.stored_steps();
    let mut u = Vec::with_capacity(stored.len());
    let mut response = vec![Vec::with_capacity(stored.len()); bath.n_modes()];
    let mut record = |s: &MemoryState| {
        u.push(s.u);
        for (r, (f, c)) in response.iter_mut().zip(s.f.iter().zip(bath.couplings())) {
            r.push(f * *c);
        }
    };
    record(&state);
    let mut next = stored.iter().skip(1).peekable();
    for n in 1..=grid.steps {
        state.step(grid.dt, (n - 1) as f64 * grid.dt)?;
        if next.peek() == Some(&&n) {
            next.next();
            record(&state);
        }
    }
    Ok((u, response))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::param("times", "must start at t = 0"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "must be strictly increasing"));
    }
    Ok(())
}

/// `u` together with the auxiliary convolutions
/// `Fᵢ(t) = ∫₀ᵗ e^{−iωᵢ(t−τ)} u(τ) dτ`, so that the memory term is
/// `Σᵢ Cᵢ² Fᵢ` exactly. Integrated jointly by classical RK4.
struct MemoryState {
    omega0: f64,
    omegas: Vec<f64>,
    c2: Vec<f64>,
    u: Complex64,
    f: Vec<Complex64>,
    scratch: [Vec<Complex64>; 5],
}

impl MemoryState {
    fn new(bath: &DiscreteBath, params: &SystemParams) -> Self {
        let n = bath.n_modes();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Self {
            omega0: params.omega0,
            omegas: bath.omegas().to_vec(),
            c2: bath.couplings().iter().map(|c| c * c).collect(),
            u: Complex64::new(1.0, 0.0),
            f: zero.clone(),
            scratch: [zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero],
        }
    }

    fn rhs(&self, u: Complex64, f: &[Complex64], df: &mut [Complex64]) -> Complex64 {
        let mut mem = Complex64::new(0.0, 0.0);
        for ((d, fi), (w, c2)) in df.iter_mut().zip(f).zip(self.omegas.iter().zip(&self.c2)) {
            mem += fi * *c2;
            *d = u - I * *w * fi;
        }
        -I * self.omega0 * u - mem
    }

    fn step(&mut self, h: f64, t: f64) -> Result<()> {
        let [mut k1, mut k2, mut k3, mut k4, mut tmp] = std::mem::take(&mut self.scratch);
        let stage = |tmp: &mut [Complex64], k: &[Complex64], scale: f64, f: &[Complex64]| {
            for ((t, f), k) in tmp.iter_mut().zip(f).zip(k) {
                *t = f + k * scale;
            }
        };
        let a1 = self.rhs(self.u, &self.f, &mut k1);
        stage(&mut tmp, &k1, 0.5 * h, &self.f);
        let a2 = self.rhs(self.u + a1 * (0.5 * h), &tmp, &mut k2);
        stage(&mut tmp, &k2, 0.5 * h, &self.f);
        let a3 = self.rhs(self.u + a2 * (0.5 * h), &tmp, &mut k3);
        stage(&mut tmp, &k3, h, &self.f);
        let a4 = self.rhs(self.u + a3 * h, &tmp, &mut k4);

        let sixth = h / 6.0;
        self.u += (a1 + (a2 + a3) * 2.0 + a4) * sixth;
        for (i, f) in self.f.iter_mut().enumerate() {
            *f += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
        }
        self.scratch = [k1, k2, k3, k4, tmp];
        let norm = self.u.norm();
        if norm > 1.0 + 1e-6 {
            return Err(Error::StepRejected {
                t: t + h,
                reason: format!("|u| = {norm} exceeds 1 + 1e-6; reduce evolution.dt"),
            });
        }
        Ok(())
    }
}

/// Response integrals `Iᵢ(t) = Cᵢ ∫₀ᵗ u(t−τ) e^{−iωᵢτ} dτ` from samples of
/// `u` on a uniform grid of spacing `dt`, laid out `[mode][time]`.
///
/// Product trapezoid rule: `u` is interpolated linearly on each step and the
/// oscillating factor is integrated exactly.
pub fn response_integrals(bath: &DiscreteBath, u: &[Complex64], dt: f64) -> Vec<Vec<Complex64>> {
    bath.omegas()
        .par_iter()
        .zip(bath.couplings())
        .map(|(&w, &c)| {
            let mut out = Vec::with_capacity(u.len());
            if u.is_empty() {
                return out;
            }
            out.push(Complex64::new(0.0, 0.0));
            if c == 0.0 {
                out.resize(u.len(), Complex64::new(0.0, 0.0));
                return out;
            }
            let z = Complex64::new(0.0, -w * dt);
            let [n0, n1, _] = exp_moments(z, 1.0);
            let decay = z.exp();
            // increment = dt·[u₀ ν₁ + u₁ (ν₀ − ν₁)]
            let (w_old, w_new) = (n1 * dt, (n0 - n1) * dt);
            let mut f = Complex64::new(0.0, 0.0);
            for s in u.windows(2) {
                f = decay * f + s[0] * w_old + s[1] * w_new;
                out.push(f * c);
            }
            out
        })
        .collect()
}

/// `v(t) = Σᵢ n(ωᵢ) |Iᵢ(t)|²` from a `[mode][time]` response table.
pub fn thermal_v(bath: &DiscreteBath, response: &[Vec<Complex64>]) -> Vec<f64> {
    let len = response.first().map_or(0, Vec::len);
    let occ = bath.occupations();
    let mut v = vec![0.0; len];
    for (r, n) in response.iter().zip(&occ) {
        if *n == 0.0 {
            continue;
        }
        for (vk, ik) in v.iter_mut().zip(r) {
            *vk += n * ik.norm_sqr();
        }
    }
    v
}

/// `Φ = [[Re u, −Im u/(mω₀)], [mω₀ Im u, Re u]]` for each sample.
pub fn phi_from_u(u: &[Complex64], params: &SystemParams) -> Vec<Mat2> {
    let mw = params.m_omega();
    u.iter()
        .map(|u| Mat2::new(u.re, -u.im / mw, mw * u.im, u.re))
        .collect()
}

/// `ℳᵢ(t)` from the response table, `[mode][time]`.
///
/// The ladder coefficient of `bᵢ(0)` in `a(t)` is `βᵢ = −iIᵢ = x + iy`; with
/// `s₀ = √(mω₀)`, `sᵢ = √(mᵢωᵢ)`:
/// `ℳᵢ = [[x sᵢ/s₀, −y/(s₀sᵢ)], [y s₀sᵢ, x s₀/sᵢ]]`.
pub fn mode_matrices(
    bath: &DiscreteBath,
    params: &SystemParams,
    response: &[Vec<Complex64>],
) -> Vec<Vec<Mat2>> {
    let s0 = params.m_omega().sqrt();
    response
        .par_iter()
        .zip(bath.omegas().par_iter().zip(bath.masses()))
        .map(|(r, (w, m))| {
            let si = (m * w).sqrt();
            r.iter()
                .map(|i| {
                    let (x, y) = (i.im, -i.re);
                    Mat2::new(x * si / s0, -y / (s0 * si), y * s0 * si, x * s0 / si)
                })
                .collect()
        })
        .collect()
}
