//! Wigner functions of the reduced system: grids, initial-state families,
//! closed-form evolution and observables.
//!
//! Conventions: `z = (q, p)`, `W(q,p) = (1/2π)∫ρ(q+y/2, q−y/2) e^{−ipy} dy`,
//! vacuum covariance `𝒜₀ = diag(1/(2mω₀), mω₀/2)`.

mod grid;
mod state;


use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::SystemParams;
use crate::dynamics::{CovarianceMatrix, PropagatorRecord};
use crate::error::{Error, Result};

pub use grid::{GridSpec, WignerGrid};
pub use state::{evolve_state, CatParity, FockState, GaussianMixture, InitialState, PhaseState};

/// Gaussian Wigner function with mean `(q̄, p̄)` and covariance `cov`.
pub fn wigner_gaussian(
    mean: (f64, f64),
    cov: &CovarianceMatrix,
    grid: &GridSpec,
) -> Result<WignerGrid> {
    if cov.det() < 1e-15 || cov.c_qq <= 0.0 {
        return Err(Error::SingularCovariance { det: cov.det() });
    }
    PhaseState::Gaussian {
        mean: [mean.0, mean.1],
        cov: *cov,
    }
    .fill(grid)
}

/// Density-matrix element `ρ(x, y)` of a Gaussian state.
///
/// With `X = x − q̄`, `Y = y − q̄`:
/// `ρ = exp(m̃XY − ½mX² − ½m*Y² + ip̄(x−y)) / √(2πC_qq)`,
/// `m̃ = C_pp − (¼ + C_qp²)/C_qq`, `m = C_pp + (½ − iC_qp)²/C_qq`.
pub fn rdm_element(mean: (f64, f64), cov: &CovarianceMatrix, x: f64, y: f64) -> Result<Complex64> {
    let c = cov.c_qq;
    if !(c > 0.0) {
        return Err(Error::param("cov.c_qq", "must be > 0"));
    }
    let (qbar, pbar) = mean;
    let mt = cov.c_pp - (0.25 + cov.c_qp * cov.c_qp) / c;
    let half = Complex64::new(0.5, -cov.c_qp);
    let m = cov.c_pp + half * half / c;
    let (xx, yy) = (x - qbar, y - qbar);
    let expo = mt * xx * yy - 0.5 * m * xx * xx - 0.5 * m.conj() * yy * yy
        + Complex64::new(0.0, pbar * (x - y));
    Ok(expo.exp() / (2.0 * PI * c).sqrt())
}

/// Fock state `|n⟩`: `(−1)ⁿLₙ(r) e^{−r/2}/(2π√det𝒜₀)`, `r = zᵀ𝒜₀⁻¹z`.
pub fn wigner_fock(n: u32, params: &SystemParams, grid: &GridSpec) -> Result<WignerGrid> {
    PhaseState::Fock(FockState::new(n, 1.0, 1.0, params)).fill(grid)
}

/// Evolved Wigner function of `state` at stored time `t` of `record`.
pub fn evolve_wigner(
    state: &InitialState,
    record: &PropagatorRecord,
    t: f64,
    grid: &GridSpec,
) -> Result<WignerGrid> {
    evolve_state(state, record, t)?.fill(grid)
}

/// `(1 − c₀⁴)|0⟩⟨0| + c₀⁴|1⟩⟨1|` for `c0sq = c₀²`.
pub fn asymptotic_wigner(c0sq: f64, params: &SystemParams, grid: &GridSpec) -> Result<WignerGrid> {
    asymptotic_state(c0sq, params)?.fill(grid)
}

/// Closed form behind [`asymptotic_wigner`].
pub fn asymptotic_state(c0sq: f64, params: &SystemParams) -> Result<PhaseState> {
    if !(0.0..=1.0).contains(&c0sq) {
        return Err(Error::param("c0sq", "must lie in [0, 1]"));
    }
    Ok(PhaseState::Fock(FockState::new(
        1,
        c0sq * c0sq,
        1.0,
        params,
    )))
}

/// Norm, occupation and purity of a Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub norm: f64,
    pub occupation: f64,
    pub purity: f64,
    /// `|norm − 1| > 10⁻³`: the grid truncates the state.
    pub norm_warning: bool,
}

impl Observables {
    fn new(norm: f64, occupation: f64, purity: f64) -> Self {
        Self {
            norm,
            occupation,
            purity,
            norm_warning: (norm - 1.0).abs() > 1e-3,
        }
    }
}

/// Observables by grid quadrature.
pub fn observables(grid: &WignerGrid, params: &SystemParams) -> Observables {
    let spec = &grid.spec;
    let mw = params.m_omega();
    let area = grid.cell_area();
    let (mut norm, mut energy, mut sq) = (0.0, 0.0, 0.0);
    for i in 0..spec.n_q {
        let q = spec.q(i);
        for j in 0..spec.n_p {
            let p = spec.p(j);
            let w = grid.at(i, j);
            norm += w;
            energy += w * (mw * q * q + p * p / mw);
            sq += w * w;
        }
    }
    Observables::new(
        norm * area,
        0.5 * (energy * area - 1.0),
        2.0 * PI * sq * area,
    )
}

/// Norm from the grid; occupation and purity from the closed form.
pub fn state_observables(
    state: &PhaseState,
    grid: &WignerGrid,
    params: &SystemParams,
) -> Observables {
    Observables::new(grid.norm(), state.occupation(params), state.purity())
}

/// Cat-state evolution by direct numerical inversion of
/// `W̃ₜ(k) = e^{−½kᵀΣk} W̃₀(Φᵀk)` on an `n_k × n_k` midpoint k-grid.
///
/// `W̃₀(k) = 𝒩⁻¹e^{−½kᵀ𝒜₀k}[2cos(kᵀz̄) ± 2e^{−2|α|²}cosh(kᵀy)]` and
/// `W(z) = (2π)⁻²∫W̃(k)e^{−ikᵀz}d²k`. Cross-check for the closed form.
pub fn cat_wigner_fourier(
    state: &InitialState,
    record: &PropagatorRecord,
    t: f64,
    grid: &GridSpec,
    n_k: usize,
) -> Result<WignerGrid> {
    let InitialState::Cat {
        alpha_re,
        alpha_im,
        parity,
    } = *state
    else {
        return Err(Error::Unsupported(
            "Fourier inversion is implemented for cat states".into(),
        ));
    };
    state.validate()?;
    grid.validate()?;
    let k_idx = record.index_of(t)?;
    let params = record.params();
    let phi = record.phi()[k_idx];
    let noise = record.noise(k_idx);
    let a0 = CovarianceMatrix::vacuum(params).matrix();
    let norm = state.cat_normalization().expect("cat");
    let mw = params.m_omega();
    let (sq, sp) = ((2.0 / mw).sqrt(), (2.0 * mw).sqrt());
    let zbar = nalgebra::Vector2::new(sq * alpha_re, sp * alpha_im);
    let y = nalgebra::Vector2::new(sq * alpha_im, -sp * alpha_re);
    let a2 = alpha_re * alpha_re + alpha_im * alpha_im;
    let sign = match parity {
        CatParity::Even => 1.0,
        CatParity::Odd => -1.0,
    };

    // window: the Gaussian factor e^{−½kᵀBk} with B = Φ𝒜₀Φᵀ + Σ, shifted by
    // the saddle of the cosh term, decays to e^{−40}
    let b = phi * a0 * phi.transpose() + noise;
    let shift = b.try_inverse().ok_or(Error::SingularCovariance {
        det: b.determinant(),
    })? * (phi * y);
    let k_max = [0, 1].map(|a| shift[a].abs() + (80.0 / b[(a, a)]).sqrt());
    let dk = k_max.map(|m| 2.0 * m / n_k as f64);
    let kq: Vec<f64> = (0..n_k)
        .map(|i| -k_max[0] + (i as f64 + 0.5) * dk[0])
        .collect();
    let kp: Vec<f64> = (0..n_k)
        .map(|i| -k_max[1] + (i as f64 + 0.5) * dk[1])
        .collect();

    let chi = DMatrix::from_fn(n_k, n_k, |a, c| {
        let k = nalgebra::Vector2::new(kq[a], kp[c]);
        let k0 = phi.transpose() * k;
        let env = (-0.5 * k0.dot(&(a0 * k0)) - 0.5 * k.dot(&(noise * k))).exp();
        let lobes = 2.0 * k0.dot(&zbar).cos();
        // e^{−2|α|²}cosh(x) = ½(e^{x−2|α|²} + e^{−x−2|α|²})
        let x = k0.dot(&y);
        let cross = sign * ((x - 2.0 * a2).exp() + (-x - 2.0 * a2).exp());
        Complex64::new(env * (lobes + cross) / norm, 0.0)
    });
    let eq = DMatrix::from_fn(grid.n_q, n_k, |i, a| {
        Complex64::from_polar(1.0, -kq[a] * grid.q(i))
    });
    let ep = DMatrix::from_fn(n_k, grid.n_p, |c, j| {
        Complex64::from_polar(1.0, -kp[c] * grid.p(j))
    });
    let w = eq * chi * ep;
    let scale = dk[0] * dk[1] / (4.0 * PI * PI);
    let values = (0..grid.n_q)
        .flat_map(|i| (0..grid.n_p).map(move |j| (i, j)))
        .map(|(i, j)| w[(i, j)].re * scale)
        .collect();
    WignerGrid::new(*grid, values)
}
