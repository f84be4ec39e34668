use serde::{Deserialize, Serialize};

use super::PropagatorRecord;
use crate::bath::{coth_factor, SystemParams};
use crate::error::{Error, Result};
use crate::Mat2;

/// Symmetric second cumulants of `(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    pub c_qq: f64,
    pub c_qp: f64,
    pub c_pp: f64,
}

impl CovarianceMatrix {
    pub fn new(c_qq: f64, c_qp: f64, c_pp: f64) -> Self {
        Self { c_qq, c_qp, c_pp }
    }

    /// Symmetric part of a 2×2 matrix.
    pub fn from_matrix(m: &Mat2) -> Self {
        Self {
            c_qq: m[(0, 0)],
            c_qp: 0.5 * (m[(0, 1)] + m[(1, 0)]),
            c_pp: m[(1, 1)],
        }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.c_qq, self.c_qp, self.c_qp, self.c_pp)
    }

    /// Vacuum (and coherent-state) covariance `𝒜₀ = diag(1/(2mω₀), mω₀/2)`.
    pub fn vacuum(params: &SystemParams) -> Self {
        let mw = params.m_omega();
        Self::new(0.5 / mw, 0.0, 0.5 * mw)
    }

    /// Thermal state with mean occupation `n̄`: `(1 + 2n̄) 𝒜₀`.
    pub fn thermal(params: &SystemParams, nbar: f64) -> Self {
        Self::vacuum(params).scaled(1.0 + 2.0 * nbar)
    }

    /// Gibbs state of an oscillator of mass `m` and frequency `ω_init` at
    /// temperature `T_init`.
    pub fn quench(mass: f64, omega_init: f64, t_init: f64) -> Self {
        let mw = mass * omega_init;
        Self::new(0.5 / mw, 0.0, 0.5 * mw).scaled(coth_factor(omega_init, t_init))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(s * self.c_qq, s * self.c_qp, s * self.c_pp)
    }

    pub fn det(&self) -> f64 {
        self.c_qq * self.c_pp - self.c_qp * self.c_qp
    }

    pub fn is_positive_definite(&self) -> bool {
        self.c_qq > 0.0 && self.det() > 0.0 && self.c_qq.is_finite() && self.c_pp.is_finite()
    }

    /// Symplectic eigenvalue `√det`; at least 1/2 for a physical state.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.det().max(0.0).sqrt()
    }

    /// Purity of a Gaussian state, `1/(2√det)`.
    pub fn purity(&self) -> f64 {
        0.5 / self.symplectic_eigenvalue()
    }

    /// `⟨a†a⟩` of a zero-mean state.
    pub fn occupation(&self, params: &SystemParams) -> f64 {
        let mw = params.m_omega();
        0.5 * (mw * self.c_qq + self.c_pp / mw - 1.0)
    }
}

/// Covariance at stored time `t`.
///
/// Resonant model: `𝒜ₜ = Φ 𝒜_S Φᵀ + (1 + 2v − |u|²) 𝒜₀`; QBM:
/// `𝒜ₜ = Φ 𝒜_S Φᵀ + σ`.
pub fn covariance_evolve(
    initial: &CovarianceMatrix,
    record: &PropagatorRecord,
    t: f64,
) -> Result<CovarianceMatrix> {
    if !initial.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let k = record.index_of(t)?;
    Ok(evolve_at(initial, record, k))
}

pub(crate) fn evolve_at(
    initial: &CovarianceMatrix,
    record: &PropagatorRecord,
    k: usize,
) -> CovarianceMatrix {
    let phi = record.phi()[k];
    let m = phi * initial.matrix() * phi.transpose() + record.noise(k);
    CovarianceMatrix::from_matrix(&m)
}
