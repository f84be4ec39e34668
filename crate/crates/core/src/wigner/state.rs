use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, WignerGrid};
use crate::bath::SystemParams;
use crate::dynamics::{one_excitation_spectrum, CouplingModel, CovarianceMatrix, PropagatorRecord};
use crate::error::{Error, Result};
use crate::quad::gauss_laguerre;
use crate::Mat2;

/// Symmetry of a cat state `|α⟩ ± |−α⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatParity {
    #[default]
    Even,
    Odd,
}

impl CatParity {
    fn sign(self) -> f64 {
        match self {
            CatParity::Even => 1.0,
            CatParity::Odd => -1.0,
        }
    }
}

/// Initial system state; the bath starts in its Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Vacuum,
    /// Coherent state with mean `(q, p)`.
    Coherent {
        q: f64,
        p: f64,
    },
    /// Thermal state of the bare oscillator with mean occupation `nbar`.
    Thermal {
        nbar: f64,
    },
    /// Gibbs state of an oscillator of frequency `omega_init` at `t_init`.
    QuenchThermal {
        omega_init: f64,
        t_init: f64,
    },
    Fock {
        n: u32,
    },
    /// `(|α⟩ ± |−α⟩)/√𝒩` with `𝒩 = 2(1 ± e^{−2|α|²})`.
    Cat {
        alpha_re: f64,
        alpha_im: f64,
        #[serde(default)]
        parity: CatParity,
    },
    /// One excitation in the collective mode given by eigenvector
    /// `eigen_index` of the one-excitation sector (0 is the ground vector).
    CollectiveFock1 {
        #[serde(default)]
        eigen_index: usize,
    },
}

impl InitialState {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        match *self {
            InitialState::Coherent { q, p } if !(finite(q) && finite(p)) => {
                Err(Error::param("initial.q", "coherent mean must be finite"))
            }
            InitialState::Thermal { nbar } if !(nbar >= 0.0 && finite(nbar)) => {
                Err(Error::param("initial.nbar", "must be finite and >= 0"))
            }
            InitialState::QuenchThermal { omega_init, .. }
                if !(omega_init > 0.0 && finite(omega_init)) =>
            {
                Err(Error::param("initial.omega_init", "must be > 0"))
            }
            InitialState::QuenchThermal { t_init, .. } if !(t_init >= 0.0 && finite(t_init)) => {
                Err(Error::param("initial.t_init", "must be >= 0"))
            }
            InitialState::Cat {
                alpha_re, alpha_im, ..
            } if !(finite(alpha_re) && finite(alpha_im)) => {
                Err(Error::param("initial.alpha_re", "amplitude must be finite"))
            }
            InitialState::Cat { .. } if !(self.cat_normalization().unwrap_or(0.0) > 1e-12) => {
                Err(Error::param(
                    "initial.alpha_re",
                    "odd cat state needs a non-zero amplitude",
                ))
            }
            _ => Ok(()),
        }
    }

    /// `𝒩 = 2(1 ± e^{−2|α|²})` for cat states.
    pub fn cat_normalization(&self) -> Option<f64> {
        match *self {
            InitialState::Cat {
                alpha_re,
                alpha_im,
                parity,
            } => {
                let a2 = alpha_re * alpha_re + alpha_im * alpha_im;
                Some(match parity {
                    CatParity::Even => 2.0 * (1.0 + (-2.0 * a2).exp()),
                    CatParity::Odd => -2.0 * (-2.0 * a2).exp_m1(),
                })
            }
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            InitialState::Vacuum
                | InitialState::Coherent { .. }
                | InitialState::Thermal { .. }
                | InitialState::QuenchThermal { .. }
        )
    }

    /// Mean and covariance of a Gaussian initial state.
    pub fn gaussian_moments(&self, params: &SystemParams) -> Option<([f64; 2], CovarianceMatrix)> {
        let vac = CovarianceMatrix::vacuum(params);
        match *self {
            InitialState::Vacuum => Some(([0.0; 2], vac)),
            InitialState::Coherent { q, p } => Some(([q, p], vac)),
            InitialState::Thermal { nbar } => {
                Some(([0.0; 2], CovarianceMatrix::thermal(params, nbar)))
            }
            InitialState::QuenchThermal { omega_init, t_init } => Some((
                [0.0; 2],
                CovarianceMatrix::quench(params.mass, omega_init, t_init),
            )),
            _ => None,
        }
    }

    /// The state itself, `t = 0`. `CollectiveFock1` involves the bath and
    /// has no system-only description before evolution.
    pub fn static_state(&self, params: &SystemParams) -> Result<PhaseState> {
        self.validate()?;
        if let Some((mean, cov)) = self.gaussian_moments(params) {
            return Ok(PhaseState::Gaussian { mean, cov });
        }
        match *self {
            InitialState::Fock { n } => Ok(PhaseState::Fock(FockState::new(n, 1.0, 1.0, params))),
            InitialState::Cat { .. } => {
                let b = CovarianceMatrix::vacuum(params).matrix();
                Ok(PhaseState::Mixture(cat_mixture(
                    self,
                    params,
                    &Mat2::identity(),
                    &b,
                )?))
            }
            InitialState::CollectiveFock1 { .. } => Err(Error::Unsupported(
                "collective_fock1 is only defined through an evolution record".into(),
            )),
            _ => unreachable!("gaussian variants handled above"),
        }
    }
}

/// Reduced system state in one of the closed forms the engine produces.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseState {
    Gaussian {
        mean: [f64; 2],
        cov: CovarianceMatrix,
    },
    Mixture(GaussianMixture),
    Fock(FockState),
}

impl PhaseState {
    /// `W(q, p)`.
    pub fn value(&self, q: f64, p: f64) -> f64 {
        match self {
            PhaseState::Gaussian { mean, cov } => gaussian_value(mean, &cov.matrix(), q, p),
            PhaseState::Mixture(m) => m.value(q, p),
            PhaseState::Fock(f) => f.value(q, p),
        }
    }

    pub fn fill(&self, grid: &GridSpec) -> Result<WignerGrid> {
        grid.validate()?;
        match self {
            PhaseState::Gaussian { cov, .. } if cov.det() < 1e-15 => {
                Err(Error::SingularCovariance { det: cov.det() })
            }
            _ => Ok(grid.fill(|q, p| self.value(q, p))),
        }
    }

    pub fn mean(&self) -> [f64; 2] {
        match self {
            PhaseState::Gaussian { mean, .. } => *mean,
            PhaseState::Mixture(m) => m.mean(),
            PhaseState::Fock(_) => [0.0; 2],
        }
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        match self {
            PhaseState::Gaussian { cov, .. } => *cov,
            PhaseState::Mixture(m) => m.covariance(),
            PhaseState::Fock(f) => f.covariance(),
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            PhaseState::Gaussian { cov, .. } => cov.purity(),
            PhaseState::Mixture(m) => m.purity(),
            PhaseState::Fock(f) => f.purity(),
        }
    }

    /// `⟨a†a⟩` from the first and second moments.
    pub fn occupation(&self, params: &SystemParams) -> f64 {
        let [q, p] = self.mean();
        let mw = params.m_omega();
        self.covariance().occupation(params) + 0.5 * (mw * q * q + p * p / mw)
    }

    /// Default window: `±6σ` of the covariance around the mean, 201×201.
    pub fn auto_grid(&self) -> GridSpec {
        GridSpec::auto(self.mean(), &self.covariance())
    }
}

pub(crate) fn gaussian_value(mean: &[f64; 2], cov: &Mat2, q: f64, p: f64) -> f64 {
    let det = cov.determinant();
    let (dq, dp) = (q - mean[0], p - mean[1]);
    // (z − z̄)ᵀ 𝒜⁻¹ (z − z̄) with the explicit 2×2 inverse
    let quad = (cov[(1, 1)] * dq * dq - 2.0 * cov[(0, 1)] * dq * dp + cov[(0, 0)] * dp * dp) / det;
    (-0.5 * quad).exp() / (2.0 * PI * det.sqrt())
}

/// `W(z) = Re Σₘ exp(ℓₘ − ½(z−μₘ)ᵀB⁻¹(z−μₘ)) / (2π√det B)` with complex
/// log-weights `ℓₘ` and complex centres `μₘ` sharing one real covariance `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    b: Mat2,
    b_inv: Mat2,
    terms: Vec<(Complex64, [Complex64; 2])>,
}

fn quad_form(m: &Mat2, a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0] * (b[0] * m[(0, 0)] + b[1] * m[(0, 1)]) + a[1] * (b[0] * m[(1, 0)] + b[1] * m[(1, 1)])
}

impl GaussianMixture {
    pub fn new(b: Mat2, terms: Vec<(Complex64, [Complex64; 2])>) -> Result<Self> {
        let det = b.determinant();
        if !(det >= 1e-15) || b[(0, 0)] <= 0.0 {
            return Err(Error::SingularCovariance { det });
        }
        let b_inv = b.try_inverse().ok_or(Error::SingularCovariance { det })?;
        Ok(Self { b, b_inv, terms })
    }

    pub fn covariance_kernel(&self) -> Mat2 {
        self.b
    }

    pub fn terms(&self) -> &[(Complex64, [Complex64; 2])] {
        &self.terms
    }

    pub fn value(&self, q: f64, p: f64) -> f64 {
        let norm = 1.0 / (2.0 * PI * self.b.determinant().sqrt());
        let s: f64 = self
            .terms
            .iter()
            .map(|(l, mu)| {
                let d = [q - mu[0], p - mu[1]];
                (l - 0.5 * quad_form(&self.b_inv, &d, &d)).exp().re
            })
            .sum();
        s * norm
    }

    /// Integral of term `m`; each normalized Gaussian integrates to 1 for
    /// complex centres as well.
    fn weight(&self, m: usize) -> Complex64 {
        self.terms[m].0.exp()
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut m = [Complex64::new(0.0, 0.0); 2];
        for (k, (_, mu)) in self.terms.iter().enumerate() {
            let w = self.weight(k);
            m[0] += w * mu[0];
            m[1] += w * mu[1];
        }
        [m[0].re, m[1].re]
    }

    pub fn covariance(&self) -> CovarianceMatrix {
        let mut s = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (k, (_, mu)) in self.terms.iter().enumerate() {
            let w = self.weight(k);
            for a in 0..2 {
                for b in 0..2 {
                    s[a][b] += w * (self.b[(a, b)] + mu[a] * mu[b]);
                }
            }
        }
        let m = self.mean();
        CovarianceMatrix::new(
            s[0][0].re - m[0] * m[0],
            s[0][1].re - m[0] * m[1],
            s[1][1].re - m[1] * m[1],
        )
    }

    /// `2π ∫W²` for a mixture whose terms come in conjugate pairs, so that
    /// the complex sum is already real and `∫W² = ∫ΣΣ̄`. Pair integrals
    /// `∫G_B(z−μ)G_B(z−μ̄′)dz = exp(−¼dᵀB⁻¹d)/(4π√det B)` are combined in
    /// log space.
    pub fn purity(&self) -> f64 {
        let det = self.b.determinant();
        let mut s = Complex64::new(0.0, 0.0);
        for (la, ma) in &self.terms {
            for (lb, mb) in &self.terms {
                let mbc = [mb[0].conj(), mb[1].conj()];
                let d = [ma[0] - mbc[0], ma[1] - mbc[1]];
                s += (la + lb.conj() - 0.25 * quad_form(&self.b_inv, &d, &d)).exp();
            }
        }
        2.0 * PI * s.re / (4.0 * PI * det.sqrt())
    }
}

/// Cat state pushed through `z → Φz + noise`, `B = Φ𝒜₀Φᵀ + noise`.
pub(crate) fn cat_mixture(
    state: &InitialState,
    params: &SystemParams,
    phi: &Mat2,
    b: &Mat2,
) -> Result<GaussianMixture> {
    let InitialState::Cat {
        alpha_re,
        alpha_im,
        parity,
    } = *state
    else {
        return Err(Error::Unsupported("not a cat state".into()));
    };
    let norm = state.cat_normalization().expect("cat");
    let mw = params.m_omega();
    let (sq, sp) = ((2.0 / mw).sqrt(), (2.0 * mw).sqrt());
    let zbar = [sq * alpha_re, sp * alpha_im];
    let y = [sq * alpha_im, -sp * alpha_re];
    let map = |v: [f64; 2], scale: Complex64| -> [Complex64; 2] {
        [
            scale * (phi[(0, 0)] * v[0] + phi[(0, 1)] * v[1]),
            scale * (phi[(1, 0)] * v[0] + phi[(1, 1)] * v[1]),
        ]
    };
    let a2 = alpha_re * alpha_re + alpha_im * alpha_im;
    let l_lobe = Complex64::new(-norm.ln(), 0.0);
    let l_cross = Complex64::new(
        -norm.ln() - 2.0 * a2,
        if parity.sign() < 0.0 { PI } else { 0.0 },
    );
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    GaussianMixture::new(
        *b,
        vec![
            (l_lobe, map(zbar, one)),
            (l_lobe, map(zbar, -one)),
            (l_cross, map(y, -i)),
            (l_cross, map(y, i)),
        ],
    )
}

/// `W(z) = Qₙ(r) e^{−r/(2D)} / (2πD√det𝒜₀)` with `r = zᵀ𝒜₀⁻¹z`.
///
/// `Qₙ = σⁿ Lₙ(−x/σ)`, `σ = 1 − 2a/D`, `x = a r/D²`, evaluated by the
/// recurrence `(k+1)Q_{k+1} = ((2k+1)σ + x)Q_k − kσ²Q_{k−1}` which stays
/// finite at `σ = 0`. Covers Fock-`n` at `t = 0` (`a = D = 1`) and the
/// evolved resonant form with `a = |u|²`, `D = 1 + 2v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockState {
    pub n: u32,
    pub a: f64,
    pub d: f64,
    m_omega: f64,
}

impl FockState {
    pub fn new(n: u32, a: f64, d: f64, params: &SystemParams) -> Self {
        Self {
            n,
            a,
            d,
            m_omega: params.m_omega(),
        }
    }

    fn sigma(&self) -> f64 {
        1.0 - 2.0 * self.a / self.d
    }

    /// `Qₙ` as a function of `r`.
    pub fn q_poly(&self, r: f64) -> f64 {
        let s = self.sigma();
        let x = self.a * r / (self.d * self.d);
        let mut prev = 1.0;
        if self.n == 0 {
            return prev;
        }
        let mut cur = s + x;
        for k in 1..self.n {
            let kf = k as f64;
            let next = (((2.0 * kf + 1.0) * s + x) * cur - kf * s * s * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    }

    pub fn value(&self, q: f64, p: f64) -> f64 {
        // 𝒜₀⁻¹ = diag(2mω₀, 2/(mω₀)), √det𝒜₀ = ½
        let r = 2.0 * self.m_omega * q * q + 2.0 * p * p / self.m_omega;
        self.q_poly(r) * (-0.5 * r / self.d).exp() / (PI * self.d)
    }

    /// `(D + 2na) 𝒜₀`.
    pub fn covariance(&self) -> CovarianceMatrix {
        let s = self.d + 2.0 * self.n as f64 * self.a;
        CovarianceMatrix::new(0.5 / self.m_omega, 0.0, 0.5 * self.m_omega).scaled(s)
    }

    /// `(1/D) ∫₀^∞ Qₙ(Dx)² e^{−x} dx`, exact with `n + 1` Laguerre nodes.
    pub fn purity(&self) -> f64 {
        let (x, w) = gauss_laguerre(self.n as usize + 1);
        x.iter()
            .zip(&w)
            .map(|(x, w)| w * self.q_poly(self.d * x).powi(2))
            .sum::<f64>()
            / self.d
    }
}

/// Reduced state at stored time `t` of `record`.
pub fn evolve_state(state: &InitialState, record: &PropagatorRecord, t: f64) -> Result<PhaseState> {
    state.validate()?;
    let k = record.index_of(t)?;
    let params = record.params();
    let phi = record.phi()[k];
    let noise = record.noise(k);
    if let Some((mean, cov)) = state.gaussian_moments(params) {
        if !cov.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let m = phi * nalgebra::Vector2::new(mean[0], mean[1]);
        let c = phi * cov.matrix() * phi.transpose() + noise;
        return Ok(PhaseState::Gaussian {
            mean: [m[0], m[1]],
            cov: CovarianceMatrix::from_matrix(&c),
        });
    }
    match *state {
        InitialState::Cat { .. } => {
            let b = phi * CovarianceMatrix::vacuum(params).matrix() * phi.transpose() + noise;
            Ok(PhaseState::Mixture(cat_mixture(state, params, &phi, &b)?))
        }
        InitialState::Fock { n } => {
            let (u, v) = resonant_uv(record, k, "fock")?;
            Ok(PhaseState::Fock(FockState::new(
                n,
                u.norm_sqr(),
                1.0 + 2.0 * v,
                params,
            )))
        }
        InitialState::CollectiveFock1 { eigen_index } => {
            let ut = collective_overlap(record, eigen_index, k)?;
            Ok(PhaseState::Fock(FockState::new(
                1,
                ut.norm_sqr(),
                1.0,
                params,
            )))
        }
        _ => unreachable!("gaussian variants handled above"),
    }
}

fn resonant_uv(record: &PropagatorRecord, k: usize, what: &str) -> Result<(Complex64, f64)> {
    match (record.model(), record.u(), record.v()) {
        (CouplingModel::Resonant, Some(u), Some(v)) => Ok((u[k], v[k])),
        _ => Err(Error::Unsupported(format!(
            "{what} initial state requires a resonant-coupling record"
        ))),
    }
}

/// `ũ(t) = c₀u(t) + Σᵢ cᵢβᵢ(t)` for eigenvector `j`, `βᵢ = −iIᵢ`.
fn collective_overlap(record: &PropagatorRecord, j: usize, k: usize) -> Result<Complex64> {
    let (u, _) = resonant_uv(record, k, "collective_fock1")?;
    if record.bath().temperature() != 0.0 {
        return Err(Error::Unsupported(
            "collective_fock1 requires a zero-temperature bath".into(),
        ));
    }
    let response = record.response().ok_or_else(|| {
        Error::Unsupported("collective_fock1 requires stored response integrals".into())
    })?;
    let spectrum = one_excitation_spectrum(record.bath(), record.params());
    if j >= spectrum.len() {
        return Err(Error::param(
            "initial.eigen_index",
            format!("must be < {}", spectrum.len()),
        ));
    }
    let mi = Complex64::new(0.0, -1.0);
    let mut ut = u * spectrum.system_component(j);
    for (i, r) in response.iter().enumerate() {
        ut += mi * r[k] * spectrum.mode_component(i, j);
    }
    Ok(ut)
}
