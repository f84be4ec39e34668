//! Quantum Brownian motion: `H_c = Σᵢ gᵢ q qᵢ`.
//!
//! Only the two system rows `R` of the fundamental matrix `e^{At}` are
//! propagated (`R′ = R A`, classical RK4): `Φ = R[:, 0..2]` and
//! `ℳᵢ = R[:, 2+2i..4+2i]` in the phase-space ordering
//! `(q, p, q₁, p₁, …)`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::TimeGrid;
use crate::bath::{coth_factor, DiscreteBath, SystemParams};
use crate::error::{Error, Result};
use crate::quad::exp_moments;
use crate::{symplectic_j, Mat2};

/// Uniformly sampled `Φ(t)` starting at `t = 0`.
#[derive(Debug, Clone)]
pub struct PhiSeries {
    pub step: f64,
    pub values: Vec<Mat2>,
}

/// Output of [`qbm_propagate`].
#[derive(Debug, Clone)]
pub struct QbmPropagation {
    pub times: Vec<f64>,
    pub phi: Vec<Mat2>,
    /// `ℳᵢ(t)` laid out `[mode][time]`.
    pub mode_matrices: Vec<Vec<Mat2>>,
}

pub(crate) struct QbmRun {
    pub phi: Vec<Mat2>,
    pub mode_matrices: Option<Vec<Vec<Mat2>>>,
    pub fine: PhiSeries,
}

/// `Φ(t)` and `ℳᵢ(t)` at the stored times of `grid`.
pub fn qbm_propagate(
    bath: &DiscreteBath,
    params: &SystemParams,
    grid: &TimeGrid,
) -> Result<QbmPropagation> {
    let run = integrate(bath, params, grid, true)?;
    Ok(QbmPropagation {
        times: grid.times(),
        phi: run.phi,
        mode_matrices: run.mode_matrices.unwrap_or_default(),
    })
}

struct Generator {
    m: f64,
    m_w2: f64,
    g: Vec<f64>,
    inv_mi: Vec<f64>,
    mi_wi2: Vec<f64>,
}

impl Generator {
    fn new(bath: &DiscreteBath, params: &SystemParams) -> Self {
        Self {
            m: params.mass,
            m_w2: params.mass * params.omega0 * params.omega0,
            g: bath.qbm_couplings(params),
            inv_mi: bath.masses().iter().map(|m| 1.0 / m).collect(),
            mi_wi2: bath
                .masses()
                .iter()
                .zip(bath.omegas())
                .map(|(m, w)| m * w * w)
                .collect(),
        }
    }

    /// `out = row · A` for one row of `R`.
    fn apply(&self, row: &[f64], out: &mut [f64]) {
        let mut c0 = -self.m_w2 * row[1];
        for (i, g) in self.g.iter().enumerate() {
            let (qi, pi) = (2 + 2 * i, 3 + 2 * i);
            c0 -= g * row[pi];
            out[qi] = -g * row[1] - self.mi_wi2[i] * row[pi];
            out[pi] = row[qi] * self.inv_mi[i];
        }
        out[0] = c0;
        out[1] = row[0] / self.m;
    }
}

fn check_stability(bath: &DiscreteBath, params: &SystemParams) -> Result<()> {
    // Σ gᵢ²/(mᵢωᵢ²) < mω₀² ⇔ 4 D(0) < ω₀
    let d0: f64 = bath
        .omegas()
        .iter()
        .zip(bath.couplings())
        .map(|(w, c)| c * c / w)
        .sum();
    if 4.0 * d0 >= params.omega0 {
        return Err(Error::param(
            "bath.eta",
            format!(
                "QBM Hamiltonian is unbounded below: 4 D(0) = {} >= omega0 = {}",
                4.0 * d0,
                params.omega0
            ),
        ));
    }
    Ok(())
}

pub(crate) fn integrate(
    bath: &DiscreteBath,
    params: &SystemParams,
    grid: &TimeGrid,
    keep_modes: bool,
) -> Result<QbmRun> {
    check_stability(bath, params)?;
    let n = bath.n_modes();
    let dim = 2 * n + 2;
    let gen = Generator::new(bath, params);
    let mut rows = [vec![0.0; dim], vec![0.0; dim]];
    rows[0][0] = 1.0;
    rows[1][1] = 1.0;
    let mut k = [
        [vec![0.0; dim], vec![0.0; dim]],
        [vec![0.0; dim], vec![0.0; dim]],
        [vec![0.0; dim], vec![0.0; dim]],
        [vec![0.0; dim], vec![0.0; dim]],
    ];
    let mut tmp = vec![0.0; dim];

    let stored = grid.stored_steps();
    let mut phi = Vec::with_capacity(stored.len());
    let mut modes = keep_modes.then(|| vec![Vec::with_capacity(stored.len()); n]);
    let mut fine = Vec::with_capacity(grid.steps + 1);
    let mut next = stored.iter().peekable();
    let h = grid.dt;

    for step in 0..=grid.steps {
        let cur = Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]);
        fine.push(cur);
        if next.peek() == Some(&&step) {
            next.next();
            phi.push(cur);
            let blocks: Vec<Mat2> = (0..n)
                .map(|i| {
                    let c = 2 + 2 * i;
                    Mat2::new(rows[0][c], rows[0][c + 1], rows[1][c], rows[1][c + 1])
                })
                .collect();
            let defect = canonical_defect(&cur, &blocks);
            if defect > 1e-6 {
                return Err(Error::StepRejected {
                    t: step as f64 * h,
                    reason: format!(
                        "canonical-form defect {defect:e} exceeds 1e-6; reduce evolution.dt"
                    ),
                });
            }
            if let Some(m) = modes.as_mut() {
                for (dst, b) in m.iter_mut().zip(blocks) {
                    dst.push(b);
                }
            }
        }
        if step == grid.steps {
            break;
        }
        for r in 0..2 {
            let row = &mut rows[r];
            gen.apply(row, &mut k[0][r]);
            for j in 0..dim {
                tmp[j] = row[j] + 0.5 * h * k[0][r][j];
            }
            gen.apply(&tmp, &mut k[1][r]);
            for j in 0..dim {
                tmp[j] = row[j] + 0.5 * h * k[1][r][j];
            }
            gen.apply(&tmp, &mut k[2][r]);
            for j in 0..dim {
                tmp[j] = row[j] + h * k[2][r][j];
            }
            gen.apply(&tmp, &mut k[3][r]);
            for j in 0..dim {
                row[j] += h / 6.0 * (k[0][r][j] + 2.0 * (k[1][r][j] + k[2][r][j]) + k[3][r][j]);
            }
        }
    }
    Ok(QbmRun {
        phi,
        mode_matrices: modes,
        fine: PhiSeries {
            step: h,
            values: fine,
        },
    })
}

/// `max |ΦJΦᵀ + Σᵢ ℳᵢJℳᵢᵀ − J|` componentwise.
pub fn canonical_defect(phi: &Mat2, modes: &[Mat2]) -> f64 {
    let j = symplectic_j();
    let mut s = phi * j * phi.transpose();
    for m in modes {
        s += m * j * m.transpose();
    }
    (s - j).abs().max()
}

/// `σ(t)` at fine index `t / φ.step`.
pub fn qbm_sigma(
    bath: &DiscreteBath,
    params: &SystemParams,
    phi: &PhiSeries,
    t: f64,
) -> Result<Mat2> {
    let x = t / phi.step;
    let k = x.round();
    if (x - k).abs() > 1e-6 || k < 0.0 || k as usize >= phi.values.len() {
        return Err(Error::TimeNotInRecord { t });
    }
    Ok(qbm_sigma_series(bath, params, phi, &[k as usize])[0])
}

/// `σ` at several fine indices, which must be ascending.
///
/// `ν(τ,τ′) = Σᵢ aᵢ cos ωᵢ(τ−τ′)` with `aᵢ = gᵢ² coth(ωᵢ/2T)/(2mᵢωᵢ)` makes
/// the double integral separable: `σ = Σᵢ aᵢ Re(wᵢ wᵢᴴ)` with
/// `wᵢ(t) = ∫₀ᵗ φ₂(s) e^{iωᵢ(t−s)} ds` and `φ₂` the second column of `Φ`.
/// Each `wᵢ` is accumulated by a product Simpson rule over pairs of steps
/// (a product trapezoid closes an odd final step).
pub fn qbm_sigma_series(
    bath: &DiscreteBath,
    params: &SystemParams,
    phi: &PhiSeries,
    indices: &[usize],
) -> Vec<Mat2> {
    let g = bath.qbm_couplings(params);
    let t = bath.temperature();
    let h = phi.step;
    let col: Vec<[f64; 2]> = phi.values.iter().map(|m| [m[(0, 1)], m[(1, 1)]]).collect();
    let per_mode: Vec<Vec<Mat2>> = (0..bath.n_modes())
        .into_par_iter()
        .filter(|&i| g[i] != 0.0)
        .map(|i| {
            let w = bath.omegas()[i];
            let a = g[i] * g[i] * coth_factor(w, t) / (2.0 * bath.masses()[i] * w);
            let c = Complex64::new(0.0, w * h);
            let nu2 = exp_moments(c, 2.0);
            let nu1 = exp_moments(c, 1.0);
            let e1 = c.exp();
            let e2 = e1 * e1;
            // Simpson weights for f(t+2h), f(t+h), f(t)
            let s2 = (nu2[2] - 3.0 * nu2[1] + 2.0 * nu2[0]) * (0.5 * h);
            let s1 = (2.0 * nu2[1] - nu2[2]) * h;
            let s0 = (nu2[2] - nu2[1]) * (0.5 * h);
            // trapezoid weights for f(t+h), f(t)
            let t1 = (nu1[0] - nu1[1]) * h;
            let t0 = nu1[1] * h;

            let zero = [Complex64::new(0.0, 0.0); 2];
            let mut acc = zero;
            let mut at = 0usize;
            let mut out = Vec::with_capacity(indices.len());
            let contrib = |wv: &[Complex64; 2]| {
                let m = Mat2::new(
                    wv[0].norm_sqr(),
                    (wv[0] * wv[1].conj()).re,
                    (wv[1] * wv[0].conj()).re,
                    wv[1].norm_sqr(),
                );
                m * a
            };
            for &k in indices {
                while at + 2 <= k {
                    for d in 0..2 {
                        acc[d] = e2 * acc[d]
                            + s2 * col[at + 2][d]
                            + s1 * col[at + 1][d]
                            + s0 * col[at][d];
                    }
                    at += 2;
                }
                let wv = if at == k {
                    acc
                } else {
                    let mut x = zero;
                    for d in 0..2 {
                        x[d] = e1 * acc[d] + t1 * col[at + 1][d] + t0 * col[at][d];
                    }
                    x
                };
                out.push(contrib(&wv));
            }
            out
        })
        .collect();
    let mut sigma = vec![Mat2::zeros(); indices.len()];
    for m in per_mode {
        for (s, x) in sigma.iter_mut().zip(m) {
            *s += x;
        }
    }
    sigma
}
