//! Exact diagonalization of the one-excitation sector.
//!
//! `H₁` is an arrowhead matrix (`ω₀` and the `ωᵢ` on the diagonal, the
//! couplings `Cᵢ` in the first row and column). Its eigenvalues are the roots
//! of the secular function
//!
//! ```text
//! h(e) = e − ω₀ − Σᵢ Cᵢ² / (e − ωᵢ)
//! ```
//!
//! which has exactly one root between consecutive poles, one below the lowest
//! and one above the highest. Each root is stored as an offset `δ` from the
//! nearer pole `ω_p`, so the differences `e − ωᵢ = (ω_p − ωᵢ) + δ` entering
//! the eigenvectors keep full relative precision even when a root sits
//! within rounding distance of a pole.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{DiscreteBath, SystemParams};

/// Location of one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Root {
    /// Root of the secular function, `e = ω_origin + delta`.
    Secular { origin: usize, delta: f64 },
    /// Uncoupled bath mode (`Cᵢ = 0`); eigenvector is the unit vector of the mode.
    Decoupled { mode: usize },
    /// Bare system level when every coupling vanishes.
    Bare,
}

/// Eigen-decomposition of the one-excitation Hamiltonian.
///
/// Energies are ascending; `weights[j]` is `c₀ⱼ²`, the squared system
/// component of eigenvector `j`.
#[derive(Debug, Clone)]
pub struct OneExcitationSpectrum {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    omega0: f64,
    omegas: Vec<f64>,
    couplings: Vec<f64>,
    roots: Vec<Root>,
}

impl OneExcitationSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    /// `e_j − ωᵢ` without cancellation.
    pub fn gap(&self, j: usize, i: usize) -> f64 {
        match self.roots[j] {
            Root::Secular { origin, delta } => (self.omegas[origin] - self.omegas[i]) + delta,
            Root::Decoupled { mode } => self.omegas[mode] - self.omegas[i],
            Root::Bare => self.omega0 - self.omegas[i],
        }
    }

    /// First (system) component `c₀ⱼ ≥ 0` of eigenvector `j`.
    pub fn system_component(&self, j: usize) -> f64 {
        self.weights[j].sqrt()
    }

    /// Component of eigenvector `j` on bath mode `i`.
    pub fn mode_component(&self, i: usize, j: usize) -> f64 {
        match self.roots[j] {
            Root::Secular { .. } => {
                let c = self.couplings[i];
                if c == 0.0 {
                    0.0
                } else {
                    c * self.system_component(j) / self.gap(j, i)
                }
            }
            Root::Decoupled { mode } => {
                if mode == i {
                    1.0
                } else {
                    0.0
                }
            }
            Root::Bare => 0.0,
        }
    }

    /// Full eigenvector `j` as `(system, mode_1, …, mode_N)`.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_modes() + 1);
        v.push(self.system_component(j));
        v.extend((0..self.n_modes()).map(|i| self.mode_component(i, j)));
        v
    }

    /// `u(t) = Σⱼ c₀ⱼ² e^{−i eⱼ t}`.
    pub fn propagator(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(e, w)| Complex64::from_polar(*w, -e * t))
            .sum()
    }

    /// Response integrals `Iᵢ(t) = i Σⱼ c₀ⱼ V_ij e^{−i eⱼ t}` at each time,
    /// laid out `[mode][time]`.
    pub fn response(&self, times: &[f64]) -> Vec<Vec<Complex64>> {
        let n = self.n_modes();
        let active: Vec<usize> = (0..self.len()).filter(|&j| self.weights[j] > 0.0).collect();
        // phases[t][k] = c₀ⱼ e^{−i eⱼ t} for active j = active[k]
        let phases: Vec<Vec<Complex64>> = times
            .par_iter()
            .map(|&t| {
                active
                    .iter()
                    .map(|&j| {
                        Complex64::from_polar(self.system_component(j), -self.energies[j] * t)
                    })
                    .collect()
            })
            .collect();
        (0..n)
            .into_par_iter()
            .map(|i| {
                if self.couplings[i] == 0.0 {
                    return vec![Complex64::new(0.0, 0.0); times.len()];
                }
                let row: Vec<f64> = active.iter().map(|&j| self.mode_component(i, j)).collect();
                phases
                    .iter()
                    .map(|ph| {
                        let s: Complex64 = ph.iter().zip(&row).map(|(p, v)| p * v).sum();
                        Complex64::new(-s.im, s.re)
                    })
                    .collect()
            })
            .collect()
    }

    /// `v(t) = Σᵢ nᵢ |Iᵢ(t)|²` without storing the response.
    pub fn thermal_kernel(&self, occupations: &[f64], times: &[f64]) -> Vec<f64> {
        if occupations.iter().all(|n| *n == 0.0) {
            return vec![0.0; times.len()];
        }
        let active: Vec<usize> = (0..self.len()).filter(|&j| self.weights[j] > 0.0).collect();
        let modes: Vec<usize> = (0..self.n_modes())
            .filter(|&i| occupations[i] > 0.0 && self.couplings[i] > 0.0)
            .collect();
        let rows: Vec<Vec<f64>> = modes
            .par_iter()
            .map(|&i| active.iter().map(|&j| self.mode_component(i, j)).collect())
            .collect();
        times
            .par_iter()
            .map(|&t| {
                let ph: Vec<Complex64> = active
                    .iter()
                    .map(|&j| {
                        Complex64::from_polar(self.system_component(j), -self.energies[j] * t)
                    })
                    .collect();
                modes
                    .iter()
                    .zip(&rows)
                    .map(|(&i, row)| {
                        let s: Complex64 = ph.iter().zip(row).map(|(p, v)| p * v).sum();
                        occupations[i] * s.norm_sqr()
                    })
                    .sum()
            })
            .collect()
    }
}

/// Eigenvalues and system weights of the one-excitation Hamiltonian.
pub fn one_excitation_spectrum(
    bath: &DiscreteBath,
    params: &SystemParams,
) -> OneExcitationSpectrum {
    let omegas = bath.omegas().to_vec();
    let couplings = bath.couplings().to_vec();
    let omega0 = params.omega0;
    let active: Vec<usize> = (0..omegas.len()).filter(|&i| couplings[i] != 0.0).collect();

    let mut roots: Vec<Root> = (0..omegas.len())
        .filter(|&i| couplings[i] == 0.0)
        .map(|mode| Root::Decoupled { mode })
        .collect();

    let solver = Secular {
        omega0,
        omegas: &omegas,
        couplings: &couplings,
        active: &active,
    };
    if !active.is_empty() {
        let k = active.len();
        let radius: f64 = active.iter().map(|&i| couplings[i]).sum();
        let lo = omega0.min(omegas[active[0]]) - radius - 1.0;
        let hi = omega0.max(omegas[active[k - 1]]) + radius + 1.0;
        let secular: Vec<Root> = (0..=k)
            .into_par_iter()
            .map(|slot| solver.root_in_slot(slot, lo, hi))
            .collect();
        roots.extend(secular);
    }

    let mut entries: Vec<(f64, f64, Root)> = roots
        .into_iter()
        .map(|r| match r {
            Root::Secular { origin, delta } => {
                let e = omegas[origin] + delta;
                (e, solver.weight(origin, delta), r)
            }
            Root::Decoupled { mode } => (omegas[mode], 0.0, r),
            Root::Bare => (omega0, 1.0, r),
        })
        .collect();
    if active.is_empty() {
        entries.push((omega0, 1.0, Root::Bare));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));

    OneExcitationSpectrum {
        energies: entries.iter().map(|e| e.0).collect(),
        weights: entries.iter().map(|e| e.1).collect(),
        omega0,
        omegas,
        couplings,
        roots: entries.iter().map(|e| e.2).collect(),
    }
}

struct Secular<'a> {
    omega0: f64,
    omegas: &'a [f64],
    couplings: &'a [f64],
    active: &'a [usize],
}

impl Secular<'_> {
    /// `g(δ) = δ·h(ω_p + δ)` and `g′(δ)` for origin pole `p`.
    fn eval(&self, p: usize, delta: f64) -> (f64, f64) {
        let wp = self.omegas[p];
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &i in self.active {
            if i == p {
                continue;
            }
            let c2 = self.couplings[i] * self.couplings[i];
            let d = (wp - self.omegas[i]) + delta;
            s1 += c2 / d;
            s2 += c2 / (d * d);
        }
        let cp2 = self.couplings[p] * self.couplings[p];
        let lin = (wp - self.omega0) + delta;
        let g = delta * (lin - s1) - cp2;
        let dg = lin - s1 + delta * (1.0 + s2);
        (g, dg)
    }

    /// `h(e)` with `e` given as an offset from pole `p`.
    fn h(&self, p: usize, delta: f64) -> f64 {
        let wp = self.omegas[p];
        let s: f64 = self
            .active
            .iter()
            .map(|&i| {
                let c = self.couplings[i];
                c * c / ((wp - self.omegas[i]) + delta)
            })
            .sum();
        (wp - self.omega0) + delta - s
    }

    /// `c₀² = 1 / (1 + Σᵢ Cᵢ²/(e − ωᵢ)²)`.
    fn weight(&self, p: usize, delta: f64) -> f64 {
        let wp = self.omegas[p];
        let s: f64 = self
            .active
            .iter()
            .map(|&i| {
                let c = self.couplings[i];
                let d = (wp - self.omegas[i]) + delta;
                (c / d) * (c / d)
            })
            .sum();
        1.0 / (1.0 + s)
    }

    /// Root number `slot` (0 = below the lowest pole, k = above the highest).
    fn root_in_slot(&self, slot: usize, lo: f64, hi: f64) -> Root {
        let k = self.active.len();
        let (origin, a, b) = if slot == 0 {
            let p = self.active[0];
            (p, lo - self.omegas[p], 0.0)
        } else if slot == k {
            let p = self.active[k - 1];
            (p, 0.0, hi - self.omegas[p])
        } else {
            let left = self.active[slot - 1];
            let right = self.active[slot];
            let half = 0.5 * (self.omegas[right] - self.omegas[left]);
            if self.h(left, half) > 0.0 {
                (left, 0.0, half)
            } else {
                (right, -half, 0.0)
            }
        };
        let delta = self.solve(origin, a, b);
        Root::Secular { origin, delta }
    }

    /// Safeguarded Newton for `g(δ) = 0` on `[a, b]`, where `g` changes sign.
    fn solve(&self, p: usize, a: f64, b: f64) -> f64 {
        let cp2 = self.couplings[p] * self.couplings[p];
        // g(0) = −C_p² < 0, so the endpoint at 0 is the negative one.
        let (mut neg, mut pos) = if a == 0.0 { (a, b) } else { (b, a) };
        let (g_pos, _) = self.eval(p, pos);
        if g_pos <= 0.0 {
            return pos;
        }
        // first-order guess δ ≈ C_p² / R, R = h without the p-term at δ = 0
        let (g0, dg0) = self.eval(p, 0.0);
        debug_assert!((g0 + cp2).abs() <= f64::EPSILON * cp2.max(f64::MIN_POSITIVE) * 4.0);
        let mut x = if dg0 != 0.0 { cp2 / dg0 } else { 0.5 * (a + b) };
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (neg + pos);
        }
        for _ in 0..200 {
            let (g, dg) = self.eval(p, x);
            if g == 0.0 {
                return x;
            }
            if g < 0.0 {
                neg = x;
            } else {
                pos = x;
            }
            let width = (pos - neg).abs();
            if width <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                return x;
            }
            let step = g / dg;
            let next = x - step;
            let inside = next > neg.min(pos) && next < neg.max(pos);
            if inside && dg.is_finite() && dg != 0.0 {
                if step.abs() <= 2.0 * f64::EPSILON * next.abs() {
                    return next;
                }
                x = next;
            } else {
                x = 0.5 * (neg + pos);
            }
        }
        x
    }
}
