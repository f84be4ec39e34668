//! Brute-force references for the closed forms: dense one-excitation
//! diagonalization, full-system QBM propagation and the master-equation
//! Wigner solution of the resonant model.

mod validate;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bath::{coth_factor, DiscreteBath, SystemParams};
use crate::dynamics::{CouplingModel, CovarianceMatrix, PropagatorRecord};
use crate::error::{Error, Result};
use crate::wigner::{GridSpec, WignerGrid};
use crate::Mat2;

pub use validate::{run_validation, Check, CheckStatus, ValidationReport, ValidationSetup};

/// Largest bath handled by the full phase-space oracle.
pub const FULL_ORACLE_MAX_MODES: usize = 64;

/// Dense eigen-decomposition of the one-excitation Hamiltonian
/// (`ω₀`, `ωᵢ` on the diagonal, `Cᵢ` in the first row and column).
#[derive(Debug, Clone)]
pub struct OneExcitationEigensystem {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Columns are eigenvectors `(system, mode_1, …)`, first component ≥ 0.
    pub vectors: DMatrix<f64>,
    /// `c₀ⱼ`, first component of each eigenvector.
    pub overlaps: Vec<f64>,
    hamiltonian: DMatrix<f64>,
}

impl OneExcitationEigensystem {
    pub fn new(bath: &DiscreteBath, params: &SystemParams) -> Self {
        let h = one_excitation_hamiltonian(bath, params);
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..h.nrows()).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = DMatrix::zeros(h.nrows(), h.ncols());
        for (col, &k) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            let s = if v[0] < 0.0 { -1.0 } else { 1.0 };
            vectors.set_column(col, &(v * s));
        }
        let overlaps = vectors.row(0).iter().copied().collect();
        Self {
            energies,
            vectors,
            overlaps,
            hamiltonian: h,
        }
    }

    /// `max_j ‖H₁vⱼ − eⱼvⱼ‖∞`.
    pub fn residual(&self) -> f64 {
        let hv = &self.hamiltonian * &self.vectors;
        (0..self.energies.len())
            .map(|j| (hv.column(j) - self.vectors.column(j) * self.energies[j]).amax())
            .fold(0.0, f64::max)
    }

    /// `|Σⱼ c₀ⱼ² − 1|`.
    pub fn weight_defect(&self) -> f64 {
        (self.overlaps.iter().map(|c| c * c).sum::<f64>() - 1.0).abs()
    }
}

pub fn one_excitation_hamiltonian(bath: &DiscreteBath, params: &SystemParams) -> DMatrix<f64> {
    let n = bath.n_modes();
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = params.omega0;
    for (i, (w, c)) in bath.omegas().iter().zip(bath.couplings()).enumerate() {
        h[(0, i + 1)] = *c;
        h[(i + 1, 0)] = *c;
        h[(i + 1, i + 1)] = *w;
    }
    h
}

/// `⟨1|ρ(t)|1⟩ = Σⱼ Σⱼ′ c₀ⱼ² c₀ⱼ′² cos((eⱼ − eⱼ′)t)` for a Fock-1 start in a
/// zero-temperature bath, every cross term summed explicitly.
pub fn brute_force_population(eigs: &OneExcitationEigensystem, t: f64) -> f64 {
    let w: Vec<f64> = eigs.overlaps.iter().map(|c| c * c).collect();
    let e = &eigs.energies;
    let mut s = 0.0;
    for j in 0..w.len() {
        s += w[j] * w[j];
        for k in 0..j {
            s += 2.0 * w[j] * w[k] * ((e[j] - e[k]) * t).cos();
        }
    }
    s
}

/// Master-equation solution for a coherent start `|γ⟩`:
/// `W(α) = (Ω/π) e^{−Ω|α − uγ|²}` per `d²α`, `Ω = 2/(1 + 2v)`, returned per
/// `dq dp` (`dq dp = 2 d²α`) with `α = √(mω₀/2) q + i p/√(2mω₀)`.
pub fn me_solution_coherent(
    gamma: Complex64,
    record: &PropagatorRecord,
    t: f64,
    grid: &GridSpec,
) -> Result<WignerGrid> {
    grid.validate()?;
    let (Some(u), Some(v)) = (record.u(), record.v()) else {
        return Err(Error::Unsupported(
            "the master-equation solution is for the resonant model".into(),
        ));
    };
    let k = record.index_of(t)?;
    let omega = 2.0 / (1.0 + 2.0 * v[k]);
    let centre = u[k] * gamma;
    let mw = record.params().m_omega();
    let (sq, sp) = ((0.5 * mw).sqrt(), 1.0 / (2.0 * mw).sqrt());
    Ok(grid.fill(|q, p| {
        let alpha = Complex64::new(sq * q, sp * p);
        0.5 * omega / PI * (-omega * (alpha - centre).norm_sqr()).exp()
    }))
}

/// Coherent amplitude `γ` of the coherent state with mean `(q, p)`.
pub fn coherent_amplitude(q: f64, p: f64, params: &SystemParams) -> Complex64 {
    let mw = params.m_omega();
    Complex64::new((0.5 * mw).sqrt() * q, p / (2.0 * mw).sqrt())
}

/// Exact QBM propagator `z(t) = M(t) z(0)` on the full phase space
/// `(q, p, q₁, p₁, …)`, from the normal modes of the mass-weighted
/// stiffness matrix.
pub fn qbm_full_propagator(
    bath: &DiscreteBath,
    params: &SystemParams,
    t: f64,
) -> Result<DMatrix<f64>> {
    let n = bath.n_modes();
    if n > FULL_ORACLE_MAX_MODES {
        return Err(Error::param(
            "bath.n_modes",
            format!("full-system oracle is limited to {FULL_ORACLE_MAX_MODES} modes"),
        ));
    }
    let g = bath.qbm_couplings(params);
    let masses: Vec<f64> = std::iter::once(params.mass)
        .chain(bath.masses().iter().copied())
        .collect();
    let freqs: Vec<f64> = std::iter::once(params.omega0)
        .chain(bath.omegas().iter().copied())
        .collect();
    let d = n + 1;
    let mut k = DMatrix::zeros(d, d);
    for a in 0..d {
        k[(a, a)] = freqs[a] * freqs[a];
    }
    for i in 0..n {
        let c = g[i] / (masses[0] * masses[i + 1]).sqrt();
        k[(0, i + 1)] = c;
        k[(i + 1, 0)] = c;
    }
    let eig = SymmetricEigen::new(k);
    if eig.eigenvalues.iter().any(|x| *x <= 0.0) {
        return Err(Error::param(
            "bath.eta",
            "QBM Hamiltonian is unbounded below",
        ));
    }
    let o = &eig.eigenvectors;
    let w: Vec<f64> = eig.eigenvalues.iter().map(|x| x.sqrt()).collect();
    let diag = |f: &dyn Fn(f64) -> f64| {
        let dm = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            w.iter().map(|x| f(*x)),
        ));
        o * dm * o.transpose()
    };
    let cos = diag(&|x| (x * t).cos());
    let sin_over = diag(&|x| (x * t).sin() / x);
    let sin_times = diag(&|x| -(x * t).sin() * x);
    // (x, π) = (√m q, p/√m) → (q, p)
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for a in 0..d {
        for b in 0..d {
            let (sa, sb) = (masses[a].sqrt(), masses[b].sqrt());
            m[(2 * a, 2 * b)] = cos[(a, b)] * sb / sa;
            m[(2 * a, 2 * b + 1)] = sin_over[(a, b)] / (sa * sb);
            m[(2 * a + 1, 2 * b)] = sin_times[(a, b)] * sa * sb;
            m[(2 * a + 1, 2 * b + 1)] = cos[(a, b)] * sa / sb;
        }
    }
    Ok(m)
}

/// Initial full covariance: system block `initial_sys`, each mode thermal,
/// `coth(ωᵢ/2T) diag(1/(2mᵢωᵢ), mᵢωᵢ/2)`.
pub fn qbm_initial_covariance(bath: &DiscreteBath, initial_sys: &CovarianceMatrix) -> DMatrix<f64> {
    let d = bath.n_modes() + 1;
    let mut s = DMatrix::zeros(2 * d, 2 * d);
    s[(0, 0)] = initial_sys.c_qq;
    s[(0, 1)] = initial_sys.c_qp;
    s[(1, 0)] = initial_sys.c_qp;
    s[(1, 1)] = initial_sys.c_pp;
    for (i, (w, m)) in bath.omegas().iter().zip(bath.masses()).enumerate() {
        let c = coth_factor(*w, bath.temperature());
        let a = 2 * (i + 1);
        s[(a, a)] = c * 0.5 / (m * w);
        s[(a + 1, a + 1)] = c * 0.5 * m * w;
    }
    s
}

/// System block of `M(t) S₀ M(t)ᵀ` for a thermal bath.
pub fn qbm_full_covariance(
    bath: &DiscreteBath,
    params: &SystemParams,
    initial_sys: &CovarianceMatrix,
    t: f64,
) -> Result<CovarianceMatrix> {
    let m = qbm_full_propagator(bath, params, t)?;
    let top = m.rows(0, 2);
    let s = top * qbm_initial_covariance(bath, initial_sys) * top.transpose();
    Ok(CovarianceMatrix::from_matrix(&Mat2::new(
        s[(0, 0)],
        s[(0, 1)],
        s[(1, 0)],
        s[(1, 1)],
    )))
}

/// `max |M J Mᵀ − J|` on the full phase space.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut j = DMatrix::zeros(n, n);
    for a in (0..n).step_by(2) {
        j[(a, a + 1)] = 1.0;
        j[(a + 1, a)] = -1.0;
    }
    (m * &j * m.transpose() - j).amax()
}

/// `σ(t)` from the full-system oracle: the system block evolved from a
/// zero system covariance.
pub fn qbm_oracle_sigma(record: &PropagatorRecord, t: f64) -> Result<Mat2> {
    if record.model() != CouplingModel::Qbm {
        return Err(Error::Unsupported("QBM record expected".into()));
    }
    let zero = CovarianceMatrix::new(0.0, 0.0, 0.0);
    Ok(qbm_full_covariance(record.bath(), record.params(), &zero, t)?.matrix())
}
