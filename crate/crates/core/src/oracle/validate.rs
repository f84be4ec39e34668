//! Invariant checks behind the `validate` subcommand.

use serde::{Deserialize, Serialize};

use super::{
    brute_force_population, coherent_amplitude, me_solution_coherent, qbm_full_propagator,
    qbm_oracle_sigma, symplectic_defect, OneExcitationEigensystem,
};
use crate::bath::{
    critical_coupling, discretize, DiscreteBath, Scheme, SpectralModel, SystemParams,
};
use crate::dynamics::{
    one_excitation_spectrum, propagator_u, PropagatorRecord, RecordOptions, TimeGrid, URoute,
};
use crate::error::Result;
use crate::transition::find_bound_state;
use crate::wigner::{
    cat_wigner_fourier, evolve_state, evolve_wigner, CatParity, GridSpec, InitialState,
};

/// Largest bath diagonalized densely by the suite.
const DENSE_MODES: usize = 512;

/// Physical setup the checks run on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSetup {
    pub model: SpectralModel,
    pub params: SystemParams,
    pub n_modes: usize,
    pub omega_max_factor: f64,
    pub scheme: Scheme,
    pub temperature: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Measured and reported without a tolerance.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check_name: String,
    pub status: CheckStatus,
    /// Infinite when the check could not be evaluated; `null` in JSON.
    #[serde(with = "unbounded")]
    pub max_error: f64,
    pub tolerance: Option<f64>,
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Check {
    fn bounded(name: &str, max_error: f64, tolerance: f64) -> Self {
        Self {
            check_name: name.into(),
            status: if max_error <= tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            max_error,
            tolerance: Some(tolerance),
        }
    }

    fn info(name: &str, value: f64) -> Self {
        Self {
            check_name: name.into(),
            status: CheckStatus::Info,
            max_error: value,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sample_times(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

/// Runs every check; a check that cannot be evaluated is reported as failed.
pub fn run_validation(setup: &ValidationSetup) -> Result<ValidationReport> {
    let params = setup.params;
    let bath = discretize(
        &setup.model,
        setup.n_modes,
        setup.omega_max_factor,
        setup.scheme,
    )?
    .with_temperature(setup.temperature)?;
    let mut checks = Vec::new();
    let mut notes = vec![
        "master-equation reference: the corrected solution W = (Omega/pi) exp(-Omega |alpha - u gamma|^2) per d^2 alpha, Omega = 2/(1 + 2v), is used; the uncorrected form of the original reference is intentionally not reproduced".to_string(),
        "phase-space convention: W is normalised over dq dp with A0 = diag(1/(2 m w0), m w0/2); the vacuum is exp(-(q^2+p^2))/pi at m w0 = 1".to_string(),
    ];

    one_excitation_checks(setup, &mut checks)?;

    // sum rule on the configured bath
    let dt = (setup.t_max / 400.0).min(0.05);
    let grid = TimeGrid::new(setup.t_max, dt, 1)?;
    let record = PropagatorRecord::resonant(
        &bath,
        &params,
        &grid,
        &RecordOptions {
            store_response: true,
            ..Default::default()
        },
    )?;
    checks.push(Check::bounded(
        "sum_rule",
        record.sum_rule_defect().unwrap_or(f64::INFINITY),
        1e-8,
    ));

    // diagonalization vs Volterra
    let times = sample_times(setup.t_max.min(20.0), 41);
    let diag = propagator_u(&bath, &params, &times, URoute::Diagonalization)?;
    let check = match propagator_u(&bath, &params, &times, URoute::Volterra) {
        Ok(volt) => Check::bounded(
            "route_agreement",
            max_abs(diag.iter().zip(&volt).map(|(a, b)| (a - b).norm())),
            1e-6,
        ),
        Err(e) => {
            notes.push(format!("route_agreement: {e}"));
            Check::bounded("route_agreement", f64::INFINITY, 1e-6)
        }
    };
    checks.push(check);

    master_equation_check(&record, &mut checks)?;
    wigner_checks(&record, &mut checks)?;
    qbm_checks(setup, &mut checks, &mut notes)?;
    transition_checks(setup, &bath, &mut checks)?;

    Ok(ValidationReport { checks, notes })
}

fn one_excitation_checks(setup: &ValidationSetup, checks: &mut Vec<Check>) -> Result<()> {
    let params = setup.params;
    let n = setup.n_modes.min(DENSE_MODES);
    let bath = discretize(&setup.model, n, setup.omega_max_factor, setup.scheme)?;
    let dense = OneExcitationEigensystem::new(&bath, &params);
    checks.push(Check::bounded(
        "eigensystem_residual",
        dense.residual(),
        1e-10,
    ));
    checks.push(Check::bounded(
        "eigensystem_weights",
        dense.weight_defect(),
        1e-12,
    ));
    let secular = one_excitation_spectrum(&bath, &params);
    let scale = dense.energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    checks.push(Check::bounded(
        "secular_vs_dense_energies",
        max_abs(
            secular
                .energies
                .iter()
                .zip(&dense.energies)
                .map(|(a, b)| a - b),
        ) / scale,
        1e-12,
    ));
    let times = sample_times(setup.t_max, 101);
    let err = max_abs(
        times
            .iter()
            .map(|t| brute_force_population(&dense, *t) - secular.propagator(*t).norm_sqr()),
    );
    checks.push(Check::bounded("population_identity", err, 1e-10));
    Ok(())
}

fn master_equation_check(record: &PropagatorRecord, checks: &mut Vec<Check>) -> Result<()> {
    let params = *record.params();
    let (q, p) = (1.2, -0.7);
    let gamma = coherent_amplitude(q, p, &params);
    let grid = GridSpec::new(-6.0, 6.0, -6.0, 6.0, 201, 201)?;
    let last = record.times().len() - 1;
    let mut err: f64 = 0.0;
    for k in 0..5 {
        let t = record.times()[last * k / 4];
        let me = me_solution_coherent(gamma, record, t, &grid)?;
        let engine = evolve_wigner(&InitialState::Coherent { q, p }, record, t, &grid)?;
        err = err.max(me.max_abs_diff(&engine));
    }
    checks.push(Check::bounded("master_equation_equivalence", err, 1e-8));
    Ok(())
}

fn wigner_checks(record: &PropagatorRecord, checks: &mut Vec<Check>) -> Result<()> {
    let states = [
        InitialState::Vacuum,
        InitialState::Coherent { q: 1.0, p: 0.5 },
        InitialState::Thermal { nbar: 0.5 },
        InitialState::QuenchThermal {
            omega_init: 2.0,
            t_init: 0.5,
        },
        InitialState::Fock { n: 1 },
        InitialState::Fock { n: 3 },
        InitialState::Cat {
            alpha_re: 1.0,
            alpha_im: 0.0,
            parity: CatParity::Even,
        },
    ];
    let last = record.times().len() - 1;
    let mut norm_err: f64 = 0.0;
    let mut purity_excess: f64 = 0.0;
    let mut det_deficit: f64 = 0.0;
    for s in &states {
        for t in [record.times()[last / 2], record.times()[last]] {
            let st = evolve_state(s, record, t)?;
            let grid = st.fill(&st.auto_grid())?;
            norm_err = norm_err.max((grid.norm() - 1.0).abs());
            purity_excess = purity_excess.max(st.purity() - 1.0);
            det_deficit = det_deficit.max(0.25 - st.covariance().det());
        }
    }
    checks.push(Check::bounded("wigner_norm", norm_err, 1e-4));
    checks.push(Check::bounded(
        "wigner_purity_bound",
        purity_excess.max(0.0),
        1e-9,
    ));
    checks.push(Check::bounded(
        "wigner_uncertainty",
        det_deficit.max(0.0),
        1e-9,
    ));

    let cat = InitialState::Cat {
        alpha_re: 1.0,
        alpha_im: 0.4,
        parity: CatParity::Odd,
    };
    let grid = GridSpec::new(-4.0, 4.0, -4.0, 4.0, 41, 41)?;
    let t = record.times()[record.times().len() / 2];
    let closed = evolve_wigner(&cat, record, t, &grid)?;
    let fourier = cat_wigner_fourier(&cat, record, t, &grid, 64)?;
    checks.push(Check::bounded(
        "cat_fourier_crosscheck",
        closed.max_abs_diff(&fourier),
        1e-5,
    ));
    Ok(())
}

fn qbm_checks(
    setup: &ValidationSetup,
    checks: &mut Vec<Check>,
    notes: &mut Vec<String>,
) -> Result<()> {
    let params = setup.params;
    let eta_c = critical_coupling(&setup.model, &params)?;
    let model = setup.model.with_eta(0.15 * eta_c);
    let bath = discretize(&model, 32, setup.omega_max_factor, setup.scheme)?
        .with_temperature(setup.temperature)?;
    let t_max = setup.t_max.min(10.0);
    let grid = TimeGrid::new(t_max, 1e-3, 1000)?;
    let record = PropagatorRecord::qbm(&bath, &params, &grid, &RecordOptions::default())?;
    let mut err: f64 = 0.0;
    for (k, t) in record.times().iter().enumerate() {
        let oracle = qbm_oracle_sigma(&record, *t)?;
        err = err.max((record.sigma().expect("qbm")[k] - oracle).abs().max());
    }
    checks.push(Check::bounded("qbm_sigma_vs_full_covariance", err, 1e-6));
    let m = qbm_full_propagator(&bath, &params, 50.0)?;
    checks.push(Check::bounded(
        "qbm_symplectic_form",
        symplectic_defect(&m),
        1e-8,
    ));
    notes.push(format!(
        "QBM checks use a 32-mode bath at 0.15 eta_c (eta_c = {eta_c:.6}) so the full phase-space oracle stays small"
    ));
    Ok(())
}

fn transition_checks(
    setup: &ValidationSetup,
    bath: &DiscreteBath,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let params = setup.params;
    if let Some(e1) = find_bound_state(&setup.model, &params)? {
        let s = one_excitation_spectrum(bath, &params);
        checks.push(Check::bounded(
            "bound_state_vs_discrete",
            (e1 - s.energies[0]).abs(),
            1e-6,
        ));
    }
    // ground-vector overlap in the normal phase: c₀ ~ N^p
    let eta_c = critical_coupling(&setup.model, &params)?;
    let below = setup.model.with_eta(0.5 * eta_c);
    let pts: Vec<(f64, f64)> = [64, 128, 256, 512]
        .iter()
        .map(|&n| {
            let b = discretize(&below, n, setup.omega_max_factor, setup.scheme)?;
            let c0 = one_excitation_spectrum(&b, &params).weights[0].sqrt();
            Ok(((n as f64).ln(), c0.ln()))
        })
        .collect::<Result<_>>()?;
    checks.push(Check::info("c0_scaling_exponent", slope(&pts)));
    Ok(())
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
