//! Shared fixtures for the benchmarks.

use phase_engine::{
    critical_coupling, discretize, DiscreteBath, Scheme, SpectralModel, SystemParams,
};

/// Ohmic bath with exponential cutoff at `ω_c = 10`, coupling given in units
/// of the critical coupling.
pub fn ohmic_bath(
    eta_over_c: f64,
    n_modes: usize,
    temperature: f64,
) -> (DiscreteBath, SystemParams) {
    let params = SystemParams::default();
    let model = SpectralModel::ohmic(1.0, 10.0);
    let eta_c = critical_coupling(&model, &params).expect("finite critical coupling");
    let bath = discretize(
        &model.with_eta(eta_over_c * eta_c),
        n_modes,
        40.0,
        Scheme::GaussLegendre,
    )
    .and_then(|b| b.with_temperature(temperature))
    .expect("valid bath");
    (bath, params)
}
