//! Exact out-of-equilibrium dynamics of a single bosonic mode linearly
//! coupled to a harmonic bath.
//!
//! The engine works in phase space: every supported initial state is carried
//! to time `t` through the exact linear propagation of the full system-bath
//! problem and reported as a Wigner function (or its moments). For the
//! number-conserving ("resonant") coupling the one-excitation sector is
//! solved exactly, which also locates the environment-induced bound state
//! and the quantum phase transition it signals.
//!
//! Layout:
//!
//! * [`bath`] – spectral densities, discretization, self-energy, critical coupling.
//! * [`dynamics`] – `u(t)`, response integrals, thermal kernel, covariance
//!   evolution, quantum-Brownian-motion propagation.
//! * [`wigner`] – Wigner grids, initial-state families, closed-form evolution,
//!   observables.
//! * [`transition`] – bound-state search, residue, phase sweeps.
//! * [`oracle`] – brute-force references used to validate the closed forms.
//! * [`io`] – CSV / JSON artifact formats.
//!
//! Units: ħ = k_B = 1. Frequencies are usually quoted in units of ω₀.

// `!(x > 0.0)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod oracle;
pub mod quad;
pub mod transition;
pub mod wigner;

pub use bath::{
    critical_coupling, discretize, eval_spectral, self_energy_real, Cutoff, DiscreteBath, Scheme,
    SelfEnergy, SpectralModel, SystemParams,
};
pub use dynamics::{
    covariance_evolve, one_excitation_spectrum, propagator_u, qbm_propagate, qbm_sigma,
    response_integrals, thermal_v, CouplingModel, CovarianceMatrix, OneExcitationSpectrum,
    PropagatorRecord, RecordOptions, TimeGrid, URoute,
};
pub use error::{Error, Result};
pub use transition::{find_bound_state, residue_weight, transition_report, Phase, PoleReport};
pub use wigner::{
    asymptotic_wigner, evolve_state, evolve_wigner, observables, rdm_element, wigner_fock,
    wigner_gaussian, CatParity, GridSpec, InitialState, Observables, PhaseState, WignerGrid,
};

/// 2×2 real matrix used for Φ(t), ℳᵢ(t), σ(t) and covariance blocks.
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Symplectic form J = [[0, 1], [-1, 0]].
pub fn symplectic_j() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
