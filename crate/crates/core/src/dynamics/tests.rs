use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::*;
use crate::bath::{critical_coupling, discretize, Scheme, SpectralModel};

fn ohmic_bath(eta_over_c: f64, n: usize) -> (DiscreteBath, SystemParams) {
    let params = SystemParams::default();
    let model = SpectralModel::ohmic(1.0, 10.0);
    let ec = critical_coupling(&model, &params).unwrap();
    let bath = discretize(
        &model.with_eta(eta_over_c * ec),
        n,
        40.0,
        Scheme::GaussLegendre,
    )
    .unwrap();
    (bath, params)
}

fn rabi_bath() -> (DiscreteBath, SystemParams) {
    (
        DiscreteBath::new(vec![1.0], vec![0.1]).unwrap(),
        SystemParams::default(),
    )
}

fn dense_h1(bath: &DiscreteBath, params: &SystemParams) -> DMatrix<f64> {
    let n = bath.n_modes();
    let mut h = DMatrix::zeros(n + 1, n + 1);
    h[(0, 0)] = params.omega0;
    for i in 0..n {
        h[(0, i + 1)] = bath.couplings()[i];
        h[(i + 1, 0)] = bath.couplings()[i];
        h[(i + 1, i + 1)] = bath.omegas()[i];
    }
    h
}

#[test]
fn spectrum_decoupled() {
    let bath = DiscreteBath::new(vec![0.5, 2.0], vec![0.0, 0.0]).unwrap();
    let s = one_excitation_spectrum(&bath, &SystemParams::default());
    assert_eq!(s.energies, vec![0.5, 1.0, 2.0]);
    assert_eq!(s.weights, vec![0.0, 1.0, 0.0]);
    assert_eq!(s.vector(1), vec![1.0, 0.0, 0.0]);
    assert_eq!(s.vector(2), vec![0.0, 0.0, 1.0]);
}

#[test]
fn spectrum_avoided_crossing() {
    let (bath, params) = rabi_bath();
    let s = one_excitation_spectrum(&bath, &params);
    assert_abs_diff_eq!(s.energies[0], 0.9, epsilon = 1e-14);
    assert_abs_diff_eq!(s.energies[1], 1.1, epsilon = 1e-14);
    assert_abs_diff_eq!(s.weights[0], 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(s.weights[1], 0.5, epsilon = 1e-14);
}

#[test]
fn spectrum_matches_dense_eigensolver() {
    let (bath, params) = ohmic_bath(2.0, 256);
    let s = one_excitation_spectrum(&bath, &params);
    let dense = SymmetricEigen::new(dense_h1(&bath, &params));
    let mut ev: Vec<f64> = dense.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (a, b) in s.energies.iter().zip(&ev) {
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
    }
    assert!(s.energies[0] < 0.0);
    let total: f64 = s.weights.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);

    // eigen-residual and orthonormality of the secular vectors
    let h = dense_h1(&bath, &params);
    let mut worst_res: f64 = 0.0;
    let vecs: Vec<Vec<f64>> = (0..s.len()).map(|j| s.vector(j)).collect();
    for (j, v) in vecs.iter().enumerate() {
        let v = nalgebra::DVector::from_vec(v.clone());
        let r = &h * &v - &v * s.energies[j];
        worst_res = worst_res.max(r.amax());
    }
    assert!(worst_res < 1e-10, "residual {worst_res}");
    let mut worst_orth: f64 = 0.0;
    for a in (0..vecs.len()).step_by(7) {
        for b in 0..vecs.len() {
            let d: f64 = vecs[a].iter().zip(&vecs[b]).map(|(x, y)| x * y).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst_orth = worst_orth.max((d - target).abs());
        }
    }
    assert!(worst_orth < 1e-12, "orthogonality {worst_orth}");
}

#[test]
fn spectrum_with_tiny_and_zero_couplings() {
    let bath = DiscreteBath::new(
        vec![0.3, 0.9, 1.0, 1.7, 2.5],
        vec![1e-12, 0.2, 0.0, 1e-9, 0.4],
    )
    .unwrap();
    let params = SystemParams::default();
    let s = one_excitation_spectrum(&bath, &params);
    assert_eq!(s.len(), 6);
    assert!(s.energies.windows(2).all(|w| w[1] >= w[0]));
    let total: f64 = s.weights.iter().sum();
    assert!((total - 1.0).abs() < 1e-13);
    for j in 0..s.len() {
        let v = s.vector(j);
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12, "j={j}: {norm}");
    }
}

#[test]
fn free_evolution_and_initial_value() {
    let bath = DiscreteBath::new(vec![0.5, 3.0], vec![0.0, 0.0]).unwrap();
    let params = SystemParams::new(1.3, 1.0).unwrap();
    let times: Vec<f64> = (0..=50).map(|k| 0.2 * k as f64).collect();
    for route in [URoute::Diagonalization, URoute::Volterra] {
        let u = propagator_u(&bath, &params, &times, route).unwrap();
        assert_eq!(u[0], Complex64::new(1.0, 0.0));
        for (t, u) in times.iter().zip(&u) {
            let exact = Complex64::from_polar(1.0, -1.3 * t);
            assert!((u - exact).norm() < 1e-10, "{route:?} t={t}");
        }
    }
}

#[test]
fn rabi_solution_both_routes() {
    let (bath, params) = rabi_bath();
    let times: Vec<f64> = (0..=100).map(|k| 0.5 * k as f64).collect();
    for route in [URoute::Diagonalization, URoute::Volterra] {
        let u = propagator_u(&bath, &params, &times, route).unwrap();
        for (t, u) in times.iter().zip(&u) {
            let exact = Complex64::from_polar((0.1 * t).cos(), -t);
            assert!((u - exact).norm() < 1e-9, "{route:?} t={t}: {u} vs {exact}");
        }
    }
}

#[test]
fn rabi_response_and_thermal_kernel() {
    let (bath, params) = rabi_bath();
    let occupied = bath
        .clone()
        .with_temperature(crate::bath::temperature_for_occupation(1.0, 2.0))
        .unwrap();
    let grid = TimeGrid::new(40.0, 1e-3, 100).unwrap();
    for route in [URoute::Diagonalization, URoute::Volterra] {
        let opts = RecordOptions {
            route,
            store_response: true,
            store_mode_matrices: false,
        };
        let rec = PropagatorRecord::resonant(&occupied, &params, &grid, &opts).unwrap();
        let i1 = &rec.response().unwrap()[0];
        assert_eq!(i1[0], Complex64::new(0.0, 0.0));
        for (k, t) in rec.times().iter().enumerate() {
            let s = (0.1 * t).sin();
            assert!((i1[k].norm() - s.abs()).abs() < 1e-9, "{route:?} t={t}");
            assert!((rec.v().unwrap()[k] - 2.0 * s * s).abs() < 1e-8);
        }
        assert!(rec.sum_rule_defect().unwrap() < 1e-9);
    }
    // zero temperature: v ≡ 0
    let rec = PropagatorRecord::resonant(&bath, &params, &grid, &RecordOptions::default()).unwrap();
    assert!(rec.v().unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn sampled_response_matches_spectral_response() {
    let (bath, params) = ohmic_bath(0.5, 48);
    let grid = TimeGrid::new(10.0, 2e-3, 1).unwrap();
    let opts = RecordOptions {
        store_response: true,
        ..Default::default()
    };
    let rec = PropagatorRecord::resonant(&bath, &params, &grid, &opts).unwrap();
    let sampled = response_integrals(&bath, rec.u().unwrap(), grid.dt);
    let exact = rec.response().unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in sampled.iter().zip(exact) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).norm());
        }
    }
    assert!(worst < 1e-5, "product trapezoid error {worst}");
    let zero = DiscreteBath::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
    let r = response_integrals(&zero, &[Complex64::new(1.0, 0.0); 5], 0.1);
    assert!(r.iter().flatten().all(|x| x.norm() == 0.0));
}

#[test]
fn sum_rule_holds_on_diagonalization_route() {
    let (bath, params) = ohmic_bath(2.0, 128);
    let grid = TimeGrid::new(50.0, 0.05, 1).unwrap();
    let opts = RecordOptions {
        store_response: true,
        store_mode_matrices: true,
        ..Default::default()
    };
    let rec = PropagatorRecord::resonant(&bath, &params, &grid, &opts).unwrap();
    assert!(rec.sum_rule_defect().unwrap() < 1e-10);
    // the resonant mode matrices preserve the canonical form as well
    let modes = rec.mode_matrices().unwrap();
    for k in (0..rec.times().len()).step_by(97) {
        let blocks: Vec<Mat2> = modes.iter().map(|m| m[k]).collect();
        assert!(qbm::canonical_defect(&rec.phi()[k], &blocks) < 1e-10);
    }
}

#[test]
fn covariance_examples() {
    let (bath, params) = ohmic_bath(2.0, 64);
    let grid = TimeGrid::new(5.0, 0.01, 10).unwrap();
    let rec = PropagatorRecord::resonant(&bath, &params, &grid, &RecordOptions::default()).unwrap();
    let vac = CovarianceMatrix::vacuum(&params);
    let th = CovarianceMatrix::thermal(&params, 1.5);
    let c0 = covariance_evolve(&th, &rec, 0.0).unwrap();
    assert!((c0.matrix() - th.matrix()).abs().max() < 1e-14);
    for (k, t) in rec.times().iter().enumerate() {
        let c = covariance_evolve(&vac, &rec, *t).unwrap();
        assert_abs_diff_eq!(c.c_qq, vac.c_qq, epsilon = 1e-12);
        assert_abs_diff_eq!(c.c_qp, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.c_pp, vac.c_pp, epsilon = 1e-12);
        let a = rec.u().unwrap()[k].norm_sqr();
        let c = covariance_evolve(&th, &rec, *t).unwrap();
        let expect = vac.scaled(1.0 + 3.0 * a);
        assert_abs_diff_eq!(c.c_qq, expect.c_qq, epsilon = 1e-12);
        assert_abs_diff_eq!(c.c_pp, expect.c_pp, epsilon = 1e-12);
        assert!(c.det() >= 0.25 - 1e-9);
    }
    assert!(covariance_evolve(&CovarianceMatrix::new(1.0, 2.0, 1.0), &rec, 0.0).is_err());
    assert!(matches!(
        covariance_evolve(&vac, &rec, 0.123),
        Err(crate::Error::TimeNotInRecord { .. })
    ));
}

#[test]
fn volterra_rejects_unstable_step() {
    let (bath, params) = ohmic_bath(2.0, 16);
    // ω_max·dt ≫ 2.8 puts RK4 outside its stability region
    let err = propagator_u_volterra(&bath, &params, &[0.0, 50.0], 0.5).unwrap_err();
    assert!(matches!(err, crate::Error::StepRejected { .. }));
}

#[test]
fn time_grid_layout() {
    let g = TimeGrid::new(1.0, 0.1, 3).unwrap();
    assert_eq!(g.steps, 10);
    assert_eq!(g.stored_steps(), vec![0, 3, 6, 9]);
    assert!(TimeGrid::new(1.0, 0.0, 1).is_err());
    assert!(TimeGrid::new(1.0, 0.1, 0).is_err());
}

#[test]
fn qbm_decoupled_is_free_rotation() {
    let bath = DiscreteBath::new(vec![0.7, 2.0], vec![0.0, 0.0]).unwrap();
    let params = SystemParams::new(1.5, 2.0).unwrap();
    let grid = TimeGrid::new(10.0, 1e-3, 500).unwrap();
    let rec = PropagatorRecord::qbm(&bath, &params, &grid, &RecordOptions::default()).unwrap();
    let mw = params.m_omega();
    for (k, t) in rec.times().iter().enumerate() {
        let (c, s) = ((1.5 * t).cos(), (1.5 * t).sin());
        let exact = Mat2::new(c, s / mw, -mw * s, c);
        assert!((rec.phi()[k] - exact).abs().max() < 1e-10, "t={t}");
        assert_eq!(rec.sigma().unwrap()[k], Mat2::zeros());
    }
    assert_eq!(rec.phi()[0], Mat2::identity());
}

#[test]
fn qbm_canonical_form_and_rejection() {
    let (bath, params) = ohmic_bath(0.15, 24);
    let grid = TimeGrid::new(20.0, 1e-3, 1000).unwrap();
    let prop = qbm_propagate(&bath, &params, &grid).unwrap();
    assert!(prop.mode_matrices.iter().all(|m| m[0] == Mat2::zeros()));
    for k in 0..prop.times.len() {
        let blocks: Vec<Mat2> = prop.mode_matrices.iter().map(|m| m[k]).collect();
        assert!(qbm::canonical_defect(&prop.phi[k], &blocks) < 1e-8);
    }
    let (strong, _) = ohmic_bath(0.3, 24);
    assert!(matches!(
        qbm_propagate(&strong, &params, &grid),
        Err(crate::Error::InvalidParameter {
            name: "bath.eta",
            ..
        })
    ));
}

#[test]
fn qbm_sigma_zero_at_origin() {
    let (bath, params) = ohmic_bath(0.1, 16);
    let grid = TimeGrid::new(1.0, 1e-3, 1).unwrap();
    let run = qbm::integrate(&bath, &params, &grid, false).unwrap();
    assert_eq!(
        qbm_sigma(&bath, &params, &run.fine, 0.0).unwrap(),
        Mat2::zeros()
    );
    let s = qbm_sigma(&bath, &params, &run.fine, 1.0).unwrap();
    assert!(s[(1, 1)] > 0.0);
    assert!(qbm_sigma(&bath, &params, &run.fine, 2.0).is_err());
}
