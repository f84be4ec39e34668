use num_complex::Complex64;
use phase_engine::io::{read_wigner_csv, read_wigner_json, write_wigner_csv, write_wigner_json};
use phase_engine::{
    covariance_evolve, critical_coupling, discretize, eval_spectral, evolve_state, rdm_element,
    CatParity, CovarianceMatrix, Cutoff, GridSpec, InitialState, PropagatorRecord, RecordOptions,
    Scheme, SpectralModel, SystemParams, TimeGrid, WignerGrid,
};
use proptest::prelude::*;

fn cutoff() -> impl Strategy<Value = Cutoff> {
    prop_oneof![
        Just(Cutoff::Exponential),
        Just(Cutoff::Gaussian),
        Just(Cutoff::Hard)
    ]
}

fn model() -> impl Strategy<Value = SpectralModel> {
    (0.01f64..3.0, 0.3f64..2.5, 2.0f64..30.0, cutoff())
        .prop_map(|(eta, s, wc, c)| SpectralModel::new(eta, s, wc, c).unwrap())
}

fn resonant_record(frac: f64, temperature: f64, n: usize) -> PropagatorRecord {
    let params = SystemParams::default();
    let m = SpectralModel::ohmic(1.0, 10.0);
    let ec = critical_coupling(&m, &params).unwrap();
    let bath = discretize(&m.with_eta(frac * ec), n, 40.0, Scheme::GaussLegendre)
        .unwrap()
        .with_temperature(temperature)
        .unwrap();
    let grid = TimeGrid::new(6.0, 0.02, 50).unwrap();
    let opts = RecordOptions {
        store_response: true,
        ..Default::default()
    };
    PropagatorRecord::resonant(&bath, &params, &grid, &opts).unwrap()
}

fn physical_state() -> impl Strategy<Value = InitialState> {
    prop_oneof![
        Just(InitialState::Vacuum),
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(q, p)| InitialState::Coherent { q, p }),
        (0.0f64..3.0).prop_map(|nbar| InitialState::Thermal { nbar }),
        (0.3f64..3.0, 0.0f64..2.0)
            .prop_map(|(omega_init, t_init)| InitialState::QuenchThermal { omega_init, t_init }),
        (0u32..6).prop_map(|n| InitialState::Fock { n }),
        (-1.5f64..1.5, -1.5f64..1.5, any::<bool>()).prop_map(|(a, b, odd)| InitialState::Cat {
            alpha_re: a + 0.05,
            alpha_im: b,
            parity: if odd { CatParity::Odd } else { CatParity::Even },
        }),
    ]
}

proptest! {
    #[test]
    fn spectral_density_nonnegative_and_vanishes_below_zero(m in model(), w in -50.0f64..80.0) {
        let j = eval_spectral(&m, w);
        prop_assert!(j >= 0.0);
        if w <= 0.0 {
            prop_assert_eq!(j, 0.0);
        }
    }

    #[test]
    fn critical_coupling_scales_with_frequency(m in model(), w0 in 0.2f64..3.0) {
        let a = critical_coupling(&m, &SystemParams::new(w0, 1.0).unwrap()).unwrap();
        let b = critical_coupling(&m, &SystemParams::new(2.0 * w0, 1.0).unwrap()).unwrap();
        prop_assert!((b - 2.0 * a).abs() <= 1e-14 * b);
    }

    #[test]
    fn hard_cutoff_nodes_stay_below_cutoff(
        wc in 1.0f64..20.0,
        n in 4usize..200,
        scheme in prop_oneof![Just(Scheme::GaussLegendre), Just(Scheme::Midpoint), Just(Scheme::Trapezoid)],
    ) {
        let m = SpectralModel::new(0.3, 1.0, wc, Cutoff::Hard).unwrap();
        let bath = discretize(&m, n, 5.0, scheme).unwrap();
        prop_assert!(bath.omegas().iter().all(|w| *w <= wc && *w > 0.0));
    }

    #[test]
    fn gaussian_density_matrix_is_hermitian_with_unit_trace(
        c_qq in 0.1f64..3.0,
        c_pp in 0.1f64..3.0,
        rho in -0.9f64..0.9,
        mq in -1.0f64..1.0,
        mp in -1.0f64..1.0,
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
    ) {
        let c_qp = rho * (c_qq * c_pp).sqrt();
        prop_assume!(c_qq * c_pp - c_qp * c_qp >= 0.25);
        let cov = CovarianceMatrix::new(c_qq, c_qp, c_pp);
        let a = rdm_element((mq, mp), &cov, x, y).unwrap();
        let b = rdm_element((mq, mp), &cov, y, x).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-14);
        prop_assert!(a.norm() <= (rdm_element((mq, mp), &cov, x, x).unwrap().re
            * rdm_element((mq, mp), &cov, y, y).unwrap().re).sqrt() + 1e-14);
        // trace by midpoint rule over ±12σ
        let s = c_qq.sqrt();
        let n = 2000;
        let h = 24.0 * s / n as f64;
        let tr: Complex64 = (0..n)
            .map(|k| rdm_element((mq, mp), &cov, mq - 12.0 * s + (k as f64 + 0.5) * h, mq - 12.0 * s + (k as f64 + 0.5) * h).unwrap() * h)
            .sum();
        prop_assert!((tr.re - 1.0).abs() < 1e-8 && tr.im.abs() < 1e-12);
    }

    #[test]
    fn wigner_files_round_trip(
        q0 in -5.0f64..0.0, lq in 0.5f64..10.0, p0 in -5.0f64..0.0, lp in 0.5f64..10.0,
        n_q in 2usize..12, n_p in 2usize..12, seed in any::<u64>(),
    ) {
        let spec = GridSpec::new(q0, q0 + lq, p0, p0 + lp, n_q, n_p).unwrap();
        let values = (0..spec.len())
            .map(|k| ((seed.wrapping_mul(k as u64 + 1) % 10007) as f64 / 7.0 - 700.0) * 1e-3 / 3.0)
            .collect();
        let g = WignerGrid::new(spec, values).unwrap();
        let mut csv = Vec::new();
        write_wigner_csv(&mut csv, &g).unwrap();
        let back = read_wigner_csv(csv.as_slice()).unwrap();
        prop_assert_eq!(&back.values, &g.values);
        prop_assert_eq!((back.spec.n_q, back.spec.n_p), (n_q, n_p));
        let mut json = Vec::new();
        write_wigner_json(&mut json, &g).unwrap();
        prop_assert_eq!(read_wigner_json(json.as_slice()).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sum_rule_holds_at_every_stored_time(frac in 0.05f64..2.5, n in 16usize..160) {
        let rec = resonant_record(frac, 0.0, n);
        prop_assert!(rec.sum_rule_defect().unwrap() < 1e-8);
    }

    #[test]
    fn evolved_states_stay_physical(
        state in physical_state(),
        frac in 0.1f64..2.0,
        temperature in prop_oneof![Just(0.0), 0.05f64..3.0],
    ) {
        let rec = resonant_record(frac, temperature, 48);
        let params = *rec.params();
        for &t in rec.times() {
            let st = evolve_state(&state, &rec, t).unwrap();
            let cov = st.covariance();
            prop_assert!(cov.det() >= 0.25 - 1e-9, "det {} at t = {}", cov.det(), t);
            prop_assert!(st.purity() <= 1.0 + 1e-9);
            prop_assert!(st.occupation(&params) >= -1e-12);
            if state.is_gaussian() {
                let init = state.gaussian_moments(&params).unwrap().1;
                let c = covariance_evolve(&init, &rec, t).unwrap();
                prop_assert!(c.det() >= 0.25 - 1e-9);
            }
        }
    }

    #[test]
    fn coherent_states_stay_pure_at_zero_temperature(
        q in -3.0f64..3.0, p in -3.0f64..3.0, frac in 0.1f64..2.0,
    ) {
        let rec = resonant_record(frac, 0.0, 48);
        for &t in rec.times() {
            let st = evolve_state(&InitialState::Coherent { q, p }, &rec, t).unwrap();
            prop_assert!((st.purity() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn default_window_holds_unit_norm(state in physical_state(), frac in 0.1f64..2.0) {
        let rec = resonant_record(frac, 0.3, 48);
        let t = *rec.times().last().unwrap();
        let st = evolve_state(&state, &rec, t).unwrap();
        let g = st.fill(&st.auto_grid()).unwrap();
        prop_assert!((g.norm() - 1.0).abs() < 1e-4, "norm {}", g.norm());
    }
}
