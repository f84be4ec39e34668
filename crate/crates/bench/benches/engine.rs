use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phase_engine::{
    evolve_state, find_bound_state, one_excitation_spectrum, CatParity, GridSpec, InitialState,
    PropagatorRecord, RecordOptions, SpectralModel, SystemParams, TimeGrid,
};
use phase_engine_bench::ohmic_bath;

fn spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("one_excitation_spectrum");
    for n in [256, 1024, 4096] {
        let (bath, params) = ohmic_bath(2.0, n, 0.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| one_excitation_spectrum(black_box(&bath), &params))
        });
    }
    g.finish();
    c.bench_function("find_bound_state", |b| {
        let model = SpectralModel::ohmic(1.3, 10.0);
        b.iter(|| find_bound_state(black_box(&model), &SystemParams::default()))
    });
}

fn propagator(c: &mut Criterion) {
    let mut g = c.benchmark_group("record");
    g.sample_size(10);
    let grid = TimeGrid::new(20.0, 0.01, 10).unwrap();
    let (bath, params) = ohmic_bath(0.5, 256, 0.5);
    g.bench_function("resonant_n256_t20", |b| {
        b.iter(|| {
            PropagatorRecord::resonant(&bath, &params, &grid, &RecordOptions::default()).unwrap()
        })
    });
    let (bath, params) = ohmic_bath(0.15, 32, 0.5);
    let grid = TimeGrid::new(10.0, 1e-3, 100).unwrap();
    g.bench_function("qbm_n32_t10", |b| {
        b.iter(|| PropagatorRecord::qbm(&bath, &params, &grid, &RecordOptions::default()).unwrap())
    });
    g.finish();
}

fn wigner_fill(c: &mut Criterion) {
    let (bath, params) = ohmic_bath(2.0, 256, 0.2);
    let rec = PropagatorRecord::resonant(
        &bath,
        &params,
        &TimeGrid::new(10.0, 0.01, 100).unwrap(),
        &RecordOptions::default(),
    )
    .unwrap();
    let spec = GridSpec::new(-6.0, 6.0, -6.0, 6.0, 201, 201).unwrap();
    let mut g = c.benchmark_group("wigner_fill_201x201");
    for (name, state) in [
        ("coherent", InitialState::Coherent { q: 1.0, p: 0.5 }),
        ("fock3", InitialState::Fock { n: 3 }),
        (
            "cat",
            InitialState::Cat {
                alpha_re: 1.5,
                alpha_im: 0.0,
                parity: CatParity::Even,
            },
        ),
    ] {
        let st = evolve_state(&state, &rec, 10.0).unwrap();
        g.bench_function(name, |b| b.iter(|| st.fill(black_box(&spec)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, spectrum, propagator, wigner_fill);
criterion_main!(benches);
