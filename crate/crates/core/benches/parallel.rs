//! Rayon pool against a single worker on the hot loops: ensemble Wigner
//! transform and a short Pauli–Poisson run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pwlab::fields::{preset_by_name, FieldSet, PresetParams};
use pwlab::limitlab::{Spin, SweepConfig};
use pwlab::quantum::{
    build_mixed_state, evolve_pauli_poisson, EnsembleSpec, EvolveOptions, MixedState,
};
use pwlab::spectral::Grid;
use pwlab::wigner::{wigner_transform, PhaseGrid};
use rayon::ThreadPoolBuilder;

fn setup() -> (MixedState, FieldSet) {
    let grid = Grid::cubic(2, 32, 4.0).unwrap();
    let p = PresetParams {
        amplitude: Some(0.3),
        omega: Some(1.0),
        b0: None,
    };
    let fields = preset_by_name(grid, "magnetic_trap", &p).unwrap();
    let cfg = SweepConfig::default();
    let spec = EnsembleSpec {
        density: cfg.initial,
        scheme: cfg.sampling,
        seed: 7,
        spin: Spin::Up.vector(),
        width: None,
    };
    let state = build_mixed_state(&grid, &fields, 0.25, 1.0, &spec).unwrap();
    (state, fields)
}

fn bench(c: &mut Criterion) {
    let (state, fields) = setup();
    let pg = PhaseGrid::aligned_for_width(*state.grid(), 0.25, 0.5).unwrap();
    let opts = EvolveOptions {
        dt: 0.02,
        t_final: 0.2,
        coupling: 1.0,
        energy_abort: None,
        ..EvolveOptions::default()
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let pools = [
        (
            "sequential",
            ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
        ),
        (
            "parallel",
            ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap(),
        ),
    ];

    let mut g = c.benchmark_group("wigner_transform");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(*name, |b| {
            b.iter(|| pool.install(|| black_box(wigner_transform(&state, &pg).unwrap())))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("evolve_10_steps");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(*name, |b| {
            b.iter(|| {
                pool.install(|| black_box(evolve_pauli_poisson(&state, &fields, &opts).unwrap()))
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
