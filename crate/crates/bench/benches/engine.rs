use std::hint::black_box;

use biphoton_core::rate::{grid_rate_oracle, polarization_visibility, GridSpec};
use biphoton_core::{build_amplitude_terms, coincidence_rate, count_coincidences, generate_events, ExperimentSetup};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn rates(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_form_rate");
    for n in [2u32, 4, 8] {
        let mut setup = ExperimentSetup::standard();
        setup.pump.n_pulses = n;
        let terms = build_amplitude_terms(&setup);
        group.bench_with_input(BenchmarkId::from_parameter(n), &terms, |b, terms| {
            b.iter(|| coincidence_rate(black_box(terms), &setup.model))
        });
    }
    group.finish();

    let setup = ExperimentSetup::standard();
    c.bench_function("polarization_visibility", |b| b.iter(|| polarization_visibility(black_box(&setup))));
}

fn oracle(c: &mut Criterion) {
    let setup = ExperimentSetup::standard();
    let terms = build_amplitude_terms(&setup);
    let mut group = c.benchmark_group("grid_oracle");
    group.sample_size(10);
    for steps in [128usize, 512] {
        let grid = GridSpec::covering(&terms, &setup.model, steps);
        group.bench_with_input(BenchmarkId::from_parameter(steps), &grid, |b, grid| {
            b.iter(|| grid_rate_oracle(&terms, &setup.model, black_box(grid)).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let setup = ExperimentSetup::standard();
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.bench_function("generate_100k_frames", |b| {
        b.iter(|| generate_events(&setup, 100_000, black_box(7)).unwrap())
    });
    let events = generate_events(&setup, 1_000_000, 7).unwrap();
    group.bench_function("count_1M_frames", |b| {
        b.iter(|| count_coincidences(black_box(&events), 1_000_000, 3.0, 64).unwrap())
    });
    group.finish();
}

criterion_group!(benches, rates, oracle, monte_carlo);
criterion_main!(benches);
