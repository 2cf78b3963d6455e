use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use magcount::bound_suite::{assemble_case, log_space, sweep_case, Theorem};
use magcount::{Counter, OperatorKind, PotentialModel};
use magcount_bench::{default_grid, gaussian_ground_state};

fn counts(c: &mut Criterion) {
    let gs = gaussian_ground_state(1.5);
    let disk = PotentialModel::disk(1.0);
    let counter = Counter::new(&gs, &disk, default_grid());
    let mut g = c.benchmark_group("count");
    g.sample_size(10);
    for lambda in [1e-4, 10.0, 1000.0] {
        g.bench_function(format!("pauli disk lambda={lambda}"), |b| b.iter(|| counter.count(black_box(lambda), OperatorKind::Pauli).unwrap()));
    }
    let w2 = PotentialModel::WSigma { sigma: 2.0, amplitude: 1.0 };
    let far = Counter::new(&gs, &w2, default_grid());
    g.bench_function("pauli w_sigma lambda=10", |b| b.iter(|| far.count(black_box(10.0), OperatorKind::Pauli).unwrap()));
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let gs = gaussian_ground_state(0.3);
    let disk = PotentialModel::disk(1.0);
    let case = assemble_case(gs.alpha, false, &disk, Theorem::PauliNonint, 2.0, 1.0).unwrap();
    let lambdas = log_space(1e-3, 1e2, 2);
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("pauli_nonint 11 points", |b| b.iter(|| sweep_case(&case, &gs, &disk, default_grid(), black_box(&lambdas), 1.0).unwrap()));
    g.finish();
}

criterion_group!(benches, counts, sweeps);
criterion_main!(benches);
