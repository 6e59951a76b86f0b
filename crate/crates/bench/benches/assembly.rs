use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hypdpg::dpg::{assemble, residual_lift, solve};
use hypdpg::layerpot::{legendre_log_moments, phi_vtau_matrix};
use hypdpg::{DpgOptions, QuadOptions};
use hypdpg_bench::{interval_case, square_case};

fn log_moments(c: &mut Criterion) {
    let mut out = [0.0; 8];
    c.bench_function("log_moments/near", |b| {
        b.iter(|| legendre_log_moments([0.0, 0.0], [0.1, 0.0], black_box([0.05, 1e-3]), &mut out))
    });
    c.bench_function("log_moments/far", |b| {
        b.iter(|| legendre_log_moments([0.0, 0.0], [0.1, 0.0], black_box([0.7, 0.4]), &mut out))
    });
}

fn coupling(c: &mut Criterion) {
    let opts = QuadOptions::default();
    let mut group = c.benchmark_group("phi_vtau_matrix");
    group.sample_size(10);
    for n in [8, 32] {
        let (_, trial) = interval_case(n, 1);
        let test = trial.enriched(1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| phi_vtau_matrix(&trial, &test, &opts))
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let opts = DpgOptions::default();
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);
    for n in [8, 32] {
        let (problem, trial) = interval_case(n, 1);
        group.bench_with_input(BenchmarkId::new("interval", n), &n, |b, _| {
            b.iter(|| assemble(trial.clone(), problem.load.as_ref(), &opts))
        });
    }
    let (problem, trial) = square_case(4, 1);
    group.bench_function("square/16", |b| {
        b.iter(|| assemble(trial.clone(), problem.load.as_ref(), &opts))
    });
    group.finish();
}

fn lift(c: &mut Criterion) {
    let opts = DpgOptions::default();
    let mut group = c.benchmark_group("residual_lift");
    group.sample_size(10);
    for n in [8, 32] {
        let (problem, trial) = interval_case(n, 1);
        let u = solve(&assemble(trial, problem.load.as_ref(), &opts)).expect("solvable");
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| residual_lift(&u, problem.load.as_ref(), &opts))
        });
    }
    group.finish();
}

criterion_group!(benches, log_moments, coupling, assembly, lift);
criterion_main!(benches);
