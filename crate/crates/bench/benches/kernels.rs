use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use warpgraph::{laplace_beltrami, ms_residual, solve_minimal, MetricKind, SolverConfig};
use warpgraph_bench::torus_fixture;

fn residual(c: &mut Criterion) {
    let mut group = c.benchmark_group("ms_residual");
    for n in [32, 64, 128] {
        let (g, f, u) = torus_fixture(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| ms_residual(black_box(&g), &f, black_box(&u)).unwrap())
        });
    }
    group.finish();
}

fn newton(c: &mut Criterion) {
    let mut group = c.benchmark_group("newton");
    group.sample_size(10);
    for n in [32, 64] {
        let (g, f, u) = torus_fixture(n);
        let cfg = SolverConfig::default();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_minimal(&g, &f, black_box(&u), &cfg).unwrap())
        });
    }
    group.finish();
}

fn laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplace_beltrami_conformal");
    for n in [32, 64, 128] {
        let (g, f, u) = torus_fixture(n);
        let kind = MetricKind::Conformal { u: &u, f: &f };
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| laplace_beltrami(&g, &kind, black_box(&u)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, residual, newton, laplacian);
criterion_main!(benches);
