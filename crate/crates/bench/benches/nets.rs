use criterion::{criterion_group, criterion_main, Criterion};
use opnorm_core::{audit_coverage_check, build_net, net_upper_bound, sample_matrix, EnsembleSpec, ScalarDist};
use std::hint::black_box;

fn bench_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_net");
    group.sample_size(10);
    group.bench_function("dim3_eps0.5_T1e4", |b| {
        b.iter(|| build_net(3, 0.5, black_box(7), 10_000).unwrap())
    });
    group.bench_function("dim4_eps0.3_T1e4", |b| {
        b.iter(|| build_net(4, 0.3, black_box(7), 10_000).unwrap())
    });
    group.finish();
}

fn bench_queries(c: &mut Criterion) {
    let mut net = build_net(5, 0.25, 1, 20_000).unwrap();
    let m = sample_matrix(&EnsembleSpec::IidEntries(ScalarDist::gaussian(1.0)), 5, 5, 3).unwrap();
    c.bench_function("net_upper_bound/dim5", |b| {
        b.iter(|| net_upper_bound(black_box(&m), &net).unwrap())
    });
    let mut group = c.benchmark_group("audit");
    group.sample_size(10);
    group.bench_function("dim5_probes1e4", |b| {
        b.iter(|| audit_coverage_check(&mut net, 10_000, black_box(9)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_build, bench_queries);
criterion_main!(benches);
