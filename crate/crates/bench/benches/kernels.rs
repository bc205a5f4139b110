use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vlasov1d_core::particles::{force_naive, force_sorted, forces};
use vlasov1d_core::vlasov_grid::step_strang;
use vlasov1d_core::{
    sample_initial, w1_exact, InitialDistribution, KernelKind, PhaseGrid, Sampling,
};

fn maxwellian() -> InitialDistribution {
    InitialDistribution::truncated_maxwellian(1.0, 4.0).unwrap()
}

fn bench_forces(c: &mut Criterion) {
    let f0 = maxwellian();
    let mut g = c.benchmark_group("force");
    for n in [256usize, 1024, 4096] {
        let s = sample_initial(&f0, n, 1, Sampling::Iid).unwrap();
        g.bench_with_input(BenchmarkId::new("sorted", n), &s, |b, s| {
            b.iter(|| force_sorted(black_box(s)))
        });
        g.bench_with_input(BenchmarkId::new("mollified_0.05", n), &s, |b, s| {
            b.iter(|| forces(black_box(s), KernelKind::Mollified { epsilon: 0.05 }))
        });
        if n <= 1024 {
            g.bench_with_input(BenchmarkId::new("naive", n), &s, |b, s| {
                b.iter(|| force_naive(black_box(s), KernelKind::Exact))
            });
        }
    }
    g.finish();
}

fn bench_w1(c: &mut Criterion) {
    let f0 = maxwellian();
    let mut g = c.benchmark_group("w1_exact");
    g.sample_size(10);
    for n in [64usize, 256, 1024] {
        let mu = sample_initial(&f0, n, 1, Sampling::Stratified)
            .unwrap()
            .empirical_measure();
        let nu = sample_initial(&f0, n, 2, Sampling::Iid)
            .unwrap()
            .empirical_measure();
        g.bench_with_input(BenchmarkId::from_parameter(n), &(mu, nu), |b, (mu, nu)| {
            b.iter(|| w1_exact(black_box(mu), black_box(nu)).unwrap().0)
        });
    }
    g.finish();
}

fn bench_grid(c: &mut Criterion) {
    let f0 = maxwellian();
    let mut g = c.benchmark_group("strang_step");
    for n in [64usize, 128, 256] {
        let grid = PhaseGrid::from_distribution(&f0, n, n, 5.5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| step_strang(black_box(grid), 0.01))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_forces, bench_w1, bench_grid);
criterion_main!(benches);
