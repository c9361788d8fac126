//! Throughput benchmarks for the hot paths: slice generation, mollification,
//! the forward step pipeline, the overlap functional, and one full
//! realization at the reference grid.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use polymerlab_core::config::ExperimentConfig;
use polymerlab_core::ensemble::run_ensemble;
use polymerlab_core::environment::{
    mollify_slice, sample_noise_slice, DomainSpec, MollifierShape, NoiseStream,
};
use polymerlab_core::fft::Spectral;
use polymerlab_core::observables::{overlap_functional, OverlapPlan};
use polymerlab_core::solver::{run_forward, InitialData, NullObserver, PolymerModel};

fn bench_noise(c: &mut Criterion) {
    let mut group = c.benchmark_group("noise");
    for n in [512usize, 2048] {
        let domain = DomainSpec::new(1, n, 0.25, 0.01, 100, 1.0).unwrap();
        let stream = NoiseStream::new(7, 0);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("sample_slice", n), &n, |b, _| {
            let mut step = 0usize;
            b.iter(|| {
                let s = sample_noise_slice(stream, step % 100, &domain).unwrap();
                step += 1;
                s
            });
        });
        let kernel = polymerlab_core::environment::build_mollifier(
            MollifierShape::Triangular,
            1,
            1.0,
            &domain,
        )
        .unwrap();
        let eta = sample_noise_slice(stream, 0, &domain).unwrap();
        group.bench_with_input(BenchmarkId::new("mollify", n), &n, |b, _| {
            b.iter(|| mollify_slice(&eta, &kernel, &domain).unwrap());
        });
    }
    group.finish();
}

fn bench_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    // 100 steps per iteration at the reference spatial grid
    let domain = DomainSpec::new(1, 512, 0.25, 0.01, 100, 1.0).unwrap();
    let model = PolymerModel::new(domain, MollifierShape::Triangular, 1, 1.0).unwrap();
    group.throughput(Throughput::Elements(100));
    group.bench_function("steps_n512", |b| {
        let mut id = 0u64;
        b.iter(|| {
            id += 1;
            run_forward(
                &model,
                NoiseStream::new(3, id),
                InitialData::DeltaAtOrigin,
                &mut NullObserver,
            )
            .unwrap()
        });
    });
    group.finish();
}

fn bench_overlap(c: &mut Criterion) {
    let mut group = c.benchmark_group("overlap");
    for n in [512usize, 2048] {
        let domain = DomainSpec::new(1, n, 0.25, 0.01, 10, 1.0).unwrap();
        let model = PolymerModel::new(domain, MollifierShape::Triangular, 1, 1.0).unwrap();
        let f = vec![1.0 / (n as f64 * 0.25); n];
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("spectral", n), &n, |b, _| {
            b.iter(|| overlap_functional(&f, &model.covariance).unwrap());
        });
        let plan = OverlapPlan::new(&model.covariance).unwrap();
        group.bench_with_input(BenchmarkId::new("planned", n), &n, |b, _| {
            let mut sp = Spectral::new(domain.grid());
            b.iter(|| plan.of_density(&f, &mut sp));
        });
    }
    group.finish();
}

fn bench_realization(c: &mut Criterion) {
    let mut group = c.benchmark_group("realization");
    group.sample_size(10);
    // T = 1 at the reference grid: 100 steps with full scalar recording
    let mut cfg = ExperimentConfig::desk_default();
    cfg.domain.t_grid = vec![1.0];
    cfg.ensemble.n_realizations = 1;
    cfg.validate().unwrap();
    group.bench_function("reference_T1", |b| {
        let mut id = 0u64;
        b.iter(|| {
            id += 1;
            run_ensemble(&cfg, 1.0, id, 1).unwrap()
        });
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_noise,
    bench_forward,
    bench_overlap,
    bench_realization
);
criterion_main!(benches);
