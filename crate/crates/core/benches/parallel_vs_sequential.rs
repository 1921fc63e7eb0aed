//! Rayon pool against the calling thread on the two data-parallel hot paths:
//! a density grid (one inversion slice per t) and a Monte Carlo mean.
//! Without the `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rtdyn::mc::{expect_inverse, Sampler, DEFAULT_SEED};
use rtdyn::{make_triple, DensityMethod, Exec, GEvaluator, KernelSpec};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn density_grid(c: &mut Criterion) {
    let g = GEvaluator::new(
        make_triple(KernelSpec::gamma(1.0, 1.0).unwrap()).unwrap(),
        DensityMethod::Contour,
        1e-10,
    )
    .unwrap();
    let ts: Vec<f64> = (1..=16).map(|i| 0.5 * i as f64).collect();
    let taus: Vec<f64> = (0..64).map(|i| 0.25 * i as f64).collect();
    let mut group = c.benchmark_group("density_grid_16x64");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| g.grid(&ts, &taus, exec).unwrap())
        });
    }
    group.finish();
}

fn mc_mean(c: &mut Criterion) {
    let sampler = Sampler::new(KernelSpec::sum_stable(0.25, 0.75).unwrap()).unwrap();
    let mut group = c.benchmark_group("mc_inverse_mean_100k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| expect_inverse(&sampler, 1.0, 100_000, DEFAULT_SEED, exec, |e| (-e).exp()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, density_grid, mc_mean);
criterion_main!(benches);
