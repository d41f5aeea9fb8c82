//! Compares the rayon-parallel pairwise-distance path against the
//! sequential fallback on a realistic sampler workload, plus the chain
//! split across workers. Both paths produce bit-identical matrices; the
//! benches measure only throughput.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use partscape::dataset::{generate_2d5c, kmeans_seed};
use partscape::pdist::{pairwise_matrix, pairwise_matrix_sequential, DistanceKind};
use partscape::quality::KernelSpec;
use partscape::sampler::{run_chains, ChainConfig};

fn sample_workload(m: usize) -> (partscape::dataset::PointSet, partscape::sampler::SampleSet) {
    let (points, _) = generate_2d5c(42);
    let kernel = KernelSpec::gaussian(17.0).unwrap();
    let seed = kmeans_seed(&points, 5, 42).unwrap();
    let cfg = ChainConfig {
        burn_in: 50,
        samples: m,
        ..ChainConfig::new(5, 42, kernel)
    };
    let z = run_chains(&points, &seed, &cfg, 1).unwrap();
    (points, z)
}

fn bench_pairwise(c: &mut Criterion) {
    let (points, z) = sample_workload(250);
    let kernel = KernelSpec::gaussian(17.0).unwrap();
    let mut group = c.benchmark_group("pairwise_liftemd");
    group.sample_size(10);
    for (name, parallel) in [("parallel", true), ("sequential", false)] {
        group.bench_with_input(BenchmarkId::new(name, z.len()), &parallel, |b, &par| {
            b.iter(|| {
                let d = if par {
                    pairwise_matrix(&z.partitions, DistanceKind::LiftEmd, &points, &kernel)
                } else {
                    pairwise_matrix_sequential(
                        &z.partitions,
                        DistanceKind::LiftEmd,
                        &points,
                        &kernel,
                    )
                };
                black_box(d.unwrap());
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("pairwise_vi");
    group.sample_size(10);
    for (name, parallel) in [("parallel", true), ("sequential", false)] {
        group.bench_with_input(BenchmarkId::new(name, z.len()), &parallel, |b, &par| {
            b.iter(|| {
                let d = if par {
                    pairwise_matrix(&z.partitions, DistanceKind::Vi, &points, &kernel)
                } else {
                    pairwise_matrix_sequential(&z.partitions, DistanceKind::Vi, &points, &kernel)
                };
                black_box(d.unwrap());
            })
        });
    }
    group.finish();
}

fn bench_chains(c: &mut Criterion) {
    let (points, _) = generate_2d5c(42);
    let kernel = KernelSpec::gaussian(17.0).unwrap();
    let seed = kmeans_seed(&points, 5, 42).unwrap();
    let mut group = c.benchmark_group("sampler_chains");
    group.sample_size(10);
    for chains in [1usize, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(chains), &chains, |b, &ch| {
            let cfg = ChainConfig {
                burn_in: 20,
                samples: 400,
                ..ChainConfig::new(5, 7, kernel)
            };
            b.iter(|| black_box(run_chains(&points, &seed, &cfg, ch).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pairwise, bench_chains);
criterion_main!(benches);
