use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stagewise::experiment::{block_study, gen_sine, noise_to_signal_study, Basis, BlockSpec, BlockStudyConfig, SineSpec};
use stagewise::monotone::{exhaustive_check, ExhaustiveOptions};
use stagewise::Parallelism;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn exhaustive(c: &mut Criterion) {
    // passes, so every signed subset is visited
    let data = gen_sine(&SineSpec {
        basis: Basis::PiecewiseConstant,
        ..SineSpec::default()
    })
    .unwrap();
    let design = data.standardize().unwrap();
    let mut group = c.benchmark_group("exhaustive_check");
    group.sample_size(10);
    for (name, parallelism) in MODES {
        let opts = ExhaustiveOptions {
            parallelism,
            ..ExhaustiveOptions::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exhaustive_check(&design, &opts).unwrap())
        });
    }
    group.finish();
}

fn block(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..8).collect();
    let config = BlockStudyConfig::default();
    let mut group = c.benchmark_group("block_study");
    group.sample_size(10);
    for (name, parallelism) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| block_study(&config, &seeds, parallelism).unwrap())
        });
    }
    group.finish();

    let seeds: Vec<u64> = (0..50).collect();
    let spec = BlockSpec::default();
    let mut group = c.benchmark_group("noise_to_signal");
    group.sample_size(10);
    for (name, parallelism) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| noise_to_signal_study(&spec, &seeds, parallelism).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, exhaustive, block);
criterion_main!(benches);
