use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hebb_constraints::experiment::{sweep_initial_weights, RunConfig};
use hebb_constraints::oracle::{enumerate_curve, EnumerationConfig};
use hebb_constraints::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle_curve(c: &mut Criterion) {
    let config = EnumerationConfig { max_sequence_length: 10, grow_to: None, decay: 0.1, ..Default::default() };
    let grid: Vec<f64> = (0..64).map(|k| k as f64 / 63.0).collect();
    let mut group = c.benchmark_group("enumerate_curve");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| enumerate_curve(&config, &grid, exec).unwrap()));
    }
    group.finish();
}

fn weight_sweep(c: &mut Criterion) {
    let template = RunConfig::parse(
        "neuron.channels=2\nrule.window=0\nduration=20000\nsweep.w1=0.5:1:0.05\nsweep.epsilons=0.0005,0.001\nlog.spikes=none",
    )
    .unwrap();
    let mut group = c.benchmark_group("sweep_initial_weights");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| sweep_initial_weights(&template, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, oracle_curve, weight_sweep);
criterion_main!(benches);
