use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fhtc::averaged::{AveragedOutageInput, ShadowedConfig, SpatialEvaluator};
use fhtc::exec::Execution;
use fhtc::network::{normalized_powers, sample_topology, Annulus, ChannelParams};
use fhtc::oracle::{mc_conditional_curve, mc_spatial_outage, McConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn conditional_mc(c: &mut Criterion) {
    let top = sample_topology(50, 0.25, 4.0, 1.0, 1).unwrap();
    let omega = normalized_powers(&top, &ChannelParams::uniform(3.0, 4, 1.0, 0.0, 50), 1).unwrap();
    let mut m = vec![1.0; 51];
    m[0] = 4.0;
    let p = vec![1.0 / 200.0; 50];
    let gammas = [1.0, 10.0, 100.0];
    let trials = 1 << 18;
    let mut group = c.benchmark_group("conditional_mc");
    group.throughput(Throughput::Elements(trials));
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = McConfig { execution: exec, ..McConfig::new(trials, 7) };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mc_conditional_curve(&omega, &m, &p, 2.34, &gammas, &cfg).unwrap())
        });
    }
    group.finish();
}

fn spatial_mc(c: &mut Criterion) {
    let inp = AveragedOutageInput::uniform(50, Annulus::new(0.25, 4.0).unwrap(), 1.0, 3.0, 4, 1.0, 50.0, 2.34, 10.0, 8.0);
    let trials = 1 << 17;
    let mut group = c.benchmark_group("spatial_mc");
    group.throughput(Throughput::Elements(trials));
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = McConfig { execution: exec, ..McConfig::new(trials, 9) };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| mc_spatial_outage(&inp, &cfg).unwrap()));
    }
    group.finish();
}

fn shadowed_moments(c: &mut Criterion) {
    let inp = AveragedOutageInput::uniform(50, Annulus::new(0.25, 4.0).unwrap(), 1.0, 3.0, 4, 1.0, 50.0, 2.34, 10.0, 8.0);
    let mut group = c.benchmark_group("shadowed_moments");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ShadowedConfig { execution: exec, draws: 2000, ..ShadowedConfig::default() };
        let ev = SpatialEvaluator::new(&inp, &cfg).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| ev.moments(2.34).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, conditional_mc, spatial_mc, shadowed_moments);
criterion_main!(benches);
