use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rydberg_id::datagen::{generate_dataset_with, TaskKind, TaskSpec};
use rydberg_id::ml::{fit_model, ModelKind, ModelParams};
use rydberg_id::parallel::Jobs;

fn policies() -> [(&'static str, Jobs); 2] {
    [("sequential", Jobs::Sequential), ("parallel", Jobs::Auto)]
}

fn generation(c: &mut Criterion) {
    let spec = TaskSpec::new(TaskKind::Excitation)
        .with_configurations(&["P5"])
        .with_samples(16);
    let mut group = c.benchmark_group("generate-P5");
    group.sample_size(10);
    for (name, jobs) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &jobs, |b, &jobs| {
            b.iter(|| generate_dataset_with(&spec, jobs, None).unwrap())
        });
    }
    group.finish();
}

fn forest(c: &mut Criterion) {
    let spec = TaskSpec::new(TaskKind::Excitation)
        .with_configurations(&["chain-4"])
        .with_samples(60);
    let ds = generate_dataset_with(&spec, Jobs::Auto, None).unwrap();
    let params = ModelParams::seeded(0);
    let mut group = c.benchmark_group("forest-chain-4");
    group.sample_size(10);
    for (name, jobs) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &jobs, |b, &jobs| {
            b.iter(|| fit_model(ModelKind::Rfc, &ds, &params, jobs).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, generation, forest);
criterion_main!(benches);
