use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mimo_energy::simkit::{trial_energies, trial_energies_sequential, ExperimentConfig, SimMode};

fn fast_config(users: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::reference_cell().with_users(users, 2 * users);
    cfg.trials = 64;
    cfg
}

fn bench_fast(c: &mut Criterion) {
    let mut group = c.benchmark_group("fast_ensemble");
    group.sample_size(10);
    for users in [16, 64] {
        let cfg = fast_config(users);
        group.bench_with_input(BenchmarkId::new("parallel", users), &cfg, |b, cfg| {
            b.iter(|| trial_energies(cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", users), &cfg, |b, cfg| {
            b.iter(|| trial_energies_sequential(cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_exact(c: &mut Criterion) {
    let mut cfg = fast_config(16).with_horizon_hours(0.25);
    cfg.mode = SimMode::Exact;
    cfg.trials = 16;
    let mut group = c.benchmark_group("exact_ensemble");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| trial_energies(&cfg).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| trial_energies_sequential(&cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_fast, bench_exact);
criterion_main!(benches);
