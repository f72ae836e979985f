//! Throughput comparison of the rayon-parallel executor against the
//! sequential fallback, on protocol rounds and on Monte Carlo trials.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use qpe::adversary::AttackSpec;
use qpe::analysis::run_experiment;
use qpe::protocol::{run_protocol_with_exec, Mode, ProtocolConfig};
use qpe::Exec;

fn survey_rounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("survey_rounds");
    for nu in [2_000u64, 20_000] {
        let mut cfg = ProtocolConfig::single(
            6,
            3,
            nu,
            0.7,
            AttackSpec::GaussianPhase { delta: 0.6 },
            11,
        );
        cfg.mode = Mode::Survey;
        group.throughput(Throughput::Elements(nu));
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Auto)] {
            group.bench_with_input(BenchmarkId::new(name, nu), &cfg, |b, cfg| {
                b.iter(|| run_protocol_with_exec(cfg, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn experiment_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiment_trials");
    group.sample_size(10);
    let trials = 32u64;
    let cfg = ProtocolConfig::single(4, 4, 10_000, 0.4, AttackSpec::None, 7);
    group.throughput(Throughput::Elements(trials));
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Auto)] {
        group.bench_with_input(BenchmarkId::new(name, trials), &cfg, |b, cfg| {
            b.iter(|| run_experiment(cfg, trials, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, survey_rounds, experiment_trials);
criterion_main!(benches);
