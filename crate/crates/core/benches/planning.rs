use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rrl_core::agent::{empirical_kernel, optimistic_planning, AgentConfig, BonusPreset};
use rrl_core::dp::robust_value_iteration_with;
use rrl_core::dual::DualSolverConfig;
use rrl_core::envs::{build_frozen_lake, build_gambler, LakeLayout};
use rrl_core::model::{DivergenceSpec, FiniteRmdp, VisitCounts};
use rrl_core::par::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn environments(spec: DivergenceSpec) -> Vec<(&'static str, FiniteRmdp)> {
    vec![
        ("gambler_50", build_gambler(50, 50, 0.6, spec).unwrap()),
        (
            "frozen_lake_8",
            build_frozen_lake(
                8,
                40,
                &LakeLayout::Random {
                    seed: 7,
                    hole_fraction: 0.15,
                },
                spec,
            )
            .unwrap(),
        ),
    ]
}

fn planning(c: &mut Criterion) {
    let cfg = DualSolverConfig::default();
    for spec in [
        DivergenceSpec::chi2(0.3).unwrap(),
        DivergenceSpec::kl(0.1).unwrap(),
    ] {
        let mut group = c.benchmark_group(format!("robust_vi_{}", spec.kind));
        group.sample_size(10);
        for (name, env) in environments(spec) {
            for (mode, exec) in MODES {
                group.bench_with_input(BenchmarkId::new(mode, name), &env, |b, env| {
                    b.iter(|| robust_value_iteration_with(env, &cfg, exec).unwrap())
                });
            }
        }
        group.finish();
    }
}

/// Counts from `n` sampled transitions per legal pair, as after a long run.
fn sampled_counts(env: &FiniteRmdp, n: usize) -> VisitCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut counts = VisitCounts::for_model(env);
    for h in 0..env.horizon() {
        for s in 0..env.num_states() {
            for a in env.legal_actions(h, s).collect::<Vec<_>>() {
                let row = env.row(h, s, a);
                for _ in 0..n {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let next = row
                        .iter()
                        .position(|p| {
                            acc += p;
                            u < acc
                        })
                        .unwrap_or(row.len() - 1);
                    counts.record(h, s, a, next);
                }
            }
        }
    }
    counts
}

fn optimistic(c: &mut Criterion) {
    let spec = DivergenceSpec::chi2(0.3).unwrap();
    let mut group = c.benchmark_group("optimistic_planning_chi2");
    group.sample_size(10);
    for (name, env) in environments(spec) {
        let counts = sampled_counts(&env, 5);
        let kernel = empirical_kernel(&counts);
        for (mode, exec) in MODES {
            let mut cfg = AgentConfig::with_preset(&env, 1000, 0.1, BonusPreset::Practical, 0);
            cfg.exec = exec;
            group.bench_function(BenchmarkId::new(mode, name), |b| {
                b.iter(|| optimistic_planning(&kernel, &counts, &cfg, &env, spec.kind).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, planning, optimistic);
criterion_main!(benches);
