use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinrl::ppo::{ppo_objective, ActorCritic, Batch, LossCoefficients, Workspace};

fn agent() -> ActorCritic {
    let mut ac = ActorCritic::new(11, 3, &[256, 128]).unwrap();
    for (i, p) in ac.params.iter_mut().enumerate() {
        *p = ((i * 7919) % 1000) as f64 * 1e-4 - 0.05;
    }
    ac
}

fn forward(c: &mut Criterion) {
    let ac = agent();
    let mut ws = Workspace::default();
    let obs = [0.1; 11];
    c.bench_function("actor_forward_single", |b| b.iter(|| ac.actor_forward(black_box(&obs), &mut ws).unwrap()));
}

fn objective(c: &mut Criterion) {
    let ac = agent();
    let mut ws = Workspace::default();
    let mut group = c.benchmark_group("ppo_objective");
    for n in [64usize, 256] {
        let obs: Vec<f64> = (0..n * 11).map(|i| ((i % 23) as f64 - 11.0) / 11.0).collect();
        let actions: Vec<f64> = (0..n * 3).map(|i| ((i % 7) as f64 - 3.0) / 3.0).collect();
        let old = vec![-2.0; n];
        let adv: Vec<f64> = (0..n).map(|i| (i % 5) as f64 - 2.0).collect();
        let ret = vec![0.5; n];
        let batch = Batch { obs: &obs, actions: &actions, old_log_probs: &old, advantages: &adv, returns: &ret };
        let mut grad = vec![0.0; ac.num_params()];
        group.bench_with_input(BenchmarkId::from_parameter(n), &batch, |b, batch| {
            b.iter(|| ppo_objective(&ac, batch, &LossCoefficients::default(), &mut ws, &mut grad).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, forward, objective);
criterion_main!(benches);
