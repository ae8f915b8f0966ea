use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spinrl::dynamics::{integrate_step, state_derivative};
use spinrl::env::{EnvConfig, SpinEnv};
use spinrl_bench::{controls, model, spin_state};

fn dynamics(c: &mut Criterion) {
    let (params, aero) = model();
    let x = spin_state();
    let u = controls();
    let rho = params.density(x.h);
    c.bench_function("state_derivative", |b| {
        b.iter(|| state_derivative(black_box(&x), black_box(&u), &params, &aero, rho).unwrap())
    });
    c.bench_function("rk4_step", |b| b.iter(|| integrate_step(black_box(&x), black_box(&u), 0.01, &params, &aero).unwrap()));
}

fn environment(c: &mut Criterion) {
    let (params, aero) = model();
    let cfg = EnvConfig { spin_hold: 0.0, episode_len: usize::MAX, start_altitude: 1e9, ..Default::default() };
    let mut env = SpinEnv::new(cfg, params, aero).unwrap();
    c.bench_function("env_step", |b| {
        b.iter(|| {
            if env.step(black_box(&[0.1, -0.2, 0.3])).unwrap().done() {
                env.reset(0);
            }
        })
    });
}

criterion_group!(benches, dynamics, environment);
criterion_main!(benches);
