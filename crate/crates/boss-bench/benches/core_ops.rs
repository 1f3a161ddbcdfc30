use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use boss_core::env::{diverse, BanditEnv, Ellipsoid, ScheduleParams};
use boss_core::policy::meta_explore;
use boss_core::rng::stream_rng;
use boss_core::select::{
    ewa_update, losses, sample_expert, CostParams, ExpertState, DEFAULT_EWA_ETA,
};
use boss_core::subspace::{random_basis, random_unit_vector, residual_norm, stiefel_project};
use boss_core::{run_boss, BossParams, ExpertSet, RewardStream};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

fn bench_geometry(c: &mut Criterion) {
    let mut rng = stream_rng(1, "bench");
    let b = random_basis(10, 3, &mut rng).unwrap();
    let phi = random_unit_vector(10, &mut rng);
    c.bench_function("residual_norm d10 m3", |bench| {
        bench.iter(|| residual_norm(black_box(&b), black_box(&phi)).unwrap())
    });

    let x = DMatrix::from_fn(50, 10, |_, _| StandardNormal.sample(&mut rng));
    c.bench_function("stiefel_project 50x10", |bench| {
        bench.iter(|| stiefel_project(black_box(&x)).unwrap())
    });

    c.bench_function("random_basis d10 m3", |bench| {
        bench.iter(|| random_basis(10, 3, &mut rng).unwrap())
    });
}

fn bench_selection(c: &mut Criterion) {
    let mut rng = stream_rng(2, "bench");
    let experts: Vec<_> = (0..10_000)
        .map(|_| random_basis(10, 3, &mut rng).unwrap())
        .collect();
    let state = ExpertState::uniform(experts, DEFAULT_EWA_ETA).unwrap();
    let params = CostParams::new(180.0, 500.0, 0.3, 0.25).unwrap();
    let theta_hat = random_unit_vector(10, &mut rng);

    c.bench_function("losses 10k experts", |bench| {
        bench.iter(|| losses(state.experts(), black_box(&theta_hat), &params).unwrap())
    });

    let ls = losses(state.experts(), &theta_hat, &params).unwrap();
    c.bench_function("ewa_update 10k experts", |bench| {
        bench.iter(|| ewa_update(black_box(&state), black_box(&ls)).unwrap())
    });

    c.bench_function("sample_expert 10k experts", |bench| {
        bench.iter(|| sample_expert(black_box(&state), &mut rng))
    });
}

fn bench_task_and_run(c: &mut Criterion) {
    let ell = Ellipsoid::unit_sphere(10);
    let mut rng = stream_rng(3, "bench");
    let theta = random_unit_vector(10, &mut rng) * 0.9;
    c.bench_function("meta_explore tau 500", |bench| {
        bench.iter(|| {
            let mut s = RewardStream::new(0.1, stream_rng(3, "rewards")).unwrap();
            meta_explore(&ell, black_box(&theta), 500, 100, &mut s).unwrap()
        })
    });

    let sp = ScheduleParams {
        d: 10,
        m: 3,
        n_tasks: 50,
        theta_min: 0.8,
        theta_max: 1.0,
    };
    let schedule = diverse(&sp, &mut stream_rng(4, "env")).unwrap();
    let env = BanditEnv::new(Ellipsoid::unit_sphere(10), 0.1, 200).unwrap();
    let mut experts: Vec<_> = (0..500)
        .map(|_| random_basis(10, 3, &mut rng).unwrap())
        .collect();
    experts.push(schedule.hidden_basis().clone());
    let oracle = experts.len() - 1;
    let experts = ExpertSet::new(experts, Some(oracle)).unwrap();
    let params = BossParams {
        p: 0.25,
        tau1: 100,
        tau2: 42,
        alpha: 0.3,
        epsilon: 0.3,
        delta: 4e-4,
        c2: 1.0,
    };
    c.bench_function("run_boss 50 tasks 500 experts", |bench| {
        bench.iter(|| run_boss(&schedule, &env, &params, &experts, black_box(9)).unwrap())
    });
}

criterion_group!(benches, bench_geometry, bench_selection, bench_task_and_run);
criterion_main!(benches);
