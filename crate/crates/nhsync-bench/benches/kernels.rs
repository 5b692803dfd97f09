use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nhsync_bench::{forced_polar, wavy_graph};
use nhsync_core::graph::graph_transform_step;
use nhsync_core::models::{rossler, RosslerParams};
use nhsync_core::ode::{integrate, integrate_with_tangents};
use nhsync_core::sync::{detect_mn_locking_slices, rotation_number, PhaseSeries};

fn bench_integrate(c: &mut Criterion) {
    let sys = rossler(&RosslerParams::default());
    c.bench_function("integrate_rossler_100", |b| {
        b.iter(|| integrate(&sys, black_box(&[1.0, 1.0, 0.0]), 0.0, 100.0, 1e-8).unwrap())
    });
    c.bench_function("tangents_rossler_100", |b| {
        b.iter(|| {
            integrate_with_tangents(
                &sys,
                black_box(&[1.0, 1.0, 0.0]),
                &[1.0, 0.0, 0.0],
                0.0,
                100.0,
                1.0,
                1e-8,
            )
            .unwrap()
        })
    });
}

fn bench_torus_interpolation(c: &mut Criterion) {
    let g = wavy_graph(64);
    let mut out = [0.0];
    c.bench_function("torus_eval_2d", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..256 {
                let x = 0.013 * i as f64;
                g.eval(black_box(&[x, 2.0 * x]), &mut out);
                acc += out[0];
            }
            acc
        })
    });
}

fn bench_graph_transform(c: &mut Criterion) {
    let sys = forced_polar(0.2);
    let rho = wavy_graph(24);
    c.bench_function("graph_transform_step_24x24", |b| {
        b.iter(|| graph_transform_step(black_box(&rho), &sys, 12.0, 1e-7).unwrap())
    });
}

fn bench_sync(c: &mut Criterion) {
    let times: Vec<f64> = (0..8000).map(|i| 0.05 * i as f64).collect();
    let th1: Vec<f64> = times.iter().map(|&t| t + 0.1 * (0.7 * t).sin()).collect();
    let th2: Vec<f64> = times
        .iter()
        .map(|&t| 2.0 / 3.0 * t + 0.05 * t.sin())
        .collect();
    let ps = PhaseSeries::single(times.clone(), th1.clone()).unwrap();
    c.bench_function("rotation_number_8k", |b| {
        b.iter(|| rotation_number(black_box(&ps), 0, 0.2).unwrap())
    });
    c.bench_function("detect_mn_8k", |b| {
        b.iter(|| detect_mn_locking_slices(black_box(&th1), black_box(&th2), 8, 8, 2.8))
    });
}

criterion_group!(
    benches,
    bench_integrate,
    bench_torus_interpolation,
    bench_graph_transform,
    bench_sync
);
criterion_main!(benches);
