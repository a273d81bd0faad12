use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use critlab_bench::{logistic_pair, mobius_mix};
use critlab_core::inducing::{sample_return, InducingScheme};
use critlab_core::transfer_ulam::power_iterate;
use critlab_core::{stream_rng, Point, UlamOperator};

fn ulam_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("ulam_build");
    g.sample_size(10);
    for (name, sys) in [("logistic_pair", logistic_pair(0.5)), ("mobius_mix", mobius_mix())] {
        for n in [1usize << 10, 1 << 12, 1 << 14] {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| UlamOperator::build(black_box(&sys), n).unwrap())
            });
        }
    }
    g.finish();
}

fn power_iteration(c: &mut Criterion) {
    let mut g = c.benchmark_group("power_iteration");
    g.sample_size(10);
    let sys = logistic_pair(0.5);
    for n in [1usize << 10, 1 << 12, 1 << 14] {
        let op = UlamOperator::build(&sys, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &op, |b, op| {
            b.iter(|| power_iterate(black_box(op), 1e-12, 200_000))
        });
    }
    g.finish();
}

fn orbit_stepping(c: &mut Criterion) {
    let sys = logistic_pair(0.4);
    let cv = sys.c();
    c.bench_function("orbit_step_1e5", |b| {
        let mut rng = stream_rng(1, 0);
        b.iter(|| {
            let mut p = Point::from_x(0.3, cv);
            for _ in 0..100_000 {
                p = sys.step(sys.sample_symbol(&mut rng), p);
            }
            black_box(p)
        })
    });
    let scheme = InducingScheme::search(&sys, 0, None, 12).unwrap();
    c.bench_function("first_return_theta_0.8", |b| {
        let mut k = 0u64;
        b.iter(|| {
            k += 1;
            sample_return(&scheme, &sys, &mut stream_rng(2, k), 1_000_000)
        })
    });
}

criterion_group!(benches, ulam_build, power_iteration, orbit_stepping);
criterion_main!(benches);
