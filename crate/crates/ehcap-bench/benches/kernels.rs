//! Benchmarks for the numerical kernels: quadrature, capacity iteration,
//! stationary solve, and simulation throughput.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ehcap_bench::{channel, mi_input, spend_all_policy, sweep_instance};
use ehcap_core::capacity::{ascent_capacity, AscentOptions};
use ehcap_core::infotheory::{mutual_information, optimize_input_quantized, BaOptions};
use ehcap_core::markov::{build_transition, stationary_distribution, StationaryOptions};
use ehcap_core::truncgauss::{simulate_chain, TgConfig};

fn bench_mi_quadrature(c: &mut Criterion) {
    let input = mi_input();
    let ch = channel();
    c.bench_function("mi_quadrature_9_atoms", |b| {
        b.iter(|| mutual_information(black_box(&input), &ch).unwrap().nats)
    });
}

fn bench_ba_optimize(c: &mut Criterion) {
    let ch = channel();
    let ba = BaOptions::default();
    c.bench_function("ba_optimize_peak_4", |b| {
        b.iter(|| {
            optimize_input_quantized(black_box(4), 1.0, &ch, &ba)
                .unwrap()
                .1
                .rate_nats
        })
    });
}

fn bench_stationary(c: &mut Criterion) {
    let (policy, grid, harvest) = spend_all_policy();
    let p = build_transition(&policy, &harvest, &grid).unwrap();
    let class: Vec<usize> = (0..p.n()).collect();
    c.bench_function("stationary_9_states", |b| {
        b.iter(|| {
            stationary_distribution(black_box(&p), &class, &StationaryOptions::default()).unwrap()
        })
    });
}

fn bench_simulation(c: &mut Criterion) {
    let (_, harvest) = sweep_instance();
    let cfg = TgConfig::for_harvest(&harvest, 0.1, 8.0)
        .unwrap()
        .with_samples(100_000)
        .with_burn_in(1_000);
    c.bench_function("tg_simulate_100k_slots", |b| {
        b.iter(|| simulate_chain(black_box(&cfg), &harvest).unwrap().ehat.len())
    });
}

fn bench_ascent(c: &mut Criterion) {
    let (grid, harvest) = sweep_instance();
    let ch = channel();
    let opts = AscentOptions {
        restarts: 2,
        seed: 7,
        ..AscentOptions::default()
    };
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("ascent_gamma_4", |b| {
        b.iter(|| {
            ascent_capacity(black_box(&harvest), &grid, &ch, &opts)
                .unwrap()
                .value_nats
        })
    });
    group.finish();
}

criterion_group!(
    kernels,
    bench_mi_quadrature,
    bench_ba_optimize,
    bench_stationary,
    bench_simulation,
    bench_ascent
);
criterion_main!(kernels);
