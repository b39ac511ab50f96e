// Copyright 2026 The weakinv Authors
// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use weakinv_core::channels::random_channel;
use weakinv_core::gkls::{integrate, random_invariants, random_model, rho_rhs, IntegrateOptions};
use weakinv_core::operator::spectral_decompose;
use weakinv_core::oscillator::{
    cross_validate, InitialState, OscillatorScenario, SU11Basis, StiffnessSchedule,
};
use weakinv_core::{SeededRng, TimeGrid};

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral_decompose");
    for dim in [4, 16, 64] {
        let h = SeededRng::new(1).hermitian(dim);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| {
            b.iter(|| spectral_decompose(black_box(h)).unwrap())
        });
    }
    g.finish();
}

fn channels(c: &mut Criterion) {
    let mut g = c.benchmark_group("random_channel");
    for (sys, env) in [(2, 2), (4, 4), (8, 4)] {
        g.bench_function(format!("{sys}x{env}"), |b| {
            b.iter(|| random_channel(sys, env, black_box(7)).unwrap())
        });
    }
    g.finish();
}

fn gkls(c: &mut Criterion) {
    let model = random_model(4, 3).unwrap();
    let rho = SeededRng::new(4).density(4);
    c.bench_function("rho_rhs/4", |b| {
        b.iter(|| rho_rhs(&model, black_box(&rho), 0.1).unwrap())
    });

    let set = random_invariants(4, 3, 5).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 200).unwrap();
    let opts = IntegrateOptions::default();
    c.bench_function("integrate/4x200", |b| {
        b.iter(|| integrate(&model, &rho, &set, &grid, &opts).unwrap())
    });
}

fn oscillator(c: &mut Criterion) {
    let basis = SU11Basis::build(16, 4).unwrap();
    let scenario = OscillatorScenario {
        schedule: StiffnessSchedule::Exponential {
            k0: 1.0,
            lambda: 1.0,
            offset: 0.0,
        },
        alpha0: [1.0, 0.0, 0.5].into(),
        grid: TimeGrid::new(0.0, 0.2, 100).unwrap(),
        initial: InitialState::Fock {
            amplitudes: vec![[1.0, 0.0]],
        },
    };
    let mut g = c.benchmark_group("oscillator");
    g.sample_size(10);
    g.bench_function("cross_validate/16", |b| {
        b.iter(|| cross_validate(&basis, &scenario, &IntegrateOptions::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, spectral, channels, gkls, oscillator);
criterion_main!(benches);
