use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mindeduce::ciphers::{build_enocoro, build_snow2, toy};
use mindeduce::oracle::resolve_guess;
use mindeduce::{brute_force_min, closure, encode, solve, EncodeConfig, Limits, RangeMode};
use mindeduce_bench::{random_systems, SNOW_GUESS};

fn closure_bench(c: &mut Criterion) {
    let snow = build_snow2(13);
    let guess = resolve_guess(&snow, &SNOW_GUESS).unwrap();
    c.bench_function("closure/snow2_t13", |b| b.iter(|| closure(black_box(&snow), black_box(&guess)).unwrap()));
}

fn encode_bench(c: &mut Criterion) {
    let snow = build_snow2(13);
    let eno = build_enocoro(16, RangeMode::Declared);
    c.bench_function("encode/snow2_nu12", |b| b.iter(|| encode(black_box(&snow), &EncodeConfig::new(12, 9)).unwrap()));
    c.bench_function("encode/enocoro_nu18", |b| b.iter(|| encode(black_box(&eno), &EncodeConfig::new(18, 18)).unwrap()));
}

fn solve_bench(c: &mut Criterion) {
    let t = toy();
    let inst = encode(&t, &EncodeConfig::new(4, 1)).unwrap();
    c.bench_function("solve/toy", |b| b.iter(|| solve(black_box(&inst), &Limits::unlimited()).unwrap()));

    let systems = random_systems(20, 10, 16);
    let instances: Vec<_> = systems.iter().map(|s| encode(s, &EncodeConfig::min_guesses(s.len())).unwrap()).collect();
    c.bench_function("solve/random_min_guesses_x20", |b| {
        b.iter(|| {
            for i in &instances {
                black_box(solve(i, &Limits::unlimited()).unwrap());
            }
        })
    });
    c.bench_function("brute_force/random_x20", |b| {
        b.iter(|| {
            for s in &systems {
                black_box(brute_force_min(s, s.len()));
            }
        })
    });
}

criterion_group!(benches, closure_bench, encode_bench, solve_bench);
criterion_main!(benches);
