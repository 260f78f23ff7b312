use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gamma_lab::dilation::{self, build_sznagy};
use gamma_lab::gamma::classify_pair;
use gamma_lab::{build_coisometric_model, numlin, pipeline, sample, solve_fundamental, Generator, Scenario};
use gamma_lab_bench::fixture;

const DIMS: [usize; 3] = [2, 4, 8];

fn numerical_radius(c: &mut Criterion) {
    let mut group = c.benchmark_group("numerical_radius");
    for n in DIMS {
        let t = sample::gaussian_matrix(&mut sample::rng(1), n, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &t, |b, t| {
            b.iter(|| numlin::numerical_radius(black_box(t), numlin::NUMERICAL_RADIUS_ANGLE_TOL))
        });
    }
    group.finish();
}

fn classify(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify_pair");
    for n in DIMS {
        let (pair, _) = fixture(2, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pair, |b, pair| {
            b.iter(|| classify_pair(black_box(pair), 1e-9))
        });
    }
    group.finish();
}

fn fundamental(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_fundamental");
    for n in DIMS {
        let (pair, _) = fixture(3, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pair, |b, pair| {
            b.iter(|| solve_fundamental(black_box(pair), numlin::default_rank_tol(n), 1e-10))
        });
    }
    group.finish();
}

fn dilation_powers(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_dilation");
    for n in DIMS {
        let (pair, fp) = fixture(4, n);
        let bundle = build_sznagy(&pair, &fp).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &bundle, |b, bundle| {
            b.iter(|| dilation::verify_dilation(black_box(bundle), 5, 1e-9))
        });
    }
    group.finish();
}

fn model(c: &mut Criterion) {
    let mut group = c.benchmark_group("coisometric_model");
    for n in DIMS {
        let (pair, fp) = fixture(5, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &(pair, fp), |b, (pair, fp)| {
            b.iter(|| build_coisometric_model(black_box(pair), black_box(fp), 1e-9))
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline_run");
    group.sample_size(20);
    let overrides = BTreeMap::new();
    for n in DIMS {
        let scenario = Scenario::generate(6, n, Generator::SymmetrizedRandom).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &scenario, |b, s| {
            b.iter(|| pipeline::run(black_box(s), &overrides))
        });
    }
    group.finish();
}

criterion_group!(benches, numerical_radius, classify, fundamental, dilation_powers, model, full_run);
criterion_main!(benches);
