//! Kernels timed on a single-thread pool against the default pool.
//!
//! Built with `--no-default-features` every kernel takes the sequential path
//! and both variants measure the same code.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

use sidonbench::boolean_cube::wht_forward;
use sidonbench::index_sets::{enumerate, FamilyKind};
use sidonbench::ksz_lab::{ksz_trig_trial, unit_coefficients};
use sidonbench::multipliers::{multiplier_norm_bracket, MultiplierSpec, SearchConfig, Space};
use sidonbench::trig_poly::{eval_grid, GridSpec, TrigPolynomial, DEFAULT_GRID_CAP};

fn pools() -> [(&'static str, ThreadPool); 2] {
    let build = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    [("sequential", build(1)), ("parallel", build(0))]
}

fn random_poly(m: usize, n: usize) -> TrigPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let family = enumerate(FamilyKind::LambdaLE, m, n).unwrap();
    let terms: Vec<_> = family
        .multi_indices()
        .unwrap()
        .iter()
        .map(|a| (a.clone(), Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect();
    TrigPolynomial::from_terms(n, m, terms).unwrap()
}

fn bench_eval_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval_grid");
    group.sample_size(10);
    for (m, n) in [(6usize, 2usize), (4, 3)] {
        let poly = random_poly(m, n);
        let grid = GridSpec::bernstein(m, n);
        for (label, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(label, format!("m{m}_n{n}")), &poly, |b, p| {
                b.iter(|| pool.install(|| black_box(eval_grid(p, &grid, DEFAULT_GRID_CAP).unwrap())))
            });
        }
    }
    group.finish();
}

fn bench_wht(c: &mut Criterion) {
    let mut group = c.benchmark_group("wht_forward");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let table: Vec<f64> = (0..1usize << 18).map(|_| rng.random_range(-1.0..1.0)).collect();
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new(label, "n18"), |b| b.iter(|| pool.install(|| black_box(wht_forward(&table).unwrap()))));
    }
    group.finish();
}

fn bench_multiplier_bracket(c: &mut Criterion) {
    let mut group = c.benchmark_group("multiplier_bracket");
    group.sample_size(10);
    let space = Space::torus(FamilyKind::LambdaLE, 2, 3).unwrap();
    let spec = MultiplierSpec::ones(space, 1.0, 1 << 20).unwrap();
    let cfg = SearchConfig::default();
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new(label, "lambda_le_2_3"), |b| {
            b.iter(|| pool.install(|| black_box(multiplier_norm_bracket(&spec, 1, 3, &cfg).unwrap())))
        });
    }
    group.finish();
}

fn bench_ksz_trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("ksz_trials");
    group.sample_size(10);
    let coeffs = unit_coefficients(3, 2).unwrap();
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new(label, "m3_n2_t50"), |b| {
            b.iter(|| pool.install(|| black_box(ksz_trig_trial(3, 2, &coeffs, 50, 4, DEFAULT_GRID_CAP).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_eval_grid, bench_wht, bench_multiplier_bracket, bench_ksz_trials);
criterion_main!(benches);
