use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use triagg_bench::{new25, operand, prime_domain};
use triagg_core::engine::{decomposed_multiply, recursive_multiply};
use triagg_core::generator::gen_new25_decomposed;
use triagg_core::strassen::strassen;
use triagg_core::verifier::{verify_exact, verify_random, DEFAULT_BUDGET, DEFAULT_PRIME};

fn generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    for n0 in [8, 20, 44] {
        g.bench_with_input(BenchmarkId::from_parameter(n0), &n0, |b, &n0| {
            b.iter(|| gen_new25_decomposed(black_box(n0)).unwrap())
        });
    }
    g.finish();
}

fn verification(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    let (small, _) = new25(8);
    g.bench_function("exact/strassen", |b| b.iter(|| verify_exact(&strassen(), DEFAULT_BUDGET).unwrap()));
    g.bench_function("exact/new25_8", |b| b.iter(|| verify_exact(&small, DEFAULT_BUDGET).unwrap()));
    let (_, dec) = new25(20);
    g.bench_function("random/new25_20", |b| {
        b.iter(|| verify_random(&dec, 2, DEFAULT_PRIME, 7).unwrap())
    });
    g.finish();
}

fn multiplication(c: &mut Criterion) {
    let d = prime_domain();
    let mut g = c.benchmark_group("multiply");
    g.sample_size(10);
    let s = strassen();
    let (a, b) = (operand(&d, 64, 1), operand(&d, 64, 2));
    g.bench_function("strassen/64", |bn| {
        bn.iter(|| recursive_multiply(&d, &s, &a, &b, 6, 2).unwrap())
    });
    let (full, dec) = new25(8);
    let (a, b) = (operand(&d, 64, 3), operand(&d, 64, 4));
    g.bench_function("new25_8/plain/64", |bn| {
        bn.iter(|| recursive_multiply(&d, &full, &a, &b, 2, 0).unwrap())
    });
    g.bench_function("new25_8/decomposed/64", |bn| {
        bn.iter(|| decomposed_multiply(&d, &dec, &a, &b, 2).unwrap())
    });
    g.finish();
}

criterion_group!(benches, generation, verification, multiplication);
criterion_main!(benches);
