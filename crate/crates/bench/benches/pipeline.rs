use std::hint::black_box;

use acs_bench::{corpus_index, fixture, fixtures_dir, sources};
use acs_core::interp::{InstrumentationPlan, Interpreter};
use acs_core::lang::{parse_expr, Type};
use acs_core::miner::{build_index, pred_extract};
use acs_core::{parse_program_with_tests, repair, Config};
use criterion::{criterion_group, criterion_main, Criterion};

fn parsing(c: &mut Criterion) {
    let (src, tests) = sources("math85");
    c.bench_function("parse math85", |b| {
        b.iter(|| parse_program_with_tests(black_box(&src), black_box(&tests)).unwrap())
    });
}

fn suite(c: &mut Criterion) {
    let p = fixture("math85");
    let interp = Interpreter::new(&p);
    let plan = InstrumentationPlan::empty();
    c.bench_function("run_suite math85", |b| b.iter(|| interp.run_suite(black_box(&plan))));
}

fn extraction(c: &mut Criterion) {
    let cond = parse_expr("(x < 0 || x >= 24) && !(x == MIN_INT) && (x <= 12 || equals(x, 3))").unwrap();
    c.bench_function("pred_extract", |b| b.iter(|| pred_extract(black_box(&cond), "x", &Type::Int)));
}

fn indexing(c: &mut Criterion) {
    let dir = fixtures_dir().join("corpus");
    c.bench_function("index corpus", |b| b.iter(|| build_index(black_box(&dir), false).unwrap()));
}

fn repairs(c: &mut Criterion) {
    let index = corpus_index();
    let config = Config::default();
    let mut group = c.benchmark_group("repair");
    for name in ["math99", "math3", "math85", "math35"] {
        let p = fixture(name);
        group.bench_function(name, |b| b.iter(|| repair(black_box(&p), &index, &config).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, parsing, suite, extraction, indexing, repairs);
criterion_main!(benches);
