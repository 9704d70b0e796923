use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use bugforge_bench::java_program;
use bugforge_core::builtins::builtin_units;
use bugforge_core::code_model::{render, tokenize};
use bugforge_core::stats::Binning;
use bugforge_core::taxonomy::{builtin_distribution, SubThresholdPolicy};
use bugforge_core::{
    chi_square_gof, classify_pair, generate_corpus, inject, BugCode, Language, Study,
};

fn bench_round_trip(c: &mut Criterion) {
    let mut group = c.benchmark_group("round_trip");
    for methods in [8usize, 64] {
        let unit = java_program(methods);
        group.throughput(Throughput::Bytes(unit.text.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(methods), &unit.text, |b, text| {
            b.iter(|| render(&tokenize(black_box(text), Language::JavaSubset)));
        });
    }
    group.finish();
}

fn bench_inject(c: &mut Criterion) {
    let unit = java_program(16);
    let mut group = c.benchmark_group("inject");
    for bug in [BugCode::A, BugCode::C, BugCode::HighBounds] {
        group.bench_with_input(BenchmarkId::from_parameter(bug), &unit, |b, unit| {
            b.iter(|| inject(black_box(unit), bug, 7).expect("sites exist"));
        });
    }
    group.finish();
}

fn bench_classify_pair(c: &mut Criterion) {
    let unit = java_program(16);
    let mutated = inject(&unit, BugCode::HighBounds, 7).expect("sites exist");
    c.bench_function("classify_pair", |b| {
        b.iter(|| classify_pair(black_box(&unit), black_box(&mutated.unit)));
    });
}

fn bench_generate_corpus(c: &mut Criterion) {
    let units = builtin_units(Study::Study1);
    let dist = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
    let mut group = c.benchmark_group("generate_corpus");
    group.sample_size(20);
    group.throughput(Throughput::Elements(100));
    group.bench_function("study1_100", |b| {
        b.iter(|| generate_corpus(black_box(&units), &dist, 100, 42).expect("generates"));
    });
    group.finish();
}

fn bench_chi_square(c: &mut Criterion) {
    let dist = builtin_distribution(Study::Study1, SubThresholdPolicy::Half);
    let mut observed: BTreeMap<BugCode, u64> = BTreeMap::new();
    for (index, (code, _)) in dist.entries().enumerate() {
        observed.insert(code, 40 + index as u64 * 3);
    }
    c.bench_function("chi_square_gof", |b| {
        b.iter(|| chi_square_gof(black_box(&observed), &dist, Binning::DropZero).expect("tests"));
    });
}

criterion_group!(
    benches,
    bench_round_trip,
    bench_inject,
    bench_classify_pair,
    bench_generate_corpus,
    bench_chi_square
);
criterion_main!(benches);
