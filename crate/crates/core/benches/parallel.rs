use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use zfx_core::shiftlab::{color_tower, verify_coloring};
use zfx_core::stepup::{measure_stepup, verify_decompositions, BitFixingExtractor, DEFAULT_DELTA_HAT};
use zfx_core::symfix::{measure_shift, ShiftParams, SymbolTable};
use zfx_core::{Exec, Mode};

fn execs() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::sequential()), ("parallel", Exec::default())]
}

fn coloring(c: &mut Criterion) {
    let col = color_tower(24, 3).unwrap();
    let mut g = c.benchmark_group("verify_coloring_24_3");
    for (name, ex) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &ex, |b, ex| {
            b.iter(|| verify_coloring(black_box(&col), &Mode::Exhaustive, ex).unwrap())
        });
    }
    g.finish();
}

fn stepup(c: &mut Criterion) {
    let f2 = BitFixingExtractor::parity(9).unwrap();
    let mut g = c.benchmark_group("stepup_16_4");
    g.sample_size(10);
    for (name, ex) in execs() {
        g.bench_with_input(BenchmarkId::new("decompose", name), &ex, |b, ex| {
            b.iter(|| verify_decompositions(16, 4, DEFAULT_DELTA_HAT, Mode::Exhaustive, ex).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("measure", name), &ex, |b, ex| {
            b.iter(|| measure_stepup(16, 4, &f2, Mode::Exhaustive, DEFAULT_DELTA_HAT, ex).unwrap())
        });
    }
    g.finish();
}

fn shift(c: &mut Criterion) {
    let params = ShiftParams::with_tower(20, 6, 2).unwrap();
    let f2 = SymbolTable::constant(params.p, params.d, 1, 1).unwrap();
    let mut g = c.benchmark_group("measure_shift_20_6_2");
    g.sample_size(10);
    for (name, ex) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &ex, |b, ex| {
            b.iter(|| measure_shift(&params, &f2, Mode::Sampled { count: 2000, seed: 1 }, ex).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, coloring, stepup, shift);
criterion_main!(benches);
