use criterion::{black_box, criterion_group, criterion_main, Criterion};
use qnamp::chain::{assemble_point, prepare};
use qnamp::coating::{optimize_stack, StackSearch};
use qnamp::optimize::cost;
use qnamp::{budget, preset};

fn chain(c: &mut Criterion) {
    let cfg = preset("15dB").unwrap();
    let prep = prepare(&cfg).unwrap();
    c.bench_function("assemble_point 100 Hz", |b| b.iter(|| assemble_point(&cfg, &prep, black_box(100.0)).unwrap()));
    c.bench_function("budget 1000 points", |b| b.iter(|| budget(black_box(&cfg)).unwrap()));
    c.bench_function("mid-band cost", |b| b.iter(|| cost(black_box(&cfg))));
}

fn coating(c: &mut Criterion) {
    let start = preset("15dB").unwrap().amp.coat.quarter_wave();
    let search = StackSearch { restarts: 0, ..Default::default() };
    let mut g = c.benchmark_group("coating");
    g.sample_size(10);
    g.bench_function("optimize_stack", |b| b.iter(|| optimize_stack(black_box(&start), &search).unwrap()));
    g.finish();
}

criterion_group!(benches, chain, coating);
criterion_main!(benches);
