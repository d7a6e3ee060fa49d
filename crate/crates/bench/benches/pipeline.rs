use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use higgins_bench::{kernel_z2_z3, random, two_factor, Fixture};
use higgins_core::kurosh::kurosh_decompose;
use higgins_core::{build_core, complete_graph, conjecture_decompose, verify_certificate, Bounds, VerifyParams};
use std::hint::black_box;

fn fixtures() -> Vec<Fixture> {
    let mut all = vec![two_factor(), kernel_z2_z3()];
    all.extend(random(4, 12, 7));
    all
}

fn graphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("coset_graph");
    for f in fixtures() {
        let fp = f.system.g();
        group.bench_function(format!("build_core/{}", f.name), |b| b.iter(|| build_core(fp, black_box(&f.gens))));
        let core = build_core(fp, &f.gens);
        group.bench_function(format!("complete_graph/{}", f.name), |b| {
            b.iter_batched(|| core.clone(), |core| complete_graph(fp, &core, 10_000).unwrap(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn kurosh(c: &mut Criterion) {
    let mut group = c.benchmark_group("kurosh");
    for f in fixtures() {
        let fp = f.system.g();
        let graph = complete_graph(fp, &build_core(fp, &f.gens), 10_000).unwrap();
        group.bench_function(&f.name, |b| b.iter(|| kurosh_decompose(fp, black_box(&graph)).unwrap()));
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for f in fixtures() {
        let bounds = Bounds::default();
        group.bench_function(format!("decompose/{}", f.name), |b| {
            b.iter(|| conjecture_decompose(&f.system, black_box(&f.gens), &bounds).unwrap())
        });
        let cert = conjecture_decompose(&f.system, &f.gens, &bounds).unwrap();
        let params = VerifyParams::default();
        group.bench_function(format!("verify/{}", f.name), |b| {
            b.iter(|| verify_certificate(&f.system, &f.gens, black_box(&cert), &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, graphs, kurosh, pipeline);
criterion_main!(benches);
