use criterion::{black_box, criterion_group, criterion_main, Criterion};

use germcalc::corpus::{k1a_c_chain, k1a_c_graph, Corpus};
use germcalc::cyclic_quot::{chain_to_quot, classify_t};
use germcalc::dual_graph::parse_graph;
use germcalc::ell_calc::{ic_sweep, kad_sweep, KadSubcase};
use germcalc::resolution::k_dot_components;
use germcalc::verify_paper;

fn chains(c: &mut Criterion) {
    let chain = k1a_c_chain(12);
    c.bench_function("chain_to_quot k1a_c k=12", |b| {
        b.iter(|| chain_to_quot(black_box(&chain)))
    });
    c.bench_function("classify_t k1a_c k=12", |b| {
        b.iter(|| classify_t(black_box(&chain)))
    });
}

fn graphs(c: &mut Criterion) {
    let iidual = parse_graph(Corpus::builtin_file("iidual.graph").unwrap()).unwrap();
    let k1a = parse_graph(&k1a_c_graph(12)).unwrap();
    c.bench_function("k_dot_components iidual", |b| {
        b.iter(|| k_dot_components(black_box(&iidual)))
    });
    c.bench_function("k_dot_components k1a_c k=12", |b| {
        b.iter(|| k_dot_components(black_box(&k1a)))
    });
}

fn scripts(c: &mut Criterion) {
    let mut g = c.benchmark_group("scripts");
    g.sample_size(10);
    g.bench_function("ic_sweep 15", |b| b.iter(|| ic_sweep(black_box(15))));
    g.bench_function("kad_sweep 15", |b| {
        b.iter(|| kad_sweep(black_box(15), KadSubcase::KAD))
    });
    let corpus = Corpus::builtin();
    g.bench_function("verify_paper 11", |b| {
        b.iter(|| verify_paper(&corpus, black_box(11)))
    });
    g.finish();
}

criterion_group!(benches, chains, graphs, scripts);
criterion_main!(benches);
