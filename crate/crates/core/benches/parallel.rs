use criterion::{criterion_group, criterion_main, Criterion};
use wdiff_core::corpus::{build_corpus, harvest_binary, Limits};
use wdiff_core::generator::{generate_from_pools, GenConfig, Pools};
use wdiff_core::mutator::MutationPlan;
use wdiff_core::par;

fn seeds() -> Vec<(String, Vec<u8>)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../seeds/bin");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "wasm"))
        .map(|p| (p.display().to_string(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn generation(c: &mut Criterion) {
    let corpus = build_corpus(&seeds(), Limits::default()).0;
    let pools = Pools::new(&corpus);
    let plan = MutationPlan::default();
    let ids: Vec<u64> = (0..32).collect();
    let gen = |s: &u64| generate_from_pools(&pools, &GenConfig { seed: *s, ..GenConfig::default() }, &plan).is_ok();

    let mut g = c.benchmark_group("generate_32");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| par::map(&ids, gen)));
    g.bench_function("sequential", |b| b.iter(|| par::map_seq(&ids, gen)));
    g.finish();
}

fn corpus(c: &mut Criterion) {
    let s = seeds();
    let mut g = c.benchmark_group("harvest");
    g.sample_size(10);
    let harvest = |(name, bytes): &(String, Vec<u8>)| harvest_binary(name, bytes, Limits::default()).roots.len();
    g.bench_function("parallel", |b| b.iter(|| par::map(&s, harvest)));
    g.bench_function("sequential", |b| b.iter(|| par::map_seq(&s, harvest)));
    g.finish();
}

criterion_group!(benches, generation, corpus);
criterion_main!(benches);
