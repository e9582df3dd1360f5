//! Parallel kernels on the default pool against the same kernels on a one-thread pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;
use sgfcf::dataset::InteractionDataset;
use sgfcf::eval::{evaluate_with, EvalContext, EvalTarget};
use sgfcf::filters::{homophilic_ratio_with, HomophilyMode};
use sgfcf::graph::{g2n_normalize, BipartiteGraph, G2NConfig};
use sgfcf::model::{SgfcfConfig, SgfcfModel};
use sgfcf::spectral::{truncated_svd, SvdParams};
use sgfcf::synth::{holdout, power_law_bipartite, PowerLawSpec};

fn dataset() -> InteractionDataset {
    let pairs = power_law_bipartite(&PowerLawSpec::new(3000, 2000, 60_000, 5).with_communities(20, 0.7));
    let (train, test) = holdout(&pairs, 0.8, 5);
    InteractionDataset::from_splits(3000, 2000, train, vec![], test).unwrap()
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
    ]
}

fn kernels(c: &mut Criterion) {
    let ds = dataset();
    let graph = BipartiteGraph::build(&ds).unwrap();
    let norm = g2n_normalize(&graph, &G2NConfig::default());
    let cfg = SgfcfConfig {
        k: 64,
        ..SgfcfConfig::default()
    };
    let model = SgfcfModel::fit(&ds, &cfg).unwrap();
    let ctx = EvalContext::new(&ds, EvalTarget::Test);

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("truncated_svd_k64", name), |b| {
            b.iter(|| pool.install(|| truncated_svd(&norm, &SvdParams::new(64, 1)).unwrap()))
        });
        group.bench_function(BenchmarkId::new("homophily_delta2", name), |b| {
            b.iter(|| pool.install(|| homophilic_ratio_with(&graph, 2, HomophilyMode::Inclusive, true).unwrap()))
        });
        group.bench_function(BenchmarkId::new("evaluate_ndcg10", name), |b| {
            b.iter(|| pool.install(|| evaluate_with(&model, &ctx, 10).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
