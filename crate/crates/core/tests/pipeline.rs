use sgfcf::dataset::{ingest, ingest_reader, split, IngestFormat, InteractionDataset, SplitConfig};
use sgfcf::eval::{evaluate, fit_and_evaluate, frequency_sweep, write_sweep_csv, EvalContext, EvalTarget, PopularityScorer};
use sgfcf::filters::{homophilic_ratio_all, map_homo_to_beta, write_homophily_csv, FilterFamily, HomophilyMode, IgfConfig};
use sgfcf::graph::{g2n_normalize, BipartiteGraph, G2NConfig};
use sgfcf::model::{write_recommendations, Scorer, SgfcfConfig, SgfcfModel};
use sgfcf::spectral::dense_svd;
use sgfcf::synth::{power_law_bipartite, PowerLawSpec};
use sgfcf::Error;

fn synthetic_log() -> String {
    let pairs = power_law_bipartite(&PowerLawSpec::new(300, 200, 4000, 11).with_communities(5, 0.8));
    pairs.iter().map(|(u, i)| format!("u{u}\ti{i}\n")).collect()
}

fn dataset() -> InteractionDataset {
    let log = ingest_reader(synthetic_log().as_bytes(), IngestFormat::TsvPairs).unwrap();
    split(&log, &SplitConfig::new(0.7, 0.1, 5).unwrap()).unwrap()
}

#[test]
fn sgfcf_beats_popularity() {
    let ds = dataset();
    let cfg = SgfcfConfig {
        k: 40,
        igf: IgfConfig::new(1.0, 0.8, 1.4).unwrap(),
        gamma: 0.2,
        ..SgfcfConfig::default()
    };
    let report = fit_and_evaluate(&ds, &cfg, 10).unwrap();
    let pop = evaluate(&PopularityScorer::new(&ds), &ds, 10).unwrap();
    assert!(report.ndcg > pop.ndcg, "{} vs {}", report.ndcg, pop.ndcg);
    assert!((0.0..=1.0).contains(&report.recall));
}

#[test]
fn every_family_fits_and_ranks() {
    let ds = dataset();
    for filter in [
        FilterFamily::Monomial { beta: 1.0 },
        FilterFamily::Exponential { beta: 2.0 },
        FilterFamily::Markov { order: 3 },
        FilterFamily::Jacobi { a: 1.0, b: 1.0, order: 3 },
    ] {
        let cfg = SgfcfConfig {
            k: 30,
            filter,
            ..SgfcfConfig::default()
        };
        let model = SgfcfModel::fit(&ds, &cfg).unwrap();
        let list = model.recommend(0, 5, true).unwrap();
        assert_eq!(list.items.len(), 5);
        assert!(list.items.iter().all(|i| !model.train_items(0).contains(i)));
        assert!(list.scores.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(model.score_user(0).unwrap().len(), ds.n_items);
    }
}

#[test]
fn oversized_k_is_rejected() {
    let ds = dataset();
    let cfg = SgfcfConfig {
        k: 10_000,
        ..SgfcfConfig::default()
    };
    assert!(matches!(SgfcfModel::fit(&ds, &cfg), Err(Error::KTooLarge { .. })));
}

#[test]
fn file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.tsv");
    std::fs::write(&path, synthetic_log()).unwrap();
    let log = ingest(&path, IngestFormat::TsvPairs).unwrap();
    let ds = split(&log, &SplitConfig::new(0.8, 0.0, 1).unwrap()).unwrap();

    let manifest = serde_json::to_string(&ds.to_manifest()).unwrap();
    let back = InteractionDataset::from_manifest(&serde_json::from_str(&manifest).unwrap()).unwrap();
    assert_eq!((&back.train, &back.val, &back.test), (&ds.train, &ds.val, &ds.test));
    assert_eq!((back.n_users, back.n_items, back.seed), (ds.n_users, ds.n_items, ds.seed));

    let model = SgfcfModel::fit(&ds, &SgfcfConfig { k: 20, ..SgfcfConfig::default() }).unwrap();
    let lists: Vec<_> = (0..3).map(|u| model.recommend(u, 4, true).unwrap()).collect();
    let mut buf = Vec::new();
    write_recommendations(&mut buf, &lists).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("user_id,rank,item_id,score"));
    assert_eq!(text.lines().count(), 1 + 12);

    let cfg_json = serde_json::to_string(model.config()).unwrap();
    let cfg: SgfcfConfig = serde_json::from_str(&cfg_json).unwrap();
    assert_eq!(&cfg, model.config());
}

#[test]
fn missing_file_is_reported() {
    let err = ingest("/nonexistent/interactions.tsv", IngestFormat::TsvPairs).unwrap_err();
    assert!(matches!(err, Error::MissingFile(_)));
}

#[test]
fn homophily_and_sweep_exports() {
    let ds = dataset();
    let graph = BipartiteGraph::build(&ds).unwrap();
    let scores = homophilic_ratio_all(&graph, 2, HomophilyMode::Inclusive).unwrap();
    let profile = map_homo_to_beta(&scores, &IgfConfig::new(1.0, 0.5, 1.5).unwrap());
    let mut buf = Vec::new();
    write_homophily_csv(&mut buf, &scores, &profile).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + ds.n_users + ds.n_items);

    let spectrum = dense_svd(&g2n_normalize(&graph, &G2NConfig::default())).unwrap();
    let ctx = EvalContext::new(&ds, EvalTarget::Test);
    let points = frequency_sweep(&spectrum, &ctx, &[5, 20, spectrum.len()], 10, ds.n_items).unwrap();
    assert_eq!(points.len(), 3);
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &points).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("K,k_fraction,recall,ndcg"));
}
