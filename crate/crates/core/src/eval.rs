//! Ranking metrics, frequency sweeps, grid search and reports.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{InteractionDataset, ItemId, Pair, UserId};
use crate::error::{Error, Result};
use crate::filters::{homophilic_ratio_all, HomophilyScores};
use crate::graph::{g2n_normalize, BipartiteGraph, G2NConfig};
use crate::model::{BandScorer, RankedList, Scorer, SgfcfConfig, SgfcfModel};
use crate::par;
use crate::spectral::{truncated_svd, TruncatedSpectrum};

/// Default ranking cutoff.
pub const DEFAULT_K: usize = 10;
/// Users scored together in one dense block.
const SCORE_BATCH: usize = 64;

fn dcg_discount(rank: usize) -> f64 {
    1.0 / ((rank + 1) as f64).log2()
}

/// Hits in the first `k` of `ranked` divided by `|test|`.
pub fn recall_at_k(ranked: &[ItemId], test: &[ItemId], k: usize) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let set: HashSet<ItemId> = test.iter().copied().collect();
    let hits = ranked.iter().take(k).filter(|i| set.contains(i)).count();
    Ok(hits as f64 / set.len() as f64)
}

/// Binary-relevance nDCG with the ideal ranking truncated at `min(k, |test|)`.
pub fn ndcg_at_k(ranked: &[ItemId], test: &[ItemId], k: usize) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let set: HashSet<ItemId> = test.iter().copied().collect();
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, i)| set.contains(i))
        .map(|(r, _)| dcg_discount(r + 1))
        .sum();
    let idcg: f64 = (1..=k.min(set.len())).map(dcg_discount).sum();
    Ok(dcg / idcg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub k: usize,
    pub recall: f64,
    pub ndcg: f64,
    pub users_evaluated: usize,
}

/// Which held-out split supplies relevant items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalTarget {
    /// Relevant = validation; train items are excluded from rankings.
    Validation,
    /// Relevant = test; train and validation items are excluded.
    Test,
}

/// Relevant and excluded items per evaluable user.
#[derive(Debug, Clone)]
pub struct EvalContext {
    users: Vec<UserId>,
    relevant: Vec<Vec<ItemId>>,
    exclude: Vec<Vec<ItemId>>,
}

impl EvalContext {
    pub fn new(dataset: &InteractionDataset, target: EvalTarget) -> Self {
        let mut hidden: Vec<Pair> = dataset.train.clone();
        let relevant_pairs = match target {
            EvalTarget::Validation => &dataset.val,
            EvalTarget::Test => {
                hidden.extend_from_slice(&dataset.val);
                &dataset.test
            }
        };
        let relevant = dataset.items_by_user(relevant_pairs);
        let exclude = dataset.items_by_user(&hidden);
        let users: Vec<UserId> = (0..dataset.n_users).filter(|&u| !relevant[u].is_empty()).collect();
        EvalContext {
            relevant: users.iter().map(|&u| relevant[u].clone()).collect(),
            exclude: users.iter().map(|&u| exclude[u].clone()).collect(),
            users,
        }
    }

    pub fn users(&self) -> &[UserId] {
        &self.users
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Metrics for one score row of the `idx`-th evaluable user.
    fn metrics_for(&self, idx: usize, scores: &[f64], k: usize) -> Result<(f64, f64)> {
        let ranked = RankedList::from_scores(self.users[idx], scores, k, &self.exclude[idx])?;
        Ok((
            recall_at_k(&ranked.items, &self.relevant[idx], k)?,
            ndcg_at_k(&ranked.items, &self.relevant[idx], k)?,
        ))
    }

    fn average(&self, k: usize, per_user: Vec<(f64, f64)>) -> MetricResult {
        let n = per_user.len();
        let (r, d) = per_user.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        MetricResult {
            k,
            recall: r / n as f64,
            ndcg: d / n as f64,
            users_evaluated: n,
        }
    }
}

/// Averages recall and nDCG over users with a non-empty relevant set.
pub fn evaluate_with<S: Scorer + ?Sized>(scorer: &S, ctx: &EvalContext, k: usize) -> Result<MetricResult> {
    if ctx.is_empty() {
        return Err(Error::NoEvaluableUsers);
    }
    let chunks: Vec<(usize, &[UserId])> = ctx
        .users
        .chunks(SCORE_BATCH)
        .enumerate()
        .map(|(c, users)| (c * SCORE_BATCH, users))
        .collect();
    let per_chunk = par::map_slice(&chunks, |&(offset, users)| -> Result<Vec<(f64, f64)>> {
        let rows = scorer.score_batch(users)?;
        rows.iter()
            .enumerate()
            .map(|(j, row)| ctx.metrics_for(offset + j, row, k))
            .collect()
    });
    let mut all = Vec::with_capacity(ctx.users.len());
    for chunk in per_chunk {
        all.extend(chunk?);
    }
    Ok(ctx.average(k, all))
}

/// Evaluates on the test split, excluding train and validation items.
pub fn evaluate<S: Scorer + ?Sized>(scorer: &S, dataset: &InteractionDataset, k: usize) -> Result<MetricResult> {
    evaluate_with(scorer, &EvalContext::new(dataset, EvalTarget::Test), k)
}

/// Scores items by train-set popularity, the same for every user.
#[derive(Debug, Clone)]
pub struct PopularityScorer {
    n_users: usize,
    counts: Vec<f64>,
}

impl PopularityScorer {
    pub fn new(dataset: &InteractionDataset) -> Self {
        let mut counts = vec![0.0; dataset.n_items];
        for &(_, i) in &dataset.train {
            counts[i] += 1.0;
        }
        PopularityScorer {
            n_users: dataset.n_users,
            counts,
        }
    }
}

impl Scorer for PopularityScorer {
    fn n_users(&self) -> usize {
        self.n_users
    }

    fn n_items(&self) -> usize {
        self.counts.len()
    }

    fn score_user(&self, u: UserId) -> Result<Vec<f64>> {
        if u >= self.n_users {
            return Err(Error::UnknownUser(u));
        }
        Ok(self.counts.clone())
    }
}

/// One point of a band sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "K")]
    pub k_components: usize,
    /// `K / min(|U|, |I|)`
    pub k_fraction: f64,
    pub recall: f64,
    pub ndcg: f64,
}

/// Score matrices up to this many entries are accumulated incrementally.
const SWEEP_DENSE_CAP: usize = 64 << 20;

/// Evaluates the band `[1, K]` for every `K` in `k_grid`.
///
/// When the evaluable users' score block fits in memory, components are added
/// one rank-1 update at a time so each grid point costs only its ranking.
pub fn frequency_sweep(
    spectrum: &TruncatedSpectrum,
    ctx: &EvalContext,
    k_grid: &[usize],
    metric_k: usize,
    n_frequencies: usize,
) -> Result<Vec<SweepPoint>> {
    if ctx.is_empty() {
        return Err(Error::NoEvaluableUsers);
    }
    let mut grid: Vec<usize> = k_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if let Some(&bad) = grid.iter().find(|&&k| k == 0 || k > spectrum.len()) {
        return Err(Error::BandOutOfRange {
            lo: 1,
            hi: bad,
            len: spectrum.len(),
        });
    }
    let point = |k: usize, m: MetricResult| SweepPoint {
        k_components: k,
        k_fraction: k as f64 / n_frequencies.max(1) as f64,
        recall: m.recall,
        ndcg: m.ndcg,
    };
    let n_items = spectrum.right().nrows();
    let n_eval = ctx.users.len();
    if n_eval.saturating_mul(n_items) > SWEEP_DENSE_CAP {
        return grid
            .iter()
            .map(|&k| Ok(point(k, evaluate_with(&BandScorer::new(spectrum, 1, k)?, ctx, metric_k)?)))
            .collect();
    }

    let (p, q) = (spectrum.left(), spectrum.right());
    let mut scores = vec![0.0; n_eval * n_items];
    let mut out = Vec::with_capacity(grid.len());
    let mut done = 0;
    for &k in &grid {
        let range = done..k;
        par::for_each_chunk_mut(&mut scores, n_items, |idx, row| {
            let u = ctx.users[idx];
            for c in range.clone() {
                let puc = p[(u, c)];
                if puc == 0.0 {
                    continue;
                }
                for (i, s) in row.iter_mut().enumerate() {
                    *s += puc * q[(i, c)];
                }
            }
        });
        done = k;
        let per_user = par::map_range(n_eval, |idx| ctx.metrics_for(idx, &scores[idx * n_items..(idx + 1) * n_items], metric_k));
        let per_user: Result<Vec<_>> = per_user.into_iter().collect();
        out.push(point(k, ctx.average(metric_k, per_user?)));
    }
    Ok(out)
}

/// CSV `K,k_fraction,recall,ndcg`.
pub fn write_sweep_csv<W: Write>(w: W, points: &[SweepPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["K", "k_fraction", "recall", "ndcg"])?;
    for p in points {
        wtr.write_record([
            p.k_components.to_string(),
            p.k_fraction.to_string(),
            p.recall.to_string(),
            p.ndcg.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub const ALPHA_STEP: f64 = 1.0;
pub const EPSILON_STEP: f64 = 0.02;
pub const GAMMA_STEP: f64 = 0.1;
pub const BETA_STEP: f64 = 0.1;

/// `center ± step·j` for `j = 0..=radius`, clipped to `[lo, hi]`, ascending.
pub fn axis(center: f64, step: f64, radius: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (-(radius as i64)..=radius as i64)
        .map(|j| {
            let x = center + step * j as f64;
            // snap to the step lattice; dividing by 1/step keeps 0.3 exact
            (x / step).round() / (1.0 / step)
        })
        .filter(|&x| x >= lo - 1e-12 && x <= hi + 1e-12)
        .collect();
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    #[default]
    Ndcg,
    Recall,
}

/// Exhaustive product of hyperparameter axes over a base configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub base: SgfcfConfig,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    pub beta: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub selection: SelectionMetric,
    pub metric_k: usize,
}

impl GridSpec {
    /// Single-point grid at `base`.
    pub fn single(base: SgfcfConfig, metric_k: usize) -> Self {
        GridSpec {
            base,
            alpha: vec![base.g2n.alpha],
            epsilon: vec![base.g2n.epsilon],
            k: vec![base.k],
            beta: vec![base.igf.beta],
            beta1: vec![base.igf.beta1],
            beta2: vec![base.igf.beta2],
            gamma: vec![base.gamma],
            selection: SelectionMetric::Ndcg,
            metric_k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("alpha", self.alpha.len()),
            ("epsilon", self.epsilon.len()),
            ("K", self.k.len()),
            ("beta", self.beta.len()),
            ("beta1", self.beta1.len()),
            ("beta2", self.beta2.len()),
            ("gamma", self.gamma.len()),
        ];
        if let Some(&(name, _)) = axes.iter().find(|a| a.1 == 0) {
            return Err(Error::config(name, "grid axis is empty"));
        }
        if self.metric_k == 0 {
            return Err(Error::config("k", "must be >= 1"));
        }
        self.base.validate()
    }

    /// Valid configurations in deterministic product order. Exponent
    /// triples violating `beta1 <= beta <= beta2` are skipped.
    pub fn configs(&self) -> Result<Vec<SgfcfConfig>> {
        let mut out = Vec::new();
        for &alpha in &self.alpha {
            for &epsilon in &self.epsilon {
                let g2n = G2NConfig::new(alpha, epsilon)?;
                for &k in &self.k {
                    for &beta in &self.beta {
                        for &beta1 in &self.beta1 {
                            for &beta2 in &self.beta2 {
                                if !(beta1 <= beta && beta <= beta2) {
                                    continue;
                                }
                                for &gamma in &self.gamma {
                                    let mut c = self.base;
                                    c.g2n = g2n;
                                    c.k = k;
                                    c.igf.beta = beta;
                                    c.igf.beta1 = beta1;
                                    c.igf.beta2 = beta2;
                                    c.gamma = gamma;
                                    c.validate()?;
                                    out.push(c);
                                }
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::config("beta", "no grid point satisfies beta1 <= beta <= beta2"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub config: SgfcfConfig,
    pub validation: MetricResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub best: SgfcfConfig,
    pub best_validation: MetricResult,
    pub test: MetricResult,
    pub rows: Vec<GridRow>,
}

/// CSV with one row per grid point.
pub fn write_grid_csv<W: Write>(w: W, rows: &[GridRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "alpha", "epsilon", "K", "beta", "beta1", "beta2", "gamma", "recall", "ndcg",
    ])?;
    for r in rows {
        let c = &r.config;
        wtr.write_record([
            c.g2n.alpha.to_string(),
            c.g2n.epsilon.to_string(),
            c.k.to_string(),
            c.igf.beta.to_string(),
            c.igf.beta1.to_string(),
            c.igf.beta2.to_string(),
            c.gamma.to_string(),
            r.validation.recall.to_string(),
            r.validation.ndcg.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Selects the best configuration on validation and reports it on test.
/// Decompositions are shared across configurations with the same
/// normalization; homophily is computed once.
pub fn grid_search(dataset: &InteractionDataset, grid: &GridSpec) -> Result<GridResult> {
    grid.validate()?;
    let val_ctx = EvalContext::new(dataset, EvalTarget::Validation);
    if val_ctx.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let configs = grid.configs()?;
    let graph = BipartiteGraph::build(dataset)?;
    let max = graph.n_users().min(graph.n_items());
    if let Some(&k) = grid.k.iter().find(|&&k| k > max) {
        return Err(Error::KTooLarge { k, max });
    }
    let homophily: Option<HomophilyScores> = if configs.iter().any(|c| c.needs_homophily()) {
        Some(homophilic_ratio_all(&graph, grid.base.delta, grid.base.homophily_mode)?)
    } else {
        None
    };
    let k_max = *grid.k.iter().max().expect("validated non-empty");

    // group by normalization so each decomposition is computed once
    let mut groups: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for (idx, c) in configs.iter().enumerate() {
        groups
            .entry((c.g2n.alpha.to_bits(), c.g2n.epsilon.to_bits()))
            .or_default()
            .push(idx);
    }
    let mut results: Vec<Option<MetricResult>> = vec![None; configs.len()];
    let mut spectra: BTreeMap<(u64, u64), TruncatedSpectrum> = BTreeMap::new();
    for (key, members) in &groups {
        let g2n = configs[members[0]].g2n;
        let norm = g2n_normalize(&graph, &g2n);
        let spectrum = truncated_svd(&norm, &grid.base.svd.params(k_max))?;
        let evals = par::map_slice(members, |&idx| -> Result<MetricResult> {
            let model = SgfcfModel::assemble(&graph, norm.clone(), &spectrum, homophily.as_ref(), &configs[idx])?;
            evaluate_with(&model, &val_ctx, grid.metric_k)
        });
        for (&idx, r) in members.iter().zip(evals) {
            results[idx] = Some(r?);
        }
        spectra.insert(*key, spectrum);
    }

    let rows: Vec<GridRow> = configs
        .iter()
        .zip(results)
        .map(|(c, r)| GridRow {
            config: *c,
            validation: r.expect("every config evaluated"),
        })
        .collect();
    let key = |m: &MetricResult| match grid.selection {
        SelectionMetric::Ndcg => m.ndcg,
        SelectionMetric::Recall => m.recall,
    };
    // first maximum wins so ties resolve in grid order
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if key(&r.validation) > key(&rows[best].validation) {
            best = i;
        }
    }
    let best_cfg = rows[best].config;
    let spectrum = &spectra[&(best_cfg.g2n.alpha.to_bits(), best_cfg.g2n.epsilon.to_bits())];
    let norm = g2n_normalize(&graph, &best_cfg.g2n);
    let model = SgfcfModel::assemble(&graph, norm, spectrum, homophily.as_ref(), &best_cfg)?;
    let test = evaluate_with(&model, &EvalContext::new(dataset, EvalTarget::Test), grid.metric_k)?;
    Ok(GridResult {
        best: best_cfg,
        best_validation: rows[best].validation,
        test,
        rows,
    })
}

/// Result of fitting and evaluating one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: SgfcfConfig,
    pub k: usize,
    pub recall: f64,
    pub ndcg: f64,
    pub users_evaluated: usize,
    pub fit_seconds: f64,
    pub eval_seconds: f64,
}

/// Fits on train and evaluates on test.
pub fn fit_and_evaluate(dataset: &InteractionDataset, config: &SgfcfConfig, k: usize) -> Result<Report> {
    let model = SgfcfModel::fit(dataset, config)?;
    let start = Instant::now();
    let m = evaluate(&model, dataset, k)?;
    Ok(Report {
        config: *config,
        k,
        recall: m.recall,
        ndcg: m.ndcg,
        users_evaluated: m.users_evaluated,
        fit_seconds: model.fit_seconds(),
        eval_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{power_law_bipartite, PowerLawSpec};
    use proptest::prelude::*;

    #[test]
    fn recall_examples() {
        assert_eq!(recall_at_k(&[0, 1], &[0], 2).unwrap(), 1.0);
        assert_eq!(recall_at_k(&[0, 1], &[2, 3], 2).unwrap(), 0.0);
        assert_eq!(recall_at_k(&[0, 1, 2], &[0, 2, 8, 9], 3).unwrap(), 0.5);
        assert!(matches!(recall_at_k(&[0], &[], 1), Err(Error::EmptyTestSet)));
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg_at_k(&[4, 1, 2], &[4], 10).unwrap(), 1.0);
        assert!((ndcg_at_k(&[1, 4, 2], &[4], 10).unwrap() - 1.0 / 3f64.log2()).abs() < 1e-15);
        assert_eq!(ndcg_at_k(&[1, 2], &[4], 10).unwrap(), 0.0);
        assert!(matches!(ndcg_at_k(&[0], &[], 1), Err(Error::EmptyTestSet)));
    }

    /// Scores 1 for held-out test items, 0 otherwise.
    struct Oracle<'a>(&'a InteractionDataset);

    impl Scorer for Oracle<'_> {
        fn n_users(&self) -> usize {
            self.0.n_users
        }
        fn n_items(&self) -> usize {
            self.0.n_items
        }
        fn score_user(&self, u: UserId) -> Result<Vec<f64>> {
            let mut s = vec![0.0; self.0.n_items];
            for &(v, i) in &self.0.test {
                if v == u {
                    s[i] = 1.0;
                }
            }
            Ok(s)
        }
    }

    fn synthetic(seed: u64) -> InteractionDataset {
        let pairs = power_law_bipartite(&PowerLawSpec::new(60, 40, 500, seed).with_communities(3, 0.8));
        let (train, rest) = crate::synth::holdout(&pairs, 0.7, seed);
        let (val, test) = crate::synth::holdout(&rest, 0.5, seed + 1);
        InteractionDataset::from_splits(60, 40, train, val, test).unwrap()
    }

    #[test]
    fn oracle_scores_perfect() {
        let ds = synthetic(1);
        let m = evaluate(&Oracle(&ds), &ds, 40).unwrap();
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.ndcg, 1.0);
        assert!(m.users_evaluated > 0);
    }

    #[test]
    fn no_evaluable_users() {
        let ds = InteractionDataset::from_splits(2, 2, vec![(0, 0), (1, 1)], vec![], vec![]).unwrap();
        assert!(matches!(evaluate(&PopularityScorer::new(&ds), &ds, 5), Err(Error::NoEvaluableUsers)));
    }

    #[test]
    fn sweep_matches_band_evaluation() {
        let ds = synthetic(2);
        let graph = BipartiteGraph::build(&ds).unwrap();
        let norm = g2n_normalize(&graph, &G2NConfig::default());
        let spec = crate::spectral::dense_svd(&norm).unwrap();
        let ctx = EvalContext::new(&ds, EvalTarget::Test);
        let grid = [1, 3, 10, spec.len()];
        let pts = frequency_sweep(&spec, &ctx, &grid, 5, 40).unwrap();
        for p in &pts {
            let direct = evaluate_with(&BandScorer::new(&spec, 1, p.k_components).unwrap(), &ctx, 5).unwrap();
            assert!((direct.ndcg - p.ndcg).abs() < 1e-12);
            assert!((direct.recall - p.recall).abs() < 1e-12);
        }
        assert!(frequency_sweep(&spec, &ctx, &[0], 5, 40).is_err());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &pts).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("K,k_fraction,recall,ndcg\n1,"));
    }

    #[test]
    fn single_point_grid_returns_its_config() {
        let ds = synthetic(3);
        let base = SgfcfConfig {
            k: 8,
            ..Default::default()
        };
        let res = grid_search(&ds, &GridSpec::single(base, 10)).unwrap();
        assert_eq!(res.best, base);
        assert_eq!(res.rows.len(), 1);
        let direct = evaluate(&SgfcfModel::fit(&ds, &base).unwrap(), &ds, 10).unwrap();
        assert!((direct.ndcg - res.test.ndcg).abs() < 1e-12);
    }

    #[test]
    fn grid_order_and_skips() {
        let ds = synthetic(4);
        let mut g = GridSpec::single(SgfcfConfig { k: 6, ..Default::default() }, 10);
        g.alpha = vec![0.0, 2.0];
        g.k = vec![4, 6];
        g.beta = vec![1.0];
        g.beta1 = vec![0.8, 1.2];
        g.beta2 = vec![1.0, 1.4];
        let configs = g.configs().unwrap();
        // beta1 = 1.2 > beta is skipped
        assert_eq!(configs.len(), 2 * 2 * 2);
        let res = grid_search(&ds, &g).unwrap();
        assert_eq!(res.rows.iter().map(|r| r.config).collect::<Vec<_>>(), configs);
        let best = res
            .rows
            .iter()
            .map(|r| r.validation.ndcg)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(res.best_validation.ndcg, best);
    }

    #[test]
    fn empty_validation_rejected() {
        let mut ds = synthetic(5);
        ds.test.append(&mut ds.val);
        ds.test.sort_unstable();
        let g = GridSpec::single(SgfcfConfig { k: 4, ..Default::default() }, 10);
        assert!(matches!(grid_search(&ds, &g), Err(Error::EmptyValidation)));
    }

    #[test]
    fn axis_steps() {
        assert_eq!(axis(0.3, 0.1, 1, 0.0, 1.0), vec![0.2, 0.3, 0.4]);
        assert_eq!(axis(0.0, 1.0, 2, 0.0, 10.0), vec![0.0, 1.0, 2.0]);
        let eps = axis(-0.46, EPSILON_STEP, 3, -0.5, 0.0);
        assert_eq!(eps, vec![-0.5, -0.48, -0.46, -0.44, -0.42, -0.4]);
    }

    #[test]
    fn report_fields() {
        let ds = synthetic(6);
        let r = fit_and_evaluate(&ds, &SgfcfConfig { k: 5, ..Default::default() }, 10).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["config", "k", "recall", "ndcg", "users_evaluated", "fit_seconds", "eval_seconds"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    proptest! {
        #[test]
        fn metrics_bounded(ranked in prop::collection::vec(0usize..30, 0..15), test in prop::collection::vec(0usize..30, 1..10), k in 1usize..20) {
            let mut ranked = ranked;
            ranked.sort_unstable();
            ranked.dedup();
            let r = recall_at_k(&ranked, &test, k).unwrap();
            let n = ndcg_at_k(&ranked, &test, k).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&n));
        }

        #[test]
        fn monotone_transform_invariance(scores in prop::collection::vec(-5.0f64..5.0, 20), test in prop::collection::vec(0usize..20, 1..5)) {
            let a = RankedList::from_scores(0, &scores, 10, &[]).unwrap();
            let t: Vec<f64> = scores.iter().map(|s| (s * 0.5).exp() + 3.0).collect();
            let b = RankedList::from_scores(0, &t, 10, &[]).unwrap();
            prop_assert_eq!(ndcg_at_k(&a.items, &test, 10).unwrap(), ndcg_at_k(&b.items, &test, 10).unwrap());
            prop_assert_eq!(recall_at_k(&a.items, &test, 10).unwrap(), recall_at_k(&b.items, &test, 10).unwrap());
        }
    }
}
