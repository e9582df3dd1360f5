//! Closed-form scoring, band-filter scoring and top-k recommendation.

use std::cmp::Ordering;
use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{InteractionDataset, ItemId, UserId};
use crate::error::{Error, Result};
use crate::filters::{
    homophilic_ratio_all, map_homo_to_beta, FilterFamily, HomophilyMode, HomophilyScores, IgfConfig, IgfProfile,
};
use crate::graph::{g2n_normalize, BipartiteGraph, G2NConfig, NormalizedMatrix};
use crate::par;
use crate::spectral::{truncated_svd, SvdParams, TruncatedSpectrum, DEFAULT_KRYLOV_WIDTH, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS};

/// Randomized decomposition settings that are not part of the model shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdSettings {
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for SvdSettings {
    fn default() -> Self {
        SvdSettings {
            oversample: DEFAULT_OVERSAMPLE,
            power_iters: DEFAULT_POWER_ITERS,
            seed: 0,
        }
    }
}

impl SvdSettings {
    pub fn params(&self, k: usize) -> SvdParams {
        SvdParams {
            k,
            oversample: self.oversample,
            power_iters: self.power_iters,
            seed: self.seed,
            krylov_width: DEFAULT_KRYLOV_WIDTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgfcfConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub g2n: G2NConfig,
    pub igf: IgfConfig,
    pub gamma: f64,
    pub delta: usize,
    /// For families with an exponent, the per-node exponents from `igf`
    /// replace the family's own `beta`.
    pub filter: FilterFamily,
    #[serde(default)]
    pub homophily_mode: HomophilyMode,
    #[serde(default)]
    pub svd: SvdSettings,
}

impl Default for SgfcfConfig {
    fn default() -> Self {
        SgfcfConfig {
            k: 100,
            g2n: G2NConfig::default(),
            igf: IgfConfig::shared(1.0),
            gamma: 0.0,
            delta: 2,
            filter: FilterFamily::default(),
            homophily_mode: HomophilyMode::Inclusive,
            svd: SvdSettings::default(),
        }
    }
}

impl SgfcfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("K", "must be >= 1"));
        }
        self.g2n.validate()?;
        self.igf.validate()?;
        self.filter.validate()?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gamma", "must be finite and >= 0"));
        }
        if self.delta < 2 || self.delta % 2 == 1 {
            return Err(Error::OddDelta(self.delta));
        }
        Ok(())
    }

    /// Whether per-node exponents differ, so homophily must be computed.
    pub fn needs_homophily(&self) -> bool {
        self.filter.has_beta() && self.igf.beta1 < self.igf.beta2
    }
}

/// Anything that can produce a full score row per user.
pub trait Scorer: Sync {
    fn n_users(&self) -> usize;
    fn n_items(&self) -> usize;
    fn score_user(&self, u: UserId) -> Result<Vec<f64>>;

    /// Score rows for several users at once.
    fn score_batch(&self, users: &[UserId]) -> Result<Vec<Vec<f64>>> {
        users.iter().map(|&u| self.score_user(u)).collect()
    }
}

/// `score(u, ·) = left_u · rightᵀ` for factor matrices sharing the inner width.
#[derive(Debug, Clone, PartialEq)]
struct LowRank {
    /// |U| × w
    left: DMatrix<f64>,
    /// |I| × w
    right: DMatrix<f64>,
}

impl LowRank {
    fn row(&self, u: UserId) -> Vec<f64> {
        let lu = self.left.row(u).transpose();
        (&self.right * lu).as_slice().to_vec()
    }

    fn rows(&self, users: &[UserId]) -> Vec<Vec<f64>> {
        let w = self.left.ncols();
        let block = DMatrix::from_fn(w, users.len(), |k, j| self.left[(users[j], k)]);
        let out = &self.right * block;
        out.column_iter().map(|c| c.as_slice().to_vec()).collect()
    }
}

/// `(r̃_u R̃ᵀ) R̃` scaled by `gamma`, added into `out`.
fn add_all_frequency(norm: &NormalizedMatrix, u: UserId, gamma: f64, out: &mut [f64]) {
    let (items, w_ui) = norm.matrix().row(u);
    let mut t: Vec<(usize, f64)> = Vec::new();
    for (&i, &w) in items.iter().zip(w_ui) {
        let (users, w_vi) = norm.transposed().row(i);
        t.extend(users.iter().zip(w_vi).map(|(&v, &x)| (v, w * x)));
    }
    t.sort_unstable_by_key(|p| p.0);
    let mut k = 0;
    while k < t.len() {
        let v = t[k].0;
        let mut acc = 0.0;
        while k < t.len() && t[k].0 == v {
            acc += t[k].1;
            k += 1;
        }
        let (js, w_vj) = norm.matrix().row(v);
        for (&j, &x) in js.iter().zip(w_vj) {
            out[j] += gamma * acc * x;
        }
    }
}

/// Immutable scoring state.
#[derive(Debug, Clone)]
pub struct SgfcfModel {
    config: SgfcfConfig,
    spectrum: TruncatedSpectrum,
    profile: IgfProfile,
    norm: NormalizedMatrix,
    train_items: Vec<Vec<ItemId>>,
    factors: LowRank,
    fit_seconds: f64,
}

impl SgfcfModel {
    /// Runs normalization, decomposition, homophily and exponent mapping.
    pub fn fit(dataset: &InteractionDataset, config: &SgfcfConfig) -> Result<Self> {
        let start = Instant::now();
        config.validate()?;
        let graph = BipartiteGraph::build(dataset)?;
        let max = graph.n_users().min(graph.n_items());
        if config.k > max {
            return Err(Error::KTooLarge { k: config.k, max });
        }
        let norm = g2n_normalize(&graph, &config.g2n);
        let spectrum = truncated_svd(&norm, &config.svd.params(config.k))?;
        let homophily = if config.needs_homophily() {
            Some(homophilic_ratio_all(&graph, config.delta, config.homophily_mode)?)
        } else {
            None
        };
        let mut model = Self::assemble(&graph, norm, &spectrum, homophily.as_ref(), config)?;
        model.fit_seconds = start.elapsed().as_secs_f64();
        Ok(model)
    }

    /// Builds a model from precomputed pieces. `spectrum` may be longer than
    /// `config.k`; it is truncated. `homophily` is required when the config
    /// maps exponents per node.
    pub fn assemble(
        graph: &BipartiteGraph,
        norm: NormalizedMatrix,
        spectrum: &TruncatedSpectrum,
        homophily: Option<&HomophilyScores>,
        config: &SgfcfConfig,
    ) -> Result<Self> {
        config.validate()?;
        let start = Instant::now();
        let (nu, ni) = (graph.n_users(), graph.n_items());
        let profile = match homophily {
            Some(h) if config.needs_homophily() => map_homo_to_beta(h, &config.igf),
            None if config.needs_homophily() => {
                return Err(Error::config("igf", "per-node exponents need homophily scores"));
            }
            _ => IgfProfile::uniform(nu, ni, config.igf.beta),
        };
        let spectrum = spectrum.truncate(config.k);
        let factors = filtered_factors(&spectrum, &profile, &config.filter);
        let train_items = (0..nu).map(|u| graph.user_items(u).to_vec()).collect();
        Ok(SgfcfModel {
            config: *config,
            spectrum,
            profile,
            norm,
            train_items,
            factors,
            fit_seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn config(&self) -> &SgfcfConfig {
        &self.config
    }

    pub fn spectrum(&self) -> &TruncatedSpectrum {
        &self.spectrum
    }

    pub fn profile(&self) -> &IgfProfile {
        &self.profile
    }

    pub fn normalized(&self) -> &NormalizedMatrix {
        &self.norm
    }

    pub fn train_items(&self, u: UserId) -> &[ItemId] {
        &self.train_items[u]
    }

    pub fn fit_seconds(&self) -> f64 {
        self.fit_seconds
    }

    fn check_user(&self, u: UserId) -> Result<()> {
        if u >= self.train_items.len() {
            return Err(Error::UnknownUser(u));
        }
        Ok(())
    }

    /// Top-k items for `u`, optionally skipping its train items.
    pub fn recommend(&self, u: UserId, k: usize, exclude_train: bool) -> Result<RankedList> {
        let scores = self.score_user(u)?;
        let exclude: &[ItemId] = if exclude_train { &self.train_items[u] } else { &[] };
        RankedList::from_scores(u, &scores, k, exclude)
    }

    pub fn summary(&self) -> ModelSummary {
        let head = self.spectrum.sigma_normalized().iter().take(10).copied().collect();
        ModelSummary {
            config: self.config,
            n_users: self.train_items.len(),
            n_items: self.norm.n_items(),
            spectrum_len: self.spectrum.len(),
            sigma_1: self.spectrum.sigma().first().copied().unwrap_or(0.0),
            sigma_normalized_head: head,
            fit_seconds: self.fit_seconds,
        }
    }
}

/// `P̃_uk = P_uk g_u(σ̄_k)` and `Q̃_ik = Q_ik g_i(σ̄_k)`.
fn filtered_factors(spec: &TruncatedSpectrum, profile: &IgfProfile, filter: &FilterFamily) -> LowRank {
    let sbar = spec.sigma_normalized();
    let scale = |m: &DMatrix<f64>, betas: &[f64]| -> DMatrix<f64> {
        let rows = par::map_range(m.nrows(), |r| {
            let g = filter.with_beta(betas[r]).eval(sbar);
            (0..m.ncols()).map(|k| m[(r, k)] * g[k]).collect::<Vec<f64>>()
        });
        DMatrix::from_fn(m.nrows(), m.ncols(), |r, k| rows[r][k])
    };
    LowRank {
        left: scale(spec.left(), &profile.user_beta),
        right: scale(spec.right(), &profile.item_beta),
    }
}

impl Scorer for SgfcfModel {
    fn n_users(&self) -> usize {
        self.train_items.len()
    }

    fn n_items(&self) -> usize {
        self.norm.n_items()
    }

    fn score_user(&self, u: UserId) -> Result<Vec<f64>> {
        self.check_user(u)?;
        let mut row = self.factors.row(u);
        if self.config.gamma > 0.0 {
            add_all_frequency(&self.norm, u, self.config.gamma, &mut row);
        }
        Ok(row)
    }

    fn score_batch(&self, users: &[UserId]) -> Result<Vec<Vec<f64>>> {
        for &u in users {
            self.check_user(u)?;
        }
        let mut rows = self.factors.rows(users);
        if self.config.gamma > 0.0 {
            for (row, &u) in rows.iter_mut().zip(users) {
                add_all_frequency(&self.norm, u, self.config.gamma, row);
            }
        }
        Ok(rows)
    }
}

/// Uniform band filter over components `k_lo..=k_hi` (1-based):
/// `score(u, i) = Σ_k P_uk Q_ik`.
#[derive(Debug, Clone)]
pub struct BandScorer {
    factors: LowRank,
    k_lo: usize,
    k_hi: usize,
}

impl BandScorer {
    pub fn new(spectrum: &TruncatedSpectrum, k_lo: usize, k_hi: usize) -> Result<Self> {
        let len = spectrum.len();
        if k_lo < 1 || k_lo > k_hi || k_hi > len {
            return Err(Error::BandOutOfRange { lo: k_lo, hi: k_hi, len });
        }
        let w = k_hi - k_lo + 1;
        Ok(BandScorer {
            factors: LowRank {
                left: spectrum.left().columns(k_lo - 1, w).into_owned(),
                right: spectrum.right().columns(k_lo - 1, w).into_owned(),
            },
            k_lo,
            k_hi,
        })
    }

    pub fn band(&self) -> (usize, usize) {
        (self.k_lo, self.k_hi)
    }
}

impl Scorer for BandScorer {
    fn n_users(&self) -> usize {
        self.factors.left.nrows()
    }

    fn n_items(&self) -> usize {
        self.factors.right.nrows()
    }

    fn score_user(&self, u: UserId) -> Result<Vec<f64>> {
        if u >= self.n_users() {
            return Err(Error::UnknownUser(u));
        }
        Ok(self.factors.row(u))
    }

    fn score_batch(&self, users: &[UserId]) -> Result<Vec<Vec<f64>>> {
        if let Some(&u) = users.iter().find(|&&u| u >= self.n_users()) {
            return Err(Error::UnknownUser(u));
        }
        Ok(self.factors.rows(users))
    }
}

/// Decomposes `norm` far enough to cover `k_hi` and returns the band scorer.
pub fn sgf_band_scores(norm: &NormalizedMatrix, k_lo: usize, k_hi: usize, svd: &SvdSettings) -> Result<BandScorer> {
    let max = norm.n_users().min(norm.n_items());
    if k_lo < 1 || k_lo > k_hi || k_hi > max {
        return Err(Error::BandOutOfRange { lo: k_lo, hi: k_hi, len: max });
    }
    let spectrum = truncated_svd(norm, &svd.params(k_hi))?;
    BandScorer::new(&spectrum, k_lo, k_hi)
}

/// Ranked recommendations for one user.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub user_id: UserId,
    pub items: Vec<ItemId>,
    pub scores: Vec<f64>,
}

/// Higher score first, then lower item id.
fn rank_order(a: &(ItemId, f64), b: &(ItemId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

impl RankedList {
    /// Top `k` of a score row; `exclude` must be sorted.
    pub fn from_scores(user_id: UserId, scores: &[f64], k: usize, exclude: &[ItemId]) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("k", "must be >= 1"));
        }
        let mut cand: Vec<(ItemId, f64)> = scores
            .iter()
            .enumerate()
            .filter(|(i, _)| exclude.binary_search(i).is_err())
            .map(|(i, &s)| (i, s))
            .collect();
        if cand.len() > k {
            cand.select_nth_unstable_by(k - 1, rank_order);
            cand.truncate(k);
        }
        cand.sort_unstable_by(rank_order);
        Ok(RankedList {
            user_id,
            items: cand.iter().map(|c| c.0).collect(),
            scores: cand.iter().map(|c| c.1).collect(),
        })
    }
}

/// CSV `user_id,rank,item_id,score`, ranks starting at 1.
pub fn write_recommendations<W: Write>(w: W, lists: &[RankedList]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "rank", "item_id", "score"])?;
    for l in lists {
        for (r, (i, s)) in l.items.iter().zip(&l.scores).enumerate() {
            wtr.write_record([l.user_id.to_string(), (r + 1).to_string(), i.to_string(), s.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub config: SgfcfConfig,
    pub n_users: usize,
    pub n_items: usize,
    pub spectrum_len: usize,
    pub sigma_1: f64,
    pub sigma_normalized_head: Vec<f64>,
    pub fit_seconds: f64,
}
