//! Spectral filter families, homophilic ratios and individualized filter exponents.

use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::par;

/// Smallest base used when powering normalized singular values.
const POW_FLOOR: f64 = 1e-300;

/// `x^β` with `0^0 = 1` and `0^β = 0` for `β > 0`.
pub fn monomial(x: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    (beta * x.max(POW_FLOOR).ln()).exp()
}

/// Response functions applied to normalized singular values in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterFamily {
    /// `σ̄^β`
    Monomial { beta: f64 },
    /// `e^{β σ̄} / e^{β}`
    Exponential { beta: f64 },
    /// `(Σ_{l=0}^{L} σ̄^l) / (L + 1)`
    Markov { order: usize },
    /// `max(0, Σ_{k=0}^{L} P_k^{(a,b)}(σ̄))`
    Jacobi { a: f64, b: f64, order: usize },
}

impl Default for FilterFamily {
    fn default() -> Self {
        FilterFamily::Monomial { beta: 1.0 }
    }
}

impl FilterFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FilterFamily::Monomial { beta } | FilterFamily::Exponential { beta } => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return Err(Error::config("beta", "must be finite and >= 0"));
                }
            }
            FilterFamily::Markov { order } => {
                if order < 1 {
                    return Err(Error::config("order", "must be >= 1"));
                }
            }
            FilterFamily::Jacobi { a, b, order } => {
                if order < 1 {
                    return Err(Error::config("order", "must be >= 1"));
                }
                if !(a > -1.0 && b > -1.0) {
                    return Err(Error::config("jacobi", "a and b must exceed -1"));
                }
            }
        }
        Ok(())
    }

    /// Whether the family has a `β` that individualized filtering can replace per node.
    pub fn has_beta(&self) -> bool {
        matches!(self, FilterFamily::Monomial { .. } | FilterFamily::Exponential { .. })
    }

    /// The same family with `β` replaced; families without `β` are returned unchanged.
    pub fn with_beta(&self, beta: f64) -> Self {
        match *self {
            FilterFamily::Monomial { .. } => FilterFamily::Monomial { beta },
            FilterFamily::Exponential { .. } => FilterFamily::Exponential { beta },
            other => other,
        }
    }

    /// Response at a single point.
    pub fn weight(&self, x: f64) -> f64 {
        match *self {
            FilterFamily::Monomial { beta } => monomial(x, beta),
            FilterFamily::Exponential { beta } => (beta * (x - 1.0)).exp(),
            FilterFamily::Markov { order } => {
                let mut term = 1.0;
                let mut sum = 0.0;
                for _ in 0..=order {
                    sum += term;
                    term *= x;
                }
                sum / (order + 1) as f64
            }
            FilterFamily::Jacobi { a, b, order } => jacobi_sum(a, b, order, x).max(0.0),
        }
    }

    /// Responses for a vector of normalized singular values.
    pub fn eval(&self, sigma_normalized: &[f64]) -> Vec<f64> {
        sigma_normalized.iter().map(|&x| self.weight(x)).collect()
    }
}

/// `Σ_{k=0}^{L} P_k^{(a,b)}(x)` through the three-term recurrence.
pub fn jacobi_sum(a: f64, b: f64, order: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    let mut sum = prev;
    if order == 0 {
        return sum;
    }
    let mut cur = (a - b) / 2.0 + (a + b + 2.0) / 2.0 * x;
    sum += cur;
    for k in 2..=order {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let denom = 2.0 * k * (k + a + b) * (s - 2.0);
        let theta = s * (s - 1.0) / (2.0 * k * (k + a + b));
        let theta1 = (s - 1.0) * (a * a - b * b) / denom;
        let theta2 = (k + a - 1.0) * (k + b - 1.0) * s / (k * (k + a + b) * (s - 2.0));
        let next = theta * x * cur + theta1 * cur - theta2 * prev;
        prev = cur;
        cur = next;
        sum += cur;
    }
    sum
}

/// Comparison used by the homophily indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomophilyMode {
    /// distance ≤ δ
    #[default]
    Inclusive,
    /// distance < δ
    Strict,
}

/// Graphs up to this many nodes get exact breadth-first homophily for δ ≥ 4.
pub const HOMOPHILY_EXACT_CAP: usize = 200;
/// Source neighbors sampled per node by the approximate breadth-first path.
pub const HOMOPHILY_SAMPLED_SOURCES: usize = 32;

/// Homophilic ratios of every user and item.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomophilyScores {
    pub user_scores: Vec<f64>,
    pub item_scores: Vec<f64>,
    /// Number of ordered neighbor pairs (diagonal included) within range.
    pub user_counts: Vec<u64>,
    pub item_counts: Vec<u64>,
    pub user_degrees: Vec<usize>,
    pub item_degrees: Vec<usize>,
    pub delta: usize,
    pub mode: HomophilyMode,
    /// False when the approximate breadth-first path was used.
    pub exact: bool,
}

/// Pair counts for every node on the row side of `graph`.
/// `reach` is the inclusive distance bound (even).
fn side_counts(graph: &BipartiteGraph, reach: usize, exact: bool) -> Vec<u64> {
    let n = graph.n_users();
    par::map_range(n, |u| {
        let nbrs = graph.user_items(u);
        let m = nbrs.len() as u64;
        match reach {
            0 => m,
            2 => cooccurrence_count(graph, u),
            _ if exact => bfs_count(graph, u, reach, None),
            _ => bfs_count(graph, u, reach, Some(HOMOPHILY_SAMPLED_SOURCES)),
        }
    })
}

/// Ordered pairs `(i, j)` of neighbors of `u` that share another user,
/// plus the `|N_u|` diagonal pairs.
fn cooccurrence_count(graph: &BipartiteGraph, u: usize) -> u64 {
    let nbrs = graph.user_items(u);
    let m = nbrs.len();
    if m <= 1 {
        return m as u64;
    }
    let mut by_other: Vec<(usize, u32)> = Vec::new();
    for (a, &i) in nbrs.iter().enumerate() {
        for &v in graph.item_users(i) {
            if v != u {
                by_other.push((v, a as u32));
            }
        }
    }
    by_other.sort_unstable();
    let mut bits = vec![0u64; (m * m).div_ceil(64)];
    let mut set = 0u64;
    let mut start = 0;
    while start < by_other.len() {
        let v = by_other[start].0;
        let mut end = start + 1;
        while end < by_other.len() && by_other[end].0 == v {
            end += 1;
        }
        let group = &by_other[start..end];
        if group.len() >= 2 {
            for &(_, a) in group {
                for &(_, b) in group {
                    if a != b {
                        let idx = a as usize * m + b as usize;
                        let (w, bit) = (idx / 64, 1u64 << (idx % 64));
                        if bits[w] & bit == 0 {
                            bits[w] |= bit;
                            set += 1;
                        }
                    }
                }
            }
        }
        start = end;
    }
    set + m as u64
}

/// Breadth-first pair count with `u` removed. When `sources` is set, only
/// that many neighbors (chosen deterministically) are expanded and the
/// off-diagonal count is scaled up.
fn bfs_count(graph: &BipartiteGraph, u: usize, reach: usize, sources: Option<usize>) -> u64 {
    let nbrs = graph.user_items(u);
    let m = nbrs.len();
    if m <= 1 {
        return m as u64;
    }
    let nu = graph.n_users();
    let n = graph.n_nodes();
    let chosen: Vec<usize> = match sources {
        Some(s) if s < m => {
            let mut rng = ChaCha8Rng::seed_from_u64(u as u64 ^ 0x9e37_79b9_7f4a_7c15);
            let mut idx = sample(&mut rng, m, s).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..m).collect(),
    };
    let mut dist = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    let mut off_diag = 0u64;
    for &a in &chosen {
        let start = nu + nbrs[a];
        dist[start] = 0;
        touched.push(start);
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            let d = dist[node];
            if d == reach {
                continue;
            }
            let next: &[usize] = if node >= nu {
                graph.item_users(node - nu)
            } else {
                graph.user_items(node)
            };
            for &w in next {
                let w = if node >= nu { w } else { nu + w };
                if w == u || dist[w] != usize::MAX {
                    continue;
                }
                dist[w] = d + 1;
                touched.push(w);
                queue.push_back(w);
            }
        }
        off_diag += nbrs
            .iter()
            .enumerate()
            .filter(|&(b, &j)| b != a && dist[nu + j] <= reach)
            .count() as u64;
        for w in touched.drain(..) {
            dist[w] = usize::MAX;
        }
    }
    if chosen.len() < m {
        off_diag = (off_diag as f64 * m as f64 / chosen.len() as f64).round() as u64;
    }
    off_diag + m as u64
}

/// Homophilic ratio of every user and item.
///
/// For a user `u`, the ratio is the share of ordered pairs `(i, j)` of its
/// items whose distance in the graph without `u` satisfies the indicator;
/// `i = j` always counts. Items are handled symmetrically.
pub fn homophilic_ratio_all(graph: &BipartiteGraph, delta: usize, mode: HomophilyMode) -> Result<HomophilyScores> {
    let exact = graph.n_nodes() <= HOMOPHILY_EXACT_CAP;
    homophilic_ratio_with(graph, delta, mode, exact)
}

/// As [`homophilic_ratio_all`], forcing the exact breadth-first path when `exact` is set.
pub fn homophilic_ratio_with(
    graph: &BipartiteGraph,
    delta: usize,
    mode: HomophilyMode,
    exact: bool,
) -> Result<HomophilyScores> {
    if delta < 2 || delta % 2 == 1 {
        return Err(Error::OddDelta(delta));
    }
    // same-side distances are even, so "< δ" equals "≤ δ - 2"
    let reach = match mode {
        HomophilyMode::Inclusive => delta,
        HomophilyMode::Strict => delta - 2,
    };
    let user_counts = side_counts(graph, reach, exact);
    let item_counts = side_counts(&graph.transposed(), reach, exact);
    let ratio = |counts: &[u64], degs: &[usize]| -> Vec<f64> {
        counts
            .iter()
            .zip(degs)
            .map(|(&c, &d)| if d == 0 { 1.0 } else { c as f64 / (d * d) as f64 })
            .collect()
    };
    Ok(HomophilyScores {
        user_scores: ratio(&user_counts, graph.user_degrees()),
        item_scores: ratio(&item_counts, graph.item_degrees()),
        user_counts,
        item_counts,
        user_degrees: graph.user_degrees().to_vec(),
        item_degrees: graph.item_degrees().to_vec(),
        delta,
        mode,
        exact: exact || reach <= 2,
    })
}

/// Whether users and items share one min/max when mapping ratios to exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingScope {
    #[default]
    PerSide,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgfConfig {
    /// Shared-filter anchor.
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(default)]
    pub scope: MappingScope,
}

impl IgfConfig {
    pub fn new(beta: f64, beta1: f64, beta2: f64) -> Result<Self> {
        let cfg = IgfConfig {
            beta,
            beta1,
            beta2,
            scope: MappingScope::PerSide,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every node uses `beta`.
    pub fn shared(beta: f64) -> Self {
        IgfConfig {
            beta,
            beta1: beta,
            beta2: beta,
            scope: MappingScope::PerSide,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 <= self.beta && self.beta <= self.beta2) {
            return Err(Error::config("beta1", "need beta1 <= beta <= beta2"));
        }
        if !(self.beta1.is_finite() && self.beta2.is_finite()) {
            return Err(Error::config("beta2", "must be finite"));
        }
        Ok(())
    }
}

/// Per-node filter exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IgfProfile {
    pub user_beta: Vec<f64>,
    pub item_beta: Vec<f64>,
}

fn score_range(scores: &[f64], degs: &[usize]) -> Option<(f64, f64)> {
    let mut range: Option<(f64, f64)> = None;
    for (&s, &d) in scores.iter().zip(degs) {
        if d == 0 {
            continue;
        }
        range = Some(match range {
            None => (s, s),
            Some((lo, hi)) => (lo.min(s), hi.max(s)),
        });
    }
    range
}

fn map_side(scores: &[f64], degs: &[usize], range: Option<(f64, f64)>, cfg: &IgfConfig) -> Vec<f64> {
    scores
        .iter()
        .zip(degs)
        .map(|(&s, &d)| match range {
            Some((lo, hi)) if d > 0 && hi > lo => {
                let t = (s - lo) / (hi - lo);
                (cfg.beta1 + t * (cfg.beta2 - cfg.beta1)).clamp(cfg.beta1, cfg.beta2)
            }
            _ => cfg.beta,
        })
        .collect()
}

/// Linear map from homophilic ratio onto `[β₁, β₂]`: the smallest ratio on a
/// side goes to `β₁`, the largest to `β₂`. A side with a single distinct
/// ratio, and isolated nodes, get the anchor `β`.
pub fn map_homo_to_beta(scores: &HomophilyScores, cfg: &IgfConfig) -> IgfProfile {
    let ur = score_range(&scores.user_scores, &scores.user_degrees);
    let ir = score_range(&scores.item_scores, &scores.item_degrees);
    let (ur, ir) = match cfg.scope {
        MappingScope::PerSide => (ur, ir),
        MappingScope::Global => {
            let merged = match (ur, ir) {
                (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
                (a, b) => a.or(b),
            };
            (merged, merged)
        }
    };
    IgfProfile {
        user_beta: map_side(&scores.user_scores, &scores.user_degrees, ur, cfg),
        item_beta: map_side(&scores.item_scores, &scores.item_degrees, ir, cfg),
    }
}

impl IgfProfile {
    /// Every node uses the same exponent.
    pub fn uniform(n_users: usize, n_items: usize, beta: f64) -> Self {
        IgfProfile {
            user_beta: vec![beta; n_users],
            item_beta: vec![beta; n_items],
        }
    }
}

/// CSV `node_type,node_id,score,beta`.
pub fn write_homophily_csv<W: Write>(w: W, scores: &HomophilyScores, profile: &IgfProfile) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["node_type", "node_id", "score", "beta"])?;
    for (u, (s, b)) in scores.user_scores.iter().zip(&profile.user_beta).enumerate() {
        wtr.write_record(["user".to_string(), u.to_string(), s.to_string(), b.to_string()])?;
    }
    for (i, (s, b)) in scores.item_scores.iter().zip(&profile.item_beta).enumerate() {
        wtr.write_record(["item".to_string(), i.to_string(), s.to_string(), b.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn monomial_examples() {
        let f = FilterFamily::Monomial { beta: 0.0 };
        assert_eq!(f.eval(&[1.0, 0.3, 0.0]), vec![1.0, 1.0, 1.0]);
        let f = FilterFamily::Monomial { beta: 2.0 };
        assert!(close(&f.eval(&[1.0, 0.5, 0.1]), &[1.0, 0.25, 0.01], 1e-15));
        assert_eq!(monomial(0.0, 1.5), 0.0);
    }

    #[test]
    fn markov_example() {
        let f = FilterFamily::Markov { order: 2 };
        assert!(close(&f.eval(&[1.0, 0.5]), &[1.0, 1.75 / 3.0], 1e-15));
    }

    #[test]
    fn exponential_is_one_at_top() {
        let f = FilterFamily::Exponential { beta: 3.0 };
        let w = f.eval(&[1.0, 0.5]);
        assert_eq!(w[0], 1.0);
        assert!((w[1] - (-1.5f64).exp()).abs() < 1e-15);
    }

    /// Closed-form Jacobi polynomial
    /// `P_n(x) = Σ_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)`.
    fn jacobi_explicit(n: usize, a: f64, b: f64, x: f64) -> f64 {
        let binom = |top: f64, k: usize| (1..=k).fold(1.0, |acc, t| acc * (top - k as f64 + t as f64) / t as f64);
        (0..=n)
            .map(|s| {
                binom(n as f64 + a, n - s)
                    * binom(n as f64 + b, s)
                    * ((x - 1.0) / 2.0).powi(s as i32)
                    * ((x + 1.0) / 2.0).powi((n - s) as i32)
            })
            .sum()
    }

    #[test]
    fn jacobi_recurrence_matches_closed_form() {
        for &(a, b) in &[(0.0, 0.0), (1.0, 0.5), (-0.5, 2.0), (0.3, -0.7)] {
            for &x in &[0.0, 0.2, 0.55, 1.0] {
                for order in 0..7 {
                    let expect: f64 = (0..=order).map(|n| jacobi_explicit(n, a, b, x)).sum();
                    let got = jacobi_sum(a, b, order, x);
                    assert!((got - expect).abs() < 1e-10 * expect.abs().max(1.0), "a={a} b={b} x={x} L={order}");
                }
            }
        }
        // Legendre P_2(0.5) = -0.125
        assert!((jacobi_explicit(2, 0.0, 0.0, 0.5) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn jacobi_clamped_non_negative() {
        let f = FilterFamily::Jacobi { a: 1.0, b: 1.0, order: 3 };
        assert!(f.eval(&[1.0, 0.6, 0.3, 0.0, 0.9]).iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn filter_validation() {
        assert!(FilterFamily::Monomial { beta: -1.0 }.validate().is_err());
        assert!(FilterFamily::Markov { order: 0 }.validate().is_err());
        assert!(FilterFamily::Jacobi { a: -1.0, b: 0.0, order: 2 }.validate().is_err());
        assert!(FilterFamily::Jacobi { a: -0.5, b: 0.0, order: 2 }.validate().is_ok());
    }

    #[test]
    fn single_item_user_has_ratio_one() {
        let g = BipartiteGraph::from_pairs(2, 2, &[(0, 0), (1, 0), (1, 1)]).unwrap();
        let h = homophilic_ratio_all(&g, 2, HomophilyMode::Inclusive).unwrap();
        assert_eq!(h.user_scores[0], 1.0);
        // user 1: items 0 and 1 share no other user → only diagonal pairs
        assert_eq!(h.user_counts[1], 2);
        assert_eq!(h.user_scores[1], 0.5);
    }

    #[test]
    fn full_square_is_fully_homophilic() {
        let g = BipartiteGraph::from_pairs(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let h = homophilic_ratio_all(&g, 2, HomophilyMode::Inclusive).unwrap();
        assert_eq!(h.user_scores, vec![1.0, 1.0]);
        assert_eq!(h.item_scores, vec![1.0, 1.0]);
        // strict δ=2 keeps only diagonal pairs
        let h = homophilic_ratio_all(&g, 2, HomophilyMode::Strict).unwrap();
        assert_eq!(h.user_scores, vec![0.5, 0.5]);
    }

    #[test]
    fn odd_delta_rejected() {
        let g = BipartiteGraph::from_pairs(1, 1, &[(0, 0)]).unwrap();
        assert!(matches!(homophilic_ratio_all(&g, 3, HomophilyMode::Inclusive), Err(Error::OddDelta(3))));
        assert!(matches!(homophilic_ratio_all(&g, 0, HomophilyMode::Inclusive), Err(Error::OddDelta(0))));
    }

    #[test]
    fn path_graph_needs_longer_reach() {
        // u0 - i0 - u1 - i1 - u2 - i2, plus u0 - i2: u0's items i0, i2 are 4 apart without u0
        let g = BipartiteGraph::from_pairs(3, 3, &[(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2)]).unwrap();
        let h2 = homophilic_ratio_all(&g, 2, HomophilyMode::Inclusive).unwrap();
        let h4 = homophilic_ratio_all(&g, 4, HomophilyMode::Inclusive).unwrap();
        assert_eq!(h2.user_counts[0], 2);
        assert_eq!(h4.user_counts[0], 4);
        let s6 = homophilic_ratio_all(&g, 6, HomophilyMode::Strict).unwrap();
        assert_eq!(s6.user_counts, h4.user_counts);
    }

    #[test]
    fn mapping_examples() {
        let scores = HomophilyScores {
            user_scores: vec![0.2, 0.5, 0.8],
            item_scores: vec![0.4, 0.4],
            user_counts: vec![],
            item_counts: vec![],
            user_degrees: vec![3, 3, 3],
            item_degrees: vec![2, 2],
            delta: 2,
            mode: HomophilyMode::Inclusive,
            exact: true,
        };
        let p = map_homo_to_beta(&scores, &IgfConfig::new(2.0, 1.0, 3.0).unwrap());
        assert!(close(&p.user_beta, &[1.0, 2.0, 3.0], 1e-12));
        assert_eq!(p.item_beta, vec![2.0, 2.0]);
        let p = map_homo_to_beta(&scores, &IgfConfig::shared(1.5));
        assert!(p.user_beta.iter().chain(&p.item_beta).all(|&b| b == 1.5));
        let mut global = IgfConfig::new(2.0, 1.0, 3.0).unwrap();
        global.scope = MappingScope::Global;
        let p = map_homo_to_beta(&scores, &global);
        assert!(close(&p.item_beta, &[1.0 + 2.0 * (0.2 / 0.6), 1.0 + 2.0 * (0.2 / 0.6)], 1e-12));
        assert!(IgfConfig::new(1.0, 1.5, 2.0).is_err());
    }

    #[test]
    fn homophily_csv() {
        let g = BipartiteGraph::from_pairs(1, 1, &[(0, 0)]).unwrap();
        let h = homophilic_ratio_all(&g, 2, HomophilyMode::Inclusive).unwrap();
        let p = map_homo_to_beta(&h, &IgfConfig::shared(1.0));
        let mut buf = Vec::new();
        write_homophily_csv(&mut buf, &h, &p).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "node_type,node_id,score,beta\nuser,0,1,1\nitem,0,1,1\n");
    }

    proptest! {
        #[test]
        fn positive_families_are_monotone(beta in 0.01f64..5.0, order in 1usize..6, xs in prop::collection::vec(0.0f64..=1.0, 2..20)) {
            let mut xs = xs;
            xs.sort_by(|a, b| b.total_cmp(a));
            for f in [FilterFamily::Monomial { beta }, FilterFamily::Exponential { beta }, FilterFamily::Markov { order }] {
                let w = f.eval(&xs);
                prop_assert!(w.windows(2).all(|p| p[0] >= p[1]), "{:?}", f);
            }
        }

        #[test]
        fn profile_within_range(scores in prop::collection::vec(0.01f64..=1.0, 1..30), b1 in 0.0f64..2.0, w1 in 0.0f64..1.0, w2 in 0.0f64..1.0) {
            let beta = b1 + w1;
            let b2 = beta + w2;
            let n = scores.len();
            let h = HomophilyScores {
                user_scores: scores.clone(), item_scores: scores.clone(),
                user_counts: vec![], item_counts: vec![],
                user_degrees: vec![1; n], item_degrees: vec![1; n],
                delta: 2, mode: HomophilyMode::Inclusive, exact: true,
            };
            let p = map_homo_to_beta(&h, &IgfConfig::new(beta, b1, b2).unwrap());
            for &b in p.user_beta.iter().chain(&p.item_beta) {
                prop_assert!(b >= b1 - 1e-12 && b <= b2 + 1e-12);
            }
            // scaling all scores keeps the exponent ordering
            let mut scaled = h.clone();
            scaled.user_scores.iter_mut().for_each(|s| *s *= 0.37);
            let q = map_homo_to_beta(&scaled, &IgfConfig::new(beta, b1, b2).unwrap());
            for a in 0..n {
                for b in 0..n {
                    if p.user_beta[a] < p.user_beta[b] - 1e-9 {
                        prop_assert!(q.user_beta[a] <= q.user_beta[b]);
                    }
                }
            }
        }
    }
}
