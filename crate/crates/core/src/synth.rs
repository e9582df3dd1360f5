//! Random bipartite interaction graphs for oracles, benches and diagnostics.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Pair;

/// Degree-distribution exponent used by default.
pub const DEFAULT_EXPONENT: f64 = 2.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSpec {
    pub n_users: usize,
    pub n_items: usize,
    /// Target number of distinct edges before connectivity repair.
    pub n_edges: usize,
    pub exponent: f64,
    /// Latent groups; `1` disables community structure.
    pub communities: usize,
    /// Probability that an edge stays inside the user's community.
    pub affinity: f64,
    pub seed: u64,
}

impl PowerLawSpec {
    pub fn new(n_users: usize, n_items: usize, n_edges: usize, seed: u64) -> Self {
        PowerLawSpec {
            n_users,
            n_items,
            n_edges,
            exponent: DEFAULT_EXPONENT,
            communities: 1,
            affinity: 0.0,
            seed,
        }
    }

    pub fn with_communities(mut self, communities: usize, affinity: f64) -> Self {
        self.communities = communities.max(1);
        self.affinity = affinity;
        self
    }
}

/// Chung–Lu style weights `w_r ∝ (r + 1)^{-1/(γ-1)}` whose expected degrees
/// follow a power law with exponent `γ`, shuffled over node ids.
fn power_law_weights(n: usize, exponent: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gamma = exponent.max(1.01);
    let mut w: Vec<f64> = (0..n).map(|r| ((r + 1) as f64).powf(-1.0 / (gamma - 1.0))).collect();
    for k in (1..n).rev() {
        let j = rng.random_range(0..=k);
        w.swap(k, j);
    }
    w
}

/// Samples a bipartite graph with heavy-tailed degrees on both sides and
/// attaches every isolated node to a random node of the other side.
/// Returned pairs are sorted and distinct.
pub fn power_law_bipartite(spec: &PowerLawSpec) -> Vec<Pair> {
    let PowerLawSpec {
        n_users,
        n_items,
        n_edges,
        exponent,
        communities,
        affinity,
        seed,
    } = *spec;
    assert!(n_users > 0 && n_items > 0, "graph must have nodes on both sides");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wu = power_law_weights(n_users, exponent, &mut rng);
    let wi = power_law_weights(n_items, exponent, &mut rng);
    let user_dist = WeightedIndex::new(&wu).expect("positive weights");
    let item_dist = WeightedIndex::new(&wi).expect("positive weights");

    let c = communities.max(1);
    let user_group = |u: usize| u % c;
    let group_items: Vec<Vec<usize>> = (0..c).map(|g| (g..n_items).step_by(c).collect()).collect();
    let group_dists: Vec<Option<WeightedIndex<f64>>> = group_items
        .iter()
        .map(|items| {
            let w: Vec<f64> = items.iter().map(|&i| wi[i]).collect();
            WeightedIndex::new(&w).ok()
        })
        .collect();

    let capacity = n_users * n_items;
    let target = n_edges.min(capacity);
    let mut edges = HashSet::with_capacity(target);
    let max_attempts = target.saturating_mul(50).max(1000);
    let mut attempts = 0;
    while edges.len() < target && attempts < max_attempts {
        attempts += 1;
        let u = rng.sample(&user_dist);
        let g = user_group(u);
        let i = match &group_dists[g] {
            Some(d) if c > 1 && rng.random::<f64>() < affinity => group_items[g][rng.sample(d)],
            _ => rng.sample(&item_dist),
        };
        edges.insert((u, i));
    }

    let mut user_seen = vec![false; n_users];
    let mut item_seen = vec![false; n_items];
    for &(u, i) in &edges {
        user_seen[u] = true;
        item_seen[i] = true;
    }
    for u in 0..n_users {
        if !user_seen[u] {
            let i = rng.random_range(0..n_items);
            edges.insert((u, i));
            item_seen[i] = true;
        }
    }
    for i in 0..n_items {
        if !item_seen[i] {
            edges.insert((rng.random_range(0..n_users), i));
        }
    }
    let mut out: Vec<Pair> = edges.into_iter().collect();
    out.sort_unstable();
    out
}

/// Uniform random bipartite graph where each pair is present with probability
/// `density`, with the same isolated-node repair.
pub fn uniform_bipartite(n_users: usize, n_items: usize, density: f64, seed: u64) -> Vec<Pair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut user_seen = vec![false; n_users];
    let mut item_seen = vec![false; n_items];
    for u in 0..n_users {
        for i in 0..n_items {
            if rng.random::<f64>() < density {
                edges.push((u, i));
                user_seen[u] = true;
                item_seen[i] = true;
            }
        }
    }
    for u in 0..n_users {
        if !user_seen[u] {
            let i = rng.random_range(0..n_items);
            edges.push((u, i));
            item_seen[i] = true;
        }
    }
    for i in 0..n_items {
        if !item_seen[i] {
            edges.push((rng.random_range(0..n_users), i));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Splits each user's pairs into train/test with the given train share,
/// keeping at least one train pair per user.
pub fn holdout(pairs: &[Pair], train_ratio: f64, seed: u64) -> (Vec<Pair>, Vec<Pair>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut start = 0;
    while start < pairs.len() {
        let u = pairs[start].0;
        let mut end = start;
        while end < pairs.len() && pairs[end].0 == u {
            end += 1;
        }
        let mut group: Vec<Pair> = pairs[start..end].to_vec();
        for k in (1..group.len()).rev() {
            let j = rng.random_range(0..=k);
            group.swap(k, j);
        }
        let n_train = ((train_ratio * group.len() as f64).round() as usize).clamp(1, group.len());
        train.extend_from_slice(&group[..n_train]);
        test.extend_from_slice(&group[n_train..]);
        start = end;
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}
