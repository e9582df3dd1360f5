//! Bipartite interaction graph and generalized degree normalization.
//!
//! The normalized interaction matrix has entries `(d_u + α)^ε (d_i + α)^ε`
//! on every observed pair. `α = 0, ε = -0.5` recovers the usual symmetric
//! normalization `D_U^{-1/2} R D_I^{-1/2}`; larger `α` or `ε` shift weight
//! toward high-degree nodes, which sharpens the singular spectrum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{InteractionDataset, ItemId, Pair, UserId};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Largest node count (or matrix side) handled by dense oracles.
pub const DENSE_CAP: usize = 2_000;

/// Binary user×item matrix in both orientations plus degree vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    row_major: CsrMatrix,
    col_major: CsrMatrix,
    user_degrees: Vec<usize>,
    item_degrees: Vec<usize>,
}

impl BipartiteGraph {
    /// Graph of the train split.
    pub fn build(dataset: &InteractionDataset) -> Result<Self> {
        Self::from_pairs(dataset.n_users, dataset.n_items, &dataset.train)
    }

    pub fn from_pairs(n_users: usize, n_items: usize, pairs: &[Pair]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyTrainSplit);
        }
        let row_major = CsrMatrix::from_pattern(n_users, n_items, pairs);
        let col_major = row_major.transpose();
        let user_degrees = (0..n_users).map(|u| row_major.row_nnz(u)).collect();
        let item_degrees = (0..n_items).map(|i| col_major.row_nnz(i)).collect();
        Ok(BipartiteGraph {
            row_major,
            col_major,
            user_degrees,
            item_degrees,
        })
    }

    pub fn n_users(&self) -> usize {
        self.row_major.n_rows()
    }

    pub fn n_items(&self) -> usize {
        self.row_major.n_cols()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_users() + self.n_items()
    }

    pub fn n_edges(&self) -> usize {
        self.row_major.nnz()
    }

    pub fn user_degrees(&self) -> &[usize] {
        &self.user_degrees
    }

    pub fn item_degrees(&self) -> &[usize] {
        &self.item_degrees
    }

    /// Sorted items of user `u`.
    pub fn user_items(&self, u: UserId) -> &[ItemId] {
        self.row_major.row(u).0
    }

    /// Sorted users of item `i`.
    pub fn item_users(&self, i: ItemId) -> &[UserId] {
        self.col_major.row(i).0
    }

    pub fn row_major(&self) -> &CsrMatrix {
        &self.row_major
    }

    pub fn col_major(&self) -> &CsrMatrix {
        &self.col_major
    }

    /// Smallest and largest degree over non-isolated nodes of both sides.
    /// Isolated nodes hold an all-zero row or column and do not touch the spectrum.
    pub fn degree_range(&self) -> (usize, usize) {
        let degs = self
            .user_degrees
            .iter()
            .chain(&self.item_degrees)
            .copied()
            .filter(|&d| d > 0);
        let (mut lo, mut hi) = (usize::MAX, 0);
        for d in degs {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }

    /// Same graph with users and items swapped.
    pub fn transposed(&self) -> Self {
        BipartiteGraph {
            row_major: self.col_major.clone(),
            col_major: self.row_major.clone(),
            user_degrees: self.item_degrees.clone(),
            item_degrees: self.user_degrees.clone(),
        }
    }
}

/// Degree renormalization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2NConfig {
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for G2NConfig {
    fn default() -> Self {
        G2NConfig {
            alpha: 0.0,
            epsilon: -0.5,
        }
    }
}

impl G2NConfig {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        let cfg = G2NConfig { alpha, epsilon };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha", "must be finite and >= 0"));
        }
        if !(-0.5..=0.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon", "must lie in [-0.5, 0]"));
        }
        Ok(())
    }

    /// Per-node weight `(d + α)^ε`.
    pub fn weight(&self, degree: usize) -> f64 {
        if self.epsilon == 0.0 {
            return 1.0;
        }
        (degree as f64 + self.alpha).powf(self.epsilon)
    }
}

/// `R̃ = (D_U + αI)^ε R (D_I + αI)^ε`, stored in both orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    values: CsrMatrix,
    transposed: CsrMatrix,
    config: G2NConfig,
}

impl NormalizedMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.values
    }

    pub fn transposed(&self) -> &CsrMatrix {
        &self.transposed
    }

    pub fn config(&self) -> G2NConfig {
        self.config
    }

    pub fn n_users(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_items(&self) -> usize {
        self.values.n_cols()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.frobenius_sq()
    }

    /// Wraps an arbitrary weighted matrix, e.g. a hand-built test input.
    pub fn from_matrix(values: CsrMatrix, config: G2NConfig) -> Self {
        let transposed = values.transpose();
        NormalizedMatrix {
            values,
            transposed,
            config,
        }
    }
}

/// Applies the generalized normalization to the interaction matrix.
pub fn g2n_normalize(graph: &BipartiteGraph, cfg: &G2NConfig) -> NormalizedMatrix {
    let wu: Vec<f64> = graph.user_degrees.iter().map(|&d| cfg.weight(d)).collect();
    let wi: Vec<f64> = graph.item_degrees.iter().map(|&d| cfg.weight(d)).collect();
    let values = graph.row_major.map_values(|u, i, _| wu[u] * wi[i]);
    NormalizedMatrix::from_matrix(values, *cfg)
}

/// Dense `[[0, R̃], [R̃ᵀ, 0]]`. Errors above [`DENSE_CAP`] nodes.
pub fn assemble_adjacency(norm: &NormalizedMatrix) -> Result<DMatrix<f64>> {
    let (nu, ni) = (norm.n_users(), norm.n_items());
    let n = nu + ni;
    if n > DENSE_CAP {
        return Err(Error::SizeCap {
            requested: n,
            cap: DENSE_CAP,
        });
    }
    let mut a = DMatrix::zeros(n, n);
    for (u, i, w) in norm.values.iter() {
        a[(u, nu + i)] = w;
        a[(nu + i, u)] = w;
    }
    Ok(a)
}

/// Sparse form of the same block adjacency; no size cap.
pub fn adjacency_sparse(norm: &NormalizedMatrix) -> CsrMatrix {
    let nu = norm.n_users();
    let n = nu + norm.n_items();
    let mut triplets = Vec::with_capacity(2 * norm.values.nnz());
    for (u, i, w) in norm.values.iter() {
        triplets.push((u, nu + i, w));
        triplets.push((nu + i, u, w));
    }
    CsrMatrix::from_triplets(n, n, &triplets, false)
}
