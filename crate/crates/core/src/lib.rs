//! Training-free spectral collaborative filtering.
//!
//! The pipeline renormalizes the user–item interaction matrix, takes a
//! truncated SVD, and scores items with per-node monomial filters on the
//! normalized singular values plus an all-frequency `R̃R̃ᵀR̃` term. No
//! parameters are learned; every step is closed form.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod filters;
pub mod graph;
pub mod model;
pub mod par;
pub mod sparse;
pub mod spectral;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
