//! Semi-supervised node classification that learns its own graph.
//!
//! When no graph is given, a cosine kNN graph built from node features is the
//! usual fallback, but such graphs are noisy. This crate jointly learns a
//! graph and a two-layer GCN classifier: a label-affinity model predicts, for
//! every node, a distribution over the labeled nodes; a graph sampled from
//! that distribution (via Gumbel-softmax) is convexly combined with a cropped
//! kNN graph, and the combination feeds the GCN. Classifier and affinity
//! losses are minimized together with Adam.
//!
//! The crate is organized around the pipeline:
//!
//! - [`numerics`]: dense/sparse matrices, activations, losses, Adam.
//! - [`data`]: dataset loading, splits, boosted features, synthetic data.
//! - [`graphs`]: kNN construction, cropping, combination, normalization,
//!   homophily and noise-injection tools.
//! - [`affinity`]: the label-affinity model, its targets and loss, and
//!   Gumbel-softmax graph sampling.
//! - [`model`]: the end-to-end forward pass, joint loss, and hand-derived
//!   reverse-mode gradients.
//! - [`trainer`]: full-batch training with early stopping, multi-seed
//!   evaluation, and random-search sweeps.
//! - [`baseline`]: a plain GCN on an uncropped kNN graph for comparison.
//! - [`analysis`]: bad-neighbor ratio, weighted homophily, noise curves, and
//!   affinity-weight sweeps.
//! - [`cli`]: the `glam` command-line interface.
//!
//! Runnable walkthroughs for each capability live in `examples/`; start with
//! `end_to_end.rs`.

pub mod affinity;
pub mod analysis;
pub mod baseline;
pub mod cli;
pub mod data;
pub mod graphs;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod trainer;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum GlamError {
    /// Shapes of two operands do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A value is outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// An operation was called in the wrong order or with stale state.
    #[error("invalid state: {0}")]
    State(String),
    /// A dataset or graph file could not be parsed.
    #[error("{file}:{line}: {message}")]
    Load {
        file: String,
        line: usize,
        message: String,
    },
    /// Training produced a non-finite loss.
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GlamError>;

impl GlamError {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        GlamError::Dimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        GlamError::Parameter(msg.into())
    }
}
