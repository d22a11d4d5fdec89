//! The label-affinity model: a two-layer network mapping every node to a
//! distribution over the labeled nodes, plus the Gumbel-softmax machinery
//! that turns those distributions into a graph.

use crate::data::Features;
use crate::graphs::SparseGraph;
use crate::numerics::{
    cross_entropy_rows, dropout_with_mask, relu, softmax_rows, DenseMatrix, SparseMatrix,
};
use crate::{GlamError, Result};
use rand::Rng;
use std::collections::HashMap;

/// Below this temperature the soft Gumbel-softmax Jacobian degenerates, so
/// the backward pass switches to the straight-through estimator (identity on
/// the chosen coordinate).
pub const SOFT_BACKWARD_MIN_TAU: f64 = 1e-4;

/// Two-layer affinity network Z = SoftMax(relu(X W1) W2). Columns of the
/// output correspond to labeled nodes in `order`.
#[derive(Debug, Clone)]
pub struct AffinityModel {
    pub w1: DenseMatrix,
    pub w2: DenseMatrix,
    /// Labeled node id per output column; a permutation of the train set.
    pub order: Vec<usize>,
    pub dropout_input: f64,
    pub dropout_hidden: f64,
    col_of: HashMap<usize, usize>,
}

impl AffinityModel {
    pub fn new(
        num_features: usize,
        hidden: usize,
        order: Vec<usize>,
        dropout_input: f64,
        dropout_hidden: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let col_of = order.iter().enumerate().map(|(c, &n)| (n, c)).collect();
        AffinityModel {
            w1: DenseMatrix::glorot_uniform(num_features, hidden, rng),
            w2: DenseMatrix::glorot_uniform(hidden, order.len(), rng),
            order,
            dropout_input,
            dropout_hidden,
            col_of,
        }
    }

    pub fn from_weights(w1: DenseMatrix, w2: DenseMatrix, order: Vec<usize>) -> Result<Self> {
        if w2.cols() != order.len() {
            return Err(GlamError::dim(format!(
                "W2 has {} columns for {} labeled nodes",
                w2.cols(),
                order.len()
            )));
        }
        let col_of = order.iter().enumerate().map(|(c, &n)| (n, c)).collect();
        Ok(AffinityModel {
            w1,
            w2,
            order,
            dropout_input: 0.0,
            dropout_hidden: 0.0,
            col_of,
        })
    }

    pub fn num_labeled(&self) -> usize {
        self.order.len()
    }

    /// Column index of a labeled node, if any.
    pub fn column_of(&self, node: usize) -> Option<usize> {
        self.col_of.get(&node).copied()
    }
}

/// Input features after (possible) dropout. Input gradients are never
/// needed, so no mask is kept; the dropped matrix itself feeds the weight
/// gradient.
pub enum DroppedInput<'a> {
    /// No dropout applied; borrow the shared features.
    Shared(&'a Features),
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl DroppedInput<'_> {
    pub fn matmul(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            DroppedInput::Shared(f) => f.matmul(w),
            DroppedInput::Dense(d) => d.matmul(w),
            DroppedInput::Sparse(s) => s.matmul_dense(w),
        }
    }

    pub fn transpose_matmul(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            DroppedInput::Shared(f) => f.transpose_matmul(g),
            DroppedInput::Dense(d) => d.transpose_matmul(g),
            DroppedInput::Sparse(s) => s.transpose_matmul_dense(g),
        }
    }
}

/// Applies input dropout in whichever representation is cheapest.
pub fn drop_input<'a>(
    x: &'a Features,
    rate: f64,
    rng: &mut impl Rng,
    training: bool,
) -> Result<DroppedInput<'a>> {
    if !training || rate == 0.0 {
        return Ok(DroppedInput::Shared(x));
    }
    if !(0.0..1.0).contains(&rate) {
        return Err(GlamError::param(format!("dropout rate {rate} not in [0,1)")));
    }
    match x.realize() {
        crate::data::Realized::Sparse(s) => {
            let scale = 1.0 / (1.0 - rate);
            let mut entries = Vec::with_capacity(s.nnz());
            for (r, c, v) in s.iter() {
                let kept = rng.random::<f64>() >= rate;
                entries.push((r, c, if kept { v * scale } else { 0.0 }));
            }
            Ok(DroppedInput::Sparse(SparseMatrix::from_coo(
                s.rows(),
                s.cols(),
                &entries,
            )?))
        }
        crate::data::Realized::Dense(d) => {
            let (dropped, _) = dropout_with_mask(d, rate, rng, true)?;
            Ok(DroppedInput::Dense(dropped))
        }
    }
}

/// Intermediates of one affinity forward pass, kept for the backward pass.
pub struct AffinityCache<'a> {
    pub x_in: DroppedInput<'a>,
    /// Hidden activations after relu and dropout (n x h).
    pub hidden: DenseMatrix,
    pub mask_hidden: Option<DenseMatrix>,
    /// Row-stochastic output (n x l); labeled self-columns are exactly 0.
    pub z: DenseMatrix,
}

/// Forward pass with cached intermediates. Labeled node i's own column is
/// masked before the softmax so self-affinity is impossible.
pub fn affinity_forward_cached<'a>(
    model: &AffinityModel,
    x: &'a Features,
    training: bool,
    rng: &mut impl Rng,
) -> Result<AffinityCache<'a>> {
    if x.cols() != model.w1.rows() {
        return Err(GlamError::dim(format!(
            "features have {} columns, W1 expects {}",
            x.cols(),
            model.w1.rows()
        )));
    }
    let x_in = drop_input(x, model.dropout_input, rng, training)?;
    let a1 = x_in.matmul(&model.w1)?;
    let h = relu(&a1);
    let (hidden, mask_hidden) = dropout_with_mask(&h, model.dropout_hidden, rng, training)?;
    let mut logits = hidden.matmul(&model.w2)?;
    for (col, &node) in model.order.iter().enumerate() {
        logits.set(node, col, f64::NEG_INFINITY);
    }
    let z = softmax_rows(&logits);
    Ok(AffinityCache {
        x_in,
        hidden,
        mask_hidden,
        z,
    })
}

/// Z = SoftMax(relu(X W1) W2) with self-affinity masking; rows are valid
/// distributions.
pub fn affinity_forward(
    model: &AffinityModel,
    x: &Features,
    training: bool,
    rng: &mut impl Rng,
) -> Result<DenseMatrix> {
    Ok(affinity_forward_cached(model, x, training, rng)?.z)
}

/// Row-normalized same-label targets over the labeled set.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityTargets {
    /// l x l, zero diagonal, rows sum to 1 or exactly 0.
    pub matrix: DenseMatrix,
    /// Rows excluded from the loss (classes with a single labeled node).
    pub active: Vec<bool>,
    /// Labeled node per row/column, ascending.
    pub order: Vec<usize>,
}

/// Builds y^A: row i puts uniform mass on same-class labeled nodes j != i.
/// Rows for singleton classes stay all-zero and are flagged inactive.
pub fn build_affinity_targets(train: &[usize], labels: &[usize]) -> AffinityTargets {
    let mut order: Vec<usize> = train.to_vec();
    order.sort_unstable();
    let l = order.len();
    let mut matrix = DenseMatrix::zeros(l, l);
    let mut active = vec![false; l];
    for i in 0..l {
        let mut count = 0usize;
        for j in 0..l {
            if i != j && labels[order[i]] == labels[order[j]] {
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        active[i] = true;
        let mass = 1.0 / count as f64;
        for j in 0..l {
            if i != j && labels[order[i]] == labels[order[j]] {
                matrix.set(i, j, mass);
            }
        }
    }
    AffinityTargets {
        matrix,
        active,
        order,
    }
}

/// Sum of cross-entropies between labeled rows of Z and their targets,
/// skipping inactive rows.
pub fn affinity_loss(z: &DenseMatrix, targets: &AffinityTargets) -> Result<f64> {
    let l = targets.order.len();
    if z.rows() < l || z.cols() != l {
        return Err(GlamError::dim(format!(
            "Z is {}x{}, targets need >= {l} rows and exactly {l} columns",
            z.rows(),
            z.cols()
        )));
    }
    let mut gathered = DenseMatrix::zeros(l, l);
    for (pos, &node) in targets.order.iter().enumerate() {
        gathered.row_mut(pos).copy_from_slice(z.row(node));
    }
    let rows: Vec<usize> = (0..l).filter(|&p| targets.active[p]).collect();
    cross_entropy_rows(&gathered, &targets.matrix, &rows)
}

/// How the affinity graph is drawn from Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SampleMode {
    /// Gumbel-perturbed argmax (hard one-hot).
    Sample,
    /// Deterministic argmax, used at evaluation.
    Argmax,
}

/// Cached draw needed to backpropagate through the sampled graph.
#[derive(Debug, Clone)]
pub struct AffinitySample {
    pub tau: f64,
    /// Chosen column per row; `usize::MAX` marks rows with no admissible
    /// column (labeled node with l = 1).
    pub chosen: Vec<usize>,
    /// Relaxed sample rows from the same noise, cached when tau is large
    /// enough for the soft Jacobian to be usable.
    pub soft: Option<DenseMatrix>,
}

pub(crate) enum NoiseSource<'a, R: Rng> {
    Rng(&'a mut R),
    Frozen(&'a DenseMatrix),
}

fn gumbel(u: f64) -> f64 {
    -(-(u.max(1e-300)).ln()).ln()
}

pub(crate) fn sample_rows<R: Rng>(
    z: &DenseMatrix,
    tau: f64,
    mode: SampleMode,
    noise: NoiseSource<'_, R>,
    want_soft: bool,
) -> Result<AffinitySample> {
    if tau <= 0.0 {
        return Err(GlamError::param(format!("temperature {tau} must be > 0")));
    }
    let (n, l) = (z.rows(), z.cols());
    let noise_matrix = match (mode, noise) {
        (SampleMode::Argmax, _) => None,
        (SampleMode::Sample, NoiseSource::Frozen(m)) => {
            if m.rows() != n || m.cols() != l {
                return Err(GlamError::dim("frozen noise shape mismatch"));
            }
            Some(m.clone())
        }
        (SampleMode::Sample, NoiseSource::Rng(rng)) => {
            let mut m = DenseMatrix::zeros(n, l);
            for v in m.values_mut() {
                *v = gumbel(rng.random::<f64>());
            }
            Some(m)
        }
    };
    let keep_soft = want_soft && mode == SampleMode::Sample && tau >= SOFT_BACKWARD_MIN_TAU;
    let mut soft = keep_soft.then(|| DenseMatrix::zeros(n, l));
    let mut chosen = vec![usize::MAX; n];
    let mut scores = vec![0.0f64; l];
    for i in 0..n {
        let zrow = z.row(i);
        let mut any = false;
        for (j, &zv) in zrow.iter().enumerate() {
            scores[j] = if zv > 0.0 {
                any = true;
                let g = noise_matrix.as_ref().map_or(0.0, |m| m.get(i, j));
                zv.ln() + g
            } else {
                f64::NEG_INFINITY
            };
        }
        if !any {
            continue;
        }
        let mut best = 0usize;
        for (j, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = j;
            }
        }
        chosen[i] = best;
        if let Some(sm) = soft.as_mut() {
            let row = sm.row_mut(i);
            for (j, &s) in scores.iter().enumerate() {
                row[j] = if s == f64::NEG_INFINITY { s } else { s / tau };
            }
            crate::numerics::softmax_row_in_place(row);
        }
    }
    Ok(AffinitySample { tau, chosen, soft })
}

pub(crate) fn hard_affinity_graph(
    n: usize,
    order: &[usize],
    sample: &AffinitySample,
    clip: bool,
) -> Result<SparseGraph> {
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    for (i, &c) in sample.chosen.iter().enumerate() {
        if c == usize::MAX {
            continue;
        }
        let t = order[c];
        *acc.entry((i, t)).or_insert(0.0) += 1.0;
        *acc.entry((t, i)).or_insert(0.0) += 1.0;
    }
    let entries: Vec<(usize, usize, f64)> = acc
        .into_iter()
        .map(|((d, s), w)| (d, s, if clip { w.min(1.0) } else { w }))
        .collect();
    SparseGraph::from_entries(n, &entries)
}

/// Draws the affinity graph: one labeled target per row (Gumbel-perturbed or
/// deterministic argmax), materialized symmetrically. Mutually chosen
/// labeled pairs accumulate weight 2 unless `clip` is set.
pub fn sample_affinity_graph_cached(
    z: &DenseMatrix,
    order: &[usize],
    mode: SampleMode,
    temperature: f64,
    rng: &mut impl Rng,
    clip: bool,
) -> Result<(SparseGraph, AffinitySample)> {
    let sample = sample_rows(z, temperature, mode, NoiseSource::Rng(rng), true)?;
    let graph = hard_affinity_graph(z.rows(), order, &sample, clip)?;
    Ok((graph, sample))
}

/// As [`sample_affinity_graph_cached`], returning only the graph.
pub fn sample_affinity_graph(
    z: &DenseMatrix,
    order: &[usize],
    mode: SampleMode,
    temperature: f64,
    rng: &mut impl Rng,
) -> Result<SparseGraph> {
    Ok(sample_affinity_graph_cached(z, order, mode, temperature, rng, false)?.0)
}

/// Fully relaxed graph: every row contributes its soft sample weights. Only
/// used to make the whole model differentiable for gradient checking.
pub(crate) fn soft_affinity_graph(
    n: usize,
    order: &[usize],
    sample: &AffinitySample,
) -> Result<SparseGraph> {
    let soft = sample
        .soft
        .as_ref()
        .ok_or_else(|| GlamError::State("soft sample not cached".to_string()))?;
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    for i in 0..soft.rows() {
        for (c, &w) in soft.row(i).iter().enumerate() {
            if w > 0.0 {
                let t = order[c];
                *acc.entry((i, t)).or_insert(0.0) += w;
                *acc.entry((t, i)).or_insert(0.0) += w;
            }
        }
    }
    let entries: Vec<(usize, usize, f64)> = acc.into_iter().map(|((d, s), w)| (d, s, w)).collect();
    SparseGraph::from_entries(n, &entries)
}

/// Maps a gradient w.r.t. the sampled one-hot row back to the affinity
/// logits. With a cached soft row the exact relaxed Jacobian is used; below
/// [`SOFT_BACKWARD_MIN_TAU`] the straight-through rule passes the upstream
/// gradient through at the chosen coordinate only.
pub fn straight_through_grad(
    upstream: &[f64],
    chosen: usize,
    soft_row: Option<&[f64]>,
    tau: f64,
) -> Vec<f64> {
    match soft_row {
        Some(y) => {
            let inner: f64 = upstream.iter().zip(y).map(|(v, w)| v * w).sum();
            y.iter()
                .zip(upstream)
                .map(|(&w, &v)| w * (v - inner) / tau)
                .collect()
        }
        None => {
            let mut out = vec![0.0; upstream.len()];
            if chosen != usize::MAX {
                out[chosen] = upstream[chosen];
            }
            out
        }
    }
}
