//! End-to-end model: affinity forward, graph sampling and combination,
//! two-layer GCN, joint loss, and exact reverse-mode gradients for the fixed
//! computation graph.

use crate::affinity::{
    affinity_forward_cached, drop_input, hard_affinity_graph, sample_rows, soft_affinity_graph,
    straight_through_grad, AffinityCache, AffinityModel, AffinitySample, AffinityTargets,
    DroppedInput, NoiseSource, SampleMode,
};
use crate::data::Features;
use crate::graphs::{combine_graphs, indegree_laplacian_with_degrees, SparseGraph};
use crate::numerics::{
    cross_entropy_rows, dropout_with_mask, relu, softmax_rows, spmm, AdamConfig, DenseMatrix,
};
use crate::{GlamError, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which features the GCN consumes when boosted features are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GcnInput {
    Raw,
    Boosted,
}

/// Whether the affinity graph is redrawn every epoch or fixed after the
/// first draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResamplePolicy {
    PerEpoch,
    Once,
}

/// All tuning knobs for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlamHyperParams {
    /// kNN neighbors.
    pub k: usize,
    /// Weight of the cropped kNN graph; the affinity graph gets 1 - w_ck.
    pub w_ck: f64,
    /// Coefficient of the affinity loss.
    pub beta: f64,
    /// L2 coefficient for the affinity weights W1, W2.
    pub alpha_a: f64,
    /// L2 coefficient for the GCN weights W3, W4.
    pub alpha_c: f64,
    pub lr: f64,
    /// Dropout applied to the affinity model's input and hidden layer.
    pub dropout_a: f64,
    /// Dropout applied to the GCN's input and hidden layer.
    pub dropout_c: f64,
    pub hidden_a: usize,
    pub hidden_c: usize,
    /// Gumbel-softmax temperature.
    pub temperature: f64,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Use boosted features for kNN construction and the affinity model.
    pub boosted: bool,
    pub gcn_input: GcnInput,
    pub resample: ResamplePolicy,
    pub adam: AdamConfig,
    /// Clip mutually-chosen affinity edges to weight 1 (sensitivity knob).
    pub clip_affinity_weights: bool,
    /// Straight-through gradient through the sampled graph.
    pub straight_through: bool,
}

impl Default for GlamHyperParams {
    fn default() -> Self {
        GlamHyperParams {
            k: 10,
            w_ck: 0.67,
            beta: 1.0,
            alpha_a: 5e-4,
            alpha_c: 5e-4,
            lr: 1e-2,
            dropout_a: 0.5,
            dropout_c: 0.5,
            hidden_a: 128,
            hidden_c: 64,
            temperature: 1e-10,
            epochs: 500,
            patience: 25,
            seed: 0,
            boosted: true,
            gcn_input: GcnInput::Boosted,
            resample: ResamplePolicy::PerEpoch,
            adam: AdamConfig::default(),
            clip_affinity_weights: false,
            straight_through: true,
        }
    }
}

impl GlamHyperParams {
    pub fn w_a(&self) -> f64 {
        1.0 - self.w_ck
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.w_ck) {
            return Err(GlamError::param(format!("w_ck={} not in [0,1]", self.w_ck)));
        }
        if self.beta < 0.0 || self.alpha_a < 0.0 || self.alpha_c < 0.0 {
            return Err(GlamError::param("beta and alphas must be >= 0"));
        }
        if self.lr <= 0.0 {
            return Err(GlamError::param(format!("lr={} must be > 0", self.lr)));
        }
        if !(0.0..1.0).contains(&self.dropout_a) || !(0.0..1.0).contains(&self.dropout_c) {
            return Err(GlamError::param("dropout rates must be in [0,1)"));
        }
        if self.temperature <= 0.0 {
            return Err(GlamError::param("temperature must be > 0"));
        }
        if self.hidden_a == 0 || self.hidden_c == 0 || self.k == 0 {
            return Err(GlamError::param("hidden dims and k must be >= 1"));
        }
        if self.epochs == 0 || self.patience == 0 {
            return Err(GlamError::param("epochs and patience must be >= 1"));
        }
        Ok(())
    }
}

/// Learnable state: the affinity network (absent for the plain GCN
/// baseline) and the two GCN weight matrices.
#[derive(Debug, Clone)]
pub struct GlamParams {
    pub affinity: Option<AffinityModel>,
    pub w3: DenseMatrix,
    pub w4: DenseMatrix,
    pub dropout_input_c: f64,
    pub dropout_hidden_c: f64,
}

impl GlamParams {
    /// Fresh Glorot-initialized parameters for a dataset shape. The affinity
    /// and GCN weights draw from separate streams of the run seed, so the
    /// GCN half initializes identically with or without an affinity branch.
    pub fn init(
        num_features: usize,
        num_classes: usize,
        train_order: Option<Vec<usize>>,
        hp: &GlamHyperParams,
        streams: &crate::rng::SeedStreams,
    ) -> Self {
        let affinity = train_order.map(|order| {
            let mut rng = streams.stream("init-affinity");
            AffinityModel::new(
                num_features,
                hp.hidden_a,
                order,
                hp.dropout_a,
                hp.dropout_a,
                &mut rng,
            )
        });
        let mut rng = streams.stream("init-gcn");
        GlamParams {
            affinity,
            w3: DenseMatrix::glorot_uniform(num_features, hp.hidden_c, &mut rng),
            w4: DenseMatrix::glorot_uniform(hp.hidden_c, num_classes, &mut rng),
            dropout_input_c: hp.dropout_c,
            dropout_hidden_c: hp.dropout_c,
        }
    }
}

/// Dataset-derived inputs shared by every epoch.
pub struct GlamInputs<'a> {
    pub x_affinity: &'a Features,
    pub x_gcn: &'a Features,
    /// Cropped kNN graph for the full model; the raw symmetric kNN graph for
    /// the baseline.
    pub g_ck: &'a SparseGraph,
    pub targets: &'a AffinityTargets,
    pub train_nodes: &'a [usize],
    /// One-hot labels with nonzero rows only for train nodes.
    pub train_onehot: &'a DenseMatrix,
}

/// One-hot label matrix reading only train labels.
pub fn one_hot_train_labels(
    labels: &[usize],
    train_nodes: &[usize],
    num_classes: usize,
) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(labels.len(), num_classes);
    for &i in train_nodes {
        m.set(i, labels[i], 1.0);
    }
    m
}

/// How the affinity graph enters the forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    /// Hard Gumbel sample (training).
    Sample,
    /// Deterministic argmax (evaluation).
    Argmax,
    /// Fully relaxed soft sample; differentiable end to end, used by
    /// gradient checks.
    Soft,
}

/// Forward-pass switches.
#[derive(Clone, Copy)]
pub struct ForwardOpts<'a> {
    /// Apply dropout.
    pub training: bool,
    pub mode: GraphMode,
    /// Fixed Gumbel noise (n x l) instead of fresh draws; makes the forward
    /// pass a deterministic function for finite-difference checks.
    pub frozen_noise: Option<&'a DenseMatrix>,
    /// Reuse a previously drawn graph (`resample: once`).
    pub reuse_graph: Option<&'a GraphSample>,
}

impl ForwardOpts<'_> {
    pub fn train() -> Self {
        ForwardOpts {
            training: true,
            mode: GraphMode::Sample,
            frozen_noise: None,
            reuse_graph: None,
        }
    }

    pub fn eval() -> Self {
        ForwardOpts {
            training: false,
            mode: GraphMode::Argmax,
            frozen_noise: None,
            reuse_graph: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ForwardDiagnostics {
    /// Whether an affinity graph was constructed at all.
    pub affinity_graph_built: bool,
    pub affinity_entries: usize,
    pub combined_entries: usize,
}

/// Outputs plus cached intermediates of one forward pass.
pub struct GlamForward<'a> {
    pub z_c: DenseMatrix,
    /// Combined graph G (before normalization).
    pub graph: SparseGraph,
    /// Normalized Laplacian view of G.
    pub g_hat: SparseGraph,
    pub diagnostics: ForwardDiagnostics,
    affinity: Option<AffinityCache<'a>>,
    sample: Option<AffinitySample>,
    degrees: Vec<f64>,
    x_c: DroppedInput<'a>,
    v: DenseMatrix,
    h_c: DenseMatrix,
    mask_c_hidden: Option<DenseMatrix>,
    u: DenseMatrix,
}

impl GlamForward<'_> {
    pub fn z_a(&self) -> Option<&DenseMatrix> {
        self.affinity.as_ref().map(|a| &a.z)
    }
}

/// A cached graph draw for the `resample: once` policy.
#[derive(Clone)]
pub struct GraphSample {
    pub combined: SparseGraph,
    pub g_hat: SparseGraph,
    pub degrees: Vec<f64>,
    pub sample: AffinitySample,
}

impl GlamForward<'_> {
    /// Snapshot of the sampled graph, reusable across epochs.
    pub fn graph_sample(&self) -> Option<GraphSample> {
        self.sample.as_ref().map(|s| GraphSample {
            combined: self.graph.clone(),
            g_hat: self.g_hat.clone(),
            degrees: self.degrees.clone(),
            sample: s.clone(),
        })
    }
}

/// Runs affinity forward, graph sampling, combination, normalization, and
/// the two-layer GCN. Dropout and Gumbel noise come from separate streams so
/// each is reproducible in isolation.
pub fn glam_forward<'a, R: Rng>(
    params: &GlamParams,
    hp: &GlamHyperParams,
    inputs: &GlamInputs<'a>,
    opts: ForwardOpts<'_>,
    dropout_rng: &mut R,
    gumbel_rng: &mut R,
) -> Result<GlamForward<'a>> {
    let w_a = hp.w_a();
    let need_graph = w_a > 0.0;
    let need_affinity = params.affinity.is_some() && (need_graph || hp.beta > 0.0);
    if need_graph && params.affinity.is_none() {
        return Err(GlamError::State(
            "w_a > 0 requires an affinity model".to_string(),
        ));
    }

    let mut diagnostics = ForwardDiagnostics::default();
    let affinity = if need_affinity {
        let model = params.affinity.as_ref().expect("checked above");
        Some(affinity_forward_cached(
            model,
            inputs.x_affinity,
            opts.training,
            dropout_rng,
        )?)
    } else {
        None
    };

    let (graph, g_hat, degrees, sample) = if let Some(reused) = opts.reuse_graph {
        diagnostics.affinity_graph_built = false;
        (
            reused.combined.clone(),
            reused.g_hat.clone(),
            reused.degrees.clone(),
            Some(reused.sample.clone()),
        )
    } else if need_graph {
        let model = params.affinity.as_ref().expect("checked above");
        let aff = affinity.as_ref().expect("affinity runs when graph needed");
        let n = aff.z.rows();
        let (mode, want_soft) = match opts.mode {
            GraphMode::Sample => (SampleMode::Sample, true),
            GraphMode::Argmax => (SampleMode::Argmax, false),
            GraphMode::Soft => (SampleMode::Sample, true),
        };
        let sample = match opts.frozen_noise {
            Some(noise) => sample_rows(
                &aff.z,
                hp.temperature,
                mode,
                NoiseSource::<rand_chacha::ChaCha8Rng>::Frozen(noise),
                want_soft,
            )?,
            None => sample_rows(
                &aff.z,
                hp.temperature,
                mode,
                NoiseSource::Rng(gumbel_rng),
                want_soft,
            )?,
        };
        let g_a = if opts.mode == GraphMode::Soft {
            soft_affinity_graph(n, &model.order, &sample)?
        } else {
            hard_affinity_graph(n, &model.order, &sample, hp.clip_affinity_weights)?
        };
        diagnostics.affinity_graph_built = true;
        diagnostics.affinity_entries = g_a.edge_count();
        let combined = combine_graphs(&g_a, inputs.g_ck, w_a)?;
        let (g_hat, degrees) = indegree_laplacian_with_degrees(&combined);
        (combined, g_hat, degrees, Some(sample))
    } else {
        let combined = inputs.g_ck.clone();
        let (g_hat, degrees) = indegree_laplacian_with_degrees(&combined);
        (combined, g_hat, degrees, None)
    };
    diagnostics.combined_entries = graph.edge_count();

    let x_c = drop_input(inputs.x_gcn, params.dropout_input_c, dropout_rng, opts.training)?;
    let v = x_c.matmul(&params.w3)?;
    let p1 = spmm(g_hat.matrix(), &v)?;
    let h = relu(&p1);
    let (h_c, mask_c_hidden) =
        dropout_with_mask(&h, params.dropout_hidden_c, dropout_rng, opts.training)?;
    let u = h_c.matmul(&params.w4)?;
    let p2 = spmm(g_hat.matrix(), &u)?;
    let z_c = softmax_rows(&p2);

    Ok(GlamForward {
        z_c,
        graph,
        g_hat,
        diagnostics,
        affinity,
        sample,
        degrees,
        x_c,
        v,
        h_c,
        mask_c_hidden,
        u,
    })
}

/// Loss decomposition of the joint objective
/// `L = L_C + beta * L_A + alpha_A (|W1|^2 + |W2|^2) + alpha_C (|W3|^2 + |W4|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub loss_c: f64,
    pub loss_a: f64,
    pub reg_a: f64,
    pub reg_c: f64,
}

pub fn glam_loss(
    fwd: &GlamForward<'_>,
    params: &GlamParams,
    hp: &GlamHyperParams,
    inputs: &GlamInputs<'_>,
) -> Result<LossParts> {
    let loss_c = cross_entropy_rows(&fwd.z_c, inputs.train_onehot, inputs.train_nodes)?;
    let loss_a = match fwd.z_a() {
        Some(z) => crate::affinity::affinity_loss(z, inputs.targets)?,
        None => 0.0,
    };
    let reg_a = params.affinity.as_ref().map_or(0.0, |a| {
        hp.alpha_a * (a.w1.frobenius_sq() + a.w2.frobenius_sq())
    });
    let reg_c = hp.alpha_c * (params.w3.frobenius_sq() + params.w4.frobenius_sq());
    Ok(LossParts {
        total: loss_c + hp.beta * loss_a + reg_a + reg_c,
        loss_c,
        loss_a,
        reg_a,
        reg_c,
    })
}

/// Gradients of the joint loss w.r.t. the weight matrices. Weight-decay
/// terms are applied inside the optimizer, not here.
#[derive(Debug, Clone)]
pub struct GlamGrads {
    pub w1: Option<DenseMatrix>,
    pub w2: Option<DenseMatrix>,
    pub w3: DenseMatrix,
    pub w4: DenseMatrix,
}

/// Exact gradients of `L_C + beta * L_A` for the cached forward pass.
///
/// The sampled graph contributes through the in-degree normalization: with a
/// cached soft sample the relaxed Jacobian is used, otherwise the
/// straight-through rule applies at each chosen coordinate.
pub fn glam_backward(
    params: &GlamParams,
    hp: &GlamHyperParams,
    inputs: &GlamInputs<'_>,
    fwd: &GlamForward<'_>,
) -> Result<GlamGrads> {
    let n = fwd.z_c.rows();
    let c = fwd.z_c.cols();
    if params.w4.cols() != c || fwd.v.cols() != params.w3.cols() {
        return Err(GlamError::State(
            "forward cache does not match parameter shapes".to_string(),
        ));
    }

    // Classifier head: dP2 = Z - Y on train rows.
    let mut d_p2 = DenseMatrix::zeros(n, c);
    for &i in inputs.train_nodes {
        let (z, y) = (fwd.z_c.row(i), inputs.train_onehot.row(i));
        let row = d_p2.row_mut(i);
        for ((r, &zv), &yv) in row.iter_mut().zip(z).zip(y) {
            *r = zv - yv;
        }
    }

    let g_hat_t = fwd.g_hat.matrix().transpose();
    let d_u = g_hat_t.matmul_dense(&d_p2)?;
    let d_w4 = fwd.h_c.transpose_matmul(&d_u)?;
    let mut d_hc = d_u.matmul(&params.w4.transpose())?;
    if let Some(mask) = &fwd.mask_c_hidden {
        d_hc.mul_elem(mask)?;
    }
    relu_backward_in_place(&mut d_hc, &fwd.h_c);
    let d_p1 = d_hc;
    let d_v = g_hat_t.matmul_dense(&d_p1)?;
    let d_w3 = fwd.x_c.transpose_matmul(&d_v)?;

    // Affinity logits gradient: graph path plus the affinity loss itself.
    // When the affinity branch exists but was skipped entirely (full kNN
    // weight and no affinity loss), its gradients are exactly zero.
    let (mut d_w1, mut d_w2) = match &params.affinity {
        Some(model) if fwd.affinity.is_none() => (
            Some(DenseMatrix::zeros(model.w1.rows(), model.w1.cols())),
            Some(DenseMatrix::zeros(model.w2.rows(), model.w2.cols())),
        ),
        _ => (None, None),
    };
    if let (Some(model), Some(aff)) = (&params.affinity, &fwd.affinity) {
        let l = model.num_labeled();
        let mut d_logits = DenseMatrix::zeros(n, l);

        if hp.w_a() > 0.0 && hp.straight_through {
            if let Some(sample) = &fwd.sample {
                accumulate_graph_grad(
                    &mut d_logits,
                    sample,
                    model,
                    fwd,
                    &d_p2,
                    &d_p1,
                    hp.w_a(),
                );
            }
        }

        if hp.beta > 0.0 {
            for (pos, &node) in inputs.targets.order.iter().enumerate() {
                if !inputs.targets.active[pos] {
                    continue;
                }
                let z = aff.z.row(node);
                let t = inputs.targets.matrix.row(pos);
                let row = d_logits.row_mut(node);
                for ((r, &zv), &tv) in row.iter_mut().zip(z).zip(t) {
                    *r += hp.beta * (zv - tv);
                }
            }
        }

        let w2_grad = aff.hidden.transpose_matmul(&d_logits)?;
        let mut d_hidden = d_logits.matmul(&model.w2.transpose())?;
        if let Some(mask) = &aff.mask_hidden {
            d_hidden.mul_elem(mask)?;
        }
        relu_backward_in_place(&mut d_hidden, &aff.hidden);
        let w1_grad = aff.x_in.transpose_matmul(&d_hidden)?;
        d_w1 = Some(w1_grad);
        d_w2 = Some(w2_grad);
    }

    Ok(GlamGrads {
        w1: d_w1,
        w2: d_w2,
        w3: d_w3,
        w4: d_w4,
    })
}

fn relu_backward_in_place(grad: &mut DenseMatrix, activation: &DenseMatrix) {
    for (g, &a) in grad.values_mut().iter_mut().zip(activation.values()) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Gradient of the classifier loss w.r.t. the affinity logits through
/// `G -> D^{-1/2}(G+I)D^{-1/2} -> GCN`, restricted to the sampled edges.
#[allow(clippy::too_many_arguments)]
fn accumulate_graph_grad(
    d_logits: &mut DenseMatrix,
    sample: &AffinitySample,
    model: &AffinityModel,
    fwd: &GlamForward<'_>,
    d_p2: &DenseMatrix,
    d_p1: &DenseMatrix,
    w_a: f64,
) {
    let degrees = &fwd.degrees;
    // dL/dGhat on an entry (p, q) is dP2[p].U[q] + dP1[p].V[q].
    let d_ghat_entry = |p: usize, q: usize| -> f64 {
        let mut acc = 0.0;
        for (a, b) in d_p2.row(p).iter().zip(fwd.u.row(q)) {
            acc += a * b;
        }
        for (a, b) in d_p1.row(p).iter().zip(fwd.v.row(q)) {
            acc += a * b;
        }
        acc
    };

    // Row and column inner products of dGhat with Ghat over its pattern,
    // which carry the degree-derivative part of the normalization.
    let n = degrees.len();
    let mut row_dot = vec![0.0f64; n];
    let mut col_dot = vec![0.0f64; n];
    for (p, q, ghat) in fwd.g_hat.iter() {
        let dg = d_ghat_entry(p, q) * ghat;
        row_dot[p] += dg;
        col_dot[q] += dg;
    }
    // dL/dG[p][q] for any (p, q), present in the pattern or not.
    let d_g_entry = |p: usize, q: usize| -> f64 {
        d_ghat_entry(p, q) / (degrees[p] * degrees[q]).sqrt()
            - (row_dot[p] + col_dot[p]) / (2.0 * degrees[p])
    };

    let soft = sample.soft.as_ref();
    for (i, &chosen) in sample.chosen.iter().enumerate() {
        if chosen == usize::MAX {
            continue;
        }
        let upstream: Vec<f64> = match soft {
            // Relaxed backward needs dL/dM[i][t_j] for every labeled column.
            Some(_) => model
                .order
                .iter()
                .map(|&t| w_a * (d_g_entry(i, t) + d_g_entry(t, i)))
                .collect(),
            None => {
                let mut v = vec![0.0; model.order.len()];
                let t = model.order[chosen];
                v[chosen] = w_a * (d_g_entry(i, t) + d_g_entry(t, i));
                v
            }
        };
        let soft_row = soft.map(|s| s.row(i));
        let grad = straight_through_grad(&upstream, chosen, soft_row, sample.tau);
        let row = d_logits.row_mut(i);
        for (r, g) in row.iter_mut().zip(grad) {
            *r += g;
        }
    }
}

/// Per-row argmax class; ties break to the lowest class id.
pub fn predict(z_c: &DenseMatrix) -> Vec<usize> {
    z_c.argmax_rows()
}

/// Percent accuracy over an index set.
pub fn accuracy(predictions: &[usize], labels: &[usize], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let hits = nodes
        .iter()
        .filter(|&&i| predictions[i] == labels[i])
        .count();
    100.0 * hits as f64 / nodes.len() as f64
}

/// Self-describing model checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub num_features: usize,
    pub num_classes: usize,
    /// Labeled-node ordering (columns of the affinity output).
    pub order: Option<Vec<usize>>,
    pub w1: Option<DenseMatrix>,
    pub w2: Option<DenseMatrix>,
    pub w3: DenseMatrix,
    pub w4: DenseMatrix,
    pub hyper: GlamHyperParams,
}

pub const CHECKPOINT_VERSION: &str = "glam-checkpoint-v1";

impl Checkpoint {
    pub fn from_params(params: &GlamParams, hp: &GlamHyperParams, num_classes: usize) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION.to_string(),
            num_features: params.w3.rows(),
            num_classes,
            order: params.affinity.as_ref().map(|a| a.order.clone()),
            w1: params.affinity.as_ref().map(|a| a.w1.clone()),
            w2: params.affinity.as_ref().map(|a| a.w2.clone()),
            w3: params.w3.clone(),
            w4: params.w4.clone(),
            hyper: hp.clone(),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Checkpoint> {
        let text = std::fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(GlamError::State(format!(
                "unsupported checkpoint version '{}'",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }

    pub fn into_params(self) -> Result<(GlamParams, GlamHyperParams)> {
        let affinity = match (self.w1, self.w2, self.order) {
            (Some(w1), Some(w2), Some(order)) => {
                let mut model = AffinityModel::from_weights(w1, w2, order)?;
                model.dropout_input = self.hyper.dropout_a;
                model.dropout_hidden = self.hyper.dropout_a;
                Some(model)
            }
            (None, None, None) => None,
            _ => {
                return Err(GlamError::State(
                    "checkpoint has a partial affinity model".to_string(),
                ))
            }
        };
        let params = GlamParams {
            affinity,
            w3: self.w3,
            w4: self.w4,
            dropout_input_c: self.hyper.dropout_c,
            dropout_hidden_c: self.hyper.dropout_c,
        };
        Ok((params, self.hyper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::build_affinity_targets;
    use crate::data::Features;
    use crate::graphs::crop_incoming_to_labeled;
    use crate::numerics::SparseMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) struct Fixture {
        pub x: Features,
        pub g_ck: SparseGraph,
        pub targets: AffinityTargets,
        pub train: Vec<usize>,
        pub onehot: DenseMatrix,
    }

    pub(crate) fn small_fixture() -> Fixture {
        // 6 nodes, 4 features, 2 classes, 4 labeled.
        let entries = vec![
            (0, 0, 1.0),
            (0, 1, 0.5),
            (1, 0, 0.8),
            (1, 2, 0.2),
            (2, 1, 1.0),
            (2, 3, 0.4),
            (3, 2, 0.9),
            (3, 3, 0.7),
            (4, 0, 0.3),
            (4, 3, 1.0),
            (5, 1, 0.6),
            (5, 2, 1.0),
        ];
        let x = Features::sparse(SparseMatrix::from_coo(6, 4, &entries).unwrap());
        let labels = vec![0, 0, 1, 1, 0, 1];
        let train = vec![0, 1, 2, 3];
        let knn = crate::graphs::knn_graph(&x, 2).unwrap();
        let g_ck = crop_incoming_to_labeled(&knn, &train);
        let targets = build_affinity_targets(&train, &labels);
        let onehot = one_hot_train_labels(&labels, &train, 2);
        Fixture {
            x,
            g_ck,
            targets,
            train,
            onehot,
        }
    }

    fn hp_for_tests() -> GlamHyperParams {
        GlamHyperParams {
            w_ck: 0.6,
            beta: 0.5,
            dropout_a: 0.0,
            dropout_c: 0.0,
            hidden_a: 5,
            hidden_c: 3,
            temperature: 1.0,
            ..GlamHyperParams::default()
        }
    }

    fn params_for(fix: &Fixture, hp: &GlamHyperParams, seed: u64) -> GlamParams {
        GlamParams::init(4, 2, Some(fix.train.clone()), hp, &crate::rng::SeedStreams::new(seed))
    }

    fn test_rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
        (
            ChaCha8Rng::seed_from_u64(seed),
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000)),
        )
    }

    fn inputs<'a>(fix: &'a Fixture) -> GlamInputs<'a> {
        GlamInputs {
            x_affinity: &fix.x,
            x_gcn: &fix.x,
            g_ck: &fix.g_ck,
            targets: &fix.targets,
            train_nodes: &fix.train,
            train_onehot: &fix.onehot,
        }
    }

    #[test]
    fn forward_rows_are_distributions() {
        let fix = small_fixture();
        let hp = hp_for_tests();
        let params = params_for(&fix, &hp, 1);
        let (mut drng, mut grng) = test_rngs(2);
        let fwd =
            glam_forward(&params, &hp, &inputs(&fix), ForwardOpts::train(), &mut drng, &mut grng)
                .unwrap();
        for i in 0..6 {
            let sum: f64 = fwd.z_c.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
        let za = fwd.z_a().unwrap();
        for i in 0..6 {
            let sum: f64 = za.row(i).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cropping_survives_combination() {
        // No combined-graph entry with a labeled destination may come from
        // the kNN side: every such entry must be explained by w_a * G_A.
        let fix = small_fixture();
        let hp = hp_for_tests();
        let params = params_for(&fix, &hp, 3);
        let (mut drng, mut grng) = test_rngs(4);
        let fwd =
            glam_forward(&params, &hp, &inputs(&fix), ForwardOpts::train(), &mut drng, &mut grng)
                .unwrap();
        let labeled: std::collections::HashSet<usize> = fix.train.iter().copied().collect();
        for (d, _, w) in fwd.graph.iter() {
            if labeled.contains(&d) {
                let units = w / hp.w_a();
                assert!(
                    (units - units.round()).abs() < 1e-9 && units >= 1.0,
                    "labeled-destination weight {w} is not a multiple of w_a"
                );
            }
        }
    }

    #[test]
    fn single_node_dataset_degenerates_to_mlp() {
        let x = Features::sparse(SparseMatrix::from_coo(1, 2, &[(0, 0, 1.0)]).unwrap());
        let g = SparseGraph::empty(1);
        let targets = build_affinity_targets(&[0], &[0]);
        let onehot = one_hot_train_labels(&[0], &[0], 2);
        let hp = GlamHyperParams {
            w_ck: 1.0,
            beta: 0.0,
            dropout_a: 0.0,
            dropout_c: 0.0,
            hidden_a: 3,
            hidden_c: 3,
            ..GlamHyperParams::default()
        };
        let params = GlamParams::init(2, 2, None, &hp, &crate::rng::SeedStreams::new(0));
        let ins = GlamInputs {
            x_affinity: &x,
            x_gcn: &x,
            g_ck: &g,
            targets: &targets,
            train_nodes: &[0],
            train_onehot: &onehot,
        };
        let (mut drng, mut grng) = test_rngs(0);
        let fwd = glam_forward(&params, &hp, &ins, ForwardOpts::eval(), &mut drng, &mut grng).unwrap();
        assert_eq!(fwd.g_hat.weight(0, 0), 1.0);
        // Z = softmax(relu(x W3) W4) through the identity Laplacian.
        let v = x.matmul(&params.w3).unwrap();
        let expect = softmax_rows(&relu(&v).matmul(&params.w4).unwrap());
        for (a, b) in fwd.z_c.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_total_bounds_and_parts() {
        let fix = small_fixture();
        let mut hp = hp_for_tests();
        let params = params_for(&fix, &hp, 5);
        let (mut drng, mut grng) = test_rngs(6);
        let fwd =
            glam_forward(&params, &hp, &inputs(&fix), ForwardOpts::train(), &mut drng, &mut grng)
                .unwrap();
        let parts = glam_loss(&fwd, &params, &hp, &inputs(&fix)).unwrap();
        assert!(parts.total >= parts.loss_c);
        assert!(parts.loss_a >= 0.0 && parts.reg_a >= 0.0 && parts.reg_c >= 0.0);

        hp.beta = 0.0;
        hp.alpha_a = 0.0;
        hp.alpha_c = 0.0;
        let parts = glam_loss(&fwd, &params, &hp, &inputs(&fix)).unwrap();
        assert_eq!(parts.total, parts.loss_c);
    }

    #[test]
    fn uniform_untrained_loss_closed_form() {
        // Zero parameters, C=4, 80 train nodes: L_C = 80 ln 4.
        let n = 100;
        let c = 4;
        let entries: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, i % 7, 1.0)).collect();
        let x = Features::sparse(SparseMatrix::from_coo(n, 7, &entries).unwrap());
        let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
        let train: Vec<usize> = (0..80).collect();
        let g = SparseGraph::empty(n);
        let targets = build_affinity_targets(&train, &labels);
        let onehot = one_hot_train_labels(&labels, &train, c);
        let hp = GlamHyperParams {
            w_ck: 1.0,
            beta: 0.0,
            alpha_a: 0.0,
            alpha_c: 0.0,
            dropout_a: 0.0,
            dropout_c: 0.0,
            hidden_c: 3,
            ..GlamHyperParams::default()
        };
        let params = GlamParams {
            affinity: None,
            w3: DenseMatrix::zeros(7, 3),
            w4: DenseMatrix::zeros(3, c),
            dropout_input_c: 0.0,
            dropout_hidden_c: 0.0,
        };
        let ins = GlamInputs {
            x_affinity: &x,
            x_gcn: &x,
            g_ck: &g,
            targets: &targets,
            train_nodes: &train,
            train_onehot: &onehot,
        };
        let (mut drng, mut grng) = test_rngs(0);
        let fwd = glam_forward(&params, &hp, &ins, ForwardOpts::eval(), &mut drng, &mut grng).unwrap();
        let parts = glam_loss(&fwd, &params, &hp, &ins).unwrap();
        let expect = 80.0 * 4.0f64.ln();
        assert!((parts.total - expect).abs() < 1e-9, "{}", parts.total);
    }

    #[test]
    fn predict_rules() {
        let z = DenseMatrix::from_rows(&[vec![0.1, 0.9], vec![0.5, 0.5]]).unwrap();
        assert_eq!(predict(&z), vec![1, 0]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let fix = small_fixture();
        let hp = hp_for_tests();
        let params = params_for(&fix, &hp, 9);
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("ckpt.json");
        Checkpoint::from_params(&params, &hp, 2).save(&path).unwrap();
        let (restored, rhp) = Checkpoint::load(&path).unwrap().into_params().unwrap();
        assert_eq!(rhp, hp);
        assert_eq!(restored.w3, params.w3);
        assert_eq!(restored.w4, params.w4);
        let (ra, pa) = (restored.affinity.unwrap(), params.affinity.unwrap());
        assert_eq!(ra.w1, pa.w1);
        assert_eq!(ra.w2, pa.w2);
        assert_eq!(ra.order, pa.order);
    }

    #[test]
    fn stale_cache_is_a_state_error() {
        let fix = small_fixture();
        let hp = hp_for_tests();
        let params = params_for(&fix, &hp, 1);
        let ins = inputs(&fix);
        let (mut drng, mut grng) = test_rngs(2);
        let fwd =
            glam_forward(&params, &hp, &ins, ForwardOpts::train(), &mut drng, &mut grng).unwrap();
        let mut other_hp = hp.clone();
        other_hp.hidden_c = hp.hidden_c + 1;
        let other = params_for(&fix, &other_hp, 1);
        assert!(matches!(
            glam_backward(&other, &hp, &ins, &fwd),
            Err(GlamError::State(_))
        ));
    }
}
