//! Full-batch training with early stopping, multi-seed evaluation, and
//! seeded random-search hyperparameter sweeps.

use crate::affinity::build_affinity_targets;
use crate::data::{boosted_features, Dataset, Features};
use crate::graphs::{crop_incoming_to_labeled, KnnIndex, SparseGraph};
use crate::model::{
    accuracy, glam_backward, glam_forward, glam_loss, one_hot_train_labels, predict, ForwardOpts,
    GlamHyperParams, GlamInputs, GlamParams, GraphSample, ResamplePolicy,
};
use crate::numerics::{adam_step, AdamState, DenseMatrix};
use crate::rng::SeedStreams;
use crate::{GlamError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

/// Which architecture a run trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Joint graph learning: affinity graph + cropped kNN.
    Glam,
    /// Plain 2-layer GCN on the uncropped symmetric kNN graph.
    GcnKnn,
}

/// Guards test labels: they may be read exactly once per training run, at
/// the best-validation checkpoint. A second read aborts.
pub struct TestLabelGuard {
    consumed: AtomicBool,
}

impl TestLabelGuard {
    pub fn new() -> Self {
        TestLabelGuard {
            consumed: AtomicBool::new(false),
        }
    }

    pub fn test_accuracy(&self, predictions: &[usize], labels: &[usize], test: &[usize]) -> f64 {
        if self.consumed.swap(true, Ordering::SeqCst) {
            panic!("test labels read more than once in a single training run");
        }
        accuracy(predictions, labels, test)
    }
}

impl Default for TestLabelGuard {
    fn default() -> Self {
        Self::new()
    }
}

/// Dataset plus cached derived inputs (boosted features, kNN indices) shared
/// across trials of a sweep.
pub struct PreparedData {
    pub dataset: Dataset,
    raw: Arc<Features>,
    boosted: Mutex<Option<Arc<Features>>>,
    knn: [Mutex<(usize, Option<Arc<KnnIndex>>)>; 2],
}

impl PreparedData {
    pub fn new(dataset: Dataset) -> Self {
        let raw = Arc::new(Features::sparse(dataset.features.clone()));
        PreparedData {
            dataset,
            raw,
            boosted: Mutex::new(None),
            knn: [Mutex::new((0, None)), Mutex::new((0, None))],
        }
    }

    pub fn boosted_features(&self) -> Arc<Features> {
        let mut guard = self.boosted.lock().unwrap();
        guard
            .get_or_insert_with(|| Arc::new(boosted_features(&self.dataset.features)))
            .clone()
    }

    pub fn features(&self, boosted: bool) -> Arc<Features> {
        if boosted {
            self.boosted_features()
        } else {
            self.raw.clone()
        }
    }

    /// kNN graph from raw or boosted features; the underlying index is built
    /// once per feature kind at the largest k seen (at least 20, covering the
    /// sweep grid).
    pub fn knn_graph(&self, boosted: bool, k: usize) -> Result<SparseGraph> {
        let n = self.dataset.num_nodes();
        if k >= n {
            return Err(GlamError::param(format!("k={k} must be < n={n}")));
        }
        let want = k.max(20.min(n.saturating_sub(1)));
        let mut slot = self.knn[usize::from(boosted)].lock().unwrap();
        if slot.1.is_none() || slot.0 < k {
            let features = self.features(boosted);
            let built = KnnIndex::build(&features, want)?;
            *slot = (want, Some(Arc::new(built)));
        }
        let idx = slot.1.clone().expect("just built");
        drop(slot);
        idx.graph(k)
    }
}

/// One epoch's telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss_c: f64,
    pub loss_a: f64,
    pub total: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

/// Outcome of one training run. Wall-clock time is kept out of the
/// serialized form so reports are byte-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: ModelKind,
    pub dataset: String,
    pub seed: u64,
    pub hyper: GlamHyperParams,
    pub epochs: Vec<EpochRecord>,
    pub best_val_epoch: usize,
    pub best_val_acc: f64,
    /// Test accuracy at the best-validation checkpoint; absent for sweep
    /// trials, which never read test labels.
    pub test_acc: Option<f64>,
    pub affinity_graph_built: bool,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl TrainReport {
    /// Deterministic pretty JSON (timing excluded).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-epoch curves as `epoch,loss_c,loss_a,total,val_acc`.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("epoch,loss_c,loss_a,total,val_acc\n");
        for r in &self.epochs {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.epoch, r.loss_c, r.loss_a, r.total, r.val_acc
            )
            .unwrap();
        }
        out
    }
}

/// Extra switches for [`train_with`].
#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub kind: ModelKind,
    /// Skip the final test evaluation (sweep trials).
    pub skip_test: bool,
    /// Train on this graph instead of a freshly built kNN graph. Used by the
    /// noise experiments; applied as-is (no cropping).
    pub graph_override: Option<SparseGraph>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            kind: ModelKind::Glam,
            skip_test: false,
            graph_override: None,
        }
    }
}

/// Plain-GCN training on an explicit graph (analysis tools).
pub fn train_on_graph(
    data: &PreparedData,
    hp: &GlamHyperParams,
    graph: SparseGraph,
) -> Result<TrainReport> {
    let (_, report) = train_with(
        data,
        hp,
        TrainOptions {
            kind: ModelKind::GcnKnn,
            skip_test: false,
            graph_override: Some(graph),
        },
    )?;
    Ok(report)
}

/// Trains on a dataset with the stated protocol: at most `hp.epochs` epochs,
/// early-stopped after `hp.patience` epochs without a new best validation
/// accuracy, parameters restored from the best epoch. Deterministic given
/// (dataset, hyperparameters, seed).
pub fn train(dataset: &Dataset, hp: &GlamHyperParams) -> Result<(GlamParams, TrainReport)> {
    let data = PreparedData::new(dataset.clone());
    train_with(&data, hp, TrainOptions::default())
}

pub fn train_with(
    data: &PreparedData,
    hp: &GlamHyperParams,
    opts: TrainOptions,
) -> Result<(GlamParams, TrainReport)> {
    hp.validate()?;
    let started = Instant::now();
    let ds = &data.dataset;
    let streams = SeedStreams::new(hp.seed);

    // The baseline forces the pure-GCN configuration: full kNN weight, no
    // affinity loss, no affinity parameters.
    let hp_eff = match opts.kind {
        ModelKind::Glam => hp.clone(),
        ModelKind::GcnKnn => GlamHyperParams {
            w_ck: 1.0,
            beta: 0.0,
            ..hp.clone()
        },
    };

    let x_model = data.features(hp_eff.boosted);
    let x_gcn = match (hp_eff.boosted, hp_eff.gcn_input) {
        (true, crate::model::GcnInput::Boosted) => data.features(true),
        _ => data.features(false),
    };
    let graph = match &opts.graph_override {
        Some(g) => g.clone(),
        None => {
            let knn = data.knn_graph(hp_eff.boosted, hp_eff.k)?;
            match opts.kind {
                ModelKind::Glam => crop_incoming_to_labeled(&knn, &ds.split.train),
                ModelKind::GcnKnn => knn,
            }
        }
    };
    let targets = build_affinity_targets(&ds.split.train, &ds.labels);
    let onehot = one_hot_train_labels(&ds.labels, &ds.split.train, ds.num_classes);
    let inputs = GlamInputs {
        x_affinity: &x_model,
        x_gcn: &x_gcn,
        g_ck: &graph,
        targets: &targets,
        train_nodes: &ds.split.train,
        train_onehot: &onehot,
    };

    // The affinity branch exists only when something uses it: either the
    // graph combination or the affinity loss. Otherwise the configuration is
    // exactly a plain GCN on `graph`.
    let has_affinity = matches!(opts.kind, ModelKind::Glam)
        && (hp_eff.w_a() > 0.0 || hp_eff.beta > 0.0);
    let order = has_affinity.then(|| targets.order.clone());
    let mut params = GlamParams::init(ds.num_features(), ds.num_classes, order, &hp_eff, &streams);
    let decay = match &params.affinity {
        Some(_) => vec![hp_eff.alpha_a, hp_eff.alpha_a, hp_eff.alpha_c, hp_eff.alpha_c],
        None => vec![hp_eff.alpha_c, hp_eff.alpha_c],
    };
    let mut adam = {
        let refs: Vec<&DenseMatrix> = match &params.affinity {
            Some(a) => vec![&a.w1, &a.w2, &params.w3, &params.w4],
            None => vec![&params.w3, &params.w4],
        };
        AdamState::new(&refs, hp_eff.adam)
    };

    let mut dropout_rng = streams.stream("dropout");
    let mut gumbel_rng = streams.stream("gumbel");
    let guard = TestLabelGuard::new();

    let mut records: Vec<EpochRecord> = Vec::new();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    let mut best_params: Option<GlamParams> = None;
    let mut since_best = 0usize;
    let mut reusable: Option<GraphSample> = None;

    for epoch in 1..=hp_eff.epochs {
        let fwd_opts = ForwardOpts {
            training: true,
            mode: crate::model::GraphMode::Sample,
            frozen_noise: None,
            reuse_graph: reusable.as_ref(),
        };
        let fwd = glam_forward(
            &params,
            &hp_eff,
            &inputs,
            fwd_opts,
            &mut dropout_rng,
            &mut gumbel_rng,
        )?;
        if hp_eff.resample == ResamplePolicy::Once && reusable.is_none() {
            reusable = fwd.graph_sample();
        }
        let parts = glam_loss(&fwd, &params, &hp_eff, &inputs)?;
        if !parts.total.is_finite() {
            return Err(GlamError::Divergence(format!(
                "non-finite loss at epoch {epoch}: L_C={} L_A={}",
                parts.loss_c, parts.loss_a
            )));
        }
        let grads = glam_backward(&params, &hp_eff, &inputs, &fwd)?;
        drop(fwd);
        {
            let (mut prefs, grefs): (Vec<&mut DenseMatrix>, Vec<&DenseMatrix>) =
                match (&mut params.affinity, &grads.w1, &grads.w2) {
                    (Some(a), Some(g1), Some(g2)) => (
                        vec![&mut a.w1, &mut a.w2, &mut params.w3, &mut params.w4],
                        vec![g1, g2, &grads.w3, &grads.w4],
                    ),
                    _ => (
                        vec![&mut params.w3, &mut params.w4],
                        vec![&grads.w3, &grads.w4],
                    ),
                };
            adam_step(&mut prefs, &grefs, &mut adam, hp_eff.lr, &decay)?;
        }

        let eval = glam_forward(
            &params,
            &hp_eff,
            &inputs,
            ForwardOpts::eval(),
            &mut dropout_rng,
            &mut gumbel_rng,
        )?;
        let preds = predict(&eval.z_c);
        let train_acc = accuracy(&preds, &ds.labels, &ds.split.train);
        let val_acc = accuracy(&preds, &ds.labels, &ds.split.val);
        records.push(EpochRecord {
            epoch,
            loss_c: parts.loss_c,
            loss_a: parts.loss_a,
            total: parts.total,
            train_acc,
            val_acc,
        });
        if val_acc > best_val {
            best_val = val_acc;
            best_epoch = epoch;
            best_params = Some(params.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= hp_eff.patience {
                break;
            }
        }
    }

    if let Some(best) = best_params {
        params = best;
    }
    let final_eval = glam_forward(
        &params,
        &hp_eff,
        &inputs,
        ForwardOpts::eval(),
        &mut dropout_rng,
        &mut gumbel_rng,
    )?;
    let preds = predict(&final_eval.z_c);
    let test_acc = if opts.skip_test {
        None
    } else {
        Some(guard.test_accuracy(&preds, &ds.labels, &ds.split.test))
    };

    let report = TrainReport {
        model: opts.kind,
        dataset: ds.name.clone(),
        seed: hp_eff.seed,
        hyper: hp_eff,
        epochs: records,
        best_val_epoch: best_epoch,
        best_val_acc: best_val,
        test_acc,
        affinity_graph_built: final_eval.diagnostics.affinity_graph_built,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    Ok((params, report))
}

/// Mean and sample standard deviation of test accuracy across seeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSummary {
    pub mean_test_acc: f64,
    pub std_test_acc: f64,
    pub seeds: Vec<u64>,
    pub per_seed_test_acc: Vec<f64>,
    /// Diverged seeds, excluded from the statistics.
    pub failures: Vec<(u64, String)>,
}

pub fn evaluate_seeds(
    data: &PreparedData,
    hp: &GlamHyperParams,
    kind: ModelKind,
    seeds: &[u64],
) -> Result<(SeedSummary, Vec<TrainReport>)> {
    if seeds.is_empty() {
        return Err(GlamError::param("need at least one seed"));
    }
    let results: Vec<std::result::Result<TrainReport, String>> = seeds
        .par_iter()
        .map(|&seed| {
            let hp_seed = GlamHyperParams {
                seed,
                ..hp.clone()
            };
            train_with(
                data,
                &hp_seed,
                TrainOptions {
                    kind,
                    skip_test: false,
                    graph_override: None,
                },
            )
            .map(|(_, report)| report)
            .map_err(|e| e.to_string())
        })
        .collect();

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (seed, res) in seeds.iter().zip(results) {
        match res {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::warn!("seed {seed} diverged: {e}");
                failures.push((*seed, e));
            }
        }
    }
    let accs: Vec<f64> = reports
        .iter()
        .map(|r| r.test_acc.expect("trained with skip_test=false"))
        .collect();
    let mean = if accs.is_empty() {
        f64::NAN
    } else {
        accs.iter().sum::<f64>() / accs.len() as f64
    };
    let std = if accs.len() < 2 {
        0.0
    } else {
        let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (accs.len() - 1) as f64;
        var.sqrt()
    };
    let summary = SeedSummary {
        mean_test_acc: mean,
        std_test_acc: std,
        seeds: seeds.to_vec(),
        per_seed_test_acc: accs,
        failures,
    };
    Ok((summary, reports))
}

/// Random-search ranges; defaults follow the tuning protocol bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub budget: usize,
    pub seeds_per_trial: usize,
    /// Master seed of the sweep's own sampling stream.
    pub seed: u64,
    pub lr_log10: (f64, f64),
    pub alpha_a_log10: (f64, f64),
    pub alpha_c_log10: (f64, f64),
    pub beta_log10: (f64, f64),
    pub dropout_a: (f64, f64),
    pub dropout_c: (f64, f64),
    pub w_ck: (f64, f64),
    pub k: Vec<usize>,
    pub hidden_a: Vec<usize>,
    pub hidden_c: Vec<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            budget: 200,
            seeds_per_trial: 1,
            seed: 0,
            lr_log10: (-3.0, 0.0),
            alpha_a_log10: (-5.0, 4.0),
            alpha_c_log10: (-5.0, 4.0),
            beta_log10: (-2.0, 2.0),
            dropout_a: (0.0, 1.0),
            dropout_c: (0.0, 1.0),
            w_ck: (0.0, 1.0),
            k: vec![5, 10, 15, 20],
            hidden_a: vec![32, 64, 128, 256],
            hidden_c: vec![16, 32, 64, 128],
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.seeds_per_trial == 0 {
            return Err(GlamError::param("budget and seeds_per_trial must be >= 1"));
        }
        if self.k.is_empty() || self.hidden_a.is_empty() || self.hidden_c.is_empty() {
            return Err(GlamError::param("categorical ranges must be nonempty"));
        }
        Ok(())
    }

    fn sample(&self, base: &GlamHyperParams, rng: &mut impl rand::Rng) -> GlamHyperParams {
        let log10 = |r: (f64, f64), rng: &mut dyn FnMut() -> f64| -> f64 {
            10f64.powf(r.0 + (r.1 - r.0) * rng())
        };
        let mut draw = || rng.random::<f64>();
        let lr = log10(self.lr_log10, &mut draw);
        let alpha_a = log10(self.alpha_a_log10, &mut draw);
        let alpha_c = log10(self.alpha_c_log10, &mut draw);
        let beta = log10(self.beta_log10, &mut draw);
        let dropout_a = self.dropout_a.0 + (self.dropout_a.1 - self.dropout_a.0) * draw();
        let dropout_c = self.dropout_c.0 + (self.dropout_c.1 - self.dropout_c.0) * draw();
        let w_ck = (self.w_ck.0 + (self.w_ck.1 - self.w_ck.0) * draw()).clamp(1e-9, 1.0 - 1e-9);
        let k = self.k[rng.random_range(0..self.k.len())];
        let hidden_a = self.hidden_a[rng.random_range(0..self.hidden_a.len())];
        let hidden_c = self.hidden_c[rng.random_range(0..self.hidden_c.len())];
        GlamHyperParams {
            k,
            w_ck,
            beta,
            alpha_a,
            alpha_c,
            lr,
            dropout_a: dropout_a.min(0.99),
            dropout_c: dropout_c.min(0.99),
            hidden_a,
            hidden_c,
            ..base.clone()
        }
    }
}

/// One sweep trial's outcome, ranked by mean validation accuracy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub hyper: GlamHyperParams,
    pub mean_val_acc: f64,
    /// Mean final total loss, the tie-breaker between equal-accuracy trials.
    pub mean_total_loss: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub best: GlamHyperParams,
    /// All trials, sorted by (val accuracy desc, total loss asc).
    pub leaderboard: Vec<TrialResult>,
}

/// Seeded uniform random search. Trials never read test labels; ranking uses
/// validation accuracy with total loss breaking ties.
pub fn sweep(
    data: &PreparedData,
    spec: &SweepSpec,
    base: &GlamHyperParams,
    kind: ModelKind,
) -> Result<SweepOutcome> {
    spec.validate()?;
    let streams = SeedStreams::new(spec.seed);
    let configs: Vec<GlamHyperParams> = (0..spec.budget)
        .map(|t| {
            let mut rng = streams.substream("sweep", t as u64);
            spec.sample(base, &mut rng)
        })
        .collect();

    let mut results: Vec<TrialResult> = configs
        .into_par_iter()
        .enumerate()
        .map(|(trial, hp)| {
            let mut val_accs = Vec::new();
            let mut totals = Vec::new();
            let mut failures = 0usize;
            for s in 0..spec.seeds_per_trial {
                let mut seed_rng = streams.substream("sweep-seed", (trial * 65_536 + s) as u64);
                let seed: u64 = rand::Rng::random(&mut seed_rng);
                let hp_seed = GlamHyperParams { seed, ..hp.clone() };
                match train_with(
                    data,
                    &hp_seed,
                    TrainOptions {
                        kind,
                        skip_test: true,
                        graph_override: None,
                    },
                ) {
                    Ok((_, report)) => {
                        val_accs.push(report.best_val_acc);
                        let last = report.epochs.last().map_or(f64::INFINITY, |e| e.total);
                        totals.push(last);
                    }
                    Err(e) => {
                        log::warn!("trial {trial} seed {seed} failed: {e}");
                        failures += 1;
                    }
                }
            }
            let mean_val_acc = if val_accs.is_empty() {
                f64::NEG_INFINITY
            } else {
                val_accs.iter().sum::<f64>() / val_accs.len() as f64
            };
            let mean_total_loss = if totals.is_empty() {
                f64::INFINITY
            } else {
                totals.iter().sum::<f64>() / totals.len() as f64
            };
            TrialResult {
                trial,
                hyper: hp,
                mean_val_acc,
                mean_total_loss,
                failures,
            }
        })
        .collect();

    results.sort_by(|a, b| {
        b.mean_val_acc
            .total_cmp(&a.mean_val_acc)
            .then(a.mean_total_loss.total_cmp(&b.mean_total_loss))
            .then(a.trial.cmp(&b.trial))
    });
    let best = results
        .first()
        .ok_or_else(|| GlamError::param("sweep produced no trials"))?
        .hyper
        .clone();
    Ok(SweepOutcome {
        best,
        leaderboard: results,
    })
}
