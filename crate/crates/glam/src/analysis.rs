//! Graph-quality diagnostics and the noise / affinity-weight experiments.

use crate::data::Dataset;
use crate::graphs::{knn_graph, perfect_knn, SparseGraph};
use crate::model::GlamHyperParams;
use crate::rng::SeedStreams;
use crate::trainer::{evaluate_seeds, ModelKind, PreparedData};
use crate::{GlamError, Result};
use serde::Serialize;
use std::fmt::Write as _;

/// Nonnegative attention matrices, one per head. GCN-style models expose a
/// single head: their normalized Laplacian.
pub struct AttentionView {
    pub heads: Vec<SparseGraph>,
}

impl AttentionView {
    pub fn laplacian(g_hat: SparseGraph) -> Self {
        AttentionView { heads: vec![g_hat] }
    }
}

/// Per-head fraction of noise-exposed nodes whose cross-label incident
/// weight strictly exceeds their same-label weight, averaged over heads,
/// times 100. Self-loops count toward the same-label side unless excluded.
pub fn bad_neighbor_ratio(view: &AttentionView, labels: &[usize], exclude_self_loops: bool) -> f64 {
    let mut head_sum = 0.0;
    for head in &view.heads {
        let n = head.n();
        let mut bad = vec![0.0f64; n];
        let mut good = vec![0.0f64; n];
        for (i, j, w) in head.iter() {
            if i == j {
                if !exclude_self_loops {
                    good[i] += w;
                }
                continue;
            }
            if labels[i] == labels[j] {
                good[i] += w;
            } else {
                bad[i] += w;
            }
        }
        let exposed = bad.iter().filter(|&&b| b > 0.0).count();
        if exposed == 0 {
            log::warn!("no node has any cross-label weight; reporting 0");
            continue;
        }
        let worse = bad
            .iter()
            .zip(&good)
            .filter(|&(&b, &g)| b > g)
            .count();
        head_sum += worse as f64 / exposed as f64;
    }
    100.0 * head_sum / view.heads.len() as f64
}

/// Weight mass on same-label entries over total mass, averaged over heads,
/// times 100. Self-loops count in both sums unless excluded.
pub fn weighted_homophily(view: &AttentionView, labels: &[usize], exclude_self_loops: bool) -> f64 {
    let mut head_sum = 0.0;
    let mut heads = 0usize;
    for head in &view.heads {
        let mut same = 0.0f64;
        let mut total = 0.0f64;
        for (i, j, w) in head.iter() {
            if i == j && exclude_self_loops {
                continue;
            }
            total += w;
            if labels[i] == labels[j] {
                same += w;
            }
        }
        if total == 0.0 {
            log::warn!("weighted homophily of an empty view is reported as 0");
            continue;
        }
        head_sum += same / total;
        heads += 1;
    }
    if heads == 0 {
        return 0.0;
    }
    100.0 * head_sum / heads as f64
}

/// One point of an experiment curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub mean: f64,
    pub std: f64,
    pub n_seeds: usize,
    /// Seeds that diverged at this point.
    pub failures: usize,
}

/// Renders points as `x,mean,std,n_seeds` CSV.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("x,mean,std,n_seeds\n");
    for p in points {
        writeln!(out, "{},{},{},{}", p.x, p.mean, p.std, p.n_seeds).unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    AddNoise,
    RemoveGood,
}

/// Graph-surgery experiment: build the perfect kNN graph (ground-truth
/// labels are used for surgery, so this is an analysis-only tool), apply the
/// surgery per fraction, train a plain GCN on each result.
pub fn noise_experiment(
    dataset: &Dataset,
    hp: &GlamHyperParams,
    fractions: &[f64],
    mode: NoiseMode,
    seeds: &[u64],
) -> Result<Vec<CurvePoint>> {
    let data = PreparedData::new(dataset.clone());
    let features = data.features(hp.boosted);
    let knn = knn_graph(&features, hp.k)?;
    let perfect = perfect_knn(&knn, &dataset.labels);
    let streams = SeedStreams::new(hp.seed);
    let mut points = Vec::with_capacity(fractions.len());
    for (fi, &fraction) in fractions.iter().enumerate() {
        let mut rng = streams.substream("noise", fi as u64);
        let surgered = match mode {
            NoiseMode::AddNoise => {
                crate::graphs::add_noisy_edges(&perfect, fraction, &dataset.labels, &mut rng)?
            }
            NoiseMode::RemoveGood => {
                crate::graphs::remove_good_edges(&perfect, fraction, &dataset.labels, &mut rng)?
            }
        };
        // Train the plain GCN on the surgered graph directly.
        let mut accs = Vec::new();
        let mut failures = 0usize;
        for &seed in seeds {
            let hp_seed = GlamHyperParams { seed, ..hp.clone() };
            match crate::trainer::train_on_graph(&data, &hp_seed, surgered.clone()) {
                Ok(report) => accs.push(report.test_acc.expect("test evaluated")),
                Err(e) => {
                    log::warn!("noise point {fraction} seed {seed} failed: {e}");
                    failures += 1;
                }
            }
        }
        points.push(summarize(fraction, &accs, failures));
    }
    Ok(points)
}

/// Trains the full model with the affinity weight fixed per point; the
/// w_A = 1 endpoint is the affinity-graph-only setting.
pub fn affinity_weight_sweep(
    dataset: &Dataset,
    hp: &GlamHyperParams,
    weights: &[f64],
    seeds: &[u64],
) -> Result<Vec<CurvePoint>> {
    for &w in weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(GlamError::param(format!("affinity weight {w} not in [0,1]")));
        }
    }
    let data = PreparedData::new(dataset.clone());
    let mut points = Vec::with_capacity(weights.len());
    for &w_a in weights {
        let hp_point = GlamHyperParams {
            w_ck: 1.0 - w_a,
            ..hp.clone()
        };
        let (summary, _) = evaluate_seeds(&data, &hp_point, ModelKind::Glam, seeds)?;
        points.push(CurvePoint {
            x: w_a,
            mean: summary.mean_test_acc,
            std: summary.std_test_acc,
            n_seeds: summary.per_seed_test_acc.len(),
            failures: summary.failures.len(),
        });
    }
    Ok(points)
}

fn summarize(x: f64, accs: &[f64], failures: usize) -> CurvePoint {
    let n = accs.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        accs.iter().sum::<f64>() / n as f64
    };
    let std = if n < 2 {
        0.0
    } else {
        (accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    CurvePoint {
        x,
        mean,
        std,
        n_seeds: n,
        failures,
    }
}

/// Scalar metrics for a graph view, serialized by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct GraphMetrics {
    pub homophily: f64,
    pub weighted_homophily: f64,
    pub bad_neighbor_ratio: f64,
    pub exclude_self_loops: bool,
    pub entries: usize,
}

pub fn graph_metrics(view: &AttentionView, labels: &[usize], exclude_self_loops: bool) -> GraphMetrics {
    let head = &view.heads[0];
    GraphMetrics {
        homophily: crate::graphs::homophily(head, labels),
        weighted_homophily: weighted_homophily(view, labels, exclude_self_loops),
        bad_neighbor_ratio: bad_neighbor_ratio(view, labels, exclude_self_loops),
        exclude_self_loops,
        entries: head.edge_count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::SparseGraph;

    fn view(entries: &[(usize, usize, f64)], n: usize) -> AttentionView {
        AttentionView::laplacian(SparseGraph::from_entries(n, entries).unwrap())
    }

    #[test]
    fn bnr_zero_when_all_same_label() {
        let v = view(&[(0, 1, 1.0), (1, 0, 1.0)], 2);
        assert_eq!(bad_neighbor_ratio(&v, &[0, 0], false), 0.0);
    }

    #[test]
    fn bnr_strict_inequality_hand_case() {
        // Node 0: bad weights {0.3, 0.3}, good {0.4}, self-loop 0.2.
        // BW = 0.6, GW = 0.6: tie, so the node is exposed but not bad.
        let labels = vec![0, 1, 1, 0];
        let v = view(
            &[(0, 1, 0.3), (0, 2, 0.3), (0, 3, 0.4), (0, 0, 0.2)],
            4,
        );
        assert_eq!(bad_neighbor_ratio(&v, &labels, false), 0.0);
        // Excluding the self-loop drops GW to 0.4 < 0.6: now it counts.
        assert_eq!(bad_neighbor_ratio(&v, &labels, true), 100.0);
    }

    #[test]
    fn weighted_homophily_extremes_and_simple_split() {
        let labels = vec![0, 0, 1];
        let perfect = view(&[(0, 1, 1.0), (1, 0, 1.0)], 3);
        assert_eq!(weighted_homophily(&perfect, &labels, false), 100.0);
        let mixed = view(&[(0, 1, 1.0), (0, 2, 1.0)], 3);
        assert_eq!(weighted_homophily(&mixed, &labels, false), 50.0);
    }

    #[test]
    fn metrics_against_brute_force_oracle() {
        // Node-by-node enumeration oracle over random small graphs.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..25 {
            let n = 6 + rng.random_range(0..6);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let mut entries = Vec::new();
            for d in 0..n {
                for s in 0..n {
                    if rng.random::<f64>() < 0.25 {
                        entries.push((d, s, rng.random::<f64>() + 0.01));
                    }
                }
            }
            if entries.is_empty() {
                continue;
            }
            let g = SparseGraph::from_entries(n, &entries).unwrap();
            let v = AttentionView::laplacian(g.clone());

            let mut same = 0.0;
            let mut total = 0.0;
            let mut bad_w = vec![0.0; n];
            let mut good_w = vec![0.0; n];
            for &(d, s, w) in &entries {
                total += w;
                if labels[d] == labels[s] {
                    same += w;
                }
                if d == s {
                    good_w[d] += w;
                } else if labels[d] == labels[s] {
                    good_w[d] += w;
                } else {
                    bad_w[d] += w;
                }
            }
            let wh_expect = 100.0 * same / total;
            let exposed = bad_w.iter().filter(|&&b| b > 0.0).count();
            let worse = (0..n).filter(|&i| bad_w[i] > good_w[i]).count();
            let bnr_expect = if exposed == 0 {
                0.0
            } else {
                100.0 * worse as f64 / exposed as f64
            };
            assert!((weighted_homophily(&v, &labels, false) - wh_expect).abs() < 1e-9);
            assert!((bad_neighbor_ratio(&v, &labels, false) - bnr_expect).abs() < 1e-9);
        }
    }

    #[test]
    fn metrics_are_scale_invariant() {
        let labels = vec![0, 1, 0];
        let base = vec![(0, 1, 0.4), (1, 2, 0.6), (2, 0, 1.1), (0, 0, 0.3)];
        let scaled: Vec<(usize, usize, f64)> =
            base.iter().map(|&(d, s, w)| (d, s, w * 7.5)).collect();
        let (va, vb) = (view(&base, 3), view(&scaled, 3));
        assert!(
            (weighted_homophily(&va, &labels, false) - weighted_homophily(&vb, &labels, false))
                .abs()
                < 1e-9
        );
        assert!(
            (bad_neighbor_ratio(&va, &labels, false) - bad_neighbor_ratio(&vb, &labels, false))
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn perfect_graph_has_full_weighted_homophily() {
        let labels = vec![0, 0, 1, 1];
        let g = SparseGraph::from_entries(
            4,
            &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0), (0, 2, 1.0)],
        )
        .unwrap();
        let cleaned = crate::graphs::perfect_knn(&g, &labels);
        let v = AttentionView::laplacian(cleaned);
        assert_eq!(weighted_homophily(&v, &labels, true), 100.0);
    }
}
