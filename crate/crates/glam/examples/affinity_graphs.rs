//! The label-affinity model in isolation: train it on its own loss, then
//! sample affinity graphs and measure how much better than chance they link
//! same-label nodes.
//!
//! Training uses full kNN weight so the classifier never sees the affinity
//! graph; the affinity network learns purely from its supervised loss.
//!
//! ```bash
//! cargo run --release --example affinity_graphs
//! ```

use glam::affinity::{sample_affinity_graph, SampleMode};
use glam::data::{synthetic_citation, Features, SyntheticConfig};
use glam::graphs::homophily;
use glam::model::GlamHyperParams;
use glam::rng::SeedStreams;
use glam::trainer::train;

fn main() {
    let cfg = SyntheticConfig {
        nodes: 400,
        features: 80,
        classes: 4,
        train_per_class: 10,
        val_size: 80,
        test_size: 160,
        words_per_node: 10,
        off_topic: 0.3,
        seed: 4,
    };
    let dataset = synthetic_citation(&cfg).unwrap();
    let hp = GlamHyperParams {
        k: 8,
        w_ck: 1.0, // graph unused; only the affinity loss trains W1/W2
        beta: 1.0,
        hidden_a: 32,
        hidden_c: 16,
        dropout_a: 0.2,
        dropout_c: 0.2,
        boosted: false,
        gcn_input: glam::model::GcnInput::Raw,
        epochs: 120,
        ..GlamHyperParams::default()
    };
    let (params, report) = train(&dataset, &hp).unwrap();
    let first = report.epochs.first().unwrap();
    let last = report.epochs.last().unwrap();
    println!(
        "affinity loss went {:.2} -> {:.2} over {} epochs",
        first.loss_a,
        last.loss_a,
        report.epochs.len()
    );

    // Sample graphs from the trained affinity distribution.
    let model = params.affinity.as_ref().expect("affinity branch exists");
    let x = Features::sparse(dataset.features.clone());
    let streams = SeedStreams::new(0);
    let z = glam::affinity::affinity_forward(model, &x, false, &mut streams.stream("fwd")).unwrap();

    let mut rng = streams.stream("gumbel");
    let sampled =
        sample_affinity_graph(&z, &model.order, SampleMode::Sample, 1e-10, &mut rng).unwrap();
    let argmax =
        sample_affinity_graph(&z, &model.order, SampleMode::Argmax, 1e-10, &mut rng).unwrap();
    println!(
        "sampled affinity graph: {} entries, homophily {:.2}",
        sampled.edge_count(),
        homophily(&sampled, &dataset.labels)
    );
    println!(
        "argmax affinity graph:  {} entries, homophily {:.2} (chance would be ~{:.0})",
        argmax.edge_count(),
        homophily(&argmax, &dataset.labels),
        100.0 / dataset.num_classes as f64
    );
}
