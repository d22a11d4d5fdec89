//! Accuracy as the graph combination moves from pure kNN (w_A = 0) to pure
//! affinity graph (w_A = 1); the interior usually beats both endpoints.
//!
//! ```bash
//! cargo run --release --example weight_sweep
//! ```

use glam::analysis::{affinity_weight_sweep, curve_csv};
use glam::data::{synthetic_citation, SyntheticConfig};
use glam::model::{GcnInput, GlamHyperParams};

fn main() {
    let cfg = SyntheticConfig {
        nodes: 400,
        features: 80,
        classes: 4,
        train_per_class: 10,
        val_size: 80,
        test_size: 160,
        words_per_node: 9,
        off_topic: 0.45,
        seed: 8,
    };
    let dataset = synthetic_citation(&cfg).unwrap();
    let hp = GlamHyperParams {
        k: 8,
        beta: 1.0,
        hidden_a: 32,
        hidden_c: 32,
        dropout_a: 0.2,
        dropout_c: 0.2,
        epochs: 150,
        boosted: false,
        gcn_input: GcnInput::Raw,
        ..GlamHyperParams::default()
    };
    let weights: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let points = affinity_weight_sweep(&dataset, &hp, &weights, &[0, 1, 2]).unwrap();
    print!("{}", curve_csv(&points));

    let best = points
        .iter()
        .max_by(|a, b| a.mean.total_cmp(&b.mean))
        .unwrap();
    println!(
        "\nbest w_A = {:.1} at {:.2}; endpoints: {:.2} (kNN only) and {:.2} (affinity only)",
        best.x,
        best.mean,
        points.first().unwrap().mean,
        points.last().unwrap().mean
    );
}
