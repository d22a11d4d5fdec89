//! The whole pipeline on generated data: build a dataset, train the joint
//! model, and inspect the report.
//!
//! ```bash
//! cargo run --release --example end_to_end
//! ```

use glam::data::{synthetic_citation, SyntheticConfig};
use glam::model::{GcnInput, GlamHyperParams};
use glam::trainer::train;

fn main() {
    let cfg = SyntheticConfig {
        nodes: 600,
        features: 120,
        classes: 4,
        train_per_class: 10,
        val_size: 120,
        test_size: 240,
        words_per_node: 12,
        off_topic: 0.35,
        seed: 1,
    };
    let dataset = synthetic_citation(&cfg).expect("valid config");
    println!(
        "dataset: {} nodes, {} features, {} classes, {} labeled",
        dataset.num_nodes(),
        dataset.num_features(),
        dataset.num_classes,
        dataset.split.train.len()
    );

    let hp = GlamHyperParams {
        k: 10,
        w_ck: 0.67,
        beta: 1.0,
        lr: 0.01,
        hidden_a: 32,
        hidden_c: 32,
        dropout_a: 0.3,
        dropout_c: 0.3,
        boosted: false,
        gcn_input: GcnInput::Raw,
        ..GlamHyperParams::default()
    };
    let (_params, report) = train(&dataset, &hp).expect("training succeeds");

    println!(
        "stopped after {} epochs (best val {:.2} at epoch {})",
        report.epochs.len(),
        report.best_val_acc,
        report.best_val_epoch
    );
    println!(
        "test accuracy at the best-validation checkpoint: {:.2}",
        report.test_acc.unwrap()
    );
    for record in report.epochs.iter().take(5) {
        println!(
            "  epoch {:>2}: L_C {:.3}  L_A {:.3}  total {:.3}  val {:.1}",
            record.epoch, record.loss_c, record.loss_a, record.total, record.val_acc
        );
    }
}
