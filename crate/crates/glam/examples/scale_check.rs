//! Timing sanity check at citation-corpus scale, using synthetic data of the
//! same shape. Prints kNN construction time and per-epoch training time.
//!
//! ```bash
//! cargo run --release --example scale_check
//! ```

use glam::data::{synthetic_citation, SyntheticConfig};
use glam::model::GlamHyperParams;
use glam::trainer::{train_with, PreparedData, TrainOptions};
use std::time::Instant;

fn main() {
    // Shape of the mid-size citation benchmark: 2708 nodes, 1433 features,
    // 7 classes, 140 labeled.
    let cfg = SyntheticConfig {
        nodes: 2708,
        features: 1433,
        classes: 7,
        train_per_class: 20,
        val_size: 500,
        test_size: 1000,
        words_per_node: 18,
        off_topic: 0.35,
        seed: 0,
    };
    let t0 = Instant::now();
    let dataset = synthetic_citation(&cfg).unwrap();
    println!("dataset generated in {:.2}s", t0.elapsed().as_secs_f64());

    let data = PreparedData::new(dataset);
    let t0 = Instant::now();
    let boosted = data.boosted_features();
    println!(
        "boosted features in {:.2}s ({}x{})",
        t0.elapsed().as_secs_f64(),
        boosted.rows(),
        boosted.cols()
    );
    let t0 = Instant::now();
    let knn = data.knn_graph(true, 20).unwrap();
    println!(
        "kNN (boosted, k=20) in {:.2}s: {} entries",
        t0.elapsed().as_secs_f64(),
        knn.edge_count()
    );

    let hp = GlamHyperParams {
        epochs: 30,
        patience: 30,
        ..GlamHyperParams::default()
    };
    let t0 = Instant::now();
    let (_, report) = train_with(&data, &hp, TrainOptions::default()).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "{} epochs in {:.2}s ({:.0} ms/epoch), val acc {:.2}, test acc {:.2}",
        report.epochs.len(),
        elapsed,
        1000.0 * elapsed / report.epochs.len() as f64,
        report.best_val_acc,
        report.test_acc.unwrap_or(f64::NAN)
    );
}
