//! Loading a dataset directory, re-serializing it, and generating a fresh
//! seeded split.
//!
//! ```bash
//! cargo run --example dataset_io
//! ```

use glam::data::{load_dataset, make_split, save_dataset};
use glam::rng::SeedStreams;
use std::path::Path;

fn main() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/tiny");
    let dataset = load_dataset(&fixture).expect("fixture parses");
    println!(
        "loaded '{}': n={}, d={}, C={}",
        dataset.name,
        dataset.num_nodes(),
        dataset.num_features(),
        dataset.num_classes
    );
    println!(
        "split: train={:?} val={:?} test={:?}",
        dataset.split.train, dataset.split.val, dataset.split.test
    );

    // Round-trip through the canonical writer.
    let tmp = std::env::temp_dir().join("glam_dataset_io");
    save_dataset(&dataset, &tmp).expect("writable temp dir");
    let reloaded = load_dataset(&tmp).expect("round-trips");
    assert_eq!(reloaded.labels, dataset.labels);
    println!("round-tripped through {}", tmp.display());

    // Standard-style split generation: val/test fixed first, then a
    // per-class training sample from the remainder.
    let labels: Vec<usize> = (0..120).map(|i| i % 3).collect();
    let mut rng = SeedStreams::new(42).stream("split");
    let split = make_split(&labels, 3, 20, 20, 30, &mut rng).expect("feasible split");
    println!(
        "generated split over 120 nodes: {} train / {} val / {} test",
        split.train.len(),
        split.val.len(),
        split.test.len()
    );
}
