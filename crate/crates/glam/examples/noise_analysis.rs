//! How GCN accuracy responds to graph corruption: adding cross-label edges
//! to a perfect kNN graph hurts quickly, while removing good edges barely
//! matters.
//!
//! ```bash
//! cargo run --release --example noise_analysis
//! ```

use glam::analysis::{curve_csv, noise_experiment, NoiseMode};
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
        words_per_node: 10,
        off_topic: 0.35,
        seed: 6,
    };
    let dataset = synthetic_citation(&cfg).unwrap();
    let hp = GlamHyperParams {
        k: 8,
        hidden_c: 32,
        dropout_c: 0.3,
        epochs: 150,
        boosted: false,
        gcn_input: GcnInput::Raw,
        ..GlamHyperParams::default()
    };
    let seeds = [0u64, 1, 2];
    let fractions = [0.0, 0.25, 0.5, 0.75, 1.0];

    let added = noise_experiment(&dataset, &hp, &fractions, NoiseMode::AddNoise, &seeds).unwrap();
    println!("adding noisy edges to the perfect kNN graph:");
    print!("{}", curve_csv(&added));

    let removed =
        noise_experiment(&dataset, &hp, &fractions, NoiseMode::RemoveGood, &seeds).unwrap();
    println!("\nremoving good edges from the perfect kNN graph:");
    print!("{}", curve_csv(&removed));

    let drop_noise = added[0].mean - added.last().unwrap().mean;
    let drop_removal = removed[0].mean - removed[2].mean;
    println!(
        "\nfull noise costs {drop_noise:.1} points; halving good edges costs {drop_removal:.1}"
    );
}
