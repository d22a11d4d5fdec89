//! Seeded random-search tuning: sample configurations from the protocol
//! ranges, rank by validation accuracy, then evaluate the winner over fresh
//! seeds. Test labels are never touched during the search.
//!
//! ```bash
//! cargo run --release --example hyperparameter_sweep
//! ```

use glam::data::{synthetic_citation, SyntheticConfig};
use glam::model::{GcnInput, GlamHyperParams};
use glam::trainer::{evaluate_seeds, sweep, ModelKind, PreparedData, SweepSpec};

fn main() {
    let cfg = SyntheticConfig {
        nodes: 300,
        features: 60,
        classes: 3,
        train_per_class: 10,
        val_size: 60,
        test_size: 120,
        words_per_node: 9,
        off_topic: 0.4,
        seed: 11,
    };
    let dataset = synthetic_citation(&cfg).unwrap();
    let data = PreparedData::new(dataset);

    let base = GlamHyperParams {
        epochs: 120,
        boosted: false,
        gcn_input: GcnInput::Raw,
        ..GlamHyperParams::default()
    };
    let spec = SweepSpec {
        budget: 24,
        seeds_per_trial: 1,
        seed: 0,
        hidden_a: vec![16, 32],
        hidden_c: vec![16, 32],
        k: vec![5, 8, 12],
        ..SweepSpec::default()
    };
    let outcome = sweep(&data, &spec, &base, ModelKind::Glam).unwrap();
    println!("top 5 of {} trials by validation accuracy:", spec.budget);
    for trial in outcome.leaderboard.iter().take(5) {
        println!(
            "  trial {:>3}: val {:.2}  (k={}, w_ck={:.2}, lr={:.4}, beta={:.3})",
            trial.trial,
            trial.mean_val_acc,
            trial.hyper.k,
            trial.hyper.w_ck,
            trial.hyper.lr,
            trial.hyper.beta
        );
    }

    let (summary, _) = evaluate_seeds(&data, &outcome.best, ModelKind::Glam, &[0, 1, 2, 3, 4])
        .unwrap();
    println!(
        "winner over 5 seeds: test accuracy {:.2} ± {:.2}",
        summary.mean_test_acc, summary.std_test_acc
    );
}
