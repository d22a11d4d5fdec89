//! Benchmark reproduction against the converted public Cora corpus: tuned
//! sweep, five-seed evaluation, ablations, and graph diagnostics.
//!
//! Convert the public files first (see contrib/convert_planetoid.py), so
//! `data/cora/{features,labels,split}.tsv` exist, then:
//!
//! ```bash
//! cargo run --release --example cora_reproduction
//! ```
//!
//! A full 200-trial sweep takes an hour or two on a laptop; set
//! `SWEEP_BUDGET` to something small for a quicker look.

use glam::data::load_dataset;
use glam::model::GlamHyperParams;
use glam::trainer::{evaluate_seeds, sweep, ModelKind, PreparedData, SweepSpec};
use std::path::PathBuf;

fn main() {
    let data_dir = std::env::var("GLAM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("data"));
    let cora = data_dir.join("cora");
    let dataset = match load_dataset(&cora) {
        Ok(ds) => ds,
        Err(e) => {
            eprintln!("could not load {}: {e}", cora.display());
            eprintln!("convert the public files first:");
            eprintln!("  python3 contrib/convert_planetoid.py --input <planetoid-dir> --output data/");
            std::process::exit(1);
        }
    };
    println!(
        "cora: {} nodes, {} features, {} classes, {} labeled",
        dataset.num_nodes(),
        dataset.num_features(),
        dataset.num_classes,
        dataset.split.train.len()
    );
    let data = PreparedData::new(dataset);

    let budget: usize = std::env::var("SWEEP_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(200);
    let spec = SweepSpec {
        budget,
        seeds_per_trial: 1,
        seed: 0,
        ..SweepSpec::default()
    };
    let base = GlamHyperParams::default(); // boosted features on by default

    println!("sweeping {} configurations...", spec.budget);
    let glam_best = sweep(&data, &spec, &base, ModelKind::Glam).unwrap().best;
    println!("winner: {}", serde_json::to_string(&glam_best).unwrap());
    let (glam_summary, _) =
        evaluate_seeds(&data, &glam_best, ModelKind::Glam, &[0, 1, 2, 3, 4]).unwrap();
    println!(
        "glam (boosted): {:.2} ± {:.2}   [reference: 72.64 ± 0.35]",
        glam_summary.mean_test_acc, glam_summary.std_test_acc
    );

    let gcn_best = sweep(&data, &spec, &base, ModelKind::GcnKnn).unwrap().best;
    let (gcn_summary, _) =
        evaluate_seeds(&data, &gcn_best, ModelKind::GcnKnn, &[0, 1, 2, 3, 4]).unwrap();
    println!(
        "gcn-knn (boosted): {:.2} ± {:.2}   [reference: 70.20 ± 0.81]",
        gcn_summary.mean_test_acc, gcn_summary.std_test_acc
    );

    for (name, hp) in [
        (
            "w/o affinity graph",
            GlamHyperParams {
                w_ck: 1.0,
                ..glam_best.clone()
            },
        ),
        (
            "w/o affinity loss",
            GlamHyperParams {
                beta: 0.0,
                ..glam_best.clone()
            },
        ),
    ] {
        let (summary, _) = evaluate_seeds(&data, &hp, ModelKind::Glam, &[0, 1, 2, 3, 4]).unwrap();
        println!(
            "{name}: {:.2} ± {:.2}",
            summary.mean_test_acc, summary.std_test_acc
        );
    }
}
