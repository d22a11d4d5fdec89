//! End-to-end checks of the `glam` binary: artifacts, exit codes, and
//! rerun reproducibility.

use glam::data::{save_dataset, synthetic_citation, SyntheticConfig};
use std::path::Path;
use std::process::{Command, Output};

fn glam_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glam"))
}

fn run(args: &[&str]) -> Output {
    glam_bin().args(args).output().expect("binary runs")
}

fn write_dataset(dir: &Path) {
    let cfg = SyntheticConfig {
        nodes: 90,
        features: 30,
        classes: 3,
        train_per_class: 5,
        val_size: 18,
        test_size: 30,
        words_per_node: 8,
        off_topic: 0.25,
        seed: 3,
    };
    let ds = synthetic_citation(&cfg).unwrap();
    save_dataset(&ds, dir).unwrap();
}

fn fast_flags<'a>(out: &'a Path, extra: &[&'a str]) -> Vec<String> {
    let mut v: Vec<String> = [
        "--k",
        "3",
        "--hidden-a",
        "8",
        "--hidden-c",
        "8",
        "--epochs",
        "8",
        "--raw-features",
        "--gcn-input",
        "raw",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.push(out.display().to_string());
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

#[test]
fn help_exists_for_every_command() {
    for cmd in [
        vec!["--help"],
        vec!["train", "--help"],
        vec!["sweep", "--help"],
        vec!["ablate", "--help"],
        vec!["analyze", "--help"],
        vec!["analyze", "graph-metrics", "--help"],
        vec!["analyze", "noise-curve", "--help"],
        vec!["analyze", "weight-sweep", "--help"],
        vec!["make-split", "--help"],
    ] {
        let out = run(&cmd);
        assert!(out.status.success(), "{cmd:?} failed");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn train_writes_artifacts_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);

    let run_once = |out_dir: &Path| -> Output {
        let mut args = vec![
            "train".to_string(),
            "--dataset".to_string(),
            data_dir.display().to_string(),
            "--seeds".to_string(),
            "0,1".to_string(),
        ];
        args.extend(fast_flags(out_dir, &[]));
        glam_bin().args(&args).output().unwrap()
    };

    let out_a = tmp.path().join("run_a");
    let res = run_once(&out_a);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("test accuracy:"), "stdout: {stdout}");
    for f in [
        "resolved_config.json",
        "summary.json",
        "report_0.json",
        "report_1.json",
        "curves_0.csv",
        "checkpoint.json",
        "timing.json",
    ] {
        assert!(out_a.join(f).is_file(), "missing {f}");
    }
    let curves = std::fs::read_to_string(out_a.join("curves_0.csv")).unwrap();
    assert!(curves.starts_with("epoch,loss_c,loss_a,total,val_acc\n"));

    // Byte-identical rerun, timing excluded.
    let out_b = tmp.path().join("run_b");
    assert!(run_once(&out_b).status.success());
    for f in ["summary.json", "report_0.json", "report_1.json", "resolved_config.json"] {
        let a = std::fs::read(out_a.join(f)).unwrap();
        let b = std::fs::read(out_b.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn train_epochs_flag_limits_report_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let out = tmp.path().join("out");
    let mut args = vec![
        "train".to_string(),
        "--dataset".to_string(),
        data_dir.display().to_string(),
    ];
    args.extend(fast_flags(&out, &[]));
    // Override the default epoch budget in place.
    let at = args.iter().position(|a| a == "--epochs").unwrap();
    args[at + 1] = "1".to_string();
    let res = glam_bin().args(&args).output().unwrap();
    assert!(res.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report_0.json")).unwrap()).unwrap();
    assert_eq!(report["epochs"].as_array().unwrap().len(), 1);
}

#[test]
fn missing_dataset_exits_one_and_names_path() {
    let res = run(&["train", "--dataset", "/nonexistent/corpus"]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("/nonexistent/corpus"), "stderr: {err}");
}

#[test]
fn divergence_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let out = tmp.path().join("out");
    let mut args = vec![
        "train".to_string(),
        "--dataset".to_string(),
        data_dir.display().to_string(),
    ];
    args.extend(fast_flags(&out, &["--lr", "1e155"]));
    let res = glam_bin().args(&args).output().unwrap();
    assert_eq!(res.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn sweep_budget_and_leaderboard_order() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let out = tmp.path().join("out");
    let mut args = vec![
        "sweep".to_string(),
        "--dataset".to_string(),
        data_dir.display().to_string(),
        "--budget".to_string(),
        "3".to_string(),
    ];
    args.extend(fast_flags(&out, &[]));
    let res = glam_bin().args(&args).output().unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let leaderboard: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("leaderboard.json")).unwrap())
            .unwrap();
    let rows = leaderboard.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let accs: Vec<f64> = rows
        .iter()
        .map(|r| r["mean_val_acc"].as_f64().unwrap())
        .collect();
    assert!(accs.windows(2).all(|w| w[0] >= w[1]), "unsorted {accs:?}");
    // The best config round-trips into the train command's --config.
    let best = out.join("best_config.json");
    let out2 = tmp.path().join("out2");
    let res = glam_bin()
        .args([
            "train",
            "--dataset",
            &data_dir.display().to_string(),
            "--config",
            &best.display().to_string(),
            "--epochs",
            "4",
            "--out",
            &out2.display().to_string(),
        ])
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
}

#[test]
fn ablate_emits_three_variants_and_graph_instrumentation() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let out = tmp.path().join("out");
    let mut args = vec![
        "ablate".to_string(),
        "--dataset".to_string(),
        data_dir.display().to_string(),
        "--seeds".to_string(),
        "0,1".to_string(),
    ];
    args.extend(fast_flags(&out, &[]));
    let res = glam_bin().args(&args).output().unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("ablation.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let by_name = |name: &str| {
        rows.iter()
            .find(|r| r["variant"] == name)
            .unwrap_or_else(|| panic!("missing variant {name}"))
    };
    assert_eq!(by_name("w/o affinity graph")["affinity_graph_built"], false);
    assert_eq!(by_name("glam")["affinity_graph_built"], true);
    let csv = std::fs::read_to_string(out.join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header + 3 rows
}

#[test]
fn graph_metrics_on_perfect_fixture_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    // Build a same-label-only edge file: nodes i and i+3 share (i % 3).
    let ds = glam::data::load_dataset(&data_dir).unwrap();
    let mut entries = Vec::new();
    for a in 0..ds.num_nodes() {
        for b in (a + 1)..ds.num_nodes().min(a + 7) {
            if ds.labels[a] == ds.labels[b] {
                entries.push((a, b, 1.0));
                entries.push((b, a, 1.0));
            }
        }
    }
    let g = glam::graphs::SparseGraph::from_entries(ds.num_nodes(), &entries).unwrap();
    let edges = tmp.path().join("edges.tsv");
    glam::graphs::write_edges(&g, &edges).unwrap();
    let out = tmp.path().join("out");
    let res = run(&[
        "analyze",
        "graph-metrics",
        "--dataset",
        &data_dir.display().to_string(),
        "--edges",
        &edges.display().to_string(),
        "--out",
        &out.display().to_string(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("graph_metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["homophily"].as_f64().unwrap(), 100.0);
    assert_eq!(metrics["weighted_homophily"].as_f64().unwrap(), 100.0);
    assert_eq!(metrics["bad_neighbor_ratio"].as_f64().unwrap(), 0.0);
}

#[test]
fn noise_curve_emits_requested_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let out = tmp.path().join("out");
    let mut args = vec![
        "analyze".to_string(),
        "noise-curve".to_string(),
        "--dataset".to_string(),
        data_dir.display().to_string(),
        "--mode".to_string(),
        "add".to_string(),
        "--fractions".to_string(),
        "0,0.25,0.5,1.0".to_string(),
        "--seeds".to_string(),
        "0".to_string(),
    ];
    args.extend(fast_flags(&out, &[]));
    let res = glam_bin().args(&args).output().unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(out.join("noise_curve_add.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5); // header + 4 points
    assert!(csv.starts_with("x,mean,std,n_seeds\n"));
}

#[test]
fn weight_sweep_emits_requested_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let out = tmp.path().join("out");
    let mut args = vec![
        "analyze".to_string(),
        "weight-sweep".to_string(),
        "--dataset".to_string(),
        data_dir.display().to_string(),
        "--weights".to_string(),
        "0,0.5,1".to_string(),
        "--seeds".to_string(),
        "0".to_string(),
    ];
    args.extend(fast_flags(&out, &[]));
    let res = glam_bin().args(&args).output().unwrap();
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(out.join("weight_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn make_split_is_seeded_and_validates_class_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let data_dir = tmp.path().join("data");
    write_dataset(&data_dir);
    let split_a = tmp.path().join("a.tsv");
    let split_b = tmp.path().join("b.tsv");
    for out in [&split_a, &split_b] {
        let res = run(&[
            "make-split",
            "--dataset",
            &data_dir.display().to_string(),
            "--per-class",
            "4",
            "--val",
            "12",
            "--test",
            "18",
            "--seed",
            "7",
            "--out",
            &out.display().to_string(),
        ]);
        assert!(
            res.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
    assert_eq!(
        std::fs::read(&split_a).unwrap(),
        std::fs::read(&split_b).unwrap(),
        "same seed must give identical split files"
    );
    let text = std::fs::read_to_string(&split_a).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(" train")).count(), 12);
    assert_eq!(text.lines().filter(|l| l.ends_with(" val")).count(), 12);
    assert_eq!(text.lines().filter(|l| l.ends_with(" test")).count(), 18);

    // A class with too few nodes fails with exit 1.
    let res = run(&[
        "make-split",
        "--dataset",
        &data_dir.display().to_string(),
        "--per-class",
        "40",
        "--val",
        "5",
        "--test",
        "5",
    ]);
    assert_eq!(res.status.code(), Some(1));
}
