//! The `glam` command line: train, sweep, ablate, analyze, make-split.
//!
//! Every command resolves its configuration as flags > config file >
//! defaults, writes the effective values to `resolved_config.json` in the
//! output directory, and emits deterministic JSON/CSV artifacts (timing is
//! kept in a separate file so reruns are byte-identical).

use crate::analysis::{
    affinity_weight_sweep, curve_csv, graph_metrics, noise_experiment, AttentionView, NoiseMode,
};
use crate::data::{load_dataset, make_split, Dataset};
use crate::graphs::{crop_incoming_to_labeled, read_edges};
use crate::model::{
    glam_forward, Checkpoint, ForwardOpts, GcnInput, GlamHyperParams, GlamInputs, ResamplePolicy,
};
use crate::rng::SeedStreams;
use crate::trainer::{
    evaluate_seeds, sweep, ModelKind, PreparedData, SweepOutcome, SweepSpec,
};
use crate::{GlamError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "glam",
    version,
    about = "Semi-supervised node classification with a learned graph",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for sweeps and experiments (also GLAM_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and report mean/std test accuracy over seeds.
    Train(TrainArgs),
    /// Random-search hyperparameter sweep ranked by validation accuracy.
    Sweep(SweepArgs),
    /// Full model vs. the two single-component ablations.
    Ablate(AblateArgs),
    /// Graph quality metrics and diagnostic experiment curves.
    Analyze(AnalyzeArgs),
    /// Generate a seeded train/val/test split from a labels file.
    MakeSplit(MakeSplitArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Glam,
    GcnKnn,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> ModelKind {
        match m {
            ModelArg::Glam => ModelKind::Glam,
            ModelArg::GcnKnn => ModelKind::GcnKnn,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GcnInputArg {
    Raw,
    Boosted,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ResampleArg {
    PerEpoch,
    Once,
}

/// Hyperparameter overrides shared by the training-style commands.
#[derive(Args, Clone)]
struct HyperOverrides {
    /// JSON file with hyperparameters (partial files allowed).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    w_ck: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    alpha_a: Option<f64>,
    #[arg(long)]
    alpha_c: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    dropout_a: Option<f64>,
    #[arg(long)]
    dropout_c: Option<f64>,
    #[arg(long)]
    hidden_a: Option<usize>,
    #[arg(long)]
    hidden_c: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Master seed (per-run seeds come from --seeds where applicable).
    #[arg(long)]
    seed: Option<u64>,
    /// Use boosted features for kNN and the affinity model.
    #[arg(long, conflicts_with = "raw_features")]
    boosted: bool,
    /// Use raw features everywhere.
    #[arg(long)]
    raw_features: bool,
    #[arg(long, value_enum)]
    gcn_input: Option<GcnInputArg>,
    #[arg(long, value_enum)]
    resample: Option<ResampleArg>,
}

impl HyperOverrides {
    /// flags > config file > defaults.
    fn resolve(&self) -> Result<GlamHyperParams> {
        let mut hp = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| GlamError::Load {
                    file: path.display().to_string(),
                    line: 0,
                    message: e.to_string(),
                })?;
                serde_json::from_str(&text)?
            }
            None => GlamHyperParams::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { hp.$field = v; })*
            };
        }
        apply!(k, w_ck, beta, alpha_a, alpha_c, lr, dropout_a, dropout_c, hidden_a, hidden_c, temperature, epochs, patience, seed);
        if self.boosted {
            hp.boosted = true;
        }
        if self.raw_features {
            hp.boosted = false;
        }
        if let Some(g) = self.gcn_input {
            hp.gcn_input = match g {
                GcnInputArg::Raw => GcnInput::Raw,
                GcnInputArg::Boosted => GcnInput::Boosted,
            };
        }
        if let Some(r) = self.resample {
            hp.resample = match r {
                ResampleArg::PerEpoch => ResamplePolicy::PerEpoch,
                ResampleArg::Once => ResamplePolicy::Once,
            };
        }
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory (features.tsv, labels.tsv, split.tsv).
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "glam")]
    model: ModelArg,
    /// Comma-separated seeds, one training run each.
    #[arg(long, default_value = "0", value_parser = parse_u64_list)]
    seeds: std::vec::Vec<u64>,
    #[arg(long, default_value = "runs/train")]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperOverrides,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "glam")]
    model: ModelArg,
    /// JSON file with sweep ranges (defaults follow the protocol bounds).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seeds_per_trial: Option<usize>,
    #[arg(long, default_value = "runs/sweep")]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperOverrides,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "0,1,2,3,4", value_parser = parse_u64_list)]
    seeds: std::vec::Vec<u64>,
    #[arg(long, default_value = "runs/ablate")]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperOverrides,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(subcommand)]
    what: AnalyzeCommand,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Homophily, weighted homophily, and bad-neighbor ratio of a graph.
    GraphMetrics(GraphMetricsArgs),
    /// Test accuracy under noise added to / good edges removed from the
    /// perfect kNN graph.
    NoiseCurve(NoiseCurveArgs),
    /// Test accuracy as a function of the affinity-graph weight.
    WeightSweep(WeightSweepArgs),
}

#[derive(Args)]
struct GraphMetricsArgs {
    /// Dataset directory (labels are always required).
    #[arg(long)]
    dataset: PathBuf,
    /// Score an exported edges.tsv file.
    #[arg(long, conflicts_with = "checkpoint")]
    edges: Option<PathBuf>,
    /// Score a trained checkpoint's normalized Laplacian.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    exclude_self_loops: bool,
    #[arg(long, default_value = "runs/analyze")]
    out: PathBuf,
}

#[derive(Args)]
struct NoiseCurveArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    mode: NoiseModeArg,
    #[arg(long, value_parser = parse_f64_list)]
    fractions: std::vec::Vec<f64>,
    #[arg(long, default_value = "0,1,2", value_parser = parse_u64_list)]
    seeds: std::vec::Vec<u64>,
    #[arg(long, default_value = "runs/analyze")]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperOverrides,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseModeArg {
    Add,
    Remove,
}

#[derive(Args)]
struct WeightSweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Affinity-graph weights to evaluate, e.g. 0,0.1,...,1.0.
    #[arg(long, value_parser = parse_f64_list)]
    weights: std::vec::Vec<f64>,
    #[arg(long, default_value = "0,1,2", value_parser = parse_u64_list)]
    seeds: std::vec::Vec<u64>,
    #[arg(long, default_value = "runs/analyze")]
    out: PathBuf,
    #[command(flatten)]
    hyper: HyperOverrides,
}

#[derive(Args)]
struct MakeSplitArgs {
    /// Dataset directory containing labels.tsv.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 20)]
    per_class: usize,
    #[arg(long, default_value_t = 500)]
    val: usize,
    #[arg(long, default_value_t = 1000)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; defaults to <dataset>/split.tsv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_u64_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<u64>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect()
}

/// Entry point used by the binary; returns the process exit code
/// (0 success, 1 usage/config error, 2 numerical failure).
pub fn run() -> i32 {
    run_from(std::env::args())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    configure_workers(cli.workers);
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(GlamError::Divergence(msg)) => {
            eprintln!("error: training diverged: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn configure_workers(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("GLAM_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Analyze(args) => match args.what {
            AnalyzeCommand::GraphMetrics(a) => cmd_graph_metrics(a),
            AnalyzeCommand::NoiseCurve(a) => cmd_noise_curve(a),
            AnalyzeCommand::WeightSweep(a) => cmd_weight_sweep(a),
        },
        Command::MakeSplit(args) => cmd_make_split(args),
    }
}

fn load_dataset_checked(path: &Path) -> Result<Dataset> {
    if !path.is_dir() {
        return Err(GlamError::Parameter(format!(
            "dataset directory not found: {}",
            path.display()
        )));
    }
    load_dataset(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(dir.join(name), json)?;
    Ok(())
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    command: &'a str,
    dataset: String,
    model: &'a str,
    seeds: &'a [u64],
    hyper: &'a GlamHyperParams,
}

fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Glam => "glam",
        ModelKind::GcnKnn => "gcn-knn",
    }
}

#[derive(Serialize)]
struct Timing {
    total_secs: f64,
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let started = std::time::Instant::now();
    let hp = args.hyper.resolve()?;
    let kind: ModelKind = args.model.into();
    let dataset = load_dataset_checked(&args.dataset)?;
    let data = PreparedData::new(dataset);
    write_json(
        &args.out,
        "resolved_config.json",
        &ResolvedConfig {
            command: "train",
            dataset: args.dataset.display().to_string(),
            model: model_name(kind),
            seeds: &args.seeds,
            hyper: &hp,
        },
    )?;
    let (summary, reports) = evaluate_seeds(&data, &hp, kind, &args.seeds)?;
    if reports.is_empty() {
        return Err(GlamError::Divergence(
            "every seed diverged; see summary.json".to_string(),
        ));
    }
    write_json(&args.out, "summary.json", &summary)?;
    for report in &reports {
        std::fs::write(
            args.out.join(format!("report_{}.json", report.seed)),
            report.to_json()?,
        )?;
        std::fs::write(
            args.out.join(format!("curves_{}.csv", report.seed)),
            report.curves_csv(),
        )?;
    }
    // Checkpoint the first seed's parameters.
    let first = GlamHyperParams {
        seed: args.seeds[0],
        ..hp.clone()
    };
    let (params, _) = crate::trainer::train_with(
        &data,
        &first,
        crate::trainer::TrainOptions {
            kind,
            skip_test: true,
            graph_override: None,
        },
    )?;
    Checkpoint::from_params(&params, &first, data.dataset.num_classes)
        .save(&args.out.join("checkpoint.json"))?;
    write_json(
        &args.out,
        "timing.json",
        &Timing {
            total_secs: started.elapsed().as_secs_f64(),
        },
    )?;
    println!(
        "test accuracy: {:.2} ± {:.2} over {} seed(s)",
        summary.mean_test_acc,
        summary.std_test_acc,
        summary.per_seed_test_acc.len()
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let started = std::time::Instant::now();
    let base = args.hyper.resolve()?;
    let kind: ModelKind = args.model.into();
    let mut spec: SweepSpec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| GlamError::Load {
                file: path.display().to_string(),
                line: 0,
                message: e.to_string(),
            })?;
            serde_json::from_str(&text)?
        }
        None => SweepSpec::default(),
    };
    if let Some(b) = args.budget {
        spec.budget = b;
    }
    if let Some(s) = args.seeds_per_trial {
        spec.seeds_per_trial = s;
    }
    spec.seed = base.seed;
    spec.validate()?;
    let dataset = load_dataset_checked(&args.dataset)?;
    let data = PreparedData::new(dataset);
    std::fs::create_dir_all(&args.out)?;
    write_json(
        &args.out,
        "resolved_config.json",
        &ResolvedConfig {
            command: "sweep",
            dataset: args.dataset.display().to_string(),
            model: model_name(kind),
            seeds: &[],
            hyper: &base,
        },
    )?;
    write_json(&args.out, "sweep_spec.json", &spec)?;
    let outcome: SweepOutcome = sweep(&data, &spec, &base, kind)?;
    write_json(&args.out, "leaderboard.json", &outcome.leaderboard)?;
    write_json(&args.out, "best_config.json", &outcome.best)?;
    write_json(
        &args.out,
        "timing.json",
        &Timing {
            total_secs: started.elapsed().as_secs_f64(),
        },
    )?;
    let top = &outcome.leaderboard[0];
    println!(
        "best val accuracy: {:.2} (trial {} of {})",
        top.mean_val_acc,
        top.trial,
        outcome.leaderboard.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct AblationRow {
    variant: String,
    mean_test_acc: f64,
    std_test_acc: f64,
    affinity_graph_built: bool,
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let started = std::time::Instant::now();
    let hp = args.hyper.resolve()?;
    let dataset = load_dataset_checked(&args.dataset)?;
    let data = PreparedData::new(dataset);
    write_json(
        &args.out,
        "resolved_config.json",
        &ResolvedConfig {
            command: "ablate",
            dataset: args.dataset.display().to_string(),
            model: "glam",
            seeds: &args.seeds,
            hyper: &hp,
        },
    )?;
    let variants: Vec<(&str, GlamHyperParams)> = vec![
        ("glam", hp.clone()),
        (
            "w/o affinity graph",
            GlamHyperParams {
                w_ck: 1.0,
                ..hp.clone()
            },
        ),
        (
            "w/o affinity loss",
            GlamHyperParams {
                beta: 0.0,
                ..hp.clone()
            },
        ),
    ];
    let mut rows = Vec::new();
    for (name, vhp) in &variants {
        let (summary, reports) = evaluate_seeds(&data, vhp, ModelKind::Glam, &args.seeds)?;
        let built = reports.iter().any(|r| r.affinity_graph_built);
        if *name == "w/o affinity graph" && built {
            return Err(GlamError::State(
                "w/o-affinity-graph variant constructed an affinity graph".to_string(),
            ));
        }
        rows.push(AblationRow {
            variant: name.to_string(),
            mean_test_acc: summary.mean_test_acc,
            std_test_acc: summary.std_test_acc,
            affinity_graph_built: built,
        });
    }
    write_json(&args.out, "ablation.json", &rows)?;
    let mut csv = String::from("variant,mean_test_acc,std_test_acc\n");
    for r in &rows {
        writeln!(csv, "{},{},{}", r.variant, r.mean_test_acc, r.std_test_acc).unwrap();
    }
    std::fs::write(args.out.join("ablation.csv"), csv)?;
    write_json(
        &args.out,
        "timing.json",
        &Timing {
            total_secs: started.elapsed().as_secs_f64(),
        },
    )?;
    for r in &rows {
        println!("{}: {:.2} ± {:.2}", r.variant, r.mean_test_acc, r.std_test_acc);
    }
    Ok(())
}

fn cmd_graph_metrics(args: GraphMetricsArgs) -> Result<()> {
    let dataset = load_dataset_checked(&args.dataset)?;
    let view = match (&args.edges, &args.checkpoint) {
        (Some(edges), None) => AttentionView::laplacian(read_edges(edges)?),
        (None, Some(ckpt_path)) => {
            let ckpt = Checkpoint::load(ckpt_path)?;
            let (params, hp) = ckpt.into_params()?;
            let data = PreparedData::new(dataset.clone());
            let x_model = data.features(hp.boosted);
            let x_gcn = match (hp.boosted, hp.gcn_input) {
                (true, GcnInput::Boosted) => data.features(true),
                _ => data.features(false),
            };
            let knn = data.knn_graph(hp.boosted, hp.k)?;
            let g_ck = match params.affinity {
                Some(_) => crop_incoming_to_labeled(&knn, &dataset.split.train),
                None => knn,
            };
            let targets =
                crate::affinity::build_affinity_targets(&dataset.split.train, &dataset.labels);
            let onehot = crate::model::one_hot_train_labels(
                &dataset.labels,
                &dataset.split.train,
                dataset.num_classes,
            );
            let inputs = GlamInputs {
                x_affinity: &x_model,
                x_gcn: &x_gcn,
                g_ck: &g_ck,
                targets: &targets,
                train_nodes: &dataset.split.train,
                train_onehot: &onehot,
            };
            let streams = SeedStreams::new(hp.seed);
            let mut r1 = streams.stream("analyze-dropout");
            let mut r2 = streams.stream("analyze-gumbel");
            let fwd = glam_forward(&params, &hp, &inputs, ForwardOpts::eval(), &mut r1, &mut r2)?;
            AttentionView::laplacian(fwd.g_hat.clone())
        }
        _ => {
            return Err(GlamError::Parameter(
                "provide exactly one of --edges or --checkpoint".to_string(),
            ))
        }
    };
    let metrics = graph_metrics(&view, &dataset.labels, args.exclude_self_loops);
    write_json(&args.out, "graph_metrics.json", &metrics)?;
    println!(
        "homophily: {:.2}  weighted homophily: {:.2}  bad-neighbor ratio: {:.2}",
        metrics.homophily, metrics.weighted_homophily, metrics.bad_neighbor_ratio
    );
    Ok(())
}

fn cmd_noise_curve(args: NoiseCurveArgs) -> Result<()> {
    let hp = args.hyper.resolve()?;
    if args.fractions.is_empty() {
        return Err(GlamError::Parameter("need at least one fraction".to_string()));
    }
    let dataset = load_dataset_checked(&args.dataset)?;
    let mode = match args.mode {
        NoiseModeArg::Add => NoiseMode::AddNoise,
        NoiseModeArg::Remove => NoiseMode::RemoveGood,
    };
    write_json(
        &args.out,
        "resolved_config.json",
        &ResolvedConfig {
            command: "analyze noise-curve",
            dataset: args.dataset.display().to_string(),
            model: "gcn-knn",
            seeds: &args.seeds,
            hyper: &hp,
        },
    )?;
    let points = noise_experiment(&dataset, &hp, &args.fractions, mode, &args.seeds)?;
    let name = match mode {
        NoiseMode::AddNoise => "noise_curve_add.csv",
        NoiseMode::RemoveGood => "noise_curve_remove.csv",
    };
    std::fs::write(args.out.join(name), curve_csv(&points))?;
    println!("wrote {} points to {}", points.len(), args.out.join(name).display());
    Ok(())
}

fn cmd_weight_sweep(args: WeightSweepArgs) -> Result<()> {
    let hp = args.hyper.resolve()?;
    if args.weights.is_empty() {
        return Err(GlamError::Parameter("need at least one weight".to_string()));
    }
    let dataset = load_dataset_checked(&args.dataset)?;
    write_json(
        &args.out,
        "resolved_config.json",
        &ResolvedConfig {
            command: "analyze weight-sweep",
            dataset: args.dataset.display().to_string(),
            model: "glam",
            seeds: &args.seeds,
            hyper: &hp,
        },
    )?;
    let points = affinity_weight_sweep(&dataset, &hp, &args.weights, &args.seeds)?;
    std::fs::write(args.out.join("weight_sweep.csv"), curve_csv(&points))?;
    println!(
        "wrote {} points to {}",
        points.len(),
        args.out.join("weight_sweep.csv").display()
    );
    Ok(())
}

fn cmd_make_split(args: MakeSplitArgs) -> Result<()> {
    let labels_path = args.dataset.join("labels.tsv");
    let text = std::fs::read_to_string(&labels_path).map_err(|e| GlamError::Load {
        file: labels_path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let num_classes: usize = lines
        .next()
        .and_then(|l| l.parse().ok())
        .ok_or_else(|| GlamError::Load {
            file: labels_path.display().to_string(),
            line: 1,
            message: "expected class count".into(),
        })?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for l in lines {
        let mut it = l.split_whitespace();
        let node: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| {
            GlamError::Load {
                file: labels_path.display().to_string(),
                line: 0,
                message: format!("bad label line '{l}'"),
            }
        })?;
        let label: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| {
            GlamError::Load {
                file: labels_path.display().to_string(),
                line: 0,
                message: format!("bad label line '{l}'"),
            }
        })?;
        pairs.push((node, label));
    }
    let n = pairs.len();
    let mut labels = vec![0usize; n];
    for (node, label) in pairs {
        if node >= n || label >= num_classes {
            return Err(GlamError::Parameter(format!(
                "label line out of range: node {node} label {label}"
            )));
        }
        labels[node] = label;
    }
    let streams = SeedStreams::new(args.seed);
    let mut rng = streams.stream("split");
    let split = make_split(&labels, num_classes, args.per_class, args.val, args.test, &mut rng)?;
    let out = args
        .out
        .unwrap_or_else(|| args.dataset.join("split.tsv"));
    let mut roles: Vec<(usize, &str)> = Vec::new();
    for &i in &split.train {
        roles.push((i, "train"));
    }
    for &i in &split.val {
        roles.push((i, "val"));
    }
    for &i in &split.test {
        roles.push((i, "test"));
    }
    roles.sort_unstable();
    let mut text = String::new();
    for (i, role) in roles {
        writeln!(text, "{i} {role}").unwrap();
    }
    std::fs::write(&out, text)?;
    println!(
        "wrote split with {} train / {} val / {} test to {}",
        split.train.len(),
        split.val.len(),
        split.test.len(),
        out.display()
    );
    Ok(())
}
