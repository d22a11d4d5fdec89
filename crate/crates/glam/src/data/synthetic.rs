//! Seeded synthetic bag-of-words datasets for tests, examples, and
//! performance checks where no real corpus is required.

use crate::data::{make_split, Dataset};
use crate::numerics::SparseMatrix;
use crate::rng::SeedStreams;
use crate::Result;
use rand::Rng;

/// Knobs for [`synthetic_citation`]. Each class owns a block of topic words;
/// a node samples most words from its class topic and the rest uniformly,
/// which controls how noisy the resulting kNN graph is.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub nodes: usize,
    pub features: usize,
    pub classes: usize,
    pub train_per_class: usize,
    pub val_size: usize,
    pub test_size: usize,
    /// Words drawn per node.
    pub words_per_node: usize,
    /// Probability that a drawn word ignores the class topic.
    pub off_topic: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            nodes: 300,
            features: 60,
            classes: 3,
            train_per_class: 20,
            val_size: 60,
            test_size: 120,
            words_per_node: 12,
            off_topic: 0.2,
            seed: 0,
        }
    }
}

/// Generates a transductive dataset with class-correlated sparse features.
pub fn synthetic_citation(cfg: &SyntheticConfig) -> Result<Dataset> {
    let streams = SeedStreams::new(cfg.seed);
    let mut rng = streams.stream("synthetic");
    let topic_size = cfg.features / cfg.classes;
    assert!(topic_size >= 1, "need at least one feature per class");

    let labels: Vec<usize> = (0..cfg.nodes).map(|i| i % cfg.classes).collect();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut counts = vec![0.0f64; cfg.features];
    for (i, &label) in labels.iter().enumerate() {
        counts.fill(0.0);
        for _ in 0..cfg.words_per_node {
            let word = if rng.random::<f64>() < cfg.off_topic {
                rng.random_range(0..cfg.features)
            } else {
                label * topic_size + rng.random_range(0..topic_size)
            };
            counts[word] += 1.0;
        }
        for (w, &c) in counts.iter().enumerate() {
            if c > 0.0 {
                entries.push((i, w, c));
            }
        }
    }
    let features = SparseMatrix::from_coo(cfg.nodes, cfg.features, &entries)?;

    let mut split_rng = streams.stream("split");
    let split = make_split(
        &labels,
        cfg.classes,
        cfg.train_per_class,
        cfg.val_size,
        cfg.test_size,
        &mut split_rng,
    )?;
    let dataset = Dataset {
        name: "synthetic".to_string(),
        features,
        labels,
        num_classes: cfg.classes,
        split,
        names: None,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// A tiny cleanly separable dataset: distinct per-class words only.
pub fn toy_separable(nodes_per_class: usize, classes: usize, seed: u64) -> Dataset {
    // val/test sized so every class keeps enough pool nodes for training
    // regardless of how the shuffle lands.
    let spare = (nodes_per_class / 3).max(1);
    let cfg = SyntheticConfig {
        nodes: nodes_per_class * classes,
        features: classes * 4,
        classes,
        train_per_class: spare,
        val_size: spare,
        test_size: spare,
        words_per_node: 6,
        off_topic: 0.0,
        seed,
    };
    synthetic_citation(&cfg).expect("toy configuration is always valid")
}
