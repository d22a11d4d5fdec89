//! Dataset loading, splits, and feature preparation.
//!
//! On-disk format (text, UTF-8, `#` comments and blank lines allowed):
//!
//! - `features.tsv`: first line `n d`, then `node_index feature_index value`
//!   triples (sparse COO, 0-based).
//! - `labels.tsv`: first line `C`, then `node_index label_id`, one per node.
//! - `split.tsv`: lines `node_index role` with role in {train, val, test};
//!   unlisted nodes are unlabeled-only.

mod features;
mod synthetic;

pub use features::{boosted_features, Features, Realized};
pub use synthetic::{synthetic_citation, toy_separable, SyntheticConfig};

use crate::numerics::SparseMatrix;
use crate::{GlamError, Result};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

/// Disjoint index sets; `train` is the labeled set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl DatasetSplit {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.train.is_empty() {
            return Err(GlamError::param("split has no train nodes"));
        }
        if self.val.is_empty() {
            return Err(GlamError::param("split has no val nodes"));
        }
        let mut seen = HashSet::new();
        for (role, set) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            for &i in set.iter() {
                if i >= n {
                    return Err(GlamError::param(format!(
                        "{role} index {i} out of range for n={n}"
                    )));
                }
                if !seen.insert(i) {
                    return Err(GlamError::param(format!(
                        "node {i} appears in more than one split role"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A transductive node-classification dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    /// n x d nonnegative bag-of-words / TF-IDF features.
    pub features: SparseMatrix,
    /// Ground-truth class per node, in [0, num_classes).
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub split: DatasetSplit,
    pub names: Option<Vec<String>>,
}

impl Dataset {
    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if self.labels.len() != n {
            return Err(GlamError::param(format!(
                "{} labels for {} nodes",
                self.labels.len(),
                n
            )));
        }
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= self.num_classes {
                return Err(GlamError::param(format!(
                    "node {i} has label {l} >= C={}",
                    self.num_classes
                )));
            }
        }
        self.split.validate(n)?;
        let mut present = vec![false; self.num_classes];
        for &i in &self.split.train {
            present[self.labels[i]] = true;
        }
        for (c, ok) in present.iter().enumerate() {
            if !ok {
                log::warn!("class {c} has no labeled training node");
            }
        }
        Ok(())
    }
}

struct LineReader {
    file: String,
    lines: Vec<(usize, String)>,
}

impl LineReader {
    fn open(path: &Path) -> Result<Self> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| GlamError::Load {
            file: file.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.to_string()))
            .filter(|(_, l)| {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            })
            .collect();
        Ok(LineReader { file, lines })
    }

    fn error(&self, line: usize, message: impl Into<String>) -> GlamError {
        GlamError::Load {
            file: self.file.clone(),
            line,
            message: message.into(),
        }
    }
}

fn parse_field<T: std::str::FromStr>(
    reader: &LineReader,
    line: usize,
    field: &str,
    what: &str,
) -> Result<T> {
    field
        .parse()
        .map_err(|_| reader.error(line, format!("cannot parse {what} from '{field}'")))
}

/// Loads a dataset directory and validates its invariants.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let feats = LineReader::open(&dir.join("features.tsv"))?;
    let (first_line, header) = feats
        .lines
        .first()
        .ok_or_else(|| feats.error(0, "empty features file"))?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_field(&feats, *first_line, parts.next().unwrap_or(""), "node count")?;
    let d: usize = parse_field(
        &feats,
        *first_line,
        parts.next().unwrap_or(""),
        "feature count",
    )?;
    let mut entries = Vec::with_capacity(feats.lines.len().saturating_sub(1));
    let mut seen = HashSet::new();
    for (line, text) in feats.lines.iter().skip(1) {
        let mut it = text.split_whitespace();
        let (a, b, c) = (
            it.next().unwrap_or(""),
            it.next().unwrap_or(""),
            it.next().unwrap_or(""),
        );
        let node: usize = parse_field(&feats, *line, a, "node index")?;
        let feat: usize = parse_field(&feats, *line, b, "feature index")?;
        let value: f64 = parse_field(&feats, *line, c, "value")?;
        if node >= n {
            return Err(feats.error(*line, format!("node index {node} out of range (n={n})")));
        }
        if feat >= d {
            return Err(feats.error(*line, format!("feature index {feat} out of range (d={d})")));
        }
        if !value.is_finite() {
            return Err(feats.error(*line, "non-finite feature value"));
        }
        if value < 0.0 {
            log::warn!("{}:{line}: negative feature value {value}", feats.file);
        }
        if !seen.insert((node, feat)) {
            return Err(feats.error(*line, format!("duplicate coordinate ({node},{feat})")));
        }
        entries.push((node, feat, value));
    }
    let features = SparseMatrix::from_coo(n, d, &entries)?;

    let labs = LineReader::open(&dir.join("labels.tsv"))?;
    let (first_line, header) = labs
        .lines
        .first()
        .ok_or_else(|| labs.error(0, "empty labels file"))?;
    let num_classes: usize = parse_field(&labs, *first_line, header.trim(), "class count")?;
    let mut labels = vec![usize::MAX; n];
    for (line, text) in labs.lines.iter().skip(1) {
        let mut it = text.split_whitespace();
        let node: usize = parse_field(&labs, *line, it.next().unwrap_or(""), "node index")?;
        let label: usize = parse_field(&labs, *line, it.next().unwrap_or(""), "label id")?;
        if node >= n {
            return Err(labs.error(*line, format!("node index {node} out of range (n={n})")));
        }
        if label >= num_classes {
            return Err(labs.error(*line, format!("label {label} >= C={num_classes}")));
        }
        if labels[node] != usize::MAX {
            return Err(labs.error(*line, format!("node {node} labeled twice")));
        }
        labels[node] = label;
    }
    if let Some(missing) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(labs.error(0, format!("node {missing} has no label line")));
    }

    let splits = LineReader::open(&dir.join("split.tsv"))?;
    let mut split = DatasetSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    let mut assigned = HashSet::new();
    for (line, text) in &splits.lines {
        let mut it = text.split_whitespace();
        let node: usize = parse_field(&splits, *line, it.next().unwrap_or(""), "node index")?;
        let role = it.next().unwrap_or("");
        if node >= n {
            return Err(splits.error(*line, format!("node index {node} out of range (n={n})")));
        }
        if !assigned.insert(node) {
            return Err(splits.error(*line, format!("node {node} assigned twice")));
        }
        match role {
            "train" => split.train.push(node),
            "val" => split.val.push(node),
            "test" => split.test.push(node),
            other => {
                return Err(splits.error(*line, format!("unknown role '{other}'")));
            }
        }
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();

    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let dataset = Dataset {
        name,
        features,
        labels,
        num_classes,
        split,
        names: None,
    };
    dataset.validate()?;
    Ok(dataset)
}

/// Writes a dataset in the canonical on-disk form; `load_dataset` of the
/// result round-trips bit-exactly.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut feats = String::new();
    writeln!(
        feats,
        "{} {}",
        dataset.num_nodes(),
        dataset.num_features()
    )
    .unwrap();
    for (r, c, v) in dataset.features.iter() {
        writeln!(feats, "{r} {c} {v}").unwrap();
    }
    std::fs::write(dir.join("features.tsv"), feats)?;

    let mut labs = String::new();
    writeln!(labs, "{}", dataset.num_classes).unwrap();
    for (i, l) in dataset.labels.iter().enumerate() {
        writeln!(labs, "{i} {l}").unwrap();
    }
    std::fs::write(dir.join("labels.tsv"), labs)?;

    let mut roles: Vec<(usize, &str)> = Vec::new();
    for &i in &dataset.split.train {
        roles.push((i, "train"));
    }
    for &i in &dataset.split.val {
        roles.push((i, "val"));
    }
    for &i in &dataset.split.test {
        roles.push((i, "test"));
    }
    roles.sort_unstable();
    let mut sp = String::new();
    for (i, role) in roles {
        writeln!(sp, "{i} {role}").unwrap();
    }
    std::fs::write(dir.join("split.tsv"), sp)?;
    Ok(())
}

/// Seeded split generation: fixes val/test first, then samples a per-class
/// training set from the remaining nodes.
pub fn make_split(
    labels: &[usize],
    num_classes: usize,
    per_class: usize,
    val_size: usize,
    test_size: usize,
    rng: &mut impl rand::Rng,
) -> Result<DatasetSplit> {
    use rand::seq::SliceRandom;
    let n = labels.len();
    if val_size + test_size >= n {
        return Err(GlamError::param(format!(
            "val+test ({}) leaves no training pool for n={n}",
            val_size + test_size
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let val: Vec<usize> = order[..val_size].to_vec();
    let test: Vec<usize> = order[val_size..val_size + test_size].to_vec();
    let pool = &order[val_size + test_size..];
    let mut train = Vec::with_capacity(per_class * num_classes);
    let mut counts = vec![0usize; num_classes];
    for &i in pool {
        let c = labels[i];
        if counts[c] < per_class {
            counts[c] += 1;
            train.push(i);
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count < per_class {
            return Err(GlamError::param(format!(
                "class {c} has only {count} available nodes, need {per_class}"
            )));
        }
    }
    let mut split = DatasetSplit { train, val, test };
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}
