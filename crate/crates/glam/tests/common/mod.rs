//! Shared helpers for the integration suites.

use std::path::PathBuf;

/// Root of converted real datasets; criteria depending on them skip when the
/// directory is missing.
pub fn data_dir() -> PathBuf {
    std::env::var("GLAM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

pub fn dataset_available(name: &str) -> Option<PathBuf> {
    let dir = data_dir().join(name);
    if ["features.tsv", "labels.tsv", "split.tsv"]
        .iter()
        .all(|f| dir.join(f).is_file())
    {
        Some(dir)
    } else {
        None
    }
}

#[allow(dead_code)]
pub fn skip(criterion: &str, name: &str) {
    println!(
        "ACCEPTANCE {criterion}: SKIP (dataset '{name}' not found under {}; \
         see contrib/convert_planetoid.py and README)",
        data_dir().display()
    );
}
