//! Directed weighted graphs and the graph surgery used throughout.
//!
//! Orientation contract: an entry `(dest, src, w)` means source `src` sends
//! information to destination `dest`. Row `i` of the adjacency therefore
//! lists the in-neighbors of `i`, and "incoming edges to labeled nodes" are
//! exactly the rows of labeled nodes.

use crate::data::{Features, Realized};
use crate::numerics::{DenseMatrix, SparseMatrix};
use crate::{GlamError, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

/// Directed weighted adjacency over `n` nodes; weights are finite and
/// strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    adj: SparseMatrix,
}

impl SparseGraph {
    /// Builds from `(dest, src, weight)` triples.
    pub fn from_entries(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        for &(_, _, w) in entries {
            if !(w.is_finite() && w > 0.0) {
                return Err(GlamError::param(format!("edge weight {w} must be positive")));
            }
        }
        Ok(SparseGraph {
            adj: SparseMatrix::from_coo(n, n, entries)?,
        })
    }

    pub fn empty(n: usize) -> Self {
        SparseGraph {
            adj: SparseMatrix::from_coo(n, n, &[]).expect("empty graph is valid"),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.rows()
    }

    /// Number of directed entries.
    pub fn edge_count(&self) -> usize {
        self.adj.nnz()
    }

    /// Iterates `(dest, src, weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj.iter()
    }

    /// In-neighbors of `dest` as (sources, weights).
    pub fn in_edges(&self, dest: usize) -> (&[usize], &[f64]) {
        self.adj.row_entries(dest)
    }

    pub fn weight(&self, dest: usize, src: usize) -> f64 {
        let (cols, vals) = self.adj.row_entries(dest);
        match cols.binary_search(&src) {
            Ok(at) => vals[at],
            Err(_) => 0.0,
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.adj
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(d, s, w)| self.weight(s, d) == w)
    }

    /// Undirected pairs (a < b) with an entry in either direction.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .iter()
            .filter(|&(d, s, _)| d != s)
            .map(|(d, s, _)| if d < s { (d, s) } else { (s, d) })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

/// Exact cosine top-k neighbor lists, cached so graphs for several `k` values
/// can be cut from one similarity pass.
pub struct KnnIndex {
    k_max: usize,
    /// Per node, neighbor ids ordered by (similarity desc, index asc).
    neighbors: Vec<Vec<u32>>,
}

impl KnnIndex {
    pub fn build(x: &Features, k_max: usize) -> Result<Self> {
        let n = x.rows();
        if k_max >= n {
            return Err(GlamError::param(format!("k={k_max} must be < n={n}")));
        }
        let realized = x.realize();
        let neighbors = match realized {
            Realized::Sparse(s) => Self::neighbors_sparse(s, k_max),
            Realized::Dense(d) => Self::neighbors_dense(d, k_max),
        };
        Ok(KnnIndex { k_max, neighbors })
    }

    fn neighbors_sparse(x: &SparseMatrix, k_max: usize) -> Vec<Vec<u32>> {
        let n = x.rows();
        let norms: Vec<f64> = (0..n)
            .map(|i| x.row_entries(i).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        (0..n)
            .into_par_iter()
            .map(|i| {
                if norms[i] == 0.0 {
                    log::warn!("node {i} has no nonzero features; no out-edges");
                    return Vec::new();
                }
                let mut query = vec![0.0f64; x.cols()];
                let (cols, vals) = x.row_entries(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    query[c] = v / norms[i];
                }
                let mut scores: Vec<f64> = vec![0.0; n];
                for j in 0..n {
                    if j == i || norms[j] == 0.0 {
                        continue;
                    }
                    let (jc, jv) = x.row_entries(j);
                    let mut dot = 0.0;
                    for (&c, &v) in jc.iter().zip(jv) {
                        dot += query[c] * v;
                    }
                    scores[j] = dot / norms[j];
                }
                top_k(&scores, i, k_max, &norms)
            })
            .collect()
    }

    fn neighbors_dense(x: &DenseMatrix, k_max: usize) -> Vec<Vec<u32>> {
        let n = x.rows();
        let d = x.cols();
        let mut unit = x.clone();
        let mut norms = vec![0.0f64; n];
        for i in 0..n {
            let row = unit.row_mut(i);
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            norms[i] = norm;
            if norm > 0.0 {
                for v in row.iter_mut() {
                    *v /= norm;
                }
            }
        }
        (0..n)
            .into_par_iter()
            .map(|i| {
                if norms[i] == 0.0 {
                    log::warn!("node {i} has no nonzero features; no out-edges");
                    return Vec::new();
                }
                let q = &unit.values()[i * d..(i + 1) * d];
                let mut scores = vec![0.0f64; n];
                for (j, s) in scores.iter_mut().enumerate() {
                    if j == i {
                        continue;
                    }
                    let row = &unit.values()[j * d..(j + 1) * d];
                    let mut dot = 0.0;
                    for (a, b) in q.iter().zip(row) {
                        dot += a * b;
                    }
                    *s = dot;
                }
                top_k(&scores, i, k_max, &norms)
            })
            .collect()
    }

    /// Unit-weight graph from each node to its top-k neighbors, symmetrized
    /// by union.
    pub fn graph(&self, k: usize) -> Result<SparseGraph> {
        if k < 1 || k > self.k_max {
            return Err(GlamError::param(format!(
                "k={k} outside cached range 1..={}",
                self.k_max
            )));
        }
        let mut pairs = HashSet::new();
        for (i, neigh) in self.neighbors.iter().enumerate() {
            for &j in neigh.iter().take(k) {
                let j = j as usize;
                pairs.insert(if i < j { (i, j) } else { (j, i) });
            }
        }
        let mut entries = Vec::with_capacity(pairs.len() * 2);
        for (a, b) in pairs {
            entries.push((a, b, 1.0));
            entries.push((b, a, 1.0));
        }
        SparseGraph::from_entries(self.neighbors.len(), &entries)
    }
}

fn top_k(scores: &[f64], this: usize, k: usize, norms: &[f64]) -> Vec<u32> {
    let mut candidates: Vec<u32> = (0..scores.len() as u32)
        .filter(|&j| j as usize != this && norms[j as usize] > 0.0)
        .collect();
    let cmp = |&a: &u32, &b: &u32| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    };
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, cmp);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(cmp);
    candidates
}

/// Cosine kNN graph: top-k per node, ties broken by ascending index,
/// symmetrized by union. Weights are 1.
pub fn knn_graph(x: &Features, k: usize) -> Result<SparseGraph> {
    KnnIndex::build(x, k)?.graph(k)
}

/// Removes every entry whose destination is a labeled node. The result may
/// be asymmetric.
pub fn crop_incoming_to_labeled(g: &SparseGraph, labeled: &[usize]) -> SparseGraph {
    let labeled: HashSet<usize> = labeled.iter().copied().collect();
    SparseGraph {
        adj: g.matrix().filter(|dest, _, _| !labeled.contains(&dest)),
    }
}

/// Entrywise `w_a * g_a + (1 - w_a) * g_ck`; exact zeros are dropped.
pub fn combine_graphs(g_a: &SparseGraph, g_ck: &SparseGraph, w_a: f64) -> Result<SparseGraph> {
    if g_a.n() != g_ck.n() {
        return Err(GlamError::dim(format!(
            "combine_graphs: {} vs {} nodes",
            g_a.n(),
            g_ck.n()
        )));
    }
    if !(0.0..=1.0).contains(&w_a) {
        return Err(GlamError::param(format!("w_a={w_a} not in [0,1]")));
    }
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (d, s, w) in g_a.iter() {
        let v = w_a * w;
        if v != 0.0 {
            entries.push((d, s, v));
        }
    }
    let w_ck = 1.0 - w_a;
    for (d, s, w) in g_ck.iter() {
        let v = w_ck * w;
        if v != 0.0 {
            entries.push((d, s, v));
        }
    }
    // Merge overlaps.
    entries.sort_unstable_by_key(|&(d, s, _)| (d, s));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for (d, s, w) in entries {
        match merged.last_mut() {
            Some((pd, ps, pw)) if *pd == d && *ps == s => *pw += w,
            _ => merged.push((d, s, w)),
        }
    }
    SparseGraph::from_entries(g_a.n(), &merged)
}

/// Symmetric in-degree normalization with self-loops:
/// `D^{-1/2} (G + I) D^{-1/2}` where `D` holds the row sums of `G + I`.
/// Every diagonal of `D` is at least 1, so no division by zero can occur.
pub fn indegree_laplacian(g: &SparseGraph) -> SparseGraph {
    indegree_laplacian_with_degrees(g).0
}

pub(crate) fn indegree_laplacian_with_degrees(g: &SparseGraph) -> (SparseGraph, Vec<f64>) {
    let n = g.n();
    let mut degrees = vec![1.0f64; n]; // self-loop
    for (d, _, w) in g.iter() {
        degrees[d] += w;
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(g.edge_count() + n);
    let mut diag_extra = vec![0.0f64; n];
    for (dst, src, w) in g.iter() {
        if dst == src {
            diag_extra[dst] = w;
        } else {
            entries.push((dst, src, w * inv_sqrt[dst] * inv_sqrt[src]));
        }
    }
    for i in 0..n {
        entries.push((i, i, (diag_extra[i] + 1.0) * inv_sqrt[i] * inv_sqrt[i]));
    }
    let lap = SparseGraph::from_entries(n, &entries).expect("normalized weights stay positive");
    (lap, degrees)
}

/// Percentage of non-self-loop entries whose endpoints share a label.
pub fn homophily(g: &SparseGraph, labels: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut same = 0usize;
    for (d, s, _) in g.iter() {
        if d == s {
            continue;
        }
        total += 1;
        if labels[d] == labels[s] {
            same += 1;
        }
    }
    if total == 0 {
        log::warn!("homophily of a graph without edges is reported as 0");
        return 0.0;
    }
    100.0 * same as f64 / total as f64
}

/// Removes every entry whose endpoints have different labels.
pub fn perfect_knn(g: &SparseGraph, labels: &[usize]) -> SparseGraph {
    SparseGraph {
        adj: g.matrix().filter(|d, s, _| labels[d] == labels[s]),
    }
}

/// Adds `ceil(fraction * pair_count)` unit-weight symmetric cross-label
/// edges sampled uniformly from pairs not already present. If fewer
/// candidate pairs exist, inserts as many as possible and warns.
pub fn add_noisy_edges(
    g: &SparseGraph,
    fraction: f64,
    labels: &[usize],
    rng: &mut impl Rng,
) -> Result<SparseGraph> {
    if fraction < 0.0 {
        return Err(GlamError::param(format!("fraction {fraction} must be >= 0")));
    }
    let existing = g.undirected_pairs();
    let target = (fraction * existing.len() as f64).ceil() as usize;
    if target == 0 {
        return Ok(g.clone());
    }
    let existing_set: HashSet<(usize, usize)> = existing.into_iter().collect();
    let n = g.n();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if labels[a] != labels[b] && !existing_set.contains(&(a, b)) {
                candidates.push((a, b));
            }
        }
    }
    if candidates.len() < target {
        log::warn!(
            "only {} cross-label candidate pairs available, requested {}",
            candidates.len(),
            target
        );
    }
    candidates.shuffle(rng);
    candidates.truncate(target);
    let mut entries: Vec<(usize, usize, f64)> = g.iter().collect();
    for (a, b) in candidates {
        entries.push((a, b, 1.0));
        entries.push((b, a, 1.0));
    }
    SparseGraph::from_entries(n, &entries)
}

/// Removes `floor(fraction * good_pair_count)` same-label symmetric pairs
/// uniformly at random.
pub fn remove_good_edges(
    g: &SparseGraph,
    fraction: f64,
    labels: &[usize],
    rng: &mut impl Rng,
) -> Result<SparseGraph> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(GlamError::param(format!("fraction {fraction} not in [0,1]")));
    }
    let mut good: Vec<(usize, usize)> = g
        .undirected_pairs()
        .into_iter()
        .filter(|&(a, b)| labels[a] == labels[b])
        .collect();
    let target = (fraction * good.len() as f64).floor() as usize;
    if target == 0 {
        return Ok(g.clone());
    }
    good.shuffle(rng);
    let removed: HashSet<(usize, usize)> = good.into_iter().take(target).collect();
    Ok(SparseGraph {
        adj: g.matrix().filter(|d, s, _| {
            let key = if d < s { (d, s) } else { (s, d) };
            !removed.contains(&key)
        }),
    })
}

/// Writes `edges.tsv`: a `# n=<count>` header then `dest src weight` lines.
pub fn write_edges(g: &SparseGraph, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# n={}", g.n()).unwrap();
    for (d, s, w) in g.iter() {
        writeln!(out, "{d} {s} {w}").unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads the `edges.tsv` format written by [`write_edges`].
pub fn read_edges(path: &Path) -> Result<SparseGraph> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| GlamError::Load {
        file: file.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut n: Option<usize> = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("n=") {
                n = Some(v.trim().parse().map_err(|_| GlamError::Load {
                    file: file.clone(),
                    line,
                    message: format!("cannot parse node count from '{v}'"),
                })?);
            }
            continue;
        }
        let mut it = t.split_whitespace();
        let parse = |s: Option<&str>, what: &str| -> Result<f64> {
            s.and_then(|x| x.parse().ok()).ok_or_else(|| GlamError::Load {
                file: file.clone(),
                line,
                message: format!("cannot parse {what}"),
            })
        };
        let d = parse(it.next(), "dest")? as usize;
        let s = parse(it.next(), "src")? as usize;
        let w = parse(it.next(), "weight")?;
        entries.push((d, s, w));
    }
    let n = n.ok_or_else(|| GlamError::Load {
        file,
        line: 0,
        message: "missing '# n=<count>' header".into(),
    })?;
    SparseGraph::from_entries(n, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SparseMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn features(rows: &[&[f64]]) -> Features {
        let d = rows[0].len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Features::sparse(SparseMatrix::from_coo(rows.len(), d, &entries).unwrap())
    }

    fn edge_set(g: &SparseGraph) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = g.iter().map(|(d, s, _)| (d, s)).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn knn_three_point_example() {
        // a=(1,0), b=(0,1), c=(1,1); k=1. c ties between a and b, broken to a.
        let x = features(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let g = knn_graph(&x, 1).unwrap();
        assert_eq!(edge_set(&g), vec![(0, 2), (1, 2), (2, 0), (2, 1)]);
        assert!(g.is_symmetric());
    }

    #[test]
    fn knn_identical_vectors_give_complete_graph() {
        let x = features(&[&[2.0, 1.0], &[2.0, 1.0], &[2.0, 1.0]]);
        let g = knn_graph(&x, 2).unwrap();
        assert_eq!(g.edge_count(), 6);
        for (d, s, w) in g.iter() {
            assert_ne!(d, s);
            assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn knn_duplicate_vector_always_linked() {
        let mut rows: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.3],
            vec![0.3, 0.2, 1.0],
            vec![0.0, 0.4, 1.0],
            vec![0.6, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ];
        rows[5] = rows[0].clone();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let g = knn_graph(&features(&refs), 1).unwrap();
        assert!(g.weight(0, 5) == 1.0 && g.weight(5, 0) == 1.0);
    }

    #[test]
    fn knn_rejects_k_ge_n() {
        let x = features(&[&[1.0], &[2.0]]);
        assert!(knn_graph(&x, 2).is_err());
    }

    #[test]
    fn knn_matches_brute_force_oracle() {
        // Oracle: exact pairwise cosine, sort by (sim desc, idx asc), union.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let n = 8 + (trial % 5) * 4;
            let d = 6;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            if rng.random::<f64>() < 0.5 {
                                rng.random::<f64>()
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let k = 1 + trial % 3;
            let got = knn_graph(&features(&refs), k).unwrap();

            let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut pairs = HashSet::new();
            for i in 0..n {
                if norm(&rows[i]) == 0.0 {
                    continue;
                }
                let mut cands: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i && norm(&rows[j]) > 0.0)
                    .map(|j| {
                        let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                        (dot / (norm(&rows[i]) * norm(&rows[j])), j)
                    })
                    .collect();
                cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                for &(_, j) in cands.iter().take(k) {
                    pairs.insert(if i < j { (i, j) } else { (j, i) });
                }
            }
            let mut expect: Vec<(usize, usize)> = pairs
                .iter()
                .flat_map(|&(a, b)| [(a, b), (b, a)])
                .collect();
            expect.sort_unstable();
            assert_eq!(edge_set(&got), expect, "trial {trial}");
        }
    }

    #[test]
    fn crop_examples() {
        let g = SparseGraph::from_entries(2, &[(1, 0, 1.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(crop_incoming_to_labeled(&g, &[]), g);
        assert_eq!(
            crop_incoming_to_labeled(&g, &[0, 1]).edge_count(),
            0,
            "all labeled -> empty"
        );
        let cropped = crop_incoming_to_labeled(&g, &[0]);
        assert_eq!(edge_set(&cropped), vec![(1, 0)]);
    }

    #[test]
    fn combine_endpoints_and_overlap() {
        let a = SparseGraph::from_entries(2, &[(0, 1, 1.0)]).unwrap();
        let b = SparseGraph::from_entries(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(combine_graphs(&a, &b, 0.0).unwrap(), b);
        assert_eq!(combine_graphs(&a, &b, 1.0).unwrap(), a);
        let mixed = combine_graphs(&a, &b, 0.3).unwrap();
        assert!((mixed.weight(0, 1) - 1.0).abs() < 1e-15);
        assert!((mixed.weight(1, 0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn laplacian_isolated_node() {
        let g = SparseGraph::empty(1);
        let lap = indegree_laplacian(&g);
        assert_eq!(lap.weight(0, 0), 1.0);
    }

    #[test]
    fn laplacian_mutual_edges() {
        let g = SparseGraph::from_entries(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let lap = indegree_laplacian(&g);
        for (d, s) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((lap.weight(d, s) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_asymmetric_hand_case() {
        // Only edge 1<-0: row sums of G+I are (1, 2).
        let g = SparseGraph::from_entries(2, &[(1, 0, 1.0)]).unwrap();
        let lap = indegree_laplacian(&g);
        assert!((lap.weight(0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(lap.weight(0, 1), 0.0);
        assert!((lap.weight(1, 0) - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        assert!((lap.weight(1, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn homophily_extremes() {
        let labels = vec![0, 0, 1, 1];
        let same = SparseGraph::from_entries(4, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(homophily(&same, &labels), 100.0);
        let cross = SparseGraph::from_entries(4, &[(0, 2, 1.0), (2, 0, 1.0)]).unwrap();
        assert_eq!(homophily(&cross, &labels), 0.0);
        assert_eq!(homophily(&SparseGraph::empty(4), &labels), 0.0);
    }

    #[test]
    fn perfect_knn_enumerated() {
        let labels = vec![0, 0, 1, 1];
        let g = SparseGraph::from_entries(
            4,
            &[(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0), (2, 0, 1.0)],
        )
        .unwrap();
        let p = perfect_knn(&g, &labels);
        assert_eq!(p.edge_count(), 2);
        assert_eq!(homophily(&p, &labels), 100.0);
        assert_eq!(perfect_knn(&p, &labels), p, "idempotent");
    }

    #[test]
    fn noise_addition_counts_pairs() {
        let labels: Vec<usize> = (0..12).map(|i| i % 2).collect();
        // 10 same-label pairs -> 20 directed entries.
        let mut entries = Vec::new();
        let mut made = 0;
        'outer: for a in 0..12 {
            for b in (a + 1)..12 {
                if labels[a] == labels[b] {
                    entries.push((a, b, 1.0));
                    entries.push((b, a, 1.0));
                    made += 1;
                    if made == 10 {
                        break 'outer;
                    }
                }
            }
        }
        let g = SparseGraph::from_entries(12, &entries).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let noisy = add_noisy_edges(&g, 1.0, &labels, &mut rng).unwrap();
        assert_eq!(noisy.edge_count(), g.edge_count() + 20);
        assert!(homophily(&noisy, &labels) < homophily(&g, &labels));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(add_noisy_edges(&g, 0.0, &labels, &mut rng).unwrap(), g);
    }

    #[test]
    fn good_edge_removal_counts_pairs() {
        let labels = vec![0; 16];
        let mut entries = Vec::new();
        for a in 0..8usize {
            let b = a + 8;
            entries.push((a, b, 1.0));
            entries.push((b, a, 1.0));
        }
        let g = SparseGraph::from_entries(16, &entries).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let half = remove_good_edges(&g, 0.5, &labels, &mut rng).unwrap();
        assert_eq!(half.undirected_pairs().len(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let none = remove_good_edges(&g, 0.0, &labels, &mut rng).unwrap();
        assert_eq!(none, g);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all = remove_good_edges(&g, 1.0, &labels, &mut rng).unwrap();
        assert_eq!(all.edge_count(), 0);
    }

    #[test]
    fn edges_file_round_trip() {
        let g = SparseGraph::from_entries(3, &[(0, 1, 0.5), (2, 0, 1.25)]).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("edges.tsv");
        write_edges(&g, &path).unwrap();
        assert_eq!(read_edges(&path).unwrap(), g);
    }
}
