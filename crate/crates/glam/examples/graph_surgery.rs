//! kNN construction, cropping, perfect-kNN, noise injection, and the graph
//! quality metrics, ending with an edges.tsv export.
//!
//! ```bash
//! cargo run --example graph_surgery
//! ```

use glam::analysis::{bad_neighbor_ratio, weighted_homophily, AttentionView};
use glam::data::{synthetic_citation, Features, SyntheticConfig};
use glam::graphs::{
    add_noisy_edges, crop_incoming_to_labeled, homophily, indegree_laplacian, knn_graph,
    perfect_knn, remove_good_edges, write_edges,
};
use glam::rng::SeedStreams;

fn main() {
    let cfg = SyntheticConfig {
        nodes: 300,
        features: 60,
        classes: 3,
        train_per_class: 10,
        val_size: 60,
        test_size: 120,
        words_per_node: 10,
        off_topic: 0.35,
        seed: 5,
    };
    let dataset = synthetic_citation(&cfg).unwrap();
    let x = Features::sparse(dataset.features.clone());
    let labels = &dataset.labels;

    let knn = knn_graph(&x, 10).unwrap();
    println!(
        "kNN: {} entries, homophily {:.2}",
        knn.edge_count(),
        homophily(&knn, labels)
    );

    let cropped = crop_incoming_to_labeled(&knn, &dataset.split.train);
    println!(
        "cropped: {} entries ({} removed into labeled nodes)",
        cropped.edge_count(),
        knn.edge_count() - cropped.edge_count()
    );

    let perfect = perfect_knn(&knn, labels);
    println!(
        "perfect: {} entries, homophily {:.2}",
        perfect.edge_count(),
        homophily(&perfect, labels)
    );

    let streams = SeedStreams::new(5);
    let noisy = add_noisy_edges(&perfect, 0.5, labels, &mut streams.stream("noise")).unwrap();
    println!(
        "after adding 50% noise: homophily {:.2}",
        homophily(&noisy, labels)
    );
    let thinned = remove_good_edges(&perfect, 0.5, labels, &mut streams.stream("thin")).unwrap();
    println!(
        "after removing 50% good pairs: {} entries, homophily {:.2}",
        thinned.edge_count(),
        homophily(&thinned, labels)
    );

    // Laplacian view metrics, as used for the attention diagnostics.
    let view = AttentionView::laplacian(indegree_laplacian(&knn));
    println!(
        "Laplacian view: weighted homophily {:.2}, bad-neighbor ratio {:.2}",
        weighted_homophily(&view, labels, false),
        bad_neighbor_ratio(&view, labels, false)
    );

    let out = std::env::temp_dir().join("glam_knn_edges.tsv");
    write_edges(&knn, &out).unwrap();
    println!("exported graph to {}", out.display());
}
