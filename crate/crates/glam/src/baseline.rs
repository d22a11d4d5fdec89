//! Plain 2-layer GCN on an uncropped symmetric kNN graph, the comparison
//! point for the joint model. Deliberately a thin configuration of the same
//! numerical core rather than duplicated code.

use crate::data::Dataset;
use crate::model::GlamHyperParams;
use crate::trainer::{train_with, ModelKind, PreparedData, TrainOptions, TrainReport};
use crate::Result;

/// Trains `SoftMax(G relu(G X W3) W4)` on the symmetric kNN graph built from
/// the dataset's (optionally boosted) features, with the same trainer
/// protocol as the full model. The affinity branch is absent entirely.
pub fn gcn_train(data: &PreparedData, hp: &GlamHyperParams) -> Result<TrainReport> {
    let (_, report) = train_with(
        data,
        hp,
        TrainOptions {
            kind: ModelKind::GcnKnn,
            skip_test: false,
            graph_override: None,
        },
    )?;
    Ok(report)
}

/// Convenience wrapper building the cache from a bare dataset.
pub fn gcn_train_dataset(dataset: &Dataset, hp: &GlamHyperParams) -> Result<TrainReport> {
    let data = PreparedData::new(dataset.clone());
    gcn_train(&data, hp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::toy_separable;

    #[test]
    fn baseline_never_builds_an_affinity_graph() {
        let ds = toy_separable(12, 2, 1);
        let hp = GlamHyperParams {
            k: 3,
            hidden_c: 8,
            epochs: 5,
            boosted: false,
            gcn_input: crate::model::GcnInput::Raw,
            ..GlamHyperParams::default()
        };
        let report = gcn_train_dataset(&ds, &hp).unwrap();
        assert!(!report.affinity_graph_built);
        assert_eq!(report.model, ModelKind::GcnKnn);
        // The effective configuration is the pure GCN one.
        assert_eq!(report.hyper.w_ck, 1.0);
        assert_eq!(report.hyper.beta, 0.0);
    }
}
