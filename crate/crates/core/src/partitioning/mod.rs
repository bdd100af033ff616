//! Learning the expert partition from sparse prediction panels.
//!
//! Pairs that were co-observed and never violated conditional stability
//! become edges of a similarity graph. Edge weights measure how much sharing
//! noise changes the empirical counterfactual loss, and groups are grown as
//! cliques of that graph.

mod exact;
mod graph;
mod greedy;
mod violations;
mod weights;

use serde::{Deserialize, Serialize};

pub use exact::{brute_force_partition, BRUTE_FORCE_MAX_VERTICES};
pub use graph::{objective, EdgeRecord, SimilarityGraph};
pub use greedy::{greedy_partition, partition_with_restarts, restart_stream, DEFAULT_RESTARTS};
pub use violations::{check_violation, detect_violations, write_violations_csv, ExpertPair, ViolationRecord, ViolationScan};
pub use weights::{compute_edge_weights, LossKind, WeightConfig, DEFAULT_WEIGHT_SAMPLES};

use crate::data::PanelDataset;
use crate::error::Result;
use crate::models::{ConditionalModel, ModelMap};
use crate::rng::derive_seed;
use crate::types::Partition;

pub const DEFAULT_SLACK: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub slack: f64,
    pub weight_samples: usize,
    pub loss: LossKind,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            slack: DEFAULT_SLACK,
            weight_samples: DEFAULT_WEIGHT_SAMPLES,
            loss: LossKind::ZeroOne,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    pub scan: ViolationScan,
    pub graph: SimilarityGraph,
    pub partition: Partition,
    pub objective: f64,
}

/// Violation scan, edge weights and restarted greedy search in one call.
pub fn learn_partition<M: ConditionalModel>(
    dataset: &PanelDataset,
    models: &ModelMap<M>,
    config: &PartitionConfig,
) -> Result<PartitionOutcome> {
    let scan = detect_violations(dataset, models, config.slack)?;
    let weight_config = WeightConfig {
        samples: config.weight_samples,
        loss: config.loss,
        seed: derive_seed(config.seed, "partition", "weights"),
    };
    let graph = compute_edge_weights(&scan, dataset, models, &weight_config)?;
    let partition = partition_with_restarts(&graph, config.restarts, derive_seed(config.seed, "partition", "greedy"))?;
    let objective = objective(&partition, &graph)?;
    Ok(PartitionOutcome { scan, graph, partition, objective })
}
