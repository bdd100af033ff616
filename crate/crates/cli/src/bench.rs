//! Partition recovery on synthetic panels over a grid of training sizes and
//! sparsity levels.

use log::info;
use serde::{Deserialize, Serialize};
use siscm_core::data::{generate_synthetic, SyntheticPanel};
use siscm_core::evaluation::{adjusted_rand_index, edge_ratio, evaluate, SiScmPredictor};
use siscm_core::models::{train_gnb_models, ConditionalModel, ModelMap};
use siscm_core::partitioning::{learn_partition, PartitionConfig};
use siscm_core::rng::derive_seed;
use siscm_core::Partition;

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: usize,
    pub s: f64,
    pub replicate: usize,
    pub ari: f64,
    pub edge_ratio: f64,
    pub loss_recovered: f64,
    pub loss_truth: f64,
    pub loss_independent: f64,
}

pub fn cell_seed(seed: u64, m: usize, s: f64, replicate: usize) -> u64 {
    derive_seed(seed, "bench", &format!("m={m}/s={s}/r={replicate}"))
}

fn score<M: ConditionalModel>(
    cfg: &RunConfig,
    panel: &SyntheticPanel,
    models: &ModelMap<M>,
    seed: u64,
) -> anyhow::Result<(f64, f64, [f64; 3])> {
    let pcfg = PartitionConfig {
        slack: cfg.slack,
        weight_samples: cfg.weight_samples,
        loss: cfg.loss,
        restarts: cfg.restarts,
        seed: derive_seed(seed, "bench", "partition"),
    };
    let learned = learn_partition(&panel.train, models, &pcfg)?;
    let ari = adjusted_rand_index(&learned.partition, &panel.truth)?;
    let ratio = edge_ratio(&learned.graph, &panel.truth)?.value;

    let eval_seed = derive_seed(seed, "bench", "eval");
    let singletons = Partition::singletons(panel.truth.experts());
    let mut losses = [0.0; 3];
    for (slot, partition) in losses.iter_mut().zip([&learned.partition, &panel.truth, &singletons]) {
        let predictor = SiScmPredictor { models, partition, samples: cfg.samples, seed: eval_seed };
        *slot = evaluate(&panel.test, &predictor, partition)?.loss();
    }
    Ok((ari, ratio, losses))
}

/// One synthetic draw, partition learning and three held-out evaluations.
pub fn run_cell(cfg: &RunConfig, m: usize, s: f64, replicate: usize) -> anyhow::Result<BenchRow> {
    let seed = cell_seed(cfg.seed, m, s, replicate);
    let mut synth = cfg.synth.clone();
    synth.n_train = m;
    synth.sparsity = s;
    synth.seed = seed;
    let panel = generate_synthetic(&synth)?;
    let (ari, edge_ratio, [loss_recovered, loss_truth, loss_independent]) = if cfg.bench.fit_models {
        let fitted = train_gnb_models(&panel.train, cfg.smoothing)?;
        score(cfg, &panel, &fitted, seed)?
    } else {
        score(cfg, &panel, &panel.models, seed)?
    };
    let row = BenchRow { m, s, replicate, ari, edge_ratio, loss_recovered, loss_truth, loss_independent };
    info!(
        "m={m} s={s} r={replicate}: ARI {ari:.3}, edge ratio {edge_ratio:.3}, loss {loss_recovered:.4} (truth {loss_truth:.4}, independent {loss_independent:.4})"
    );
    Ok(row)
}

/// Every grid cell in (m, s, replicate) order; writes `grid.csv`.
pub fn bench(cfg: &RunConfig) -> anyhow::Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &m in &cfg.bench.m {
        for &s in &cfg.bench.s {
            for r in 0..cfg.bench.replicates {
                rows.push(run_cell(cfg, m, s, r)?);
            }
        }
    }
    let mut w = csv::Writer::from_path(cfg.out_dir.join("grid.csv"))?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows)
}
