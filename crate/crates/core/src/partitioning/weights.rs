use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::models::{ConditionalModel, ModelMap};
use crate::partitioning::graph::SimilarityGraph;
use crate::partitioning::violations::{pair, panel_distributions, ExpertPair, ViolationScan};
use crate::rng::substream;
use crate::scm::shared_noise_counts;
use crate::types::{argmax, Label, SimplexDistribution, PROB_FLOOR};

pub const DEFAULT_WEIGHT_SAMPLES: usize = 1000;

/// Loss used to score a counterfactual prediction of the target's label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// 0/1 loss of the most likely label.
    #[default]
    ZeroOne,
    /// Negative log-likelihood of the true label, probabilities floored.
    Nll,
}

impl LossKind {
    fn counterfactual(self, counts: &[u64], samples: usize, truth: Label) -> f64 {
        match self {
            LossKind::ZeroOne => {
                let as_f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                f64::from(argmax(&as_f) != truth.0)
            }
            LossKind::Nll => -(counts[truth.0] as f64 / samples as f64).max(PROB_FLOOR).ln(),
        }
    }

    fn marginal(self, p: &SimplexDistribution, truth: Label) -> f64 {
        match self {
            LossKind::ZeroOne => f64::from(p.argmax() != truth),
            LossKind::Nll => -p.prob(truth).max(PROB_FLOOR).ln(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    /// Posterior draws per (sample, source) counterfactual estimate.
    pub samples: usize,
    pub loss: LossKind,
    pub seed: u64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { samples: DEFAULT_WEIGHT_SAMPLES, loss: LossKind::ZeroOne, seed: 0 }
    }
}

#[derive(Default, Clone, Copy)]
struct Direction {
    cf: f64,
    base: f64,
    n: usize,
}

struct Contribution {
    pair: ExpertPair,
    forward: bool,
    cf: f64,
    base: f64,
}

/// Builds the similarity graph over the dataset's experts with one edge per
/// permissible pair.
///
/// The weight of `{h, h'}` sums, over both directions, the average loss of
/// the shared-noise counterfactual prediction minus the average loss of the
/// target's own most likely label, over the samples where both were
/// observed. Negative weights mean sharing noise helps.
///
/// Posterior draws for one (sample, source) serve all of the source's
/// neighbors on that sample and come from a substream keyed by both, so the
/// result does not depend on the thread count.
pub fn compute_edge_weights<M: ConditionalModel>(
    scan: &ViolationScan,
    dataset: &PanelDataset,
    models: &ModelMap<M>,
    config: &WeightConfig,
) -> Result<SimilarityGraph> {
    if config.samples == 0 {
        return Err(Error::invalid("weight sample count must be at least 1"));
    }
    for (a, b) in &scan.permissible {
        if scan.co_observations.get(&(a.clone(), b.clone())).copied().unwrap_or(0) == 0 {
            return Err(Error::InvalidEdge(a.to_string(), b.to_string(), "no co-observations".into()));
        }
    }
    let dists = panel_distributions(dataset, models)?;

    let per_sample: Vec<Vec<Contribution>> = dataset
        .samples()
        .par_iter()
        .zip(dists.par_iter())
        .map(|(s, dist)| {
            let mut out = Vec::new();
            for (h, &y_h) in &s.predictions {
                let targets: Vec<_> = s
                    .predictions
                    .iter()
                    .filter(|(t, _)| *t != h && scan.permissible.contains(&pair(h, t)))
                    .collect();
                if targets.is_empty() {
                    continue;
                }
                let mut rng = substream(config.seed, "partition/weights", &format!("{}/{}", s.id, h));
                let target_dists: Vec<&SimplexDistribution> = targets.iter().map(|(t, _)| &dist[*t]).collect();
                let counts = shared_noise_counts(&dist[h], y_h, &target_dists, config.samples, &mut rng)?;
                for (((t, &y_t), row), p_t) in targets.iter().zip(&counts).zip(&target_dists) {
                    out.push(Contribution {
                        pair: pair(h, t),
                        forward: h < *t,
                        cf: config.loss.counterfactual(row, config.samples, y_t),
                        base: config.loss.marginal(p_t, y_t),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut acc: BTreeMap<ExpertPair, [Direction; 2]> = BTreeMap::new();
    for c in per_sample.into_iter().flatten() {
        let d = &mut acc.entry(c.pair).or_default()[usize::from(!c.forward)];
        d.cf += c.cf;
        d.base += c.base;
        d.n += 1;
    }

    let mut graph = SimilarityGraph::new(dataset.experts().iter().cloned());
    for (a, b) in &scan.permissible {
        let dirs = acc.get(&(a.clone(), b.clone())).copied().unwrap_or_default();
        let mut w = 0.0;
        for d in dirs {
            if d.n == 0 {
                return Err(Error::InvalidEdge(a.to_string(), b.to_string(), "no co-observations".into()));
            }
            w += (d.cf - d.base) / d.n as f64;
        }
        graph.add_edge(a, b, w, scan.co_observations[&(a.clone(), b.clone())])?;
    }
    Ok(graph)
}
