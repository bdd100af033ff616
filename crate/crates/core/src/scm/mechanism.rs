//! The Gumbel-Max prediction mechanism and joint sampling of a panel of
//! experts under a partition.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::models::{ConditionalModel, ModelMap};
use crate::scm::noise::{sample_prior_noise, GumbelVector};
use crate::types::{ExpertId, Label, Partition};

/// Argmax of `log_probs + noise`, lowest index on ties. Lengths must agree.
#[inline]
pub(crate) fn mechanism_index(log_probs: &[f64], noise: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = log_probs[0] + noise[0];
    for c in 1..log_probs.len() {
        let v = log_probs[c] + noise[c];
        if v > best_val {
            best = c;
            best_val = v;
        }
    }
    best
}

/// The label an expert with log-potentials `log_probs` predicts under `noise`.
pub fn mechanism(log_probs: &[f64], noise: &GumbelVector) -> Result<Label> {
    if log_probs.is_empty() || log_probs.len() != noise.len() {
        return Err(Error::invalid(format!(
            "log-potentials ({}) and noise ({}) must have equal non-zero length",
            log_probs.len(),
            noise.len()
        )));
    }
    Ok(Label(mechanism_index(log_probs, noise.values())))
}

/// Noise realizations keyed by group id.
pub type GroupNoise = BTreeMap<usize, GumbelVector>;

fn check_experts<M: ConditionalModel>(
    experts: &[ExpertId],
    partition: &Partition,
    models: &ModelMap<M>,
) -> Result<()> {
    if experts.is_empty() {
        return Err(Error::invalid("the set of predicting experts must be non-empty"));
    }
    for e in experts {
        partition.require_group(e)?;
        if !models.contains_key(e) {
            return Err(Error::missing(e));
        }
    }
    Ok(())
}

/// Evaluates the mechanism of every expert in `experts` on fixed group noise.
pub fn joint_from_noise<M: ConditionalModel>(
    features: &[f64],
    experts: &[ExpertId],
    partition: &Partition,
    models: &ModelMap<M>,
    noise: &GroupNoise,
) -> Result<BTreeMap<ExpertId, Label>> {
    check_experts(experts, partition, models)?;
    let mut out = BTreeMap::new();
    for e in experts {
        let gid = partition.require_group(e)?;
        let u = noise
            .get(&gid)
            .ok_or_else(|| Error::invalid(format!("no noise drawn for group {gid}")))?;
        let dist = models[e].predict(features)?;
        out.insert(e.clone(), mechanism(&dist.log_probs(), u)?);
    }
    Ok(out)
}

/// Draws one noise vector per group present in `experts` (ascending group
/// id) and applies every expert's mechanism to its group's draw.
pub fn sample_joint<M: ConditionalModel, R: Rng + ?Sized>(
    features: &[f64],
    experts: &[ExpertId],
    partition: &Partition,
    models: &ModelMap<M>,
    rng: &mut R,
) -> Result<BTreeMap<ExpertId, Label>> {
    check_experts(experts, partition, models)?;
    let k = models[&experts[0]].num_labels();
    let mut noise = GroupNoise::new();
    let groups: std::collections::BTreeSet<usize> = experts
        .iter()
        .map(|e| partition.require_group(e))
        .collect::<Result<_>>()?;
    for gid in groups {
        noise.insert(gid, sample_prior_noise(k, rng)?);
    }
    joint_from_noise(features, experts, partition, models, &noise)
}
