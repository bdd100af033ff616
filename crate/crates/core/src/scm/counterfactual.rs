//! Monte-Carlo estimation of counterfactual second opinions.
//!
//! Given that expert `h` predicted `c` on features `x`, the counterfactual
//! prediction of another expert `h'` is obtained by sampling the noise of
//! `h'`'s group from its posterior and replaying `h'`'s mechanism. When the
//! two experts sit in different groups the posterior is the prior and the
//! answer is `h'`'s own model distribution, returned without sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ConditionalModel, ModelMap};
use crate::scm::mechanism::mechanism_index;
use crate::scm::noise::PosteriorSampler;
use crate::types::{argmax, ExpertId, Label, Partition, SimplexDistribution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualQuery {
    pub features: Vec<f64>,
    pub observed_expert: ExpertId,
    pub observed_label: Label,
    pub target_expert: ExpertId,
}

/// Estimated counterfactual distribution.
///
/// Monte-Carlo estimates hold multiples of `1 / num_samples` and may contain
/// exact zeros, so `probs` is a plain vector rather than a floored simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualEstimate {
    pub probs: Vec<f64>,
    pub num_samples: usize,
    pub exact: bool,
}

impl CounterfactualEstimate {
    pub fn exact(dist: &SimplexDistribution) -> Self {
        CounterfactualEstimate {
            probs: dist.probs().to_vec(),
            num_samples: 0,
            exact: true,
        }
    }

    fn from_counts(counts: &[u64], num_samples: usize) -> Self {
        CounterfactualEstimate {
            probs: counts.iter().map(|&c| c as f64 / num_samples as f64).collect(),
            num_samples,
            exact: false,
        }
    }

    /// Most likely label, lowest index on ties.
    pub fn argmax(&self) -> Label {
        Label(argmax(&self.probs))
    }
}

/// Counterfactual label counts for several targets that share noise with the
/// observed expert. One set of `samples` posterior draws serves every target.
pub fn shared_noise_counts<R: Rng + ?Sized>(
    source: &SimplexDistribution,
    observed: Label,
    targets: &[&SimplexDistribution],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<Vec<u64>>> {
    if samples == 0 {
        return Err(Error::invalid("sample count T must be at least 1"));
    }
    let k = source.k();
    if targets.iter().any(|t| t.k() != k) {
        return Err(Error::invalid("source and target label counts differ"));
    }
    let sampler = PosteriorSampler::new(&source.log_probs(), observed)?;
    let target_lp: Vec<Vec<f64>> = targets.iter().map(|t| t.log_probs()).collect();
    let mut counts = vec![vec![0u64; k]; targets.len()];
    let mut noise = vec![0.0; k];
    for _ in 0..samples {
        sampler.draw_into(rng, &mut noise);
        for (lp, row) in target_lp.iter().zip(counts.iter_mut()) {
            row[mechanism_index(lp, &noise)] += 1;
        }
    }
    Ok(counts)
}

/// Shared-noise counterfactual estimates, one per target.
pub fn shared_noise_counterfactuals<R: Rng + ?Sized>(
    source: &SimplexDistribution,
    observed: Label,
    targets: &[&SimplexDistribution],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<CounterfactualEstimate>> {
    Ok(shared_noise_counts(source, observed, targets, samples, rng)?
        .iter()
        .map(|c| CounterfactualEstimate::from_counts(c, samples))
        .collect())
}

/// Estimates the counterfactual distribution of the target expert's
/// prediction given the observed expert's prediction.
pub fn counterfactual_distribution<M: ConditionalModel, R: Rng + ?Sized>(
    query: &CounterfactualQuery,
    partition: &Partition,
    models: &ModelMap<M>,
    samples: usize,
    rng: &mut R,
) -> Result<CounterfactualEstimate> {
    if samples == 0 {
        return Err(Error::invalid("sample count T must be at least 1"));
    }
    if query.observed_expert == query.target_expert {
        return Err(Error::invalid("observed and target expert must differ"));
    }
    let h = &query.observed_expert;
    let t = &query.target_expert;
    let source_model = models.get(h).ok_or_else(|| Error::missing(h))?;
    let target_model = models.get(t).ok_or_else(|| Error::missing(t))?;
    let same = partition.same_group(h, t)?;

    let target = target_model.predict(&query.features)?;
    let source = source_model.predict(&query.features)?;
    if query.observed_label.0 >= source.k() {
        return Err(Error::invalid(format!(
            "observed label {} out of range for {} labels",
            query.observed_label,
            source.k()
        )));
    }
    if !same {
        return Ok(CounterfactualEstimate::exact(&target));
    }
    let mut est =
        shared_noise_counterfactuals(&source, query.observed_label, &[&target], samples, rng)?;
    Ok(est.pop().expect("one target"))
}

/// Most likely counterfactual label, lowest index on ties.
pub fn counterfactual_argmax<M: ConditionalModel, R: Rng + ?Sized>(
    query: &CounterfactualQuery,
    partition: &Partition,
    models: &ModelMap<M>,
    samples: usize,
    rng: &mut R,
) -> Result<Label> {
    Ok(counterfactual_distribution(query, partition, models, samples, rng)?.argmax())
}
