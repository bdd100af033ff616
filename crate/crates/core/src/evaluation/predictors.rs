use crate::error::{Error, Result};
use crate::models::{baseline_gnb_cnb_argmax, CnbModel, ConditionalModel, ModelMap};
use crate::rng::substream;
use crate::scm::shared_noise_counts;
use crate::types::{argmax, ExpertId, Label, Partition, SimplexDistribution};

/// One observed prediction and the experts whose labels should be inferred.
#[derive(Clone, Copy, Debug)]
pub struct PairQuery<'a> {
    pub sample_id: &'a str,
    pub features: &'a [f64],
    pub source: &'a ExpertId,
    pub observed: Label,
    pub targets: &'a [ExpertId],
}

/// Infers one label per target in `query.targets`, in order.
pub trait SecondOpinionPredictor: Sync {
    fn predict(&self, query: &PairQuery) -> Result<Vec<Label>>;
}

impl<F> SecondOpinionPredictor for F
where
    F: Fn(&PairQuery) -> Result<Vec<Label>> + Sync,
{
    fn predict(&self, query: &PairQuery) -> Result<Vec<Label>> {
        self(query)
    }
}

fn model<'m, M>(models: &'m ModelMap<M>, e: &ExpertId) -> Result<&'m M> {
    models.get(e).ok_or_else(|| Error::missing(e))
}

/// Most likely counterfactual label under the Gumbel-Max SI-SCM.
///
/// Targets outside the source's group get their own most likely label.
/// Targets inside share one batch of posterior draws, taken from a substream
/// keyed by the sample id and the source.
pub struct SiScmPredictor<'a, M> {
    pub models: &'a ModelMap<M>,
    pub partition: &'a Partition,
    pub samples: usize,
    pub seed: u64,
}

impl<M: ConditionalModel> SecondOpinionPredictor for SiScmPredictor<'_, M> {
    fn predict(&self, q: &PairQuery) -> Result<Vec<Label>> {
        let group = self.partition.require_group(q.source)?;
        let source = model(self.models, q.source)?.predict(q.features)?;
        let mut out = vec![Label(0); q.targets.len()];
        let mut shared: Vec<(usize, SimplexDistribution)> = Vec::new();
        for (i, t) in q.targets.iter().enumerate() {
            let dist = model(self.models, t)?.predict(q.features)?;
            if self.partition.require_group(t)? == group {
                shared.push((i, dist));
            } else {
                out[i] = dist.argmax();
            }
        }
        if !shared.is_empty() {
            let mut rng = substream(self.seed, "eval/siscm", &format!("{}/{}", q.sample_id, q.source));
            let dists: Vec<&SimplexDistribution> = shared.iter().map(|(_, d)| d).collect();
            let counts = shared_noise_counts(&source, q.observed, &dists, self.samples, &mut rng)?;
            for ((i, _), row) in shared.iter().zip(counts) {
                let as_f: Vec<f64> = row.iter().map(|&c| c as f64).collect();
                out[*i] = Label(argmax(&as_f));
            }
        }
        Ok(out)
    }
}

/// Ignores the observation: most likely label under the target's model.
pub struct GnbPredictor<'a, M> {
    pub models: &'a ModelMap<M>,
}

impl<M: ConditionalModel> SecondOpinionPredictor for GnbPredictor<'_, M> {
    fn predict(&self, q: &PairQuery) -> Result<Vec<Label>> {
        q.targets
            .iter()
            .map(|t| Ok(model(self.models, t)?.predict(q.features)?.argmax()))
            .collect()
    }
}

/// Product of the target's model and its CNB row for the observed source
/// label. `cnb` holds one table set per target expert.
pub struct GnbCnbPredictor<'a, M> {
    pub models: &'a ModelMap<M>,
    pub cnb: &'a ModelMap<CnbModel>,
}

impl<M: ConditionalModel> SecondOpinionPredictor for GnbCnbPredictor<'_, M> {
    fn predict(&self, q: &PairQuery) -> Result<Vec<Label>> {
        q.targets
            .iter()
            .map(|t| {
                let cnb = self.cnb.get(t).ok_or_else(|| Error::missing(t))?;
                baseline_gnb_cnb_argmax(model(self.models, t)?, cnb, q.source, q.features, Some(q.observed))
            })
            .collect()
    }
}
