//! Synthetic expert panels drawn from a Gumbel-Max SI-SCM with a planted
//! partition and random multinomial-logit experts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{apply_sparsity, PanelDataset, Sample};
use crate::error::{Error, Result};
use crate::models::{LogitModel, ModelMap};
use crate::rng::substream;
use crate::scm::sample_joint;
use crate::types::{ExpertId, Partition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_experts: usize,
    pub group_sizes: Vec<usize>,
    pub k: usize,
    pub d: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Fraction of predictions hidden in the training panel.
    pub sparsity: f64,
    /// Sparsity of the held-out panel; `None` keeps it fully observed.
    pub test_sparsity: Option<f64>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_experts: 48,
            group_sizes: vec![6, 7, 11, 11, 13],
            k: 5,
            d: 20,
            n_train: 1000,
            n_test: 1000,
            sparsity: 0.5,
            test_sparsity: None,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_sizes.iter().sum::<usize>() != self.n_experts {
            return Err(Error::invalid(format!(
                "group sizes sum to {}, expected {} experts",
                self.group_sizes.iter().sum::<usize>(),
                self.n_experts
            )));
        }
        if self.group_sizes.iter().any(|&g| g == 0) {
            return Err(Error::invalid("group sizes must be positive"));
        }
        if self.n_experts < 2 {
            return Err(Error::invalid("at least two experts are required"));
        }
        if self.k < 2 || self.d == 0 {
            return Err(Error::invalid("need k >= 2 labels and d >= 1 features"));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::invalid("train and test sizes must be positive"));
        }
        for s in std::iter::once(self.sparsity).chain(self.test_sparsity) {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::invalid(format!("sparsity {s} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn expert_ids(&self) -> Vec<ExpertId> {
        let width = (self.n_experts.saturating_sub(1)).to_string().len().max(2);
        (0..self.n_experts).map(|i| format!("e{i:0width$}").into()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticPanel {
    pub train: PanelDataset,
    pub test: PanelDataset,
    pub truth: Partition,
    pub models: ModelMap<LogitModel>,
}

fn draw_panel(
    config: &SyntheticConfig,
    split: &str,
    n: usize,
    experts: &[ExpertId],
    truth: &Partition,
    models: &ModelMap<LogitModel>,
) -> Result<PanelDataset> {
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.seed, &format!("synth/{split}"), &i.to_string());
            let features: Vec<f64> = (0..config.d).map(|_| rng.random::<f64>()).collect();
            let predictions = sample_joint(&features, experts, truth, models, &mut rng)?;
            Ok(Sample { id: format!("{split}-{i:06}"), features, predictions })
        })
        .collect::<Result<Vec<_>>>()?;
    PanelDataset::new(
        config.k,
        config.d,
        PanelDataset::default_label_names(config.k),
        experts.to_vec(),
        samples,
    )
}

/// Generates train and test panels, the planted partition and the true
/// per-expert logit models. Experts are assigned to groups in id order.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticPanel> {
    config.validate()?;
    let experts = config.expert_ids();
    let mut groups = Vec::new();
    let mut start = 0;
    for &size in &config.group_sizes {
        groups.push(experts[start..start + size].to_vec());
        start += size;
    }
    let truth = Partition::new(groups)?;

    let models: ModelMap<LogitModel> = experts
        .iter()
        .map(|e| {
            let mut rng = substream(config.seed, "synth/weights", e.as_str());
            let w = (0..config.k)
                .map(|_| (0..config.d).map(|_| rng.random::<f64>()).collect())
                .collect();
            Ok((e.clone(), LogitModel::new(w)?))
        })
        .collect::<Result<_>>()?;

    let train_full = draw_panel(config, "train", config.n_train, &experts, &truth, &models)?;
    let train = apply_sparsity(
        &train_full,
        config.sparsity,
        &mut substream(config.seed, "synth/sparsity", "train"),
    )?;
    let test_full = draw_panel(config, "test", config.n_test, &experts, &truth, &models)?;
    let test = match config.test_sparsity {
        Some(s) => apply_sparsity(&test_full, s, &mut substream(config.seed, "synth/sparsity", "test"))?,
        None => test_full,
    };
    Ok(SyntheticPanel { train, test, truth, models })
}
