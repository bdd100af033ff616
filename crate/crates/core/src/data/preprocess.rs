//! Filtering of real prediction panels before training.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{PanelDataset, Sample};
use crate::error::{Error, Result};
use crate::types::ExpertId;

pub const DEFAULT_TRAIN_MIN: usize = 130;
pub const DEFAULT_TEST_MIN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub train_min: usize,
    pub test_min: usize,
    pub drop_full_agreement: bool,
    pub require_label_coverage: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            train_min: DEFAULT_TRAIN_MIN,
            test_min: DEFAULT_TEST_MIN,
            drop_full_agreement: true,
            require_label_coverage: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PreprocessOutput {
    pub train: PanelDataset,
    pub test: PanelDataset,
    /// Filter passes run, including the final pass that changed nothing.
    pub iterations: usize,
    pub removed_experts: Vec<ExpertId>,
}

/// Assigns `round(n * train_fraction)` uniformly chosen samples to training.
pub fn random_split<R: Rng + ?Sized>(n: usize, train_fraction: f64, rng: &mut R) -> Vec<Side> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let n_train = ((n as f64) * train_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut sides = vec![Side::Test; n];
    for &i in &idx[..n_train] {
        sides[i] = Side::Train;
    }
    sides
}

fn full_agreement(s: &Sample) -> bool {
    let mut labels = s.predictions.values();
    match labels.next() {
        Some(first) => s.predictions.len() >= 2 && labels.all(|l| l == first),
        None => false,
    }
}

/// Splits `dataset` by `split` and filters to a fixed point: samples on which
/// all experts agree (optional), experts with too few train/test predictions
/// or without every label among their training predictions, and samples left
/// with fewer than two predictions.
pub fn preprocess(dataset: &PanelDataset, split: &[Side], config: &PreprocessConfig) -> Result<PreprocessOutput> {
    if split.len() != dataset.len() {
        return Err(Error::invalid(format!(
            "split has {} entries for {} samples",
            split.len(),
            dataset.len()
        )));
    }
    let k = dataset.k();
    let mut rows: Vec<(Side, Sample)> = split.iter().copied().zip(dataset.samples().iter().cloned()).collect();
    let mut roster: BTreeSet<ExpertId> = dataset.experts().iter().cloned().collect();
    let mut removed = Vec::new();
    let mut iterations = 0;
    let keep = |(_, s): &(Side, Sample)| {
        s.predictions.len() >= 2 && !(config.drop_full_agreement && full_agreement(s))
    };

    loop {
        iterations += 1;
        rows.retain(keep);

        let mut train_counts: BTreeMap<&ExpertId, usize> = BTreeMap::new();
        let mut test_counts: BTreeMap<&ExpertId, usize> = BTreeMap::new();
        let mut coverage: BTreeMap<&ExpertId, BTreeSet<usize>> = BTreeMap::new();
        for (side, s) in &rows {
            for (e, y) in &s.predictions {
                match side {
                    Side::Train => {
                        *train_counts.entry(e).or_default() += 1;
                        coverage.entry(e).or_default().insert(y.0);
                    }
                    Side::Test => *test_counts.entry(e).or_default() += 1,
                }
            }
        }
        let failing: Vec<ExpertId> = roster
            .iter()
            .filter(|e| {
                train_counts.get(e).copied().unwrap_or(0) < config.train_min
                    || test_counts.get(e).copied().unwrap_or(0) < config.test_min
                    || (config.require_label_coverage && coverage.get(e).map_or(0, |c| c.len()) < k)
            })
            .cloned()
            .collect();
        if failing.is_empty() {
            break;
        }
        for e in &failing {
            roster.remove(e);
        }
        for (_, s) in &mut rows {
            s.predictions.retain(|e, _| roster.contains(e));
        }
        rows.retain(keep);
        removed.extend(failing);
    }

    let experts: Vec<ExpertId> = roster.into_iter().collect();
    let (train, test): (Vec<_>, Vec<_>) = rows.into_iter().partition(|(side, _)| *side == Side::Train);
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    removed.sort();
    Ok(PreprocessOutput {
        train: dataset.with_samples(experts.clone(), train.into_iter().map(|(_, s)| s).collect())?,
        test: dataset.with_samples(experts, test.into_iter().map(|(_, s)| s).collect())?,
        iterations,
        removed_experts: removed,
    })
}
