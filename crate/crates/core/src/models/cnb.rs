//! Categorical naive Bayes over one observed co-prediction.
//!
//! For a target expert the model keeps, per source expert, a `(k + 1) x k`
//! table of counts of the target's label given the source's label. Row `k`
//! counts target labels on samples where the source made no prediction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::types::{ExpertId, Label, SimplexDistribution};

pub const DEFAULT_CNB_ALPHA: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnbModel {
    k: usize,
    alpha: f64,
    counts: BTreeMap<ExpertId, Vec<Vec<u64>>>,
}

impl CnbModel {
    pub fn num_labels(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Raw count table for `source`, if any co-prediction was seen.
    pub fn counts(&self, source: &ExpertId) -> Option<&[Vec<u64>]> {
        self.counts.get(source).map(Vec::as_slice)
    }

    /// Smoothed `P(target | source = observed)`; `None` means the source made
    /// no prediction. Unseen sources fall back to the uniform row.
    pub fn row(&self, source: &ExpertId, observed: Option<Label>) -> Result<SimplexDistribution> {
        let r = match observed {
            Some(l) if l.0 >= self.k => {
                return Err(Error::invalid(format!(
                    "observed label {l} out of range for {} labels",
                    self.k
                )))
            }
            Some(l) => l.0,
            None => self.k,
        };
        let weights = match self.counts.get(source) {
            Some(table) => table[r].iter().map(|&n| n as f64 + self.alpha).collect(),
            None => vec![1.0; self.k],
        };
        SimplexDistribution::floored(weights)
    }
}

/// Builds the smoothed count tables from `(source, source label or absent,
/// target label)` triples.
pub fn train_cnb<'a, I>(co_predictions: I, k: usize, alpha: f64) -> Result<CnbModel>
where
    I: IntoIterator<Item = (&'a ExpertId, Option<Label>, Label)>,
{
    if k == 0 {
        return Err(Error::invalid("label count must be at least 1"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid("CNB smoothing alpha must be positive"));
    }
    let mut counts: BTreeMap<ExpertId, Vec<Vec<u64>>> = BTreeMap::new();
    for (source, observed, target) in co_predictions {
        if target.0 >= k || observed.is_some_and(|l| l.0 >= k) {
            return Err(Error::invalid(format!("label out of range for {k} labels")));
        }
        let table = counts
            .entry(source.clone())
            .or_insert_with(|| vec![vec![0; k]; k + 1]);
        table[observed.map_or(k, |l| l.0)][target.0] += 1;
    }
    Ok(CnbModel { k, alpha, counts })
}

/// CNB for `target` from every training sample it labelled, conditioning on
/// each other roster expert in turn.
pub fn train_cnb_for_target(dataset: &PanelDataset, target: &ExpertId, alpha: f64) -> Result<CnbModel> {
    if !dataset.experts().contains(target) {
        return Err(Error::missing(target));
    }
    let mut triples = Vec::new();
    for sample in dataset.samples() {
        let Some(&y) = sample.predictions.get(target) else { continue };
        for source in dataset.experts() {
            if source != target {
                triples.push((source, sample.predictions.get(source).copied(), y));
            }
        }
    }
    train_cnb(triples, dataset.k(), alpha)
}
