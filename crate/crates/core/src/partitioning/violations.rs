use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::models::{ConditionalModel, ModelMap};
use crate::types::{ExpertId, Label, SimplexDistribution, PROB_FLOOR};

/// An observed label pair that rules out shared noise for `(source, target)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub sample_id: String,
    pub source: ExpertId,
    pub target: ExpertId,
    pub source_label: Label,
    pub target_label: Label,
    /// `p_target(c) / p_source(c)` for the source's label `c`.
    pub ratio_lhs: f64,
    /// `p_target(c') / p_source(c')` for the target's label `c'`.
    pub ratio_rhs: f64,
}

/// Unordered expert pair, smaller id first.
pub type ExpertPair = (ExpertId, ExpertId);

pub(crate) fn pair(a: &ExpertId, b: &ExpertId) -> ExpertPair {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[derive(Clone, Debug, Default)]
pub struct ViolationScan {
    pub violations: Vec<ViolationRecord>,
    /// Co-observed pairs without any violation.
    pub permissible: BTreeSet<ExpertPair>,
    /// Number of samples on which each pair was co-observed.
    pub co_observations: BTreeMap<ExpertPair, usize>,
}

impl ViolationScan {
    pub fn violating_pairs(&self) -> BTreeSet<ExpertPair> {
        self.violations.iter().map(|v| pair(&v.source, &v.target)).collect()
    }
}

/// Each expert's predicted distribution on every sample it labeled.
pub(crate) fn panel_distributions<M: ConditionalModel>(
    dataset: &PanelDataset,
    models: &ModelMap<M>,
) -> Result<Vec<BTreeMap<ExpertId, SimplexDistribution>>> {
    for e in dataset.experts() {
        if !models.contains_key(e) {
            return Err(Error::missing(e));
        }
    }
    dataset
        .samples()
        .par_iter()
        .map(|s| {
            s.predictions
                .keys()
                .map(|e| {
                    let p = models[e].predict(&s.features)?;
                    if p.k() != dataset.k() {
                        return Err(Error::invalid(format!(
                            "model for `{e}` has {} labels, dataset has {}",
                            p.k(),
                            dataset.k()
                        )));
                    }
                    Ok((e.clone(), p))
                })
                .collect()
        })
        .collect()
}

/// Checks the ratio condition for the ordered pair on one observation.
/// Returns the two ratios when it flags a violation.
pub fn check_violation(
    p_source: &SimplexDistribution,
    p_target: &SimplexDistribution,
    source_label: Label,
    target_label: Label,
    slack: f64,
) -> Option<(f64, f64)> {
    if source_label == target_label {
        return None;
    }
    let p = |d: &SimplexDistribution, l: Label| d.prob(l).max(PROB_FLOOR);
    let lhs = p(p_target, source_label) / p(p_source, source_label);
    let rhs = p(p_target, target_label) / p(p_source, target_label);
    (lhs >= slack * rhs).then_some((lhs, rhs))
}

/// Scans every sample for violations of conditional stability, checking both
/// orderings of each co-observed pair.
pub fn detect_violations<M: ConditionalModel>(
    dataset: &PanelDataset,
    models: &ModelMap<M>,
    slack: f64,
) -> Result<ViolationScan> {
    if !(slack.is_finite() && slack > 0.0) {
        return Err(Error::invalid(format!("slack {slack} must be positive")));
    }
    let dists = panel_distributions(dataset, models)?;
    let per_sample: Vec<(Vec<ExpertPair>, Vec<ViolationRecord>)> = dataset
        .samples()
        .par_iter()
        .zip(dists.par_iter())
        .map(|(s, dist)| {
            let obs: Vec<(&ExpertId, Label)> = s.predictions.iter().map(|(e, l)| (e, *l)).collect();
            let mut pairs = Vec::new();
            let mut found = Vec::new();
            for (i, &(a, la)) in obs.iter().enumerate() {
                for &(b, lb) in &obs[i + 1..] {
                    pairs.push((a.clone(), b.clone()));
                    for (src, ls, tgt, lt) in [(a, la, b, lb), (b, lb, a, la)] {
                        if let Some((lhs, rhs)) = check_violation(&dist[src], &dist[tgt], ls, lt, slack) {
                            found.push(ViolationRecord {
                                sample_id: s.id.clone(),
                                source: src.clone(),
                                target: tgt.clone(),
                                source_label: ls,
                                target_label: lt,
                                ratio_lhs: lhs,
                                ratio_rhs: rhs,
                            });
                        }
                    }
                }
            }
            (pairs, found)
        })
        .collect();

    let mut scan = ViolationScan::default();
    for (pairs, found) in per_sample {
        for p in pairs {
            *scan.co_observations.entry(p).or_default() += 1;
        }
        scan.violations.extend(found);
    }
    let bad = scan.violating_pairs();
    scan.permissible = scan.co_observations.keys().filter(|p| !bad.contains(*p)).cloned().collect();
    Ok(scan)
}

pub fn write_violations_csv(violations: &[ViolationRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample_id", "source", "target", "source_label", "target_label", "ratio_lhs", "ratio_rhs"])?;
    for v in violations {
        w.write_record([
            v.sample_id.clone(),
            v.source.to_string(),
            v.target.to_string(),
            v.source_label.to_string(),
            v.target_label.to_string(),
            v.ratio_lhs.to_string(),
            v.ratio_rhs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
