//! Held-out scoring of second-opinion predictors and partition metrics.
//!
//! Every observed prediction on a test sample serves once as the observation
//! while the other experts' labels on that sample are inferred. Results are
//! broken down by whether source and target share a group.

mod metrics;
mod predictors;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use metrics::{adjusted_rand_index, edge_ratio, zero_one_loss, EdgeRatio};
pub use predictors::{GnbCnbPredictor, GnbPredictor, PairQuery, SecondOpinionPredictor, SiScmPredictor};

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::types::{ExpertId, Label, Partition};

pub const ALL_PAIRS: &str = "all_pairs";
pub const SAME_GROUP: &str = "same_group";
pub const CROSS_GROUP: &str = "cross_group";

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub n: usize,
    pub correct: usize,
    /// `None` when `n` is zero.
    pub accuracy: Option<f64>,
}

impl Tally {
    fn add(&mut self, hit: bool) {
        self.n += 1;
        self.correct += usize::from(hit);
    }

    fn finish(&mut self) {
        self.accuracy = (self.n > 0).then(|| self.correct as f64 / self.n as f64);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall_accuracy: f64,
    pub n_predictions: usize,
    /// Keyed by `all_pairs`, `same_group` and `cross_group`.
    pub scenarios: BTreeMap<String, Tally>,
    /// Keyed by target expert.
    pub per_expert: BTreeMap<ExpertId, Tally>,
    pub label_names: Vec<String>,
    /// `confusion_matrix[true][predicted]`.
    pub confusion_matrix: Vec<Vec<u64>>,
}

impl EvalReport {
    pub fn scenario_accuracy(&self, name: &str) -> Option<f64> {
        self.scenarios.get(name).and_then(|t| t.accuracy)
    }

    /// Held-out 0/1 loss over all pairs.
    pub fn loss(&self) -> f64 {
        1.0 - self.overall_accuracy
    }
}

struct Outcome {
    target: usize,
    truth: Label,
    predicted: Label,
    same_group: bool,
}

/// Scores `predictor` on every ordered co-observed pair of `test`. Scenario
/// membership follows `partition`.
pub fn evaluate<P: SecondOpinionPredictor + ?Sized>(
    test: &PanelDataset,
    predictor: &P,
    partition: &Partition,
) -> Result<EvalReport> {
    let experts = test.experts();
    let index: BTreeMap<&ExpertId, usize> = experts.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let groups: Vec<usize> = experts.iter().map(|e| partition.require_group(e)).collect::<Result<_>>()?;
    let k = test.k();

    let per_sample: Vec<Vec<Outcome>> = test
        .samples()
        .par_iter()
        .map(|s| {
            let mut out = Vec::new();
            for (src, &observed) in &s.predictions {
                let targets: Vec<ExpertId> = s.predictions.keys().filter(|t| *t != src).cloned().collect();
                if targets.is_empty() {
                    continue;
                }
                let query = PairQuery { sample_id: &s.id, features: &s.features, source: src, observed, targets: &targets };
                let predicted = predictor.predict(&query)?;
                if predicted.len() != targets.len() {
                    return Err(Error::invalid(format!(
                        "predictor returned {} labels for {} targets",
                        predicted.len(),
                        targets.len()
                    )));
                }
                for (t, p) in targets.iter().zip(predicted) {
                    if p.0 >= k {
                        return Err(Error::invalid(format!("predicted label {p} outside [0, {k})")));
                    }
                    out.push(Outcome {
                        target: index[t],
                        truth: s.predictions[t],
                        predicted: p,
                        same_group: groups[index[src]] == groups[index[t]],
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut all = Tally::default();
    let mut same = Tally::default();
    let mut cross = Tally::default();
    let mut per = vec![Tally::default(); experts.len()];
    let mut confusion = vec![vec![0u64; k]; k];
    for o in per_sample.iter().flatten() {
        let hit = o.truth == o.predicted;
        all.add(hit);
        if o.same_group { same.add(hit) } else { cross.add(hit) }
        per[o.target].add(hit);
        confusion[o.truth.0][o.predicted.0] += 1;
    }
    if all.n == 0 {
        return Err(Error::InsufficientData("test panel has no co-observed pairs".into()));
    }
    for t in [&mut all, &mut same, &mut cross].into_iter().chain(per.iter_mut()) {
        t.finish();
    }
    Ok(EvalReport {
        overall_accuracy: all.accuracy.expect("non-empty"),
        n_predictions: all.n,
        scenarios: [(ALL_PAIRS.to_string(), all), (SAME_GROUP.to_string(), same), (CROSS_GROUP.to_string(), cross)]
            .into(),
        per_expert: experts.iter().cloned().zip(per).collect(),
        label_names: test.label_names().to_vec(),
        confusion_matrix: confusion,
    })
}

/// Writes `report.json`, `confusion_matrix.csv` and
/// `per_expert_accuracy.csv` into `dir`, each name prefixed by `prefix`.
pub fn write_report(report: &EvalReport, dir: &Path, prefix: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join(format!("{prefix}report.json")))?);
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n")?;
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(format!("{prefix}confusion_matrix.csv")))?;
    w.write_record(std::iter::once("true\\predicted").chain(report.label_names.iter().map(String::as_str)))?;
    for (name, row) in report.label_names.iter().zip(&report.confusion_matrix) {
        w.write_record(std::iter::once(name.clone()).chain(row.iter().map(u64::to_string)))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(format!("{prefix}per_expert_accuracy.csv")))?;
    w.write_record(["expert_id", "n", "accuracy"])?;
    for (e, t) in &report.per_expert {
        w.write_record([e.to_string(), t.n.to_string(), t.accuracy.map(|a| a.to_string()).unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(())
}
