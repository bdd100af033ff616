//! Panels of expert predictions: samples with features and a sparse map from
//! expert to predicted label.

mod io;
mod preprocess;
mod sparsity;
mod synthetic;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use io::{load_dataset, meta_path_for, save_dataset, DatasetMeta};
pub use preprocess::{
    preprocess, random_split, PreprocessConfig, PreprocessOutput, Side, DEFAULT_TEST_MIN,
    DEFAULT_TRAIN_MIN,
};
pub use sparsity::{apply_sparsity, retained_count};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticPanel};

use crate::error::{Error, Result};
use crate::types::{ExpertId, Label};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub features: Vec<f64>,
    pub predictions: BTreeMap<ExpertId, Label>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PanelDataset {
    k: usize,
    d: usize,
    label_names: Vec<String>,
    experts: Vec<ExpertId>,
    samples: Vec<Sample>,
}

impl PanelDataset {
    /// Validates and assembles a dataset. The roster is stored sorted.
    pub fn new(
        k: usize,
        d: usize,
        label_names: Vec<String>,
        experts: Vec<ExpertId>,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Schema("label count must be at least 1".into()));
        }
        if label_names.len() != k {
            return Err(Error::Schema(format!(
                "{} label names given for {k} labels",
                label_names.len()
            )));
        }
        let roster: BTreeSet<ExpertId> = experts.iter().cloned().collect();
        if roster.len() != experts.len() {
            return Err(Error::Schema("expert roster contains duplicates".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &samples {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Schema(format!("duplicate sample id `{}`", s.id)));
            }
            if s.features.len() != d {
                return Err(Error::Schema(format!(
                    "sample `{}` has {} features, expected {d}",
                    s.id,
                    s.features.len()
                )));
            }
            if s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Schema(format!("sample `{}` has non-finite features", s.id)));
            }
            if s.predictions.is_empty() {
                return Err(Error::Schema(format!("sample `{}` has no predictions", s.id)));
            }
            for (e, y) in &s.predictions {
                if !roster.contains(e) {
                    return Err(Error::Schema(format!("sample `{}`: unknown expert `{e}`", s.id)));
                }
                if y.0 >= k {
                    return Err(Error::Schema(format!(
                        "sample `{}`: label {y} of expert `{e}` outside [0, {k})",
                        s.id
                    )));
                }
            }
        }
        Ok(PanelDataset {
            k,
            d,
            label_names,
            experts: roster.into_iter().collect(),
            samples,
        })
    }

    pub fn default_label_names(k: usize) -> Vec<String> {
        (0..k).map(|c| c.to_string()).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn experts(&self) -> &[ExpertId] {
        &self.experts
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Same header, different samples and roster.
    pub fn with_samples(&self, experts: Vec<ExpertId>, samples: Vec<Sample>) -> Result<Self> {
        PanelDataset::new(self.k, self.d, self.label_names.clone(), experts, samples)
    }

    /// Number of predictions each roster expert made.
    pub fn prediction_counts(&self) -> BTreeMap<ExpertId, usize> {
        let mut counts: BTreeMap<ExpertId, usize> = self.experts.iter().map(|e| (e.clone(), 0)).collect();
        for s in &self.samples {
            for e in s.predictions.keys() {
                *counts.get_mut(e).expect("validated roster") += 1;
            }
        }
        counts
    }
}
