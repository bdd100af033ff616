//! Per-expert conditional label models and the two non-causal baselines.

mod cnb;
mod gnb;
mod logit;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cnb::{train_cnb, train_cnb_for_target, CnbModel, DEFAULT_CNB_ALPHA};
pub use gnb::{train_gnb, GnbModel, DEFAULT_VAR_SMOOTHING};
pub use logit::LogitModel;

use crate::data::PanelDataset;
use crate::error::{Error, Result};
use crate::types::{argmax, ExpertId, Label, SimplexDistribution};

/// Maps a feature vector to a distribution over the expert's label.
pub trait ConditionalModel: Send + Sync {
    fn num_labels(&self) -> usize;

    fn predict(&self, x: &[f64]) -> Result<SimplexDistribution>;
}

pub type ModelMap<M> = BTreeMap<ExpertId, M>;

/// A model that ignores its input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedModel {
    dist: SimplexDistribution,
}

impl FixedModel {
    pub fn new(dist: SimplexDistribution) -> Self {
        FixedModel { dist }
    }
}

impl ConditionalModel for FixedModel {
    fn num_labels(&self) -> usize {
        self.dist.k()
    }

    fn predict(&self, _x: &[f64]) -> Result<SimplexDistribution> {
        Ok(self.dist.clone())
    }
}

/// Any model kind that can be stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpertModel {
    Gnb(GnbModel),
    Logit(LogitModel),
}

impl ConditionalModel for ExpertModel {
    fn num_labels(&self) -> usize {
        match self {
            ExpertModel::Gnb(m) => m.num_labels(),
            ExpertModel::Logit(m) => ConditionalModel::num_labels(m),
        }
    }

    fn predict(&self, x: &[f64]) -> Result<SimplexDistribution> {
        match self {
            ExpertModel::Gnb(m) => m.predict(x),
            ExpertModel::Logit(m) => m.predict(x),
        }
    }
}

/// One GNB per expert, trained on that expert's own predictions.
pub fn train_gnb_models(dataset: &PanelDataset, smoothing: f64) -> Result<ModelMap<GnbModel>> {
    use rayon::prelude::*;
    dataset
        .experts()
        .par_iter()
        .map(|e| {
            let samples = dataset
                .samples()
                .iter()
                .filter_map(|s| s.predictions.get(e).map(|y| (s.features.as_slice(), *y)));
            let model = train_gnb(samples, dataset.k(), smoothing).map_err(|err| match err {
                Error::InsufficientData(msg) => Error::InsufficientData(format!("expert `{e}`: {msg}")),
                other => other,
            })?;
            Ok((e.clone(), model))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

/// One CNB per target expert.
pub fn train_cnb_models(dataset: &PanelDataset, alpha: f64) -> Result<ModelMap<CnbModel>> {
    use rayon::prelude::*;
    dataset
        .experts()
        .par_iter()
        .map(|e| Ok((e.clone(), train_cnb_for_target(dataset, e, alpha)?)))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

/// Baseline: most likely label under the target's own model.
pub fn baseline_gnb_argmax<M: ConditionalModel + ?Sized>(target: &M, x: &[f64]) -> Result<Label> {
    Ok(target.predict(x)?.argmax())
}

/// Baseline: most likely label under the product of the target's model and
/// the CNB row for the observed source prediction.
pub fn baseline_gnb_cnb_argmax<M: ConditionalModel + ?Sized>(
    target: &M,
    cnb: &CnbModel,
    source: &ExpertId,
    x: &[f64],
    observed: Option<Label>,
) -> Result<Label> {
    let p = target.predict(x)?;
    let row = cnb.row(source, observed)?;
    if row.k() != p.k() {
        return Err(Error::invalid("CNB and conditional model label counts differ"));
    }
    let product: Vec<f64> = p.probs().iter().zip(row.probs()).map(|(a, b)| a * b).collect();
    Ok(Label(argmax(&product)))
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument<T> {
    version: u32,
    expert: ExpertId,
    #[serde(flatten)]
    model: T,
}

#[derive(Serialize, Deserialize)]
struct ModelBundle<T> {
    version: u32,
    models: Vec<ModelDocument<T>>,
}

/// Writes a bundle of per-expert versioned model documents.
pub fn save_models<T: Serialize>(models: &ModelMap<T>, path: &Path) -> Result<()> {
    #[derive(Serialize)]
    struct DocRef<'a, T> {
        version: u32,
        expert: &'a ExpertId,
        #[serde(flatten)]
        model: &'a T,
    }
    #[derive(Serialize)]
    struct BundleRef<'a, T> {
        version: u32,
        models: Vec<DocRef<'a, T>>,
    }
    let bundle = BundleRef {
        version: MODEL_FORMAT_VERSION,
        models: models
            .iter()
            .map(|(expert, model)| DocRef { version: MODEL_FORMAT_VERSION, expert, model })
            .collect(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &bundle)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_models<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<ModelMap<T>> {
    let bundle: ModelBundle<T> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if bundle.version != MODEL_FORMAT_VERSION {
        return Err(Error::Schema(format!("unsupported model format version {}", bundle.version)));
    }
    let mut out = ModelMap::new();
    for doc in bundle.models {
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "expert `{}`: unsupported model version {}",
                doc.expert, doc.version
            )));
        }
        if out.insert(doc.expert.clone(), doc.model).is_some() {
            return Err(Error::Schema(format!("expert `{}` appears twice", doc.expert)));
        }
    }
    Ok(out)
}
