//! JSON-Lines panel files with a `.meta.json` sidecar.
//!
//! `train.jsonl` holds one sample per line,
//! `{"id": "...", "x": [..], "y": {"expert": label, ..}}`, and
//! `train.meta.json` carries `k`, `d`, label names and the expert roster.
//! Floats are written in shortest round-trip form so a save/load cycle is
//! lossless.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{PanelDataset, Sample};
use crate::error::{Error, Result};
use crate::types::{ExpertId, Label};

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub version: u32,
    pub k: usize,
    pub d: usize,
    pub label_names: Vec<String>,
    pub roster: Vec<ExpertId>,
}

#[derive(Serialize)]
struct LineOut<'a> {
    id: &'a str,
    x: &'a [f64],
    y: &'a BTreeMap<ExpertId, Label>,
}

#[derive(Deserialize)]
struct LineIn {
    id: String,
    x: Vec<f64>,
    y: BTreeMap<String, i64>,
}

/// `data/train.jsonl` -> `data/train.meta.json`.
pub fn meta_path_for(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn save_dataset(dataset: &PanelDataset, path: &Path) -> Result<()> {
    let meta = DatasetMeta {
        version: DATASET_FORMAT_VERSION,
        k: dataset.k(),
        d: dataset.d(),
        label_names: dataset.label_names().to_vec(),
        roster: dataset.experts().to_vec(),
    };
    let mut w = BufWriter::new(File::create(meta_path_for(path))?);
    serde_json::to_writer_pretty(&mut w, &meta)?;
    w.write_all(b"\n")?;
    w.flush()?;

    let mut w = BufWriter::new(File::create(path)?);
    for s in dataset.samples() {
        serde_json::to_writer(&mut w, &LineOut { id: &s.id, x: &s.features, y: &s.predictions })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<PanelDataset> {
    let meta_path = meta_path_for(path);
    let meta: DatasetMeta = serde_json::from_reader(BufReader::new(File::open(&meta_path)?))
        .map_err(|e| Error::Parse { path: meta_path.clone(), line: e.line(), msg: e.to_string() })?;
    if meta.version != DATASET_FORMAT_VERSION {
        return Err(Error::Schema(format!("unsupported dataset format version {}", meta.version)));
    }
    let roster: std::collections::BTreeSet<&ExpertId> = meta.roster.iter().collect();

    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { path: path.to_path_buf(), line: line_no, msg };
        let raw: LineIn = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if raw.x.len() != meta.d {
            return Err(parse_err(format!(
                "sample `{}` has {} features, expected {}",
                raw.id,
                raw.x.len(),
                meta.d
            )));
        }
        let mut predictions = BTreeMap::new();
        for (expert, label) in raw.y {
            let expert = ExpertId::from(expert);
            if !roster.contains(&expert) {
                return Err(Error::Schema(format!(
                    "line {line_no}: expert `{expert}` is not in the roster"
                )));
            }
            if label < 0 || label as usize >= meta.k {
                return Err(Error::Schema(format!(
                    "line {line_no}: label {label} of expert `{expert}` outside [0, {})",
                    meta.k
                )));
            }
            predictions.insert(expert, Label(label as usize));
        }
        samples.push(Sample { id: raw.id, features: raw.x, predictions });
    }
    PanelDataset::new(meta.k, meta.d, meta.label_names, meta.roster, samples)
}
