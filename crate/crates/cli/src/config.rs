use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use siscm_core::data::SyntheticConfig;
use siscm_core::models::{DEFAULT_CNB_ALPHA, DEFAULT_VAR_SMOOTHING};
use siscm_core::partitioning::{LossKind, DEFAULT_RESTARTS, DEFAULT_SLACK, DEFAULT_WEIGHT_SAMPLES};

use crate::args::{BenchArgs, CommonArgs, LossArg, SynthArgs};
use crate::UsageError;

pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchGrid {
    pub m: Vec<usize>,
    pub s: Vec<f64>,
    pub replicates: usize,
    pub fit_models: bool,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid { m: vec![250, 1000], s: vec![0.5, 0.9], replicates: 5, fit_models: false }
    }
}

/// Everything a run needs besides input paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Posterior samples per counterfactual query.
    pub samples: usize,
    pub weight_samples: usize,
    pub restarts: usize,
    pub alpha: f64,
    pub smoothing: f64,
    pub slack: f64,
    pub loss: LossKind,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub synth: SyntheticConfig,
    pub bench: BenchGrid,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            samples: DEFAULT_SAMPLES,
            weight_samples: DEFAULT_WEIGHT_SAMPLES,
            restarts: DEFAULT_RESTARTS,
            alpha: DEFAULT_CNB_ALPHA,
            smoothing: DEFAULT_VAR_SMOOTHING,
            slack: DEFAULT_SLACK,
            loss: LossKind::ZeroOne,
            threads: None,
            out_dir: PathBuf::from("out"),
            synth: SyntheticConfig::default(),
            bench: BenchGrid::default(),
        }
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    /// Defaults overlaid with a (possibly partial) JSON config file.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let over: Value = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let mut base = serde_json::to_value(RunConfig::default())?;
        merge(&mut base, over);
        Ok(serde_json::from_value(base).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?)
    }

    /// Flags > config file > defaults.
    pub fn resolve(common: &CommonArgs) -> anyhow::Result<Self> {
        let mut cfg = match &common.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = common.seed {
            cfg.seed = v;
        }
        if let Some(v) = common.samples {
            cfg.samples = v;
        }
        if let Some(v) = common.t_weights {
            cfg.weight_samples = v;
        }
        if let Some(v) = common.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = common.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = common.smoothing {
            cfg.smoothing = v;
        }
        if let Some(v) = common.slack {
            cfg.slack = v;
        }
        if let Some(v) = common.loss {
            cfg.loss = match v {
                LossArg::ZeroOne => LossKind::ZeroOne,
                LossArg::Nll => LossKind::Nll,
            };
        }
        if common.threads.is_some() {
            cfg.threads = common.threads;
        }
        if let Some(v) = &common.out_dir {
            cfg.out_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_synth(&mut self, a: &SynthArgs) {
        let s = &mut self.synth;
        if let Some(v) = &a.group_sizes {
            s.group_sizes = v.clone();
            if a.n_experts.is_none() {
                s.n_experts = v.iter().sum();
            }
        }
        if let Some(v) = a.n_experts {
            s.n_experts = v;
        }
        if let Some(v) = a.k {
            s.k = v;
        }
        if let Some(v) = a.d {
            s.d = v;
        }
        if let Some(v) = a.n_train {
            s.n_train = v;
        }
        if let Some(v) = a.n_test {
            s.n_test = v;
        }
        if let Some(v) = a.sparsity {
            s.sparsity = v;
        }
        if a.test_sparsity.is_some() {
            s.test_sparsity = a.test_sparsity;
        }
        s.seed = self.seed;
    }

    pub fn apply_bench(&mut self, a: &BenchArgs) {
        if let Some(v) = &a.m {
            self.bench.m = v.clone();
        }
        if let Some(v) = &a.s {
            self.bench.s = v.clone();
        }
        if let Some(v) = a.replicates {
            self.bench.replicates = v;
        }
        self.bench.fit_models |= a.fit_models;
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let counts = [
            ("samples", self.samples),
            ("t_weights", self.weight_samples),
            ("restarts", self.restarts),
            ("bench.replicates", self.bench.replicates),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(UsageError(format!("{name} must be at least 1")));
            }
        }
        if self.threads == Some(0) {
            return Err(UsageError("threads must be at least 1".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("smoothing", self.smoothing), ("slack", self.slack)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(UsageError(format!("{name} must be positive, got {v}")));
            }
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(UsageError("out_dir must not be empty".into()));
        }
        Ok(())
    }
}
