//! Multinomial logit model: `P(c | x) = softmax_c(w_c . x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ConditionalModel;
use crate::types::SimplexDistribution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    weights: Vec<Vec<f64>>,
}

impl LogitModel {
    /// `weights` holds one `d`-vector per label.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("logit model needs at least one label"));
        }
        let d = weights[0].len();
        if weights.iter().any(|w| w.len() != d) {
            return Err(Error::invalid("logit weight rows differ in dimension"));
        }
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::invalid("logit weights must be finite"));
        }
        Ok(LogitModel { weights })
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<SimplexDistribution> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "feature dimension {} does not match model dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let logits: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect();
        SimplexDistribution::from_log_weights(&logits)
    }
}

impl ConditionalModel for LogitModel {
    fn num_labels(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &[f64]) -> Result<SimplexDistribution> {
        self.predict(x)
    }
}
