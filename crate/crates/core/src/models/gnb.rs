//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ConditionalModel;
use crate::types::{Label, SimplexDistribution};

/// Default variance floor, relative to the largest per-feature variance.
pub const DEFAULT_VAR_SMOOTHING: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    class_log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GnbModel {
    /// Builds a model from explicit parameters (`k` priors, `k x d` means and
    /// variances). Log-priors may be `-inf` for impossible classes.
    pub fn from_parts(
        class_log_priors: Vec<f64>,
        means: Vec<Vec<f64>>,
        variances: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = class_log_priors.len();
        if k == 0 || means.len() != k || variances.len() != k {
            return Err(Error::invalid("GNB parameters need one row per class"));
        }
        let d = means[0].len();
        if means.iter().chain(&variances).any(|row| row.len() != d) {
            return Err(Error::invalid("GNB parameter rows differ in dimension"));
        }
        if variances.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("GNB variances must be positive and finite"));
        }
        if means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::invalid("GNB means must be finite"));
        }
        let mass: f64 = class_log_priors.iter().map(|p| p.exp()).sum();
        if class_log_priors.iter().any(|p| p.is_nan()) || (mass - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("GNB priors must sum to 1"));
        }
        Ok(GnbModel { class_log_priors, means, variances })
    }

    pub fn num_labels(&self) -> usize {
        self.class_log_priors.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn class_log_priors(&self) -> &[f64] {
        &self.class_log_priors
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    /// Posterior class probabilities for `x`.
    pub fn predict(&self, x: &[f64]) -> Result<SimplexDistribution> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "feature dimension {} does not match model dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let log_joint: Vec<f64> = (0..self.num_labels())
            .map(|c| {
                let ll: f64 = x
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((xi, mu), var)| {
                        -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (xi - mu).powi(2) / (2.0 * var)
                    })
                    .sum();
                self.class_log_priors[c] + ll
            })
            .collect();
        SimplexDistribution::from_log_weights(&log_joint)
    }
}

impl ConditionalModel for GnbModel {
    fn num_labels(&self) -> usize {
        self.num_labels()
    }

    fn predict(&self, x: &[f64]) -> Result<SimplexDistribution> {
        self.predict(x)
    }
}

/// Fits per-class feature means and variances and class-frequency priors.
///
/// Variances are floored at `smoothing` times the largest per-feature
/// variance of the whole training set.
pub fn train_gnb<'a, I>(samples: I, k: usize, smoothing: f64) -> Result<GnbModel>
where
    I: IntoIterator<Item = (&'a [f64], Label)>,
{
    if k == 0 {
        return Err(Error::invalid("label count must be at least 1"));
    }
    if !(smoothing.is_finite() && smoothing > 0.0) {
        return Err(Error::invalid("variance smoothing must be positive"));
    }
    let samples: Vec<(&[f64], Label)> = samples.into_iter().collect();
    let Some(first) = samples.first() else {
        return Err(Error::InsufficientData("no training samples".into()));
    };
    let d = first.0.len();
    let mut counts = vec![0usize; k];
    for (x, y) in &samples {
        if x.len() != d {
            return Err(Error::invalid("training samples differ in feature dimension"));
        }
        if y.0 >= k {
            return Err(Error::invalid(format!("label {y} out of range for {k} labels")));
        }
        counts[y.0] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::InsufficientData(format!("class {c} has no training samples")));
    }

    let n = samples.len() as f64;
    let mut means = vec![vec![0.0; d]; k];
    let mut total_mean = vec![0.0; d];
    for (x, y) in &samples {
        for j in 0..d {
            means[y.0][j] += x[j];
            total_mean[j] += x[j];
        }
    }
    for c in 0..k {
        means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
    }
    total_mean.iter_mut().for_each(|m| *m /= n);

    let mut variances = vec![vec![0.0; d]; k];
    let mut total_var = vec![0.0; d];
    for (x, y) in &samples {
        for j in 0..d {
            variances[y.0][j] += (x[j] - means[y.0][j]).powi(2);
            total_var[j] += (x[j] - total_mean[j]).powi(2);
        }
    }
    let max_var = total_var.iter().map(|v| v / n).fold(0.0, f64::max);
    let floor = if max_var > 0.0 { smoothing * max_var } else { smoothing };
    for c in 0..k {
        variances[c]
            .iter_mut()
            .for_each(|v| *v = (*v / counts[c] as f64).max(floor));
    }
    let class_log_priors = counts.iter().map(|&m| (m as f64 / n).ln()).collect();
    GnbModel::from_parts(class_log_priors, means, variances)
}
