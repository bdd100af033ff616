//! Prior and posterior Gumbel noise.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::mechanism::mechanism_index;
use crate::types::{logsumexp, Label, NORMALIZATION_TOL};

/// One realization of the k-dimensional exogenous noise of a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GumbelVector(Vec<f64>);

impl GumbelVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("Gumbel noise entries must be finite"));
        }
        Ok(GumbelVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Inverse CDF of the standard Gumbel distribution.
#[inline]
pub fn gumbel_from_uniform(u: f64) -> f64 {
    -(-u.ln()).ln()
}

#[inline]
fn standard_gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    gumbel_from_uniform(rng.sample(Open01))
}

/// Draws `k` i.i.d. standard Gumbel variables.
pub fn sample_prior_noise<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<GumbelVector> {
    if k == 0 {
        return Err(Error::invalid("label count must be at least 1"));
    }
    Ok(GumbelVector((0..k).map(|_| standard_gumbel(rng)).collect()))
}

/// Exact sampler for the Gumbel noise conditioned on the argmax outcome.
///
/// Top-down construction: the maximum of the perturbed potentials is
/// Gumbel(logsumexp) = Gumbel(0) for normalized potentials and is assigned to
/// the observed class; every other perturbed potential is Gumbel(phi_c)
/// truncated above at that maximum.
#[derive(Clone, Debug)]
pub(crate) struct PosteriorSampler {
    log_probs: Vec<f64>,
    probs: Vec<f64>,
    observed: usize,
}

impl PosteriorSampler {
    pub(crate) fn new(log_probs: &[f64], observed: Label) -> Result<Self> {
        if log_probs.is_empty() {
            return Err(Error::invalid("label count must be at least 1"));
        }
        if observed.0 >= log_probs.len() {
            return Err(Error::invalid(format!(
                "observed label {observed} out of range for {} labels",
                log_probs.len()
            )));
        }
        if log_probs.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("log-potentials must be finite"));
        }
        let norm = logsumexp(log_probs);
        if norm.abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!(
                "log-potentials are not normalized (logsumexp = {norm})"
            )));
        }
        Ok(PosteriorSampler {
            log_probs: log_probs.to_vec(),
            probs: log_probs.iter().map(|v| v.exp()).collect(),
            observed: observed.0,
        })
    }

    /// Writes one posterior draw into `out`.
    ///
    /// A draw whose floating-point argmax disagrees with the observation (a
    /// rounding tie) is redrawn, so every returned vector satisfies the
    /// constraint exactly.
    pub(crate) fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.log_probs.len());
        loop {
            let top = standard_gumbel(rng);
            let scale = (-top).exp();
            for (c, slot) in out.iter_mut().enumerate() {
                if c == self.observed {
                    *slot = top - self.log_probs[c];
                } else {
                    let u: f64 = rng.sample(Open01);
                    // g = phi - ln(exp(phi - top) - ln u); noise = g - phi
                    *slot = -(self.probs[c] * scale - u.ln()).ln();
                }
            }
            if mechanism_index(&self.log_probs, out) == self.observed {
                return;
            }
        }
    }
}

/// Draws noise from its posterior given that the Gumbel-Max mechanism with
/// normalized log-potentials `log_probs` produced `observed`.
pub fn sample_posterior_noise<R: Rng + ?Sized>(
    log_probs: &[f64],
    observed: Label,
    rng: &mut R,
) -> Result<GumbelVector> {
    let sampler = PosteriorSampler::new(log_probs, observed)?;
    let mut out = vec![0.0; log_probs.len()];
    sampler.draw_into(rng, &mut out);
    Ok(GumbelVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::scm::mechanism;

    const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

    fn gumbel_cdf(g: f64) -> f64 {
        (-(-g).exp()).exp()
    }

    fn ks_against_cdf(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn inverse_cdf_fixed_point() {
        assert_eq!(gumbel_from_uniform(1.0 / std::f64::consts::E), 0.0);
    }

    #[test]
    fn zero_labels_is_rejected() {
        assert!(matches!(
            sample_prior_noise(0, &mut seeded(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn prior_mean_is_euler_mascheroni() {
        let mut rng = seeded(11);
        let n = 1_000_000;
        let mean = (0..n).map(|_| standard_gumbel(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - EULER_MASCHERONI).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn prior_matches_gumbel_cdf() {
        let mut rng = seeded(12);
        let draws = sample_prior_noise(100_000, &mut rng).unwrap().values().to_vec();
        let d = ks_against_cdf(draws, gumbel_cdf);
        assert!(d <= 0.01, "KS distance {d}");
    }

    #[test]
    fn posterior_respects_equal_potential_constraint() {
        let lp = [0.5f64.ln(), 0.5f64.ln()];
        let mut rng = seeded(3);
        for _ in 0..10_000 {
            let u = sample_posterior_noise(&lp, Label(0), &mut rng).unwrap();
            assert!(u.values()[0] > u.values()[1]);
        }
    }

    #[test]
    fn posterior_with_one_label_is_prior() {
        let mut rng = seeded(4);
        let draws: Vec<f64> = (0..50_000)
            .map(|_| sample_posterior_noise(&[0.0], Label(0), &mut rng).unwrap().values()[0])
            .collect();
        assert!(ks_against_cdf(draws, gumbel_cdf) <= 0.01);
    }

    #[test]
    fn posterior_rejects_unnormalized_potentials() {
        let lp = [0.5f64.ln(), 0.6f64.ln()];
        assert!(matches!(
            sample_posterior_noise(&lp, Label(0), &mut seeded(0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(sample_posterior_noise(&[0.0], Label(1), &mut seeded(0)).is_err());
    }

    #[test]
    fn posterior_matches_rejection_oracle() {
        let lp = [0.8f64.ln(), 0.2f64.ln()];
        let observed = Label(1);
        let n = 50_000;

        // Oracle: prior draws kept iff the mechanism yields the observation.
        let mut oracle_rng = seeded(100);
        let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(n);
        while accepted.len() < n {
            let u = sample_prior_noise(2, &mut oracle_rng).unwrap();
            if mechanism(&lp, &u).unwrap() == observed {
                accepted.push(u.values().to_vec());
            }
        }

        let mut rng = seeded(200);
        let posterior: Vec<Vec<f64>> = (0..n)
            .map(|_| sample_posterior_noise(&lp, observed, &mut rng).unwrap().values().to_vec())
            .collect();
        for u in &posterior {
            assert_eq!(mechanism(&lp, &GumbelVector(u.clone())).unwrap(), observed);
        }
        for c in 0..2 {
            let d = ks_two_sample(
                accepted.iter().map(|u| u[c]).collect(),
                posterior.iter().map(|u| u[c]).collect(),
            );
            assert!(d <= 0.02, "coordinate {c}: KS {d}");
        }
    }
}
