//! Domain types shared by every stage of the pipeline.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Smallest probability a model may emit. Keeps log-potentials finite.
pub const PROB_FLOOR: f64 = 1e-12;

/// Allowed deviation of a probability vector's mass from 1 (and of the
/// log-sum-exp of normalized log-potentials from 0).
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Zero-indexed class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub usize);

impl Label {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque expert identifier, ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpertId(String);

impl ExpertId {
    pub fn new(id: impl Into<String>) -> Self {
        ExpertId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ExpertId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ExpertId {
    fn from(s: &str) -> Self {
        ExpertId(s.to_owned())
    }
}

impl From<String> for ExpertId {
    fn from(s: String) -> Self {
        ExpertId(s)
    }
}

/// Index of the largest value, lowest index on ties. NaN never wins.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    best
}

pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Total-variation distance between two probability vectors of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// A probability vector over `k` labels whose entries are all at least
/// [`PROB_FLOOR`], so that its log-potentials are finite.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexDistribution {
    probs: Vec<f64>,
}

impl SimplexDistribution {
    /// Validates an already floored and normalized vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("simplex must have at least one label"));
        }
        let floor = PROB_FLOOR * (1.0 - NORMALIZATION_TOL);
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < floor) {
            return Err(Error::invalid(format!(
                "simplex entry {p} is below the probability floor {PROB_FLOOR}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!("simplex entries sum to {total}, not 1")));
        }
        Ok(SimplexDistribution { probs })
    }

    /// Normalizes non-negative weights, clamps every entry at the floor and
    /// renormalizes.
    pub fn floored(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("simplex must have at least one label"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights must have positive mass"));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| (w / total).max(PROB_FLOOR)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(SimplexDistribution { probs })
    }

    /// Softmax of unnormalized log-weights, floored.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        if log_weights.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::invalid("log-weights must not be NaN or +inf"));
        }
        let norm = logsumexp(log_weights);
        if !norm.is_finite() {
            return Err(Error::invalid("log-weights carry no mass"));
        }
        Self::floored(log_weights.iter().map(|v| (v - norm).exp()).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::floored(vec![1.0; k])
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: Label) -> f64 {
        self.probs[label.0]
    }

    pub fn log_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.ln()).collect()
    }

    pub fn argmax(&self) -> Label {
        Label(argmax(&self.probs))
    }
}

impl<'de> Deserialize<'de> for SimplexDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(d)?;
        SimplexDistribution::new(probs).map_err(serde::de::Error::custom)
    }
}

/// A grouping of experts into disjoint, non-empty groups.
///
/// Groups are kept in canonical order: members sorted, groups sorted by their
/// smallest member. Group ids are positions in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    groups: Vec<Vec<ExpertId>>,
    index: BTreeMap<ExpertId, usize>,
}

impl Partition {
    pub fn new(groups: Vec<Vec<ExpertId>>) -> Result<Self> {
        let mut groups: Vec<Vec<ExpertId>> = groups
            .into_iter()
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::invalid("partition groups must be non-empty"));
        }
        groups.sort_by(|a, b| a[0].cmp(&b[0]));
        let mut index = BTreeMap::new();
        for (gid, group) in groups.iter().enumerate() {
            for expert in group {
                if index.insert(expert.clone(), gid).is_some() {
                    return Err(Error::invalid(format!(
                        "expert `{expert}` appears in more than one group"
                    )));
                }
            }
        }
        Ok(Partition { groups, index })
    }

    pub fn singletons<'a>(experts: impl IntoIterator<Item = &'a ExpertId>) -> Self {
        let set: BTreeSet<&ExpertId> = experts.into_iter().collect();
        Partition::new(set.into_iter().map(|e| vec![e.clone()]).collect())
            .expect("distinct singletons form a partition")
    }

    pub fn groups(&self) -> &[Vec<ExpertId>] {
        &self.groups
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_of(&self, expert: &ExpertId) -> Option<usize> {
        self.index.get(expert).copied()
    }

    /// Group id of `expert`, or a missing-expert error.
    pub fn require_group(&self, expert: &ExpertId) -> Result<usize> {
        self.group_of(expert).ok_or_else(|| Error::missing(expert))
    }

    pub fn contains(&self, expert: &ExpertId) -> bool {
        self.index.contains_key(expert)
    }

    pub fn experts(&self) -> impl Iterator<Item = &ExpertId> {
        self.index.keys()
    }

    pub fn num_experts(&self) -> usize {
        self.index.len()
    }

    pub fn same_group(&self, a: &ExpertId, b: &ExpertId) -> Result<bool> {
        Ok(self.require_group(a)? == self.require_group(b)?)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.groups.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let groups = Vec::<Vec<ExpertId>>::deserialize(d)?;
        Partition::new(groups).map_err(serde::de::Error::custom)
    }
}
