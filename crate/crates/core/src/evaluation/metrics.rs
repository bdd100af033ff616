use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitioning::SimilarityGraph;
use crate::types::{ExpertId, Label, Partition};

fn choose2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index between two partitions of the same experts.
/// Can be negative when agreement is below chance.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    let ea: BTreeSet<&ExpertId> = a.experts().collect();
    let eb: BTreeSet<&ExpertId> = b.experts().collect();
    if ea != eb {
        return Err(Error::invalid("partitions cover different experts"));
    }
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in &ea {
        *table.entry((a.require_group(e)?, b.require_group(e)?)).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let sum_a: f64 = a.groups().iter().map(|g| choose2(g.len())).sum();
    let sum_b: f64 = b.groups().iter().map(|g| choose2(g.len())).sum();
    let total = choose2(ea.len());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRatio {
    pub value: f64,
    pub within: usize,
    pub edges: usize,
    /// Set when the graph has no edges; `value` is then 0.
    pub no_edges: bool,
}

/// Fraction of graph edges whose endpoints share a true group.
pub fn edge_ratio(graph: &SimilarityGraph, truth: &Partition) -> Result<EdgeRatio> {
    let edges = graph.edges();
    let mut within = 0;
    for e in &edges {
        if truth.same_group(&e.a, &e.b)? {
            within += 1;
        }
    }
    if edges.is_empty() {
        log::warn!("edge ratio requested for a graph without edges");
        return Ok(EdgeRatio { value: 0.0, within: 0, edges: 0, no_edges: true });
    }
    Ok(EdgeRatio { value: within as f64 / edges.len() as f64, within, edges: edges.len(), no_edges: false })
}

/// Fraction of `(predicted, true)` pairs that differ.
pub fn zero_one_loss(pairs: &[(Label, Label)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("zero-one loss of an empty prediction list"));
    }
    Ok(pairs.iter().filter(|(p, t)| p != t).count() as f64 / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(groups: &[&[&str]]) -> Partition {
        Partition::new(groups.iter().map(|g| g.iter().map(|e| ExpertId::from(*e)).collect()).collect()).unwrap()
    }

    /// Pair-agreement form of the index, computed over all expert pairs.
    fn ari_by_pairs(a: &Partition, b: &Partition) -> f64 {
        let experts: Vec<&ExpertId> = a.experts().collect();
        let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..experts.len() {
            for j in i + 1..experts.len() {
                let sa = a.same_group(experts[i], experts[j]).unwrap();
                let sb = b.same_group(experts[i], experts[j]).unwrap();
                match (sa, sb) {
                    (true, true) => n11 += 1.0,
                    (true, false) => n10 += 1.0,
                    (false, true) => n01 += 1.0,
                    (false, false) => n00 += 1.0,
                }
            }
        }
        2.0 * (n00 * n11 - n01 * n10) / ((n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11))
    }

    #[test]
    fn ari_examples() {
        let p = part(&[&["a", "b"], &["c"]]);
        assert_eq!(adjusted_rand_index(&p, &p).unwrap(), 1.0);
        let singles = part(&[&["a"], &["b"], &["c"], &["d"]]);
        let one = part(&[&["a", "b", "c", "d"]]);
        assert_eq!(adjusted_rand_index(&singles, &one).unwrap(), 0.0);
        assert!(adjusted_rand_index(&p, &one).is_err());
    }

    #[test]
    fn ari_planted_with_one_move() {
        let ids: Vec<String> = (0..48).map(|i| format!("e{i:02}")).collect();
        let sizes = [6, 7, 11, 11, 13];
        let mut groups = Vec::new();
        let mut start = 0;
        for s in sizes {
            groups.push(ids[start..start + s].iter().map(|e| ExpertId::from(e.as_str())).collect::<Vec<_>>());
            start += s;
        }
        let truth = Partition::new(groups.clone()).unwrap();
        let moved = groups[0].pop().unwrap();
        groups[4].push(moved);
        let other = Partition::new(groups).unwrap();
        let got = adjusted_rand_index(&truth, &other).unwrap();
        let want = ari_by_pairs(&truth, &other);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert!(got < 1.0 && got > 0.9);
    }

    proptest! {
        #[test]
        fn ari_symmetric_and_matches_pair_form(la in proptest::collection::vec(0usize..4, 2..12), seed in 0usize..1000) {
            let n = la.len();
            let lb: Vec<usize> = (0..n).map(|i| (i * 7 + seed) % 3).collect();
            let build = |labels: &[usize]| {
                let mut g: BTreeMap<usize, Vec<ExpertId>> = BTreeMap::new();
                for (i, l) in labels.iter().enumerate() {
                    g.entry(*l).or_default().push(ExpertId::from(format!("x{i:02}")));
                }
                Partition::new(g.into_values().collect()).unwrap()
            };
            let (a, b) = (build(&la), build(&lb));
            let ab = adjusted_rand_index(&a, &b).unwrap();
            prop_assert_eq!(ab, adjusted_rand_index(&b, &a).unwrap());
            let pairs = ari_by_pairs(&a, &b);
            if pairs.is_finite() {
                prop_assert!((ab - pairs).abs() < 1e-9);
            }
            prop_assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        }
    }

    fn graph_with(edges: &[(&str, &str)]) -> SimilarityGraph {
        let names: BTreeSet<&str> = edges.iter().flat_map(|(a, b)| [*a, *b]).collect();
        let mut g = SimilarityGraph::new(names.into_iter().map(ExpertId::from));
        for (a, b) in edges {
            g.add_edge(&(*a).into(), &(*b).into(), -1.0, 1).unwrap();
        }
        g
    }

    #[test]
    fn edge_ratio_cases() {
        let truth = part(&[&["a", "b", "c"], &["d", "e"]]);
        let r = edge_ratio(&graph_with(&[("a", "b"), ("d", "e")]), &truth).unwrap();
        assert_eq!((r.value, r.no_edges), (1.0, false));
        let r = edge_ratio(&graph_with(&[("a", "d"), ("b", "e")]), &truth).unwrap();
        assert_eq!(r.value, 0.0);
        let r = edge_ratio(&SimilarityGraph::new(["a"].map(ExpertId::from)), &truth).unwrap();
        assert!(r.no_edges);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn edge_ratio_three_of_ten() {
        let truth = part(&[&["a", "b", "c"], &["d"], &["e"], &["f"]]);
        let g = graph_with(&[
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("a", "d"),
            ("a", "e"),
            ("a", "f"),
            ("b", "d"),
            ("b", "e"),
            ("c", "f"),
            ("d", "e"),
        ]);
        let r = edge_ratio(&g, &truth).unwrap();
        assert_eq!((r.within, r.edges), (3, 10));
        assert!((r.value - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_one_cases() {
        let same: Vec<(Label, Label)> = (0..10).map(|i| (Label(i % 3), Label(i % 3))).collect();
        assert_eq!(zero_one_loss(&same).unwrap(), 0.0);
        let diff: Vec<(Label, Label)> = (0..10).map(|i| (Label(0), Label(1 + i % 2))).collect();
        assert_eq!(zero_one_loss(&diff).unwrap(), 1.0);
        let mixed: Vec<(Label, Label)> = (0..10).map(|i| (Label(0), Label(usize::from(i < 3)))).collect();
        assert!((zero_one_loss(&mixed).unwrap() - 0.3).abs() < 1e-15);
        assert!(zero_one_loss(&[]).is_err());
    }
}
