use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partitioning::graph::{objective, SimilarityGraph};
use crate::rng::substream;
use crate::types::Partition;

pub const DEFAULT_RESTARTS: usize = 10;

/// Randomized greedy clique growth.
///
/// Picks a random remaining vertex, then keeps adding the adjacent-to-all
/// candidate with the smallest summed weight to the clique while that sum is
/// non-positive. Ties go to the smallest expert id.
pub fn greedy_partition<R: Rng + ?Sized>(graph: &SimilarityGraph, rng: &mut R) -> Result<Partition> {
    let n = graph.num_vertices();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut alive = vec![true; n];
    let mut groups = Vec::new();

    while !remaining.is_empty() {
        let start = remaining[rng.random_range(0..remaining.len())];
        alive[start] = false;
        let mut clique = vec![start];
        // candidate -> summed weight to the current clique
        let mut cand: BTreeMap<usize, f64> =
            graph.neighbors(start).iter().filter(|(v, _)| alive[**v]).map(|(&v, &w)| (v, w)).collect();

        loop {
            let best = cand
                .iter()
                .fold(None, |best: Option<(usize, f64)>, (&v, &s)| match best {
                    Some((_, bs)) if bs <= s => best,
                    _ => Some((v, s)),
                });
            let Some((v, s)) = best else { break };
            if s > 0.0 {
                break;
            }
            alive[v] = false;
            clique.push(v);
            cand.remove(&v);
            let nb = graph.neighbors(v);
            cand.retain(|u, sum| match nb.get(u) {
                Some(w) => {
                    *sum += w;
                    true
                }
                None => false,
            });
        }

        remaining.retain(|&v| alive[v]);
        groups.push(clique.into_iter().map(|v| graph.vertices()[v].clone()).collect());
    }
    Partition::new(groups)
}

/// Best of `restarts` greedy runs by objective, earliest run on ties. Run `r`
/// draws from its own substream, so runs may execute in parallel.
pub fn partition_with_restarts(graph: &SimilarityGraph, restarts: usize, seed: u64) -> Result<Partition> {
    if restarts == 0 {
        return Err(Error::invalid("restart count must be at least 1"));
    }
    let runs: Vec<(Partition, f64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let p = greedy_partition(graph, &mut restart_stream(seed, r))?;
            let obj = objective(&p, graph)?;
            Ok((p, obj))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (_, obj)) in runs.iter().enumerate() {
        if *obj < runs[best].1 {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("at least one run").0)
}

/// Random stream used by restart `run`.
pub fn restart_stream(seed: u64, run: usize) -> crate::rng::SimRng {
    substream(seed, "partition/greedy", &run.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitioning::brute_force_partition;
    use crate::rng::seeded;
    use crate::types::ExpertId;

    fn graph(names: &[&str], edges: &[(&str, &str, f64)]) -> SimilarityGraph {
        let mut g = SimilarityGraph::new(names.iter().map(|v| ExpertId::from(*v)));
        for (a, b, w) in edges {
            g.add_edge(&(*a).into(), &(*b).into(), *w, 1).unwrap();
        }
        g
    }

    fn sizes(p: &Partition) -> Vec<usize> {
        let mut s: Vec<usize> = p.groups().iter().map(Vec::len).collect();
        s.sort_unstable();
        s
    }

    #[test]
    fn single_vertex() {
        let g = graph(&["a"], &[]);
        assert_eq!(greedy_partition(&g, &mut seeded(0)).unwrap().groups(), &[vec![ExpertId::from("a")]]);
    }

    #[test]
    fn negative_triangle_is_one_clique() {
        let g = graph(&["a", "b", "c"], &[("a", "b", -1.0), ("b", "c", -1.0), ("a", "c", -1.0)]);
        for seed in 0..30 {
            assert_eq!(greedy_partition(&g, &mut seeded(seed)).unwrap().num_groups(), 1);
        }
    }

    /// Hand simulation: starting at a or c pairs it with b; starting at b the
    /// smallest-id tie-break takes a. Either way c or a is left alone.
    #[test]
    fn path_gives_a_pair_and_a_singleton() {
        let g = graph(&["a", "b", "c"], &[("a", "b", -1.0), ("b", "c", -1.0)]);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..50 {
            let p = greedy_partition(&g, &mut seeded(seed)).unwrap();
            assert_eq!(sizes(&p), vec![1, 2]);
            seen.insert(format!("{:?}", p.groups()));
        }
        assert!(seen.len() <= 2);
    }

    #[test]
    fn positive_weights_give_singletons() {
        let g = graph(&["a", "b", "c"], &[("a", "b", 1.0), ("b", "c", 0.5), ("a", "c", 2.0)]);
        for r in [1, 5] {
            let p = partition_with_restarts(&g, r, 3).unwrap();
            assert_eq!(p.num_groups(), 3);
            assert_eq!(objective(&p, &g).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_sum_is_accepted() {
        let g = graph(&["a", "b"], &[("a", "b", 0.0)]);
        assert_eq!(greedy_partition(&g, &mut seeded(1)).unwrap().num_groups(), 1);
    }

    #[test]
    fn one_restart_equals_single_run() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b", -1.0), ("b", "c", -1.0), ("c", "d", -1.0), ("a", "d", 0.5)],
        );
        for seed in 0..10 {
            let single = greedy_partition(&g, &mut restart_stream(seed, 0)).unwrap();
            assert_eq!(partition_with_restarts(&g, 1, seed).unwrap(), single);
        }
    }

    #[test]
    fn planted_clique_is_recovered() {
        let names: Vec<String> = (0..10).map(|i| format!("v{i}")).collect();
        let mut g = SimilarityGraph::new(names.iter().map(|v| ExpertId::from(v.as_str())));
        let planted = [0, 3, 4, 7, 9];
        for i in 0..10 {
            for j in i + 1..10 {
                let inside = planted.contains(&i) && planted.contains(&j);
                let w = if inside { -5.0 } else { 2.0 + (i * j % 3) as f64 };
                g.add_edge(&names[i].as_str().into(), &names[j].as_str().into(), w, 1).unwrap();
            }
        }
        let best = brute_force_partition(&g).unwrap();
        let found = partition_with_restarts(&g, 20, 11).unwrap();
        assert_eq!(found, best);
        let group = found.groups().iter().find(|gr| gr.len() == 5).unwrap();
        let want: Vec<ExpertId> = planted.iter().map(|&i| ExpertId::from(names[i].as_str())).collect();
        assert_eq!(group, &want);
    }

    #[test]
    fn deterministic_and_a_clique_cover() {
        let mut rng = seeded(5);
        let names: Vec<String> = (0..15).map(|i| format!("v{i:02}")).collect();
        let mut g = SimilarityGraph::new(names.iter().map(|v| ExpertId::from(v.as_str())));
        for i in 0..15 {
            for j in i + 1..15 {
                if rng.random_bool(0.5) {
                    g.add_edge(&names[i].as_str().into(), &names[j].as_str().into(), rng.random_range(-1.0..1.0), 1)
                        .unwrap();
                }
            }
        }
        let a = partition_with_restarts(&g, 7, 2).unwrap();
        let b = partition_with_restarts(&g, 7, 2).unwrap();
        assert_eq!(a, b);
        assert!(objective(&a, &g).unwrap().is_finite());
        assert!(objective(&a, &g).unwrap() <= 0.0);
    }

    #[test]
    fn zero_restarts_rejected() {
        assert!(partition_with_restarts(&graph(&["a"], &[]), 0, 0).is_err());
    }
}
