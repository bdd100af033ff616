use crate::error::{Error, Result};
use crate::partitioning::graph::SimilarityGraph;
use crate::types::Partition;

pub const BRUTE_FORCE_MAX_VERTICES: usize = 12;

struct Search<'a> {
    graph: &'a SimilarityGraph,
    assign: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, v: usize, acc: f64) {
        if v == self.graph.num_vertices() {
            if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                self.best = Some((acc, self.assign.clone()));
            }
            return;
        }
        for b in 0..=self.blocks.len() {
            let extra = if b == self.blocks.len() {
                Some(0.0)
            } else {
                self.blocks[b]
                    .iter()
                    .try_fold(0.0, |s, &u| self.graph.weight_by_index(u, v).map(|w| s + w))
            };
            let Some(extra) = extra else { continue };
            if b == self.blocks.len() {
                self.blocks.push(vec![v]);
            } else {
                self.blocks[b].push(v);
            }
            self.assign[v] = b;
            self.run(v + 1, acc + extra);
            if self.blocks[b].len() == 1 {
                self.blocks.pop();
            } else {
                self.blocks[b].pop();
            }
        }
    }
}

/// Minimum-objective clique cover by exhaustive enumeration of set
/// partitions as restricted growth strings over the sorted vertices. The
/// first minimizer in lexicographic string order wins.
pub fn brute_force_partition(graph: &SimilarityGraph) -> Result<Partition> {
    let n = graph.num_vertices();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::TooLarge(n, BRUTE_FORCE_MAX_VERTICES));
    }
    let mut search = Search { graph, assign: vec![0; n], blocks: Vec::new(), best: None };
    search.run(0, 0.0);
    let Some((_, assign)) = search.best else {
        return Partition::new(vec![]);
    };
    let num_blocks = assign.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); num_blocks];
    for (v, &b) in assign.iter().enumerate() {
        groups[b].push(graph.vertices()[v].clone());
    }
    Partition::new(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitioning::objective;
    use crate::types::ExpertId;

    fn triangle(w: f64) -> SimilarityGraph {
        let mut g = SimilarityGraph::new(["a", "b", "c"].map(ExpertId::from));
        for (a, b) in [("a", "b"), ("b", "c"), ("a", "c")] {
            g.add_edge(&a.into(), &b.into(), w, 1).unwrap();
        }
        g
    }

    #[test]
    fn triangles() {
        let g = triangle(-1.0);
        let p = brute_force_partition(&g).unwrap();
        assert_eq!(p.num_groups(), 1);
        assert_eq!(objective(&p, &g).unwrap(), -3.0);

        let g = triangle(1.0);
        let p = brute_force_partition(&g).unwrap();
        assert_eq!(p.num_groups(), 3);
        assert_eq!(objective(&p, &g).unwrap(), 0.0);
    }

    #[test]
    fn respects_missing_edges() {
        let mut g = SimilarityGraph::new(["a", "b", "c"].map(ExpertId::from));
        g.add_edge(&"a".into(), &"b".into(), -1.0, 1).unwrap();
        g.add_edge(&"b".into(), &"c".into(), -2.0, 1).unwrap();
        let p = brute_force_partition(&g).unwrap();
        assert_eq!(objective(&p, &g).unwrap(), -2.0);
        assert!(p.same_group(&"b".into(), &"c".into()).unwrap());
    }

    /// Independent oracle: every labeling of vertices with block ids,
    /// scored by `objective`, which rejects non-clique groups.
    #[test]
    fn matches_labeling_enumeration() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(17);
        for _ in 0..20 {
            let n = 6;
            let names: Vec<ExpertId> = (0..n).map(|i| ExpertId::from(format!("v{i}"))).collect();
            let mut g = SimilarityGraph::new(names.clone());
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(0.6) {
                        g.add_edge(&names[i], &names[j], rng.random_range(-1.0..1.0), 1).unwrap();
                    }
                }
            }
            let mut best = f64::INFINITY;
            for code in 0..n.pow(n as u32) {
                let mut groups = vec![Vec::new(); n];
                let mut c = code;
                for v in &names {
                    groups[c % n].push(v.clone());
                    c /= n;
                }
                groups.retain(|g| !g.is_empty());
                if let Ok(obj) = objective(&Partition::new(groups).unwrap(), &g) {
                    best = best.min(obj);
                }
            }
            let found = objective(&brute_force_partition(&g).unwrap(), &g).unwrap();
            assert!((found - best).abs() < 1e-12, "{found} vs {best}");
        }
    }

    #[test]
    fn too_large() {
        let g = SimilarityGraph::new((0..13).map(|i| ExpertId::from(format!("v{i:02}"))));
        assert!(matches!(brute_force_partition(&g), Err(Error::TooLarge(13, 12))));
    }

    #[test]
    fn tie_goes_to_first_in_enumeration_order() {
        // {a,b}{c} and {a}{b,c} both score -1; a-b comes first
        let mut g = SimilarityGraph::new(["a", "b", "c"].map(ExpertId::from));
        g.add_edge(&"a".into(), &"b".into(), -1.0, 1).unwrap();
        g.add_edge(&"b".into(), &"c".into(), -1.0, 1).unwrap();
        let p = brute_force_partition(&g).unwrap();
        assert!(p.same_group(&"a".into(), &"b".into()).unwrap());
    }
}
