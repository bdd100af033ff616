use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ExpertId, Partition};

/// Experts as vertices; an edge means the pair was co-observed and never
/// violated conditional stability. Missing edges behave as `+inf` weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityGraph {
    vertices: Vec<ExpertId>,
    index: BTreeMap<ExpertId, usize>,
    adjacency: Vec<BTreeMap<usize, f64>>,
    co_observations: BTreeMap<(usize, usize), usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: ExpertId,
    pub b: ExpertId,
    pub weight: f64,
    pub co_observations: usize,
}

#[derive(Serialize, Deserialize)]
struct GraphDocument {
    vertices: Vec<ExpertId>,
    edges: Vec<EdgeRecord>,
}

impl SimilarityGraph {
    pub fn new(vertices: impl IntoIterator<Item = ExpertId>) -> Self {
        let mut vertices: Vec<ExpertId> = vertices.into_iter().collect();
        vertices.sort();
        vertices.dedup();
        let index = vertices.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let adjacency = vec![BTreeMap::new(); vertices.len()];
        SimilarityGraph { vertices, index, adjacency, co_observations: BTreeMap::new() }
    }

    /// Adds or replaces the undirected edge `{a, b}`.
    pub fn add_edge(&mut self, a: &ExpertId, b: &ExpertId, weight: f64, co_observations: usize) -> Result<()> {
        if !weight.is_finite() {
            return Err(Error::InvalidEdge(a.to_string(), b.to_string(), "weight must be finite".into()));
        }
        let i = self.vertex(a)?;
        let j = self.vertex(b)?;
        if i == j {
            return Err(Error::InvalidEdge(a.to_string(), b.to_string(), "self loop".into()));
        }
        self.adjacency[i].insert(j, weight);
        self.adjacency[j].insert(i, weight);
        self.co_observations.insert((i.min(j), i.max(j)), co_observations);
        Ok(())
    }

    fn vertex(&self, e: &ExpertId) -> Result<usize> {
        self.index.get(e).copied().ok_or_else(|| Error::missing(e))
    }

    pub fn vertices(&self) -> &[ExpertId] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.co_observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn weight(&self, a: &ExpertId, b: &ExpertId) -> Option<f64> {
        let i = *self.index.get(a)?;
        let j = *self.index.get(b)?;
        self.adjacency[i].get(&j).copied()
    }

    pub(crate) fn weight_by_index(&self, i: usize, j: usize) -> Option<f64> {
        self.adjacency[i].get(&j).copied()
    }

    pub(crate) fn neighbors(&self, i: usize) -> &BTreeMap<usize, f64> {
        &self.adjacency[i]
    }

    /// Edges with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<EdgeRecord> {
        self.co_observations
            .iter()
            .map(|(&(i, j), &n)| EdgeRecord {
                a: self.vertices[i].clone(),
                b: self.vertices[j].clone(),
                weight: self.adjacency[i][&j],
                co_observations: n,
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let doc = GraphDocument { vertices: self.vertices.clone(), edges: self.edges() };
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &doc)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?;
        let mut g = SimilarityGraph::new(doc.vertices);
        for e in doc.edges {
            g.add_edge(&e.a, &e.b, e.weight, e.co_observations)?;
        }
        Ok(g)
    }
}

/// Sum of edge weights over all within-group pairs.
///
/// Fails with a not-a-clique-cover error when two members of a group are not
/// adjacent, and with a missing-expert error when the partition does not
/// cover exactly the graph's vertices.
pub fn objective(partition: &Partition, graph: &SimilarityGraph) -> Result<f64> {
    if partition.num_experts() != graph.num_vertices() {
        return Err(Error::invalid(format!(
            "partition covers {} experts, graph has {} vertices",
            partition.num_experts(),
            graph.num_vertices()
        )));
    }
    let mut total = 0.0;
    for group in partition.groups() {
        let idx: Vec<usize> = group.iter().map(|e| graph.vertex(e)).collect::<Result<_>>()?;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                match graph.weight_by_index(i, j) {
                    Some(w) => total += w,
                    None => {
                        return Err(Error::NotACliqueCover(
                            graph.vertices[i].to_string(),
                            graph.vertices[j].to_string(),
                        ))
                    }
                }
            }
        }
    }
    Ok(total)
}
