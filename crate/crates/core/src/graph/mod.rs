//! Weighted undirected graphs, rooted trees, shortest paths and tree
//! decompositions.
//!
//! Vertex ids are dense `0..n`. Lengths are `f64`; [`INFINITY`] marks
//! unreachable targets and absorbs any finite addend.

mod decomposition;
mod embedding;
mod paths;
mod tree;

pub use decomposition::{validate_tree_decomposition, TdReport, TreeDecomposition};
pub use embedding::{
    dart_from, dart_head, dart_tail, faces, is_planar_embedding, rotation_from_coordinates, Dart,
    Face, Faces,
};
pub use paths::{
    all_pairs, diameter, dijkstra, hop_bounded_distance, hop_bounded_distances, DistanceMatrix,
    ShortestPaths,
};
pub use tree::{RootedTree, TreeOracle};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_vertex, Error, Result};

pub type Length = f64;

/// Sentinel for "no path". `f64` infinity keeps `finite + INFINITY == INFINITY`.
pub const INFINITY: Length = f64::INFINITY;

/// Absolute tolerance for comparing lengths built from sums of input weights.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: Length,
    /// Structural edges only complete a combinatorial embedding; every
    /// distance computation ignores them.
    #[serde(default)]
    pub structural: bool,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: Length) -> Self {
        Edge { u, v, w, structural: false }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    rotation: Option<Vec<Vec<usize>>>,
}

impl WeightedGraph {
    /// Builds a simple graph; parallel edges collapse to the lightest copy.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Length)>,
    {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut simple: Vec<Edge> = Vec::new();
        for (u, v, w) in edges {
            validate_edge(n, u, v, w)?;
            let key = (u.min(v), u.max(v));
            match index.get(&key) {
                Some(&id) => {
                    if w < simple[id].w {
                        simple[id].w = w;
                    }
                }
                None => {
                    index.insert(key, simple.len());
                    simple.push(Edge::new(u, v, w));
                }
            }
        }
        Self::from_parts(n, simple, None, false)
    }

    /// Builds a graph from an explicit edge list, optionally with a rotation
    /// system listing edge ids around each vertex.
    pub fn from_parts(
        n: usize,
        edges: Vec<Edge>,
        rotation: Option<Vec<Vec<usize>>>,
        allow_parallel: bool,
    ) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for (id, e) in edges.iter().enumerate() {
            validate_edge(n, e.u, e.v, e.w)?;
            if !allow_parallel && !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::Argument(format!(
                    "parallel edge {{{}, {}}} in a simple graph",
                    e.u, e.v
                )));
            }
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let g = WeightedGraph { n, edges, adj, rotation };
        if let Some(rot) = &g.rotation {
            g.check_rotation(rot)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// `(neighbor, edge id)` pairs sorted by neighbor id. Includes structural edges.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn rotation(&self) -> Option<&[Vec<usize>]> {
        self.rotation.as_deref()
    }

    pub fn has_rotation(&self) -> bool {
        self.rotation.is_some()
    }

    /// Metric (non-structural) edges incident to `v`.
    pub fn metric_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, Length)> + '_ {
        self.adj[v].iter().filter_map(move |&(x, id)| {
            let e = &self.edges[id];
            (!e.structural).then_some((x, e.w))
        })
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let list = &self.adj[u];
        let start = list.partition_point(|&(x, _)| x < v);
        list.get(start).filter(|&&(x, _)| x == v).map(|&(_, id)| id)
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        check_vertex(v, self.n)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for (x, _) in self.metric_neighbors(v) {
                if !seen[x] {
                    seen[x] = true;
                    count += 1;
                    stack.push(x);
                }
            }
        }
        count == self.n
    }

    /// Same graph with every metric weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightedGraph {
        let mut g = self.clone();
        for e in g.edges.iter_mut() {
            if !e.structural {
                e.w *= factor;
            }
        }
        g
    }

    pub fn without_rotation(&self) -> WeightedGraph {
        let mut g = self.clone();
        g.rotation = None;
        g
    }

    pub fn with_rotation(self, rotation: Vec<Vec<usize>>) -> Result<WeightedGraph> {
        self.check_rotation(&rotation)?;
        Ok(WeightedGraph { rotation: Some(rotation), ..self })
    }

    fn check_rotation(&self, rot: &[Vec<usize>]) -> Result<()> {
        if rot.len() != self.n {
            return Err(Error::Embedding(format!(
                "rotation system covers {} vertices, graph has {}",
                rot.len(),
                self.n
            )));
        }
        for (v, list) in rot.iter().enumerate() {
            let mut ids: Vec<usize> = list.clone();
            ids.sort_unstable();
            let mut expected: Vec<usize> = self.adj[v].iter().map(|&(_, id)| id).collect();
            expected.sort_unstable();
            if ids != expected {
                return Err(Error::Embedding(format!(
                    "rotation at vertex {v} does not list its incident edges exactly once"
                )));
            }
        }
        Ok(())
    }
}

fn validate_edge(n: usize, u: usize, v: usize, w: Length) -> Result<()> {
    check_vertex(u, n)?;
    check_vertex(v, n)?;
    if u == v {
        return Err(Error::Argument(format!("self-loop at vertex {u}")));
    }
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::Argument(format!("edge {{{u}, {v}}} has invalid weight {w}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_keep_minimum() {
        let g = WeightedGraph::new(3, [(0, 1, 4.0), (1, 0, 2.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.edge(g.find_edge(0, 1).unwrap()).w, 2.0);
    }

    #[test]
    fn rejects_loops_and_negative_weights() {
        assert!(WeightedGraph::new(2, [(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 1, -1.0)]).is_err());
        assert!(matches!(
            WeightedGraph::new(2, [(0, 2, 1.0)]),
            Err(Error::VertexOutOfRange { vertex: 2, n: 2 })
        ));
    }

    #[test]
    fn rotation_must_list_each_edge_once() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(g.clone().with_rotation(vec![vec![0], vec![0, 1], vec![1]]).is_ok());
        assert!(g.with_rotation(vec![vec![0], vec![0], vec![1]]).is_err());
    }
}
