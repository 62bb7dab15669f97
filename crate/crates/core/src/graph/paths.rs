use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{Length, RootedTree, WeightedGraph, INFINITY};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<Length>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Predecessor tree over the reachable vertices. Fails if some vertex is
    /// unreachable.
    pub fn tree(&self) -> Result<RootedTree> {
        if self.dist.iter().any(|d| d.is_infinite()) {
            return Err(Error::Disconnected);
        }
        let weights = self
            .pred
            .iter()
            .enumerate()
            .map(|(v, p)| p.map_or(0.0, |p| self.dist[v] - self.dist[p]))
            .collect();
        RootedTree::new(self.source, self.pred.clone(), weights)
    }

    /// Vertices of the predecessor path from the source to `v`, source first.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut x = v;
        while let Some(p) = self.pred[x] {
            path.push(p);
            x = p;
        }
        path.reverse();
        path
    }
}

#[derive(PartialEq)]
struct Entry(Length, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (distance, vertex).
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths over metric edges. Ties in distance are
/// broken toward the lower predecessor id.
pub fn dijkstra(g: &WeightedGraph, s: usize) -> Result<ShortestPaths> {
    g.check_vertex(s)?;
    let n = g.n();
    let mut dist = vec![INFINITY; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, v)) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for (x, w) in g.metric_neighbors(v) {
            if done[x] {
                continue;
            }
            let nd = d + w;
            if nd < dist[x] {
                dist[x] = nd;
                pred[x] = Some(v);
                heap.push(Entry(nd, x));
            } else if nd == dist[x] && pred[x].is_some_and(|p| v < p) {
                pred[x] = Some(v);
            }
        }
    }
    Ok(ShortestPaths { source: s, dist, pred })
}

/// Minimum weight over walks from `u` to every vertex using at most `h`
/// edges.
pub fn hop_bounded_distances(g: &WeightedGraph, u: usize, h: usize) -> Result<Vec<Length>> {
    g.check_vertex(u)?;
    let mut dist = vec![INFINITY; g.n()];
    dist[u] = 0.0;
    let mut frontier = vec![u];
    let mut in_next = vec![false; g.n()];
    for _ in 0..h {
        if frontier.is_empty() {
            break;
        }
        let prev = dist.clone();
        let mut next = Vec::new();
        for &v in &frontier {
            for (x, w) in g.metric_neighbors(v) {
                let nd = prev[v] + w;
                if nd < dist[x] {
                    dist[x] = nd;
                    if !in_next[x] {
                        in_next[x] = true;
                        next.push(x);
                    }
                }
            }
        }
        for &x in &next {
            in_next[x] = false;
        }
        frontier = next;
    }
    Ok(dist)
}

pub fn hop_bounded_distance(g: &WeightedGraph, u: usize, v: usize, h: usize) -> Result<Length> {
    g.check_vertex(v)?;
    Ok(hop_bounded_distances(g, u, h)?[v])
}

/// Dense all-pairs distance table, row-major.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Length>,
}

impl DistanceMatrix {
    pub fn get(&self, u: usize, v: usize) -> Length {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[Length] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max(&self) -> Length {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

pub fn all_pairs(g: &WeightedGraph) -> DistanceMatrix {
    let n = g.n();
    let rows: Vec<Vec<Length>> = (0..n)
        .into_par_iter()
        .map(|s| dijkstra(g, s).expect("source in range").dist)
        .collect();
    DistanceMatrix { n, data: rows.concat() }
}

pub fn diameter(g: &WeightedGraph) -> Result<Length> {
    if g.n() == 0 {
        return Ok(0.0);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let best = (0..g.n())
        .into_par_iter()
        .map(|s| {
            dijkstra(g, s)
                .expect("source in range")
                .dist
                .into_iter()
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap()
    }

    #[test]
    fn dijkstra_examples() {
        let single = WeightedGraph::new(1, []).unwrap();
        assert_eq!(dijkstra(&single, 0).unwrap().dist, vec![0.0]);
        let path = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(dijkstra(&path, 0).unwrap().dist, vec![0.0, 1.0, 2.0]);
        assert_eq!(dijkstra(&triangle(), 0).unwrap().dist[2], 2.0);
        assert!(dijkstra(&path, 3).is_err());
    }

    #[test]
    fn ties_go_to_lower_predecessor() {
        // 0-1-3 and 0-2-3 both have length 2.
        let g = WeightedGraph::new(4, [(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)]).unwrap();
        assert_eq!(dijkstra(&g, 0).unwrap().pred[3], Some(1));
    }

    #[test]
    fn unreachable_is_infinite() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        let sp = dijkstra(&g, 0).unwrap();
        assert_eq!(sp.dist[2], INFINITY);
        assert!(matches!(sp.tree(), Err(Error::Disconnected)));
        assert!(matches!(diameter(&g), Err(Error::Disconnected)));
    }

    #[test]
    fn hop_bounded_examples() {
        let path = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(hop_bounded_distance(&path, 1, 1, 0).unwrap(), 0.0);
        assert_eq!(hop_bounded_distance(&path, 0, 2, 1).unwrap(), INFINITY);
        assert_eq!(hop_bounded_distance(&path, 0, 2, 2).unwrap(), 2.0);
        let t = triangle();
        assert_eq!(hop_bounded_distance(&t, 0, 2, 1).unwrap(), 5.0);
        assert_eq!(hop_bounded_distance(&t, 0, 2, 2).unwrap(), 2.0);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&WeightedGraph::new(1, []).unwrap()).unwrap(), 0.0);
        let p = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(diameter(&p).unwrap(), 3.0);
    }

    #[test]
    fn structural_edges_are_ignored() {
        let mut edges = vec![
            super::super::Edge::new(0, 1, 1.0),
            super::super::Edge::new(1, 2, 1.0),
        ];
        edges.push(super::super::Edge { u: 0, v: 2, w: 0.0, structural: true });
        let g = WeightedGraph::from_parts(3, edges, None, false).unwrap();
        assert_eq!(dijkstra(&g, 0).unwrap().dist[2], 2.0);
        assert_eq!(hop_bounded_distance(&g, 0, 2, 1).unwrap(), INFINITY);
    }
}
