use serde::{Deserialize, Serialize};

use super::WeightedGraph;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<usize>>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn single_bag(n: usize) -> Self {
        TreeDecomposition { bags: vec![(0..n).collect()], tree_edges: Vec::new() }
    }

    /// Max bag size minus one; -1 for an empty decomposition is reported as 0.
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn add_bag(&mut self, mut bag: Vec<usize>) -> usize {
        bag.sort_unstable();
        bag.dedup();
        self.bags.push(bag);
        self.bags.len() - 1
    }

    pub fn connect(&mut self, a: usize, b: usize) {
        self.tree_edges.push((a, b));
    }

    /// Sorts and deduplicates every bag.
    pub fn normalize(&mut self) {
        for bag in self.bags.iter_mut() {
            bag.sort_unstable();
            bag.dedup();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TdReport {
    pub is_tree: bool,
    pub vertex_coverage: bool,
    pub edge_coverage: bool,
    pub connected_subtrees: bool,
    pub width: usize,
    pub failures: Vec<String>,
}

impl TdReport {
    pub fn valid(&self) -> bool {
        self.is_tree && self.vertex_coverage && self.edge_coverage && self.connected_subtrees
    }
}

const MAX_FAILURES: usize = 10;

fn note(failures: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if failures.len() < MAX_FAILURES {
        failures.push(msg());
    }
}

fn sorted_intersection(a: &[usize], b: &[usize], mut f: impl FnMut(usize)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Checks the three tree-decomposition conditions against the metric edges
/// of `g`. Never fails; problems are recorded in the report.
pub fn validate_tree_decomposition(g: &WeightedGraph, td: &TreeDecomposition) -> TdReport {
    let n = g.n();
    let k = td.bags.len();
    let mut failures = Vec::new();
    let bags: Vec<Vec<usize>> = td
        .bags
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b.dedup();
            b
        })
        .collect();

    let mut is_tree = k > 0 || n == 0;
    if k > 0 && td.tree_edges.len() != k - 1 {
        is_tree = false;
        note(&mut failures, || {
            format!("{} tree edges over {k} bags", td.tree_edges.len())
        });
    }
    let mut dsu = Dsu::new(k);
    for &(a, b) in &td.tree_edges {
        if a >= k || b >= k || a == b || !dsu.union(a, b) {
            is_tree = false;
            note(&mut failures, || format!("tree edge ({a}, {b}) is invalid or closes a cycle"));
        }
    }

    let mut bag_count = vec![0usize; n];
    let mut out_of_range = false;
    for b in &bags {
        for &v in b {
            if v < n {
                bag_count[v] += 1;
            } else {
                out_of_range = true;
            }
        }
    }
    if out_of_range {
        note(&mut failures, || "bag contains an out-of-range vertex".into());
    }
    let mut vertex_coverage = !out_of_range;
    for (v, &c) in bag_count.iter().enumerate() {
        if c == 0 {
            vertex_coverage = false;
            note(&mut failures, || format!("vertex {v} is in no bag"));
        }
    }

    let mut bags_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, b) in bags.iter().enumerate() {
        for &v in b {
            if v < n {
                bags_of[v].push(i);
            }
        }
    }
    let mut edge_coverage = true;
    for e in g.edges().iter().filter(|e| !e.structural) {
        let mut found = false;
        sorted_intersection(&bags_of[e.u], &bags_of[e.v], |_| found = true);
        if !found {
            edge_coverage = false;
            note(&mut failures, || format!("edge ({}, {}) is in no bag", e.u, e.v));
        }
    }

    // In a forest, the bags containing v induce a subtree iff the number of
    // tree edges between two such bags is one less than the number of bags.
    let mut connected_subtrees = is_tree;
    if is_tree {
        let mut inner = vec![0usize; n];
        for &(a, b) in &td.tree_edges {
            sorted_intersection(&bags[a], &bags[b], |v| {
                if v < n {
                    inner[v] += 1
                }
            });
        }
        for v in 0..n {
            if bag_count[v] > 0 && inner[v] + 1 != bag_count[v] {
                connected_subtrees = false;
                note(&mut failures, || format!("bags containing vertex {v} are not connected"));
            }
        }
    }

    TdReport {
        is_tree,
        vertex_coverage,
        edge_coverage,
        connected_subtrees,
        width: td.width(),
        failures,
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_one_bag() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let r = validate_tree_decomposition(&g, &TreeDecomposition::single_bag(2));
        assert!(r.valid());
        assert_eq!(r.width, 1);
    }

    #[test]
    fn triangle_one_bag() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = validate_tree_decomposition(&g, &TreeDecomposition::single_bag(3));
        assert!(r.valid());
        assert_eq!(r.width, 2);
    }

    #[test]
    fn uncovered_edge() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let td = TreeDecomposition { bags: vec![vec![0, 1], vec![2]], tree_edges: vec![(0, 1)] };
        let r = validate_tree_decomposition(&g, &td);
        assert!(!r.edge_coverage);
        assert!(r.vertex_coverage && r.is_tree && r.connected_subtrees);
        assert!(!r.valid());
    }

    #[test]
    fn disconnected_occurrences() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let td = TreeDecomposition {
            bags: vec![vec![0, 1], vec![1, 2], vec![0]],
            tree_edges: vec![(0, 1), (1, 2)],
        };
        let r = validate_tree_decomposition(&g, &td);
        assert!(!r.connected_subtrees);
    }

    #[test]
    fn cycle_in_tree_edges() {
        let g = WeightedGraph::new(1, []).unwrap();
        let td = TreeDecomposition {
            bags: vec![vec![0], vec![0], vec![0]],
            tree_edges: vec![(0, 1), (1, 2), (2, 0)],
        };
        assert!(!validate_tree_decomposition(&g, &td).is_tree);
    }
}
