use serde::{Deserialize, Serialize};

use super::{Length, WeightedGraph};
use crate::error::{check_vertex, Error, Result};

/// Parent-indexed tree. `parent_weight[v]` is the weight of the edge from
/// `v` to its parent and 0 at the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    parent_weight: Vec<Length>,
}

impl RootedTree {
    pub fn new(root: usize, parent: Vec<Option<usize>>, parent_weight: Vec<Length>) -> Result<Self> {
        let n = parent.len();
        check_vertex(root, n)?;
        if parent_weight.len() != n {
            return Err(Error::Argument("parent and weight arrays differ in length".into()));
        }
        if parent[root].is_some() {
            return Err(Error::Argument("root has a parent".into()));
        }
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                check_vertex(p, n)?;
                let w = parent_weight[v];
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::Argument(format!("invalid parent weight {w} at {v}")));
                }
            } else if v != root {
                return Err(Error::Argument(format!("vertex {v} has no parent")));
            }
        }
        let t = RootedTree { root, parent, parent_weight };
        // Every vertex must reach the root, i.e. preorder visits all of them.
        if t.preorder().len() != n {
            return Err(Error::Argument("parent links contain a cycle".into()));
        }
        Ok(t)
    }

    /// A tree from an undirected edge list, rooted at `root`.
    pub fn from_edges(n: usize, root: usize, edges: &[(usize, usize, Length)]) -> Result<Self> {
        check_vertex(root, n.max(1))?;
        if n == 0 {
            return Err(Error::Argument("empty tree".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::Argument(format!(
                "a tree on {n} vertices needs {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let g = WeightedGraph::new(n, edges.iter().copied())?;
        if g.m() + 1 != n || !g.is_connected() {
            return Err(Error::Argument("edge list is not a tree".into()));
        }
        let mut parent = vec![None; n];
        let mut weight = vec![0.0; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for (x, w) in g.metric_neighbors(v) {
                if !seen[x] {
                    seen[x] = true;
                    parent[x] = Some(v);
                    weight[x] = w;
                    stack.push(x);
                }
            }
        }
        RootedTree::new(root, parent, weight)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn parent_weight(&self, v: usize) -> Length {
        self.parent_weight[v]
    }

    /// Children lists in ascending id order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(v);
            }
        }
        ch
    }

    /// Preorder with children in ascending id order.
    pub fn preorder(&self) -> Vec<usize> {
        let ch = self.children();
        let mut order = Vec::with_capacity(self.n());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in ch[v].iter().rev() {
                stack.push(c);
            }
        }
        order
    }

    /// Tree edges `(child, parent, weight)`.
    pub fn edges(&self) -> Vec<(usize, usize, Length)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v, p, self.parent_weight[v])))
            .collect()
    }

    /// Graph view of the tree; any edge order around a vertex is planar, so
    /// the adjacency order is attached as its rotation system.
    pub fn to_graph(&self) -> WeightedGraph {
        let g = WeightedGraph::new(self.n(), self.edges()).expect("tree edges are valid");
        let rot = (0..g.n()).map(|v| g.neighbors(v).iter().map(|&(_, id)| id).collect()).collect();
        g.with_rotation(rot).expect("adjacency lists form a rotation")
    }

    /// Weighted distance from the root.
    pub fn depths(&self) -> Vec<Length> {
        let mut depth = vec![0.0; self.n()];
        for v in self.preorder() {
            if let Some(p) = self.parent[v] {
                depth[v] = depth[p] + self.parent_weight[v];
            }
        }
        depth
    }

    pub fn oracle(&self) -> TreeOracle {
        TreeOracle::new(self)
    }
}

/// Binary-lifting LCA with weighted depths and Euler intervals.
#[derive(Clone, Debug)]
pub struct TreeOracle {
    up: Vec<Vec<usize>>,
    hops: Vec<usize>,
    depth: Vec<Length>,
    tin: Vec<usize>,
    tout: Vec<usize>,
}

impl TreeOracle {
    pub fn new(t: &RootedTree) -> Self {
        let n = t.n();
        let ch = t.children();
        let mut levels = 1;
        while (1usize << levels) < n {
            levels += 1;
        }
        let mut up = vec![vec![t.root(); n]; levels];
        let mut hops = vec![0; n];
        let mut depth = vec![0.0; n];
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut clock = 0;
        let mut stack = vec![(t.root(), false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                tout[v] = clock;
                continue;
            }
            tin[v] = clock;
            clock += 1;
            if let Some(p) = t.parent(v) {
                up[0][v] = p;
                hops[v] = hops[p] + 1;
                depth[v] = depth[p] + t.parent_weight(v);
            }
            stack.push((v, true));
            for &c in ch[v].iter().rev() {
                stack.push((c, false));
            }
        }
        for k in 1..levels {
            for v in 0..n {
                up[k][v] = up[k - 1][up[k - 1][v]];
            }
        }
        TreeOracle { up, hops, depth, tin, tout }
    }

    /// True when `a` is an ancestor of `b` (or equal).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.tin[a] <= self.tin[b] && self.tout[b] <= self.tout[a]
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        if self.is_ancestor(a, b) {
            return a;
        }
        if self.is_ancestor(b, a) {
            return b;
        }
        let mut a = a;
        for k in (0..self.up.len()).rev() {
            let x = self.up[k][a];
            if !self.is_ancestor(x, b) {
                a = x;
            }
        }
        self.up[0][a]
    }

    pub fn distance(&self, a: usize, b: usize) -> Length {
        let l = self.lca(a, b);
        self.depth[a] + self.depth[b] - 2.0 * self.depth[l]
    }

    pub fn depth(&self, v: usize) -> Length {
        self.depth[v]
    }

    pub fn hops(&self, v: usize) -> usize {
        self.hops[v]
    }

    pub fn preorder_index(&self, v: usize) -> usize {
        self.tin[v]
    }

    /// Exit time: descendants of `v` have preorder index in `tin[v]..tout[v]`.
    pub fn exit_index(&self, v: usize) -> usize {
        self.tout[v]
    }
}
