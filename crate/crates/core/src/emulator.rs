//! Low-hop, low-treewidth emulators for weighted trees.
//!
//! The construction removes a small separator `X` so that every remaining
//! component has at most two neighbors in `X`, recurses on the components
//! and on the contracted tree over `X`, and links every component vertex
//! directly to its (at most two) separator neighbors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::{Length, RootedTree, TreeDecomposition, TreeOracle, WeightedGraph};

/// `2 / log2(3/2)`.
pub const HOP_CONSTANT: f64 = 3.418_865_065_670_295;

/// Hop budget guaranteed for a tree on `n` vertices.
pub fn hop_bound(n: usize) -> usize {
    if n <= 4 {
        return 2;
    }
    let ll = (n as f64).log2().log2();
    1 + (HOP_CONSTANT * ll - 1e-12).ceil() as usize
}

/// Division parameter for a tree on `n` vertices.
pub fn division_parameter(n: usize) -> usize {
    let root = ((2 * n) as f64).sqrt().ceil() as usize;
    // Guard against sqrt rounding on perfect squares.
    let root = if (root - 1) * (root - 1) >= 2 * n { root - 1 } else { root };
    root.saturating_sub(1).max(1)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeDivision {
    pub separator: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    /// Separator vertices adjacent to each component, topmost first.
    pub outgoing: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct Emulator {
    pub graph: WeightedGraph,
    pub hop_bound: usize,
    pub decomposition: TreeDecomposition,
}

/// Bottom-up sweep: a vertex whose residual subtree reaches `ell + 1`
/// vertices is cut together with that residual subtree.
pub fn chop_to_pieces(t: &RootedTree, ell: usize) -> Vec<usize> {
    let ell = ell.max(1);
    let n = t.n();
    if n <= ell {
        return Vec::new();
    }
    let mut residual = vec![1usize; n];
    let mut cut = Vec::new();
    for v in t.preorder().into_iter().rev() {
        if residual[v] > ell {
            cut.push(v);
            residual[v] = 0;
        }
        if let Some(p) = t.parent(v) {
            residual[p] += residual[v];
        }
    }
    cut.sort_unstable();
    cut
}

/// `a` together with the lowest common ancestor of every pair in `a`.
pub fn lca_closure(oracle: &TreeOracle, a: &[usize]) -> Vec<usize> {
    let mut sorted: Vec<usize> = a.to_vec();
    sorted.sort_unstable_by_key(|&v| oracle.preorder_index(v));
    sorted.dedup();
    let mut closure = sorted.clone();
    for w in sorted.windows(2) {
        closure.push(oracle.lca(w[0], w[1]));
    }
    closure.sort_unstable();
    closure.dedup();
    closure
}

pub fn tree_division(t: &RootedTree, ell: usize) -> TreeDivision {
    let oracle = t.oracle();
    tree_division_with(t, &oracle, ell)
}

fn tree_division_with(t: &RootedTree, oracle: &TreeOracle, ell: usize) -> TreeDivision {
    let n = t.n();
    let separator = lca_closure(oracle, &chop_to_pieces(t, ell));
    let mut in_sep = vec![false; n];
    for &x in &separator {
        in_sep[x] = true;
    }
    const NONE: usize = usize::MAX;
    let mut comp = vec![NONE; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut outgoing: Vec<Vec<usize>> = Vec::new();
    for v in t.preorder() {
        if in_sep[v] {
            continue;
        }
        let c = match t.parent(v) {
            Some(p) if !in_sep[p] => comp[p],
            parent => {
                components.push(Vec::new());
                outgoing.push(parent.into_iter().collect());
                components.len() - 1
            }
        };
        comp[v] = c;
        components[c].push(v);
    }
    // Separator vertices whose parent lies in a component give the lower
    // outgoing edge of that component.
    for &x in &separator {
        if let Some(p) = t.parent(x) {
            if !in_sep[p] {
                outgoing[comp[p]].push(x);
            }
        }
    }
    for c in components.iter_mut() {
        c.sort_unstable();
    }
    TreeDivision { separator, components, outgoing }
}

/// Builds the emulator and its tree decomposition.
pub fn build_emulator(t: &RootedTree) -> Emulator {
    let n = t.n();
    let globals: Vec<usize> = (0..n).collect();
    let mut edges = Vec::new();
    let decomposition = build_rec(t, &globals, &mut edges);
    let graph = WeightedGraph::new(n, edges).expect("emulator edges are valid");
    Emulator { graph, hop_bound: hop_bound(n), decomposition }
}

/// Exact tree distance by weighted depths and the LCA.
pub fn tree_distance(t: &RootedTree, u: usize, v: usize) -> Length {
    t.oracle().distance(u, v)
}

/// Recursive step on a subtree with local ids `0..k`; `globals` maps them back.
/// Edges and the returned decomposition use global ids.
fn build_rec(
    t: &RootedTree,
    globals: &[usize],
    edges: &mut Vec<(usize, usize, Length)>,
) -> TreeDecomposition {
    let n = t.n();
    if n <= 2 {
        for (c, p, w) in t.edges() {
            edges.push((globals[c], globals[p], w));
        }
        return TreeDecomposition { bags: vec![globals.to_vec()], tree_edges: Vec::new() };
    }
    let oracle = t.oracle();
    let division = tree_division_with(t, &oracle, division_parameter(n));

    // Contracted tree over the separator.
    let sep = &division.separator;
    let sep_local: HashMap<usize, usize> = sep.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut sep_edges = Vec::new();
    for &x in sep {
        if let Some(p) = t.parent(x) {
            if let Some(&pi) = sep_local.get(&p) {
                sep_edges.push((sep_local[&x], pi, t.parent_weight(x)));
            }
        }
    }
    for out in &division.outgoing {
        if let [a, b] = out[..] {
            sep_edges.push((sep_local[&a], sep_local[&b], oracle.distance(a, b)));
        }
    }
    let top = *sep.iter().min_by_key(|&&x| oracle.hops(x)).expect("separator is nonempty");
    let sep_tree = RootedTree::from_edges(sep.len(), sep_local[&top], &sep_edges)
        .expect("contracted separator tree is a tree");
    let sep_globals: Vec<usize> = sep.iter().map(|&x| globals[x]).collect();
    let mut td = build_rec(&sep_tree, &sep_globals, edges);

    // Bags of the separator decomposition indexed by vertex for attaching components.
    let mut bags_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            bags_of.entry(v).or_default().push(i);
        }
    }

    for (comp, out) in division.components.iter().zip(&division.outgoing) {
        let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let top = *comp.iter().min_by_key(|&&v| oracle.hops(v)).expect("component is nonempty");
        let mut parent = vec![None; comp.len()];
        let mut weight = vec![0.0; comp.len()];
        for (i, &v) in comp.iter().enumerate() {
            if v == top {
                continue;
            }
            let p = t.parent(v).expect("non-top component vertex has a parent");
            parent[i] = Some(local[&p]);
            weight[i] = t.parent_weight(v);
        }
        let sub = RootedTree::new(local[&top], parent, weight).expect("component is a subtree");
        let comp_globals: Vec<usize> = comp.iter().map(|&v| globals[v]).collect();
        let sub_td = build_rec(&sub, &comp_globals, edges);

        for &z in comp {
            for &x in out {
                edges.push((globals[z], globals[x], oracle.distance(z, x)));
            }
        }

        let out_globals: Vec<usize> = out.iter().map(|&x| globals[x]).collect();
        let anchor = match out_globals[..] {
            [a] => bags_of[&a][0],
            [a, b] => {
                let bs = &bags_of[&b];
                *bags_of[&a]
                    .iter()
                    .find(|i| bs.contains(i))
                    .expect("separator decomposition covers the contracted edge")
            }
            _ => unreachable!("components of a nonempty division have one or two outgoing edges"),
        };
        let offset = td.bags.len();
        for mut bag in sub_td.bags {
            bag.extend_from_slice(&out_globals);
            td.add_bag(bag);
        }
        for (a, b) in sub_td.tree_edges {
            td.connect(a + offset, b + offset);
        }
        td.connect(anchor, offset);
    }
    td
}
