//! Embedding of a planar graph into a low-treewidth host with additive
//! distortion, built from portals on the boundary paths of a rooted
//! shortest-path decomposition linked along a low-hop emulator of the
//! decomposition tree.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::emulator::build_emulator;
use crate::error::{Error, Result};
use crate::graph::{
    all_pairs, dijkstra, DistanceMatrix, Edge, Length, RootedTree, TreeDecomposition, WeightedGraph,
    TOLERANCE,
};
use crate::rspd::Rspd;

/// Portal spacing for a graph on `n` vertices with diameter `diameter`.
pub fn portal_spacing(eps: f64, diameter: Length, n: usize) -> Length {
    let ll = if n >= 4 { (n as f64).log2().log2() } else { 0.0 };
    eps * diameter / ll.max(1.0)
}

/// Depth-first portal selection on a shortest-path tree: a vertex becomes a
/// portal when its nearest portal ancestor is farther than `delta`. Sorted.
pub fn compute_delta_portals(t: &RootedTree, delta: Length) -> Result<Vec<usize>> {
    if !(delta > 0.0) {
        return Err(Error::Argument(format!("portal spacing must be positive, got {delta}")));
    }
    let depth = t.depths();
    let mut nearest = vec![t.root(); t.n()];
    let mut portals = vec![t.root()];
    for v in t.preorder() {
        let Some(p) = t.parent(v) else { continue };
        let y = nearest[p];
        if depth[v] - depth[y] > delta {
            portals.push(v);
            nearest[v] = v;
        } else {
            nearest[v] = y;
        }
    }
    portals.sort_unstable();
    Ok(portals)
}

#[derive(Clone, Debug, Serialize)]
pub struct PortalSet {
    pub spacing: Length,
    /// Portals of the whole shortest-path tree.
    pub tree_portals: Vec<usize>,
    /// Portals on the boundary (and, for internal nodes, separator) paths of
    /// each decomposition node.
    pub per_node: Vec<Vec<usize>>,
}

impl PortalSet {
    pub fn new(phi: &Rspd, spacing: Length) -> Result<Self> {
        let tree_portals = compute_delta_portals(&phi.sp_tree, spacing)?;
        let mut is_portal = vec![false; phi.n()];
        for &p in &tree_portals {
            is_portal[p] = true;
        }
        let per_node = phi
            .nodes
            .iter()
            .map(|x| {
                let mut out = Vec::new();
                for &b in x.boundary.iter().chain(&x.separator) {
                    let mut cur = Some(b);
                    while let Some(v) = cur {
                        if is_portal[v] {
                            out.push(v);
                        }
                        cur = phi.sp_tree.parent(v);
                    }
                }
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        Ok(PortalSet { spacing, tree_portals, per_node })
    }
}

#[derive(Clone, Debug)]
pub struct OneToManyEmbedding {
    pub host: WeightedGraph,
    /// Clan of each source vertex; the canonical copy (the vertex itself,
    /// host id equal to the source id) comes first.
    pub copies: Vec<Vec<usize>>,
    /// Source vertex of every host vertex.
    pub preimage: Vec<usize>,
    /// Decomposition node of every portal copy; `None` for canonical copies.
    pub copy_node: Vec<Option<usize>>,
    pub host_decomposition: TreeDecomposition,
    pub diameter: Length,
    pub spacing: Length,
}

impl OneToManyEmbedding {
    pub fn width(&self) -> usize {
        self.host_decomposition.width()
    }

    /// True when every host edge is at least the source distance of its ends.
    pub fn edges_dominate(&self, dist: &DistanceMatrix) -> bool {
        self.host
            .edges()
            .iter()
            .all(|e| e.w + TOLERANCE >= dist.get(self.preimage[e.u], self.preimage[e.v]))
    }
}

/// Builds the host graph and its tree decomposition.
pub fn build_host_graph(g: &WeightedGraph, phi: &Rspd, eps: f64) -> Result<OneToManyEmbedding> {
    let dist = all_pairs(g);
    build_host_graph_with(g, phi, eps, &dist)
}

/// As [`build_host_graph`], reusing a precomputed distance matrix of `g`.
pub fn build_host_graph_with(
    g: &WeightedGraph,
    phi: &Rspd,
    eps: f64,
    dist: &DistanceMatrix,
) -> Result<OneToManyEmbedding> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("eps must lie in (0, 1), got {eps}")));
    }
    let n = g.n();
    if phi.n() != n || dist.n() != n {
        return Err(Error::Argument("decomposition or distances do not match the graph".into()));
    }
    let diameter = dist.max();
    if diameter.is_infinite() {
        return Err(Error::Disconnected);
    }
    let spacing = portal_spacing(eps, diameter, n);
    if n <= 1 || spacing <= 0.0 {
        return Ok(clique_host(n, dist, diameter));
    }
    if phi.nodes.iter().any(|x| x.boundary.len() > phi.eta) {
        return Err(Error::Argument("decomposition has a node with too many boundary paths".into()));
    }
    let portals = PortalSet::new(phi, spacing)?;
    let node_tree = phi.node_tree();
    let emulator = build_emulator(&node_tree);

    // Host ids: 0..n are the canonical copies; portal copies follow, grouped by node.
    let mut preimage: Vec<usize> = (0..n).collect();
    let mut copy_node: Vec<Option<usize>> = vec![None; n];
    let mut copies: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut node_copies: Vec<Vec<usize>> = Vec::with_capacity(phi.nodes.len());
    for (alpha, list) in portals.per_node.iter().enumerate() {
        let ids: Vec<usize> = list
            .iter()
            .map(|&v| {
                let id = preimage.len();
                preimage.push(v);
                copy_node.push(Some(alpha));
                copies[v].push(id);
                id
            })
            .collect();
        node_copies.push(ids);
    }
    let weight = |a: usize, b: usize| dist.get(preimage[a], preimage[b]);

    let mut edges: Vec<Edge> = Vec::new();
    let push = |edges: &mut Vec<Edge>, a: usize, b: usize| {
        edges.push(Edge::new(a, b, weight(a, b)));
    };
    for ids in &node_copies {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                push(&mut edges, a, b);
            }
        }
    }
    for e in emulator.graph.edges() {
        for &a in &node_copies[e.u] {
            for &b in &node_copies[e.v] {
                push(&mut edges, a, b);
            }
        }
    }
    let leaves = phi.leaves();
    let mut interior = vec![false; n];
    for &leaf in &leaves {
        let inner = &phi.nodes[leaf].internal;
        for (i, &a) in inner.iter().enumerate() {
            interior[a] = true;
            for &b in &inner[i + 1..] {
                push(&mut edges, a, b);
            }
            for &b in &node_copies[leaf] {
                push(&mut edges, a, b);
            }
        }
    }
    // Remaining vertices attach to the first leaf (in preorder) whose
    // boundary paths contain them.
    let mut attach: Vec<Option<usize>> = vec![None; n];
    for &leaf in &leaves {
        for v in phi.boundary_path_vertices(leaf) {
            if !interior[v] && attach[v].is_none() {
                attach[v] = Some(leaf);
            }
        }
    }
    for v in 0..n {
        if interior[v] {
            continue;
        }
        let leaf = attach[v].ok_or_else(|| {
            Error::Argument(format!("vertex {v} is neither internal nor on a leaf boundary"))
        })?;
        for &b in &node_copies[leaf] {
            push(&mut edges, v, b);
        }
    }
    let host = WeightedGraph::from_parts(preimage.len(), edges, None, true)?;

    // Decomposition: node bags become portal-copy bags, plus one bag per leaf
    // interior and one per attached vertex.
    let mut td = TreeDecomposition::default();
    let mut home_bag = vec![usize::MAX; phi.nodes.len()];
    for (i, bag) in emulator.decomposition.bags.iter().enumerate() {
        let mut out = Vec::new();
        for &alpha in bag {
            out.extend_from_slice(&node_copies[alpha]);
            if home_bag[alpha] == usize::MAX {
                home_bag[alpha] = i;
            }
        }
        td.add_bag(out);
    }
    td.tree_edges = emulator.decomposition.tree_edges.clone();
    for &leaf in &leaves {
        let mut bag = phi.nodes[leaf].internal.clone();
        if bag.is_empty() {
            continue;
        }
        bag.extend_from_slice(&node_copies[leaf]);
        let id = td.add_bag(bag);
        td.connect(home_bag[leaf], id);
    }
    for v in 0..n {
        if let Some(leaf) = attach[v].filter(|_| !interior[v]) {
            let mut bag = vec![v];
            bag.extend_from_slice(&node_copies[leaf]);
            let id = td.add_bag(bag);
            td.connect(home_bag[leaf], id);
        }
    }

    Ok(OneToManyEmbedding {
        host,
        copies,
        preimage,
        copy_node,
        host_decomposition: td,
        diameter,
        spacing,
    })
}

fn clique_host(n: usize, dist: &DistanceMatrix, diameter: Length) -> OneToManyEmbedding {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push(Edge::new(u, v, dist.get(u, v)));
        }
    }
    OneToManyEmbedding {
        host: WeightedGraph::from_parts(n, edges, None, true).expect("clique edges are valid"),
        copies: (0..n).map(|v| vec![v]).collect(),
        preimage: (0..n).collect(),
        copy_node: vec![None; n],
        host_decomposition: TreeDecomposition::single_bag(n),
        diameter,
        spacing: 0.0,
    }
}

/// One-to-one embedding obtained by keeping the canonical copy of every vertex.
#[derive(Clone, Debug)]
pub struct OneToOneEmbedding {
    pub host: WeightedGraph,
    pub map: Vec<usize>,
}

pub fn to_one_to_one(e: &OneToManyEmbedding) -> OneToOneEmbedding {
    OneToOneEmbedding { host: e.host.clone(), map: e.copies.iter().map(|c| c[0]).collect() }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DistortionReport {
    pub pairs: usize,
    pub exhaustive: bool,
    /// Smallest `d_H - d_G` over all pairs and copies (dominance needs >= 0).
    pub min_gap: Length,
    /// Largest `d_H - d_G` over all pairs and copies.
    pub max_gap: Length,
    /// Mean over pairs of the largest gap over copies.
    pub mean_gap: Length,
    /// Largest `d_H / d_G` over pairs with `d_G > 0`.
    pub max_ratio: f64,
}

impl DistortionReport {
    pub fn dominating(&self) -> bool {
        self.min_gap >= -TOLERANCE
    }
}

/// Source vertices used for measurement: all of them when `n * n` fits in
/// the budget, otherwise an evenly spread subset with at least `budget`
/// pairs.
pub fn measurement_sources(n: usize, pair_budget: usize) -> (Vec<usize>, bool) {
    if n * n <= pair_budget.max(1) || n <= 1 {
        return ((0..n).collect(), true);
    }
    let count = pair_budget.div_ceil(n).clamp(1, n);
    let sources = (0..count).map(|i| i * n / count).collect();
    (sources, false)
}

/// Compares host distances between every copy of a source vertex and every
/// copy of every other vertex with the graph distance.
pub fn measure_distortion(
    g: &WeightedGraph,
    e: &OneToManyEmbedding,
    dist: &DistanceMatrix,
    pair_budget: usize,
) -> Result<DistortionReport> {
    let n = g.n();
    let (sources, exhaustive) = measurement_sources(n, pair_budget);
    let rows: Vec<(Length, Length, Length, f64, usize)> = sources
        .par_iter()
        .map(|&u| -> Result<_> {
            // Per target: min and max over copies of both endpoints.
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![f64::NEG_INFINITY; n];
            for &cu in &e.copies[u] {
                let sp = dijkstra(&e.host, cu)?;
                for (x, &d) in sp.dist.iter().enumerate() {
                    let v = e.preimage[x];
                    lo[v] = lo[v].min(d);
                    hi[v] = hi[v].max(d);
                }
            }
            let (mut min_gap, mut max_gap, mut sum, mut ratio) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 1.0f64);
            for v in 0..n {
                let d = dist.get(u, v);
                min_gap = min_gap.min(lo[v] - d);
                max_gap = max_gap.max(hi[v] - d);
                sum += hi[v] - d;
                if d > 0.0 {
                    ratio = ratio.max(hi[v] / d);
                }
            }
            Ok((min_gap, max_gap, sum, ratio, n))
        })
        .collect::<Result<_>>()?;
    let mut rep = DistortionReport { exhaustive, min_gap: f64::INFINITY, max_gap: f64::NEG_INFINITY, max_ratio: 1.0, ..Default::default() };
    let mut sum = 0.0;
    for (lo, hi, s, ratio, k) in rows {
        rep.min_gap = rep.min_gap.min(lo);
        rep.max_gap = rep.max_gap.max(hi);
        rep.max_ratio = rep.max_ratio.max(ratio);
        sum += s;
        rep.pairs += k;
    }
    if rep.pairs == 0 {
        rep.min_gap = 0.0;
        rep.max_gap = 0.0;
    } else {
        rep.mean_gap = sum / rep.pairs as f64;
    }
    Ok(rep)
}

/// Largest `d_H(x, y) - d_G(u, v)` over portal copies `x` of `u` and `y` of
/// `v`, from up to `sources` seeded random portal copies to all others.
pub fn measure_portal_distortion(
    e: &OneToManyEmbedding,
    dist: &DistanceMatrix,
    sources: usize,
    seed: u64,
) -> Result<(usize, Length)> {
    let portals: Vec<usize> = (0..e.host.n()).filter(|&x| e.copy_node[x].is_some()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked: Vec<usize> = portals.choose_multiple(&mut rng, sources.min(portals.len())).copied().collect();
    let rows: Vec<(usize, Length)> = picked
        .par_iter()
        .map(|&x| -> Result<_> {
            let sp = dijkstra(&e.host, x)?;
            let u = e.preimage[x];
            let worst = portals
                .iter()
                .map(|&y| sp.dist[y] - dist.get(u, e.preimage[y]))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((portals.len(), worst))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold((0, 0.0), |(k, m), (c, w)| (k + c, m.max(w))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_tree_decomposition;
    use crate::instances::{grid, WeightMode};
    use crate::rspd::build_rspd;

    #[test]
    fn portals_on_unit_path() {
        // r - v1 - v2 - v3.
        let t = RootedTree::from_edges(4, 0, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(compute_delta_portals(&t, 1.0).unwrap(), vec![0, 2]);
        assert_eq!(compute_delta_portals(&t, 3.0).unwrap(), vec![0]);
        assert!(compute_delta_portals(&t, 0.0).is_err());
    }

    #[test]
    fn single_leaf_is_exact_clique() {
        let g = grid(2, WeightMode::Unit).unwrap();
        let phi = build_rspd(&g, 0, 4).unwrap();
        let e = build_host_graph(&g, &phi, 0.5).unwrap();
        let dist = all_pairs(&g);
        let rep = measure_distortion(&g, &e, &dist, 100).unwrap();
        assert!(rep.exhaustive);
        assert!(rep.max_gap.abs() < 1e-12 && rep.dominating());
    }

    #[test]
    fn grid_host_is_valid_and_dominating() {
        let g = grid(8, WeightMode::Unit).unwrap();
        let phi = build_rspd(&g, 0, 4).unwrap();
        let dist = all_pairs(&g);
        let e = build_host_graph_with(&g, &phi, 0.25, &dist).unwrap();
        assert!(e.edges_dominate(&dist));
        let td = validate_tree_decomposition(&e.host, &e.host_decomposition);
        assert!(td.valid(), "{:?}", td.failures);
        let rep = measure_distortion(&g, &e, &dist, usize::MAX).unwrap();
        assert!(rep.dominating());
        assert!(rep.max_gap <= 20.0 * 0.25 * e.diameter);
        let one = to_one_to_one(&e);
        assert_eq!(one.map, (0..g.n()).collect::<Vec<_>>());
    }
}
