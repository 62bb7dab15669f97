//! Rooted stochastic embeddings: the graph is sliced into random
//! exponential bands around a root, each band (with everything closer to
//! the root contracted into it) is embedded separately, and the band hosts
//! are glued at the root.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    all_pairs, dijkstra, is_planar_embedding, Edge, Length, TreeDecomposition, WeightedGraph, TOLERANCE,
};
use crate::portal::build_host_graph_with;
use crate::rspd::{build_rspd, DEFAULT_ETA};

/// Largest accepted slicing parameter.
pub const MAX_EPS: f64 = 0.25;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= MAX_EPS {
        Ok(())
    } else {
        Err(Error::Argument(format!("eps must lie in (0, {MAX_EPS}], got {eps}")))
    }
}

/// Band thresholds and the band of every vertex, in rescaled units.
#[derive(Clone, Debug, Serialize)]
pub struct BandSlicing {
    pub x: f64,
    pub eps: f64,
    /// Factor applied to all weights so the nearest vertex is at distance 1.
    pub scale: f64,
    pub root: usize,
    /// Rescaled distance from the root.
    pub root_distance: Vec<Length>,
    /// Band of every vertex; `None` for the root.
    pub band: Vec<Option<usize>>,
}

impl BandSlicing {
    /// Threshold slicing for a fixed offset `x` in `[0, 1]`.
    pub fn new(root_distance: Vec<Length>, root: usize, eps: f64, x: f64, scale: f64) -> Result<Self> {
        check_eps(eps)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Argument(format!("offset must lie in [0, 1], got {x}")));
        }
        let mut s = BandSlicing { x, eps, scale, root, band: Vec::new(), root_distance };
        s.band = s.root_distance.iter().enumerate().map(|(v, &d)| (v != root).then(|| s.band_of(d))).collect();
        Ok(s)
    }

    /// `U_i = (1/eps)^((i + x) / eps)`.
    pub fn upper(&self, i: usize) -> Length {
        (1.0 / self.eps).powf((i as f64 + self.x) / self.eps)
    }

    /// `L_i = (1/eps)^((i - 1 + x) / eps)`, so `L_i = U_{i-1}`.
    pub fn lower(&self, i: usize) -> Length {
        (1.0 / self.eps).powf((i as f64 - 1.0 + self.x) / self.eps)
    }

    /// Index `i` with `L_i <= d < U_i`.
    pub fn band_of(&self, d: Length) -> usize {
        let t = self.eps * d.ln() / (1.0 / self.eps).ln() - self.x;
        let mut i = if t.is_finite() && t >= 0.0 { t.floor() as usize + 1 } else { 0 };
        while d >= self.upper(i) {
            i += 1;
        }
        while i > 0 && d < self.lower(i) {
            i -= 1;
        }
        i
    }

    pub fn band_count(&self) -> usize {
        self.band.iter().flatten().max().map_or(0, |&b| b + 1)
    }

    /// True when `d(r, v)` lies in `[L_i / eps, eps * U_i]` for its band `i`.
    /// The root is always successful.
    pub fn is_successful(&self, v: usize) -> bool {
        match self.band[v] {
            None => true,
            Some(i) => {
                let d = self.root_distance[v];
                d >= self.lower(i) / self.eps && d <= self.eps * self.upper(i)
            }
        }
    }
}

/// A band subgraph with local ids; local 0 is the root.
#[derive(Clone, Debug)]
pub struct BandGraph {
    pub index: usize,
    pub graph: WeightedGraph,
    /// Global id of every local vertex.
    pub vertices: Vec<usize>,
}

/// Rescaling factor making the nearest non-root vertex sit at distance 1.
fn rescale(g: &WeightedGraph, r: usize) -> Result<(WeightedGraph, f64, Vec<Length>)> {
    g.check_vertex(r)?;
    let sp = dijkstra(g, r)?;
    if sp.dist.iter().any(|d| d.is_infinite()) {
        return Err(Error::Disconnected);
    }
    let nearest = sp
        .dist
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != r)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let scale = if nearest.is_finite() && nearest > 0.0 { 1.0 / nearest } else { 1.0 };
    let dist = sp.dist.iter().map(|d| d * scale).collect();
    Ok((g.scaled(scale), scale, dist))
}

/// Slices `g` around `r` with a random offset drawn from `seed`.
pub fn sample_bands(g: &WeightedGraph, r: usize, eps: f64, seed: u64) -> Result<(BandSlicing, Vec<BandGraph>)> {
    check_eps(eps)?;
    let x = ChaCha8Rng::seed_from_u64(seed).gen::<f64>();
    slice_at(g, r, eps, x)
}

/// Slices `g` around `r` at offset `x`.
pub fn slice_at(g: &WeightedGraph, r: usize, eps: f64, x: f64) -> Result<(BandSlicing, Vec<BandGraph>)> {
    let (scaled, scale, dist) = rescale(g, r)?;
    let slicing = BandSlicing::new(dist, r, eps, x, scale)?;
    let bands = band_graphs(&scaled, &slicing)?;
    Ok((slicing, bands))
}

fn band_graphs(g: &WeightedGraph, s: &BandSlicing) -> Result<Vec<BandGraph>> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); s.band_count()];
    for (v, b) in s.band.iter().enumerate() {
        if let Some(b) = b {
            members[*b].push(v);
        }
    }
    let sp = dijkstra(g, s.root)?;
    members
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(i, m)| contract_band(g, s, &sp.pred, i, m))
        .collect()
}

fn contract_band(
    g: &WeightedGraph,
    s: &BandSlicing,
    pred: &[Option<usize>],
    index: usize,
    band: Vec<usize>,
) -> Result<BandGraph> {
    let r = s.root;
    let inner: Vec<bool> =
        (0..g.n()).map(|v| v == r || s.band[v].is_some_and(|b| b < index)).collect();
    let (graph, vertices) =
        contract_into_root(g, r, &s.root_distance, pred, &inner, &band, |v, _| s.root_distance[v])?;
    Ok(BandGraph { index, graph, vertices })
}

/// Keeps `members` and contracts the `inner` vertices (which must contain
/// `r` and be closed under shortest-path predecessors) into `r`, merging
/// rotations along the contracted tree edges. Parallel edges to the root
/// collapse to one, weighted by `root_weight(vertex, original edge)`.
/// Returns the graph with local ids (root first) and the global id of every
/// local vertex. The rotation is dropped if the result fails the planarity
/// check.
pub(crate) fn contract_into_root<F>(
    g: &WeightedGraph,
    r: usize,
    root_distance: &[Length],
    pred: &[Option<usize>],
    inner: &[bool],
    members: &[usize],
    root_weight: F,
) -> Result<(WeightedGraph, Vec<usize>)>
where
    F: Fn(usize, &Edge) -> Length,
{
    let n = g.n();
    let mut local = vec![usize::MAX; n];
    let mut vertices = vec![r];
    local[r] = 0;
    for &v in members {
        if !inner[v] && local[v] == usize::MAX {
            local[v] = vertices.len();
            vertices.push(v);
        }
    }
    let target = |v: usize| if inner[v] { Some(0) } else if local[v] != usize::MAX { Some(local[v]) } else { None };

    // Merge the rotations of inner vertices into the root, parents first.
    let merged_rotation = g.rotation().and_then(|rot| {
        let mut merged: Vec<usize> = rot[r].clone();
        let mut order: Vec<usize> = (0..n).filter(|&v| inner[v] && v != r).collect();
        order.sort_by(|&a, &b| root_distance[a].total_cmp(&root_distance[b]).then(a.cmp(&b)));
        for v in order {
            let p = pred[v]?;
            let e = rot[v].iter().copied().find(|&e| g.edge(e).other(v) == p && !g.edge(e).structural)?;
            let pos_r = merged.iter().position(|&x| x == e)?;
            let pos_v = rot[v].iter().position(|&x| x == e)?;
            let k = rot[v].len();
            let tail: Vec<usize> = (1..k).map(|j| rot[v][(pos_v + j) % k]).collect();
            merged.splice(pos_r..=pos_r, tail);
        }
        Some((rot, merged))
    });

    // One root edge per neighbour of the contracted set, first in rotation order.
    let mut root_edge: HashMap<usize, usize> = HashMap::new();
    let candidates: Vec<usize> = match &merged_rotation {
        Some((_, merged)) => merged.clone(),
        None => (0..g.m()).collect(),
    };
    for e in candidates {
        let x = g.edge(e);
        if let (Some(a), Some(b)) = (target(x.u), target(x.v)) {
            if (a == 0) != (b == 0) {
                root_edge.entry(a.max(b)).or_insert(e);
            }
        }
    }

    let mut new_id = vec![usize::MAX; g.m()];
    let mut edges: Vec<Edge> = Vec::new();
    for (e, x) in g.edges().iter().enumerate() {
        let (Some(a), Some(b)) = (target(x.u), target(x.v)) else { continue };
        if a == 0 && b == 0 {
            continue;
        }
        if a == 0 || b == 0 {
            let w = a.max(b);
            if root_edge[&w] != e {
                continue;
            }
            new_id[e] = edges.len();
            edges.push(Edge::new(0, w, root_weight(vertices[w], x)));
        } else {
            new_id[e] = edges.len();
            edges.push(Edge { u: a, v: b, w: x.w, structural: x.structural });
        }
    }
    let k = vertices.len();
    let rotation = merged_rotation.map(|(rot, merged)| {
        let keep = |list: &[usize]| -> Vec<usize> {
            list.iter().filter(|&&e| new_id[e] != usize::MAX).map(|&e| new_id[e]).collect()
        };
        let mut out = vec![keep(&merged)];
        for &v in &vertices[1..] {
            out.push(keep(&rot[v]));
        }
        out
    });
    let plain = WeightedGraph::from_parts(k, edges, None, false)?;
    let graph = match rotation {
        Some(rot) => match plain.clone().with_rotation(rot) {
            Ok(h) if is_planar_embedding(&h).unwrap_or(false) => h,
            _ => plain,
        },
        None => plain,
    };
    Ok((graph, vertices))
}

#[derive(Clone, Debug, Serialize)]
pub struct BandHostSummary {
    pub index: usize,
    pub vertices: usize,
    pub host_vertices: usize,
    pub host_edges: usize,
    pub width: usize,
    /// True when the band was embedded as a single exact clique.
    pub clique_fallback: bool,
}

#[derive(Clone, Debug)]
pub struct RootedEmbedding {
    /// Host graph in rescaled units.
    pub host: WeightedGraph,
    /// Host vertex of every source vertex (the canonical copy, equal to its id).
    pub map: Vec<usize>,
    pub preimage: Vec<usize>,
    pub slicing: BandSlicing,
    pub band_hosts: Vec<BandHostSummary>,
    pub decomposition: TreeDecomposition,
}

impl RootedEmbedding {
    pub fn width(&self) -> usize {
        self.decomposition.width()
    }
}

/// Portal parameter used inside each band: `eps^(1/eps)`.
pub fn band_distortion(eps: f64) -> f64 {
    eps.powf(1.0 / eps)
}

pub fn build_rooted_embedding(g: &WeightedGraph, r: usize, eps: f64, seed: u64) -> Result<RootedEmbedding> {
    let (slicing, bands) = sample_bands(g, r, eps, seed)?;
    glue_bands(g.n(), slicing, &bands)
}

/// Embedding for a fixed offset `x`.
pub fn build_rooted_embedding_at(g: &WeightedGraph, r: usize, eps: f64, x: f64) -> Result<RootedEmbedding> {
    let (slicing, bands) = slice_at(g, r, eps, x)?;
    glue_bands(g.n(), slicing, &bands)
}

fn glue_bands(n: usize, slicing: BandSlicing, bands: &[BandGraph]) -> Result<RootedEmbedding> {
    let r = slicing.root;
    let delta = band_distortion(slicing.eps);
    let mut preimage: Vec<usize> = (0..n).collect();
    let mut edges: Vec<(usize, usize, Length)> = Vec::new();
    let mut td = TreeDecomposition::default();
    let mut summaries = Vec::new();
    for band in bands {
        let k = band.graph.n();
        let (host, host_pre, host_td, fallback) = match build_rspd(&band.graph, 0, DEFAULT_ETA) {
            Ok(phi) => {
                let dist = all_pairs(&band.graph);
                let e = build_host_graph_with(&band.graph, &phi, delta, &dist)?;
                (e.host, e.preimage, e.host_decomposition, false)
            }
            Err(Error::Embedding(_)) if k - 1 <= DEFAULT_ETA => {
                let dist = all_pairs(&band.graph);
                let mut es = Vec::new();
                for a in 0..k {
                    for b in a + 1..k {
                        es.push((a, b, dist.get(a, b)));
                    }
                }
                (WeightedGraph::new(k, es)?, (0..k).collect(), TreeDecomposition::single_bag(k), true)
            }
            Err(e) => return Err(e),
        };
        // Canonical copies map to global ids; portal copies get fresh ids.
        let mut global = Vec::with_capacity(host.n());
        for (h, &p) in host_pre.iter().enumerate() {
            if h < k {
                global.push(band.vertices[h]);
            } else {
                global.push(preimage.len());
                preimage.push(band.vertices[p]);
            }
        }
        for e in host.edges() {
            if !e.structural {
                edges.push((global[e.u], global[e.v], e.w));
            }
        }
        let offset = td.bags.len();
        for bag in &host_td.bags {
            let mut b: Vec<usize> = bag.iter().map(|&h| global[h]).collect();
            b.push(r);
            td.add_bag(b);
        }
        for &(a, b) in &host_td.tree_edges {
            td.connect(a + offset, b + offset);
        }
        if offset > 0 {
            td.connect(0, offset);
        }
        summaries.push(BandHostSummary {
            index: band.index,
            vertices: k - 1,
            host_vertices: host.n(),
            host_edges: host.m(),
            width: host_td.width(),
            clique_fallback: fallback,
        });
    }
    for v in 0..n {
        if v != r {
            edges.push((r, v, slicing.root_distance[v]));
        }
    }
    if td.bags.is_empty() {
        td.add_bag(vec![r]);
    }
    let host = WeightedGraph::new(preimage.len(), edges)?;
    Ok(RootedEmbedding { host, map: (0..n).collect(), preimage, slicing, band_hosts: summaries, decomposition: td })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RootedStats {
    pub trials: usize,
    pub eps: f64,
    pub scale: f64,
    /// Distinct band partitions seen across trials.
    pub partitions: usize,
    /// Largest per-vertex empirical rate of being unsuccessful.
    pub max_unsuccessful_rate: f64,
    pub mean_unsuccessful_rate: f64,
    /// Smallest `d_H - d_G` over all trials and pairs.
    pub min_gap: Length,
    /// Largest `(d_H - d_G) / (eps * (d(r,u) + d(r,v)))` over trials, pairs
    /// `u != v` and successful `u`.
    pub max_successful_ratio: f64,
    /// Largest mean gap over pairs, divided by `d(r,u) + d(r,v)`.
    pub max_normalized_mean_gap: f64,
    pub max_width: usize,
    pub fallback_bands: usize,
}

impl RootedStats {
    pub fn dominating(&self) -> bool {
        self.min_gap >= -TOLERANCE
    }
}

/// Offset for trial `t` of a run seeded with `seed`.
pub fn trial_offset(seed: u64, t: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng.gen::<f64>()
}

struct PartitionResult {
    /// Host distances between canonical copies, row-major `n x n`.
    dist: Vec<Length>,
    width: usize,
    fallback: usize,
}

/// Monte Carlo estimate of the rooted distortion. Trials sharing a band
/// partition share one host, since the host depends on the offset only
/// through the partition.
pub fn rooted_distortion_stats(g: &WeightedGraph, r: usize, eps: f64, trials: usize, seed: u64) -> Result<RootedStats> {
    check_eps(eps)?;
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    let n = g.n();
    let (scaled, scale, root_distance) = rescale(g, r)?;
    let gd = all_pairs(&scaled);
    let slicings: Vec<BandSlicing> = (0..trials as u64)
        .map(|t| BandSlicing::new(root_distance.clone(), r, eps, trial_offset(seed, t), scale))
        .collect::<Result<_>>()?;
    let mut keys: Vec<Vec<Option<usize>>> = slicings.iter().map(|s| s.band.clone()).collect();
    keys.sort();
    keys.dedup();
    let index: HashMap<&Vec<Option<usize>>, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let representatives: Vec<&BandSlicing> = {
        let mut rep: Vec<Option<&BandSlicing>> = vec![None; keys.len()];
        for s in &slicings {
            rep[index[&s.band]].get_or_insert(s);
        }
        rep.into_iter().map(|x| x.expect("every partition has a trial")).collect()
    };
    let results: Vec<PartitionResult> = representatives
        .par_iter()
        .map(|s| -> Result<PartitionResult> {
            let bands = band_graphs(&scaled, s)?;
            let e = glue_bands(n, (*s).clone(), &bands)?;
            let mut dist = vec![0.0; n * n];
            for u in 0..n {
                let sp = dijkstra(&e.host, e.map[u])?;
                for v in 0..n {
                    dist[u * n + v] = sp.dist[e.map[v]];
                }
            }
            let fallback = e.band_hosts.iter().filter(|b| b.clique_fallback).count();
            Ok(PartitionResult { dist, width: e.width(), fallback })
        })
        .collect::<Result<_>>()?;

    let mut stats = RootedStats {
        trials,
        eps,
        scale,
        partitions: keys.len(),
        min_gap: f64::INFINITY,
        ..Default::default()
    };
    let mut unsuccessful = vec![0usize; n];
    let mut gap_sum = vec![0.0; n * n];
    for s in &slicings {
        let res = &results[index[&s.band]];
        stats.max_width = stats.max_width.max(res.width);
        stats.fallback_bands = stats.fallback_bands.max(res.fallback);
        for u in 0..n {
            let ok = s.is_successful(u);
            if !ok {
                unsuccessful[u] += 1;
            }
            for v in 0..n {
                let gap = res.dist[u * n + v] - gd.get(u, v);
                gap_sum[u * n + v] += gap;
                stats.min_gap = stats.min_gap.min(gap);
                if ok && u != v {
                    let budget = eps * (root_distance[u] + root_distance[v]);
                    stats.max_successful_ratio = stats.max_successful_ratio.max(gap / budget);
                }
            }
        }
    }
    let others = n.saturating_sub(1).max(1) as f64;
    for (v, &c) in unsuccessful.iter().enumerate() {
        if v == r {
            continue;
        }
        let rate = c as f64 / trials as f64;
        stats.max_unsuccessful_rate = stats.max_unsuccessful_rate.max(rate);
        stats.mean_unsuccessful_rate += rate / others;
    }
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let mean = gap_sum[u * n + v] / trials as f64;
                stats.max_normalized_mean_gap =
                    stats.max_normalized_mean_gap.max(mean / (root_distance[u] + root_distance[v]));
            }
        }
    }
    if n <= 1 {
        stats.min_gap = 0.0;
    }
    Ok(stats)
}
