//! Bicriteria ρ-independent set via Baker layering: shifted distance layers
//! around a root, each layer embedded into a low-treewidth host and solved
//! there, with the best shift kept.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, dijkstra, Length, WeightedGraph};
use crate::portal::build_host_graph_with;
use crate::rspd::{build_rspd, DEFAULT_ETA};
use crate::stochastic::contract_into_root;

/// Largest terminal count accepted by the exact solver.
pub const MAX_TERMINALS: usize = 25;

const SLACK: f64 = 1e-9;

/// Largest value not above `eps` whose doubled inverse is an integer.
pub fn snap_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Argument(format!("eps must lie in (0, 1], got {eps}")));
    }
    let k = (2.0 / eps - 1e-9).ceil().max(2.0);
    Ok(2.0 / k)
}

/// Number of shifts `2 / eps` for a snapped `eps`.
pub fn shift_count(eps: f64) -> usize {
    (2.0 / eps).round() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, d: f64) -> bool {
        d >= self.lo && (d < self.hi || (self.hi_closed && d <= self.hi))
    }
}

/// Outer and inner intervals of layer `j >= -1` for shift `sigma`.
pub fn layer_intervals(eps: f64, sigma: usize, j: i64) -> (Interval, Interval) {
    let s = sigma as f64;
    if j < 0 {
        return (
            Interval { lo: 0.0, hi: s, hi_closed: false },
            Interval { lo: 0.0, hi: s - 1.0, hi_closed: false },
        );
    }
    let width = 2.0 / eps;
    let lo = width * j as f64 + s;
    let hi = width * (j + 1) as f64 + s;
    (
        Interval { lo, hi, hi_closed: true },
        Interval { lo: lo + 1.0, hi: hi - 1.0, hi_closed: true },
    )
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub index: i64,
    pub interval: Interval,
    pub inner_interval: Interval,
    /// Vertices whose root distance lies in the interval.
    pub members: Vec<usize>,
    /// Vertices whose root distance lies in the inner interval.
    pub inner_members: Vec<usize>,
    /// Layer graph; local 0 is the root (standing in for everything closer).
    pub graph: WeightedGraph,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct LayerFamily {
    pub shift: usize,
    pub eps: f64,
    pub layers: Vec<Layer>,
}

impl LayerFamily {
    /// Union of the inner sets over all layers.
    pub fn inner_union(&self, n: usize) -> Vec<bool> {
        let mut out = vec![false; n];
        for l in &self.layers {
            for &v in &l.inner_members {
                out[v] = true;
            }
        }
        out
    }
}

/// Root distances after rescaling so that `rho = 1`.
fn normalized_distances(g: &WeightedGraph, r: usize, rho: f64) -> Result<(WeightedGraph, Vec<Length>, Vec<Option<usize>>)> {
    if !(rho > 0.0) {
        return Err(Error::Argument(format!("rho must be positive, got {rho}")));
    }
    let h = g.scaled(1.0 / rho);
    let sp = dijkstra(&h, r)?;
    if sp.dist.iter().any(|d| d.is_infinite()) {
        return Err(Error::Disconnected);
    }
    Ok((h, sp.dist, sp.pred))
}

/// Layers of shift `sigma` for the snapped `eps`.
pub fn build_layers(g: &WeightedGraph, r: usize, rho: f64, eps: f64, sigma: usize) -> Result<LayerFamily> {
    g.check_vertex(r)?;
    let eps = snap_eps(eps)?;
    if sigma >= shift_count(eps) {
        return Err(Error::Argument(format!("shift {sigma} out of range for eps {eps}")));
    }
    let (h, dist, pred) = normalized_distances(g, r, rho)?;
    let far = dist.iter().copied().fold(0.0, f64::max);
    let mut layers = Vec::new();
    let mut j = -1i64;
    loop {
        let (outer, inner_iv) = layer_intervals(eps, sigma, j);
        if j >= 0 && outer.lo > far {
            break;
        }
        let members: Vec<usize> = (0..g.n()).filter(|&v| outer.contains(dist[v])).collect();
        if !members.is_empty() {
            let inner_members = members.iter().copied().filter(|&v| inner_iv.contains(dist[v])).collect();
            let contracted: Vec<bool> = (0..g.n()).map(|v| v == r || (j >= 0 && dist[v] < outer.lo)).collect();
            let (graph, vertices) = if j < 0 {
                contract_into_root(&h, r, &dist, &pred, &contracted, &members, |_, e| e.w)?
            } else {
                contract_into_root(&h, r, &dist, &pred, &contracted, &members, |_, _| 1.0)?
            };
            layers.push(Layer { index: j, interval: outer, inner_interval: inner_iv, members, inner_members, graph, vertices });
        }
        j += 1;
    }
    Ok(LayerFamily { shift: sigma, eps, layers })
}

/// For every vertex, the number of shifts whose inner layers contain it.
pub fn inner_cover_counts(g: &WeightedGraph, r: usize, rho: f64, eps: f64) -> Result<Vec<usize>> {
    let eps = snap_eps(eps)?;
    let (_, dist, _) = normalized_distances(g, r, rho)?;
    let far = dist.iter().copied().fold(0.0, f64::max);
    let mut counts = vec![0; g.n()];
    for sigma in 0..shift_count(eps) {
        for (v, &d) in dist.iter().enumerate() {
            let mut j = -1i64;
            loop {
                let (outer, inner) = layer_intervals(eps, sigma, j);
                if inner.contains(d) {
                    counts[v] += 1;
                    break;
                }
                if j >= 0 && outer.lo > far {
                    break;
                }
                j += 1;
            }
        }
    }
    Ok(counts)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IndependentSet {
    pub members: Vec<usize>,
    pub value: f64,
}

/// Exact maximum-measure subset of `terminals` with pairwise distance at
/// least `rho` in `g`.
pub fn brute_force_rho_is(g: &WeightedGraph, rho: f64, mu: &[f64], terminals: &[usize]) -> Result<IndependentSet> {
    if mu.len() != g.n() {
        return Err(Error::Argument(format!("measure has {} entries for {} vertices", mu.len(), g.n())));
    }
    if terminals.len() > MAX_TERMINALS {
        return Err(Error::Resource(format!(
            "{} terminals exceed the exact solver budget of {MAX_TERMINALS}",
            terminals.len()
        )));
    }
    for &t in terminals {
        g.check_vertex(t)?;
    }
    let rows: Vec<Vec<Length>> = terminals.iter().map(|&t| dijkstra(g, t).map(|sp| sp.dist)).collect::<Result<_>>()?;
    let weights: Vec<f64> = terminals.iter().map(|&t| mu[t]).collect();
    let chosen = max_separated(&weights, |a, b| rows[a][terminals[b]], rho)?;
    Ok(IndependentSet {
        value: chosen.iter().map(|&i| weights[i]).sum(),
        members: {
            let mut m: Vec<usize> = chosen.into_iter().map(|i| terminals[i]).collect();
            m.sort_unstable();
            m
        },
    })
}

/// Branch and bound over at most [`MAX_TERMINALS`] items: maximum total
/// weight of a subset whose pairwise distances are all at least `rho`.
fn max_separated<D: Fn(usize, usize) -> Length>(weights: &[f64], dist: D, rho: f64) -> Result<Vec<usize>> {
    let k = weights.len();
    if k > MAX_TERMINALS {
        return Err(Error::Resource(format!("{k} terminals exceed the exact solver budget")));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || w.is_infinite()) {
        return Err(Error::Argument(format!("measures must be finite and non-negative, got {w}")));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    // conflict[i]: positions (in `order`) too close to position i.
    let mut conflict = vec![0u32; k];
    for i in 0..k {
        for j in 0..k {
            if i != j && dist(order[i], order[j]) + SLACK < rho {
                conflict[i] |= 1 << j;
            }
        }
    }
    let w: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
    let mut suffix = vec![0.0; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + w[i];
    }
    struct Search<'a> {
        w: &'a [f64],
        conflict: &'a [u32],
        suffix: &'a [f64],
        best: f64,
        best_set: u32,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, set: u32, blocked: u32, value: f64) {
            if value > self.best {
                self.best = value;
                self.best_set = set;
            }
            if i == self.w.len() || value + self.suffix[i] <= self.best {
                return;
            }
            if blocked & (1 << i) == 0 {
                self.go(i + 1, set | 1 << i, blocked | self.conflict[i], value + self.w[i]);
            }
            self.go(i + 1, set, blocked, value);
        }
    }
    let mut s = Search { w: &w, conflict: &conflict, suffix: &suffix, best: -1.0, best_set: 0 };
    s.go(0, 0, 0, 0.0);
    let mut out: Vec<usize> = (0..k).filter(|&i| s.best_set & (1 << i) != 0).map(|i| order[i]).collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftResult {
    pub shift: usize,
    pub members: Vec<usize>,
    pub value: f64,
    pub layers: usize,
    pub max_host_width: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BakerResult {
    /// `eps` after snapping.
    pub eps: f64,
    pub shift: usize,
    pub members: Vec<usize>,
    pub value: f64,
    pub per_shift: Vec<ShiftResult>,
}

/// Portal parameter used for every layer: `eps^2 / 12`.
pub fn layer_distortion(eps: f64) -> f64 {
    eps * eps / 12.0
}

/// Returns a `(1 - eps) rho`-independent set whose measure is at least
/// `(1 - eps)` times the best `rho`-independent set.
pub fn bicriteria_is(g: &WeightedGraph, r: usize, rho: f64, eps: f64, mu: &[f64]) -> Result<BakerResult> {
    let eps = snap_eps(eps)?;
    if eps > 0.5 {
        return Err(Error::Argument(format!("eps must be at most 1/2, got {eps}")));
    }
    if mu.len() != g.n() {
        return Err(Error::Argument(format!("measure has {} entries for {} vertices", mu.len(), g.n())));
    }
    let per_shift: Vec<ShiftResult> = (0..shift_count(eps))
        .into_par_iter()
        .map(|sigma| solve_shift(g, r, rho, eps, sigma, mu))
        .collect::<Result<_>>()?;
    let best = per_shift
        .iter()
        .enumerate()
        .fold(0, |b, (i, s)| if s.value > per_shift[b].value { i } else { b });
    // The closest pair of vertices is always an edge, so a light edge is the
    // only obstruction to taking everything.
    if g.edges().iter().all(|e| e.w + SLACK >= rho) {
        return Ok(BakerResult {
            eps,
            shift: per_shift[best].shift,
            members: (0..g.n()).collect(),
            value: mu.iter().sum(),
            per_shift,
        });
    }
    Ok(BakerResult {
        eps,
        shift: per_shift[best].shift,
        members: per_shift[best].members.clone(),
        value: per_shift[best].value,
        per_shift,
    })
}

fn solve_shift(g: &WeightedGraph, r: usize, rho: f64, eps: f64, sigma: usize, mu: &[f64]) -> Result<ShiftResult> {
    let delta = layer_distortion(eps);
    let family = build_layers(g, r, rho, eps, sigma)?;
    let mut members = Vec::new();
    let mut max_host_width = 0;
    for layer in &family.layers {
        if layer.inner_members.is_empty() {
            continue;
        }
        let (chosen, width) = solve_layer(layer, mu, delta, 1.0 - eps / 2.0)?;
        members.extend(chosen);
        max_host_width = max_host_width.max(width);
    }
    members.sort_unstable();
    members.dedup();
    let value = members.iter().map(|&v| mu[v]).sum();
    Ok(ShiftResult { shift: sigma, members, value, layers: family.layers.len(), max_host_width })
}

/// Largest share of `mu(set)` kept inside the inner layers of a single
/// shift. The counting bound makes this at least `1 - eps`.
pub fn best_shift_share(g: &WeightedGraph, r: usize, rho: f64, eps: f64, mu: &[f64], set: &[usize]) -> Result<f64> {
    let total: f64 = set.iter().map(|&v| mu[v]).sum();
    if total <= 0.0 {
        return Ok(1.0);
    }
    let eps = snap_eps(eps)?;
    let mut best = 0.0f64;
    for sigma in 0..shift_count(eps) {
        let inner = build_layers(g, r, rho, eps, sigma)?.inner_union(g.n());
        let kept: f64 = set.iter().filter(|&&v| inner[v]).map(|&v| mu[v]).sum();
        best = best.max(kept / total);
    }
    Ok(best)
}

/// Embeds one layer and solves the separated-set problem on its host,
/// restricted to the canonical copies of the inner members.
fn solve_layer(layer: &Layer, mu: &[f64], delta: f64, threshold: f64) -> Result<(Vec<usize>, usize)> {
    let g = &layer.graph;
    let dist = all_pairs(g);
    let (host, width) = match build_rspd(g, 0, DEFAULT_ETA) {
        Ok(phi) => {
            let e = build_host_graph_with(g, &phi, delta, &dist)?;
            let w = e.width();
            (e.host, w)
        }
        Err(Error::Embedding(_)) if g.n() <= DEFAULT_ETA => {
            let mut edges = Vec::new();
            for a in 0..g.n() {
                for b in a + 1..g.n() {
                    edges.push((a, b, dist.get(a, b)));
                }
            }
            (WeightedGraph::new(g.n(), edges)?, g.n().saturating_sub(1))
        }
        Err(e) => return Err(e),
    };
    let local: Vec<usize> = layer
        .inner_members
        .iter()
        .map(|&v| layer.vertices.iter().position(|&x| x == v).expect("inner members are layer vertices"))
        .collect();
    if local.len() > MAX_TERMINALS {
        return Err(Error::Resource(format!("layer {} has {} terminals", layer.index, local.len())));
    }
    let rows: Vec<Vec<Length>> = local.iter().map(|&t| dijkstra(&host, t).map(|sp| sp.dist)).collect::<Result<_>>()?;
    let weights: Vec<f64> = layer.inner_members.iter().map(|&v| mu[v]).collect();
    let chosen = max_separated(&weights, |a, b| rows[a][local[b]], threshold)?;
    Ok((chosen.into_iter().map(|i| layer.inner_members[i]).collect(), width))
}

/// Smallest pairwise distance in `g` among `set`, or infinity.
pub fn min_pairwise_distance(g: &WeightedGraph, set: &[usize]) -> Result<Length> {
    let mut best = f64::INFINITY;
    for (i, &u) in set.iter().enumerate() {
        let sp = dijkstra(g, u)?;
        for &v in &set[i + 1..] {
            best = best.min(sp.dist[v]);
        }
    }
    Ok(best)
}
