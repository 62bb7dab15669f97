//! Distortion measurements shared by the pipelines and the test suite.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::emulator_size_bound;
use crate::emulator::Emulator;
use crate::error::Result;
use crate::graph::{
    dijkstra, hop_bounded_distances, validate_tree_decomposition, DistanceMatrix, Length, RootedTree,
    WeightedGraph, TOLERANCE,
};
use crate::portal::{measurement_sources, OneToManyEmbedding, OneToOneEmbedding};
use crate::stochastic::RootedEmbedding;

/// Trees up to this size are verified on all pairs.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 400;

/// Pairs sampled for larger trees.
pub const SAMPLED_PAIRS: usize = 20_000;

/// A map from source vertices to sets of host vertices.
pub trait HostEmbedding: Sync {
    fn host(&self) -> &WeightedGraph;
    fn images(&self, v: usize) -> &[usize];
}

impl HostEmbedding for OneToManyEmbedding {
    fn host(&self) -> &WeightedGraph {
        &self.host
    }
    fn images(&self, v: usize) -> &[usize] {
        &self.copies[v]
    }
}

impl HostEmbedding for OneToOneEmbedding {
    fn host(&self) -> &WeightedGraph {
        &self.host
    }
    fn images(&self, v: usize) -> &[usize] {
        std::slice::from_ref(&self.map[v])
    }
}

impl HostEmbedding for RootedEmbedding {
    fn host(&self) -> &WeightedGraph {
        &self.host
    }
    fn images(&self, v: usize) -> &[usize] {
        std::slice::from_ref(&self.map[v])
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MultiplicativeReport {
    pub pairs: usize,
    pub exhaustive: bool,
    /// Largest `d_H / d_G` over pairs with `d_G > 0`, worst images.
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Largest and smallest `d_H - d_G` over the same pairs.
    pub max_gap: Length,
    pub min_gap: Length,
}

/// Multiplicative distortion over all pairs, or over the pairs of an evenly
/// spread set of sources when `n * n` exceeds `pair_budget`.
pub fn multiplicative_report<E: HostEmbedding>(
    g: &WeightedGraph,
    e: &E,
    dist: &DistanceMatrix,
    pair_budget: usize,
) -> Result<MultiplicativeReport> {
    let n = g.n();
    let (sources, exhaustive) = measurement_sources(n, pair_budget);
    let rows: Vec<(usize, f64, f64, Length, Length)> = sources
        .par_iter()
        .map(|&u| -> Result<_> {
            let mut hi = vec![f64::NEG_INFINITY; n];
            let mut lo = vec![f64::INFINITY; n];
            for &x in e.images(u) {
                let sp = dijkstra(e.host(), x)?;
                for v in 0..n {
                    for &y in e.images(v) {
                        hi[v] = hi[v].max(sp.dist[y]);
                        lo[v] = lo[v].min(sp.dist[y]);
                    }
                }
            }
            let (mut pairs, mut max_ratio, mut sum) = (0, 1.0f64, 0.0);
            let (mut max_gap, mut min_gap) = (0.0f64, 0.0f64);
            for v in 0..n {
                let d = dist.get(u, v);
                if v == u || d <= 0.0 {
                    continue;
                }
                pairs += 1;
                max_ratio = max_ratio.max(hi[v] / d);
                sum += hi[v] / d;
                max_gap = max_gap.max(hi[v] - d);
                min_gap = min_gap.min(lo[v] - d);
            }
            Ok((pairs, max_ratio, sum, max_gap, min_gap))
        })
        .collect::<Result<_>>()?;
    let mut rep = MultiplicativeReport { exhaustive, max_ratio: 1.0, ..Default::default() };
    let mut sum = 0.0;
    for (p, r, s, hi, lo) in rows {
        rep.pairs += p;
        rep.max_ratio = rep.max_ratio.max(r);
        rep.max_gap = rep.max_gap.max(hi);
        rep.min_gap = rep.min_gap.min(lo);
        sum += s;
    }
    rep.mean_ratio = if rep.pairs > 0 { sum / rep.pairs as f64 } else { 1.0 };
    Ok(rep)
}

/// Mean over positive-weight edges `{u, v}` of `d_H(f(u), f(v)) / w(u, v)`,
/// taking the worst pair of images.
pub fn average_edge_distortion<E: HostEmbedding>(g: &WeightedGraph, e: &E) -> Result<f64> {
    let rows: Vec<(usize, f64)> = (0..g.n())
        .into_par_iter()
        .map(|u| -> Result<_> {
            let targets: Vec<(usize, Length)> =
                g.metric_neighbors(u).filter(|&(v, w)| v > u && w > 0.0).collect();
            if targets.is_empty() {
                return Ok((0, 0.0));
            }
            let mut worst = vec![0.0f64; targets.len()];
            for &x in e.images(u) {
                let sp = dijkstra(e.host(), x)?;
                for (i, &(v, w)) in targets.iter().enumerate() {
                    for &y in e.images(v) {
                        worst[i] = worst[i].max(sp.dist[y] / w);
                    }
                }
            }
            Ok((targets.len(), worst.iter().sum()))
        })
        .collect::<Result<_>>()?;
    let (count, sum) = rows.into_iter().fold((0, 0.0), |(c, s), (k, x)| (c + k, s + x));
    Ok(if count == 0 { 1.0 } else { sum / count as f64 })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EmulatorCheck {
    pub n: usize,
    pub hop_bound: usize,
    pub width: usize,
    pub edges: usize,
    pub size_bound: f64,
    pub decomposition_valid: bool,
    pub pairs: usize,
    pub exhaustive: bool,
    /// Largest `|d^(h)_K - d_T|` over checked pairs.
    pub max_error: Length,
    /// Largest `|d_K - d_T|` with unlimited hops.
    pub max_unbounded_error: Length,
}

impl EmulatorCheck {
    pub fn passed(&self) -> bool {
        self.decomposition_valid
            && self.width <= self.hop_bound
            && self.max_error <= TOLERANCE
            && self.max_unbounded_error <= TOLERANCE
            && self.edges as f64 <= self.size_bound
    }
}

/// Compares hop-bounded emulator distances with tree distances on all pairs
/// for small trees and on [`SAMPLED_PAIRS`] pairs otherwise.
pub fn verify_emulator(t: &RootedTree, k: &Emulator) -> Result<EmulatorCheck> {
    let n = t.n();
    let oracle = t.oracle();
    let (sources, exhaustive) = if n <= EXHAUSTIVE_PAIR_LIMIT {
        ((0..n).collect(), true)
    } else {
        measurement_sources(n, SAMPLED_PAIRS)
    };
    let td = validate_tree_decomposition(&k.graph, &k.decomposition);
    let errors: Vec<(Length, Length)> = sources
        .par_iter()
        .map(|&u| -> Result<_> {
            let bounded = hop_bounded_distances(&k.graph, u, k.hop_bound)?;
            let full = dijkstra(&k.graph, u)?.dist;
            let mut worst = (0.0f64, 0.0f64);
            for v in 0..n {
                let d = oracle.distance(u, v);
                worst.0 = worst.0.max((bounded[v] - d).abs());
                worst.1 = worst.1.max((full[v] - d).abs());
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(EmulatorCheck {
        n,
        hop_bound: k.hop_bound,
        width: k.decomposition.width(),
        edges: k.graph.m(),
        size_bound: emulator_size_bound(n),
        decomposition_valid: td.valid(),
        pairs: sources.len() * n,
        exhaustive,
        max_error: errors.iter().map(|e| e.0).fold(0.0, f64::max),
        max_unbounded_error: errors.iter().map(|e| e.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::build_emulator;
    use crate::graph::all_pairs;
    use crate::instances::{path_tree, random_tree};

    #[test]
    fn identity_has_ratio_one() {
        let g = crate::instances::grid(4, crate::instances::WeightMode::Random(1)).unwrap();
        let id = OneToOneEmbedding { host: g.clone(), map: (0..g.n()).collect() };
        let rep = multiplicative_report(&g, &id, &all_pairs(&g), 1000).unwrap();
        assert!((rep.max_ratio - 1.0).abs() < 1e-12 && rep.max_gap.abs() < 1e-12);
        let unit = crate::instances::grid(4, crate::instances::WeightMode::Unit).unwrap();
        let id = OneToOneEmbedding { host: unit.clone(), map: (0..unit.n()).collect() };
        assert!((average_edge_distortion(&unit, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubled_host_has_edge_distortion_two() {
        let g = crate::instances::grid(3, crate::instances::WeightMode::Unit).unwrap();
        let id = OneToOneEmbedding { host: g.scaled(2.0), map: (0..g.n()).collect() };
        assert!((average_edge_distortion(&g, &id).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_stretched_pair() {
        // Path 0 - 1 - 2 with the host stretching the edge {1, 2} by 3.
        let g = WeightedGraph::new(3, [(0, 1, 2.0), (1, 2, 2.0)]).unwrap();
        let h = WeightedGraph::new(3, [(0, 1, 2.0), (1, 2, 5.0)]).unwrap();
        let e = OneToOneEmbedding { host: h, map: vec![0, 1, 2] };
        let rep = multiplicative_report(&g, &e, &all_pairs(&g), 100).unwrap();
        assert!((rep.max_ratio - 2.5).abs() < 1e-12);
        assert!((rep.max_gap - 3.0).abs() < 1e-12);
    }

    #[test]
    fn emulators_verify() {
        for t in [path_tree(10, 1.0).unwrap(), random_tree(60, 3).unwrap()] {
            let k = build_emulator(&t);
            let check = verify_emulator(&t, &k).unwrap();
            assert!(check.exhaustive && check.passed(), "{check:?}");
        }
    }
}
