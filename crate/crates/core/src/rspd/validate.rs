use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Rspd;
use crate::graph::{dijkstra, WeightedGraph};

/// Depth allowed for a decomposition of a graph on `n` vertices.
pub fn depth_bound(n: usize) -> f64 {
    4.0 * (n.max(2) as f64).log2() + 8.0
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RspdReport {
    pub depth: usize,
    pub depth_bound: f64,
    pub node_count: usize,
    pub max_boundary_paths: usize,
    pub p1: bool,
    pub p2a: bool,
    pub p2b: bool,
    pub p2c: bool,
    pub leaves_cover: bool,
    pub failures: Vec<String>,
}

impl RspdReport {
    pub fn valid(&self) -> bool {
        self.p1 && self.p2a && self.p2b && self.p2c && self.leaves_cover
    }
}

/// Checks the structural properties of a decomposition against `g`.
pub fn validate_rspd(g: &WeightedGraph, phi: &Rspd) -> RspdReport {
    let n = g.n();
    let mut rep = RspdReport {
        depth: phi.height(),
        depth_bound: depth_bound(n),
        node_count: phi.nodes.len(),
        max_boundary_paths: phi.nodes.iter().map(|x| x.boundary.len()).max().unwrap_or(0),
        p1: true,
        p2a: true,
        p2b: true,
        p2c: true,
        leaves_cover: true,
        failures: Vec::new(),
    };
    if phi.n() != n {
        rep.p2b = false;
        rep.failures.push(format!("decomposition has {} vertices, graph has {n}", phi.n()));
        return rep;
    }

    if rep.depth as f64 > rep.depth_bound {
        rep.p1 = false;
        rep.failures.push(format!("depth {} exceeds {:.2}", rep.depth, rep.depth_bound));
    }
    if rep.node_count > 4 * n.max(1) {
        rep.p1 = false;
        rep.failures.push(format!("{} nodes for {n} vertices", rep.node_count));
    }
    for (id, x) in phi.nodes.iter().enumerate() {
        if let Some((l, r)) = x.children {
            for c in [l, r] {
                if phi.nodes[c].parent != Some(id) || phi.nodes[c].depth != x.depth + 1 {
                    rep.p1 = false;
                    rep.failures.push(format!("node {c} is not linked to its parent {id}"));
                }
            }
        }
    }

    for (id, x) in phi.nodes.iter().enumerate() {
        if x.boundary.len() > phi.eta {
            rep.p2a = false;
            rep.failures.push(format!("node {id} has {} boundary paths", x.boundary.len()));
        }
    }

    let pieces: Vec<Vec<usize>> = (0..phi.nodes.len()).map(|a| phi.piece_vertices(a)).collect();
    if pieces[0].len() != n {
        rep.p2b = false;
        rep.failures.push("root piece is not the whole graph".into());
    }
    for (id, x) in phi.nodes.iter().enumerate() {
        match x.children {
            None => {
                let internal: Vec<usize> =
                    pieces[id].iter().copied().filter(|&v| !phi.on_boundary(id, v)).collect();
                let mut stored = x.internal.clone();
                stored.sort_unstable();
                if internal.len() > phi.eta || stored != internal {
                    rep.p2b = false;
                    rep.failures.push(format!("leaf {id} has {} internal vertices", internal.len()));
                }
            }
            Some((l, r)) => {
                let mut union: Vec<usize> = pieces[l].iter().chain(&pieces[r]).copied().collect();
                union.sort_unstable();
                union.dedup();
                if union != pieces[id] {
                    rep.p2b = false;
                    rep.failures.push(format!("children of node {id} do not partition its piece"));
                }
                let shared = pieces[l].iter().filter(|v| pieces[r].binary_search(v).is_ok());
                for &v in shared {
                    if !(phi.on_boundary(l, v) && phi.on_boundary(r, v)) {
                        rep.p2b = false;
                        rep.failures.push(format!("children of node {id} share non-boundary vertex {v}"));
                        break;
                    }
                }
            }
        }
    }

    // Removing the boundary paths must cut the internal vertices off from
    // everything outside the piece.
    let mut in_piece = vec![false; n];
    let mut blocked = vec![false; n];
    let mut seen = vec![false; n];
    for (id, piece) in pieces.iter().enumerate() {
        for &v in piece {
            in_piece[v] = true;
        }
        let boundary = phi.boundary_path_vertices(id);
        for &v in &boundary {
            blocked[v] = true;
        }
        let mut queue: VecDeque<usize> = piece.iter().copied().filter(|&v| !blocked[v]).collect();
        let mut touched: Vec<usize> = queue.iter().copied().collect();
        for &v in &touched {
            seen[v] = true;
        }
        let mut escaped = None;
        while let Some(v) = queue.pop_front() {
            if !in_piece[v] {
                escaped = Some(v);
                break;
            }
            for &(w, _) in g.neighbors(v) {
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    touched.push(w);
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = escaped {
            rep.p2c = false;
            rep.failures.push(format!("vertex {v} outside node {id} is reachable avoiding its boundary"));
        }
        for v in touched {
            seen[v] = false;
        }
        for &v in piece {
            in_piece[v] = false;
        }
        for v in boundary {
            blocked[v] = false;
        }
    }

    let leaves = phi.leaves();
    let mut leaves_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &leaf in &leaves {
        for &v in &pieces[leaf] {
            leaves_of[v].push(leaf);
        }
    }
    if let Some(v) = (0..n).find(|&v| leaves_of[v].is_empty()) {
        rep.leaves_cover = false;
        rep.failures.push(format!("vertex {v} is in no leaf"));
    }
    for e in g.edges() {
        if !leaves_of[e.u].iter().any(|l| leaves_of[e.v].contains(l)) {
            rep.leaves_cover = false;
            rep.failures.push(format!("edge {}-{} is in no leaf", e.u, e.v));
            break;
        }
    }
    rep
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SeparationReport {
    pub pairs: usize,
    pub violations: usize,
    pub first_violation: Option<(usize, usize)>,
}

/// Samples vertex pairs on boundary paths of distinct leaves and checks that
/// the shortest path between them meets the boundary of every node on the
/// tree path between the leaves, in order. At the lowest common ancestor
/// the separator paths of its split count as boundary.
pub fn separation_check(g: &WeightedGraph, phi: &Rspd, pairs: usize, seed: u64) -> SeparationReport {
    let mut rep = SeparationReport::default();
    let leaves: Vec<usize> =
        phi.leaves().into_iter().filter(|&l| !phi.nodes[l].boundary.is_empty()).collect();
    if leaves.len() < 2 {
        return rep;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while rep.pairs < pairs && attempts < 50 * pairs {
        attempts += 1;
        let a = *leaves.choose(&mut rng).expect("leaves is nonempty");
        let b = *leaves.choose(&mut rng).expect("leaves is nonempty");
        if a == b {
            continue;
        }
        let qa = phi.boundary_path_vertices(a);
        let qb = phi.boundary_path_vertices(b);
        let u = qa[rng.gen_range(0..qa.len())];
        let v = qb[rng.gen_range(0..qb.len())];
        let Ok(sp) = dijkstra(g, u) else { continue };
        let path = sp.path_to(v);
        if path.is_empty() {
            continue;
        }
        rep.pairs += 1;
        let chain = phi.path_nodes(a, b);
        let lca = phi.lca(a, b);
        let mut at = 0;
        let mut ok = true;
        for &lambda in &chain {
            let hit = |x: usize| {
                if lambda == lca {
                    phi.on_extended_boundary(lambda, x)
                } else {
                    phi.on_boundary(lambda, x)
                }
            };
            match (at..path.len()).find(|&i| hit(path[i])) {
                Some(i) => at = i,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            rep.violations += 1;
            rep.first_violation.get_or_insert((u, v));
        }
    }
    rep
}
