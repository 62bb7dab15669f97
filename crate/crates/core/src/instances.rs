//! Instance generators: grids, subdivisions, the additive lower-bound
//! instance, the geodesic grid and its fractal, plus random trees.
//!
//! Every planar generator ships a rotation system.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{rotation_from_coordinates, Edge, Length, RootedTree, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightMode {
    Unit,
    /// Weights drawn uniformly from `[1, 10)`.
    Random(u64),
}

pub fn grid(side: usize, mode: WeightMode) -> Result<WeightedGraph> {
    grid_rect(side, side, mode)
}

/// `rows × cols` grid; vertex `(r, c)` has id `r * cols + c`.
pub fn grid_rect(rows: usize, cols: usize, mode: WeightMode) -> Result<WeightedGraph> {
    if rows < 1 || cols < 1 || rows * cols < 2 {
        return Err(Error::Argument("grid needs at least two vertices".into()));
    }
    let mut rng = match mode {
        WeightMode::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        WeightMode::Unit => None,
    };
    let mut weight = || rng.as_mut().map_or(1.0, |r| r.gen_range(1.0..10.0));
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, weight()));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, weight()));
            }
        }
    }
    let g = WeightedGraph::new(rows * cols, edges)?;
    let coords: Vec<(f64, f64)> =
        (0..rows * cols).map(|v| ((v % cols) as f64, -((v / cols) as f64))).collect();
    let rot = rotation_from_coordinates(&g, &coords);
    g.with_rotation(rot)
}

/// Replaces every edge `{u, v}` of weight `w` by a path of `k` edges, each
/// of weight `w`. Original vertices keep their ids.
pub fn subdivide(g: &WeightedGraph, k: usize) -> Result<WeightedGraph> {
    if k == 0 {
        return Err(Error::Argument("subdivision factor must be at least 1".into()));
    }
    if k == 1 {
        return Ok(g.clone());
    }
    let mut n = g.n();
    let mut edges = Vec::with_capacity(g.m() * k);
    // first[e] and last[e]: ids of the sub-edges touching e.u and e.v.
    let mut first = Vec::with_capacity(g.m());
    let mut last = Vec::with_capacity(g.m());
    let mut rot_new: Vec<Vec<usize>> = Vec::new();
    for e in g.edges() {
        let mut prev = e.u;
        first.push(edges.len());
        for i in 0..k {
            let next = if i + 1 == k { e.v } else { n + i };
            if i > 0 {
                // Internal vertex `prev` sees the previous and the next sub-edge.
                rot_new.push(vec![edges.len() - 1, edges.len()]);
            }
            edges.push(Edge { u: prev, v: next, w: e.w, structural: e.structural });
            prev = next;
        }
        last.push(edges.len() - 1);
        n += k - 1;
    }
    let rotation = g.rotation().map(|rot| {
        let mut out: Vec<Vec<usize>> = rot
            .iter()
            .enumerate()
            .map(|(v, list)| {
                list.iter()
                    .map(|&e| if g.edge(e).u == v { first[e] } else { last[e] })
                    .collect()
            })
            .collect();
        out.extend(rot_new);
        out
    });
    WeightedGraph::from_parts(n, edges, rotation, false)
}

/// Attaches `count` unit-weight pendant vertices to `host`.
pub fn star_attach(g: &WeightedGraph, host: usize, count: usize) -> Result<WeightedGraph> {
    g.check_vertex(host)?;
    let mut edges = g.edges().to_vec();
    let mut rotation = g.rotation().map(|r| r.to_vec());
    for i in 0..count {
        let id = edges.len();
        edges.push(Edge::new(host, g.n() + i, 1.0));
        if let Some(rot) = rotation.as_mut() {
            rot[host].push(id);
            rot.push(vec![id]);
        }
    }
    WeightedGraph::from_parts(g.n() + count, edges, rotation, false)
}

/// Side length of the grid used by [`lower_bound_instance`].
pub fn lower_bound_side(eps: f64) -> usize {
    (1.0 / (42.0 * eps) - 1e-9).ceil() as usize + 1
}

/// Unit grid with side `⌈1/(42ε)⌉ + 1`, 21-subdivided, padded to `n`
/// vertices with pendant vertices on vertex 0.
pub fn lower_bound_instance(eps: f64, n: usize) -> Result<WeightedGraph> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Argument(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let side = lower_bound_side(eps);
    let q = subdivide(&grid(side, WeightMode::Unit)?, 21)?;
    if n < q.n() {
        return Err(Error::Argument(format!(
            "n = {n} is smaller than the subdivided grid ({} vertices)",
            q.n()
        )));
    }
    star_attach(&q, 0, n - q.n())
}

#[derive(Clone, Debug)]
pub struct GeodesicGrid {
    pub graph: WeightedGraph,
    pub s: usize,
    pub t: usize,
    /// Edge-disjoint `s`-`t` shortest paths covering every edge.
    pub paths: Vec<Vec<usize>>,
    /// Id of grid vertex `(r, c)` at index `r * (n + 1) + c`.
    pub grid_vertex_map: Vec<usize>,
    pub n: usize,
    /// Straight-line drawing the rotation system was derived from.
    pub coords: Vec<(f64, f64)>,
}

#[derive(Serialize)]
pub struct GeodesicGridMeta<'a> {
    pub s: usize,
    pub t: usize,
    pub paths: &'a [Vec<usize>],
    pub grid_vertex_map: &'a [usize],
}

impl GeodesicGrid {
    pub fn meta(&self) -> GeodesicGridMeta<'_> {
        GeodesicGridMeta { s: self.s, t: self.t, paths: &self.paths, grid_vertex_map: &self.grid_vertex_map }
    }
}

/// Geodesic version of the `(n+1) × (n+1)` unit grid.
///
/// Row path `i` runs down column 0 to row `i`, across row `i`, then down
/// column `n`; column path `j` runs across row 0 to column `j`, down column
/// `j`, then across row `n`. Each path gets private copies of its grid
/// edges and every copy is split by a midpoint, so the graph is simple.
pub fn geodesic_grid(n: usize) -> Result<GeodesicGrid> {
    if n == 0 {
        return Err(Error::Argument("geodesic grid needs n >= 1".into()));
    }
    let side = n + 1;
    let id = |r: usize, c: usize| r * side + c;
    let mut routes: Vec<Vec<usize>> = Vec::new();
    for i in 0..side {
        let mut p = Vec::new();
        p.extend((0..=i).map(|r| id(r, 0)));
        p.extend((1..side).map(|c| id(i, c)));
        p.extend((i + 1..side).map(|r| id(r, n)));
        routes.push(p);
    }
    for j in 0..side {
        let mut p = Vec::new();
        p.extend((0..=j).map(|c| id(0, c)));
        p.extend((1..side).map(|r| id(r, j)));
        p.extend((j + 1..side).map(|c| id(n, c)));
        routes.push(p);
    }

    // Multiplicity of every grid edge, to spread the parallel copies.
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut multiplicity = std::collections::HashMap::new();
    for p in &routes {
        for w in p.windows(2) {
            *multiplicity.entry(key(w[0], w[1])).or_insert(0usize) += 1;
        }
    }
    let mut used = std::collections::HashMap::new();

    let mut coords: Vec<(f64, f64)> =
        (0..side * side).map(|v| ((v % side) as f64, -((v / side) as f64))).collect();
    let mut edges = Vec::new();
    let mut paths = Vec::new();
    for p in &routes {
        let mut path = Vec::new();
        for w in p.windows(2) {
            let k = key(w[0], w[1]);
            let total = multiplicity[&k];
            let slot = used.entry(k).or_insert(0usize);
            let offset = (*slot as f64 - (total as f64 - 1.0) / 2.0) * 0.3 / total as f64;
            *slot += 1;
            let (a, b) = (coords[k.0], coords[k.1]);
            // Perpendicular to the grid edge.
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let mid = coords.len();
            coords.push(((a.0 + b.0) / 2.0 - dy * offset, (a.1 + b.1) / 2.0 + dx * offset));
            path.push(edges.len());
            edges.push(Edge::new(w[0], mid, 1.0));
            path.push(edges.len());
            edges.push(Edge::new(mid, w[1], 1.0));
        }
        paths.push(path);
    }
    let g = WeightedGraph::from_parts(coords.len(), edges, None, false)?;
    let rot = rotation_from_coordinates(&g, &coords);
    let graph = g.with_rotation(rot)?;
    Ok(GeodesicGrid {
        graph,
        s: id(0, 0),
        t: id(n, n),
        paths,
        grid_vertex_map: (0..side * side).collect(),
        n,
        coords,
    })
}

/// One copy of the base graph inside the fractal: the edge it replaced in
/// the previous level, and the id ranges of its edges and interior vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalCopy {
    pub replaced_edge: usize,
    pub edges: std::ops::Range<usize>,
    pub interior_vertices: std::ops::Range<usize>,
}

#[derive(Clone, Debug)]
pub struct FractalInstance {
    pub graph: WeightedGraph,
    pub level: usize,
    pub s: usize,
    pub t: usize,
    pub base_edge_count: usize,
    pub path_count: usize,
    pub path_hop_length: usize,
    /// Copies of the base graph created at the last substitution level.
    pub copies: Vec<FractalCopy>,
}

pub const DEFAULT_EDGE_BUDGET: usize = 5_000_000;

/// The fractal `H_k` over the geodesic grid of parameter `n`.
pub fn fractal(n: usize, k: usize, edge_budget: usize) -> Result<FractalInstance> {
    if k == 0 {
        return Err(Error::Argument("fractal level must be at least 1".into()));
    }
    let base = geodesic_grid(n)?;
    let m = base.graph.m();
    let total = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(m));
    match total {
        Some(t) if t <= edge_budget => {}
        _ => {
            return Err(Error::Resource(format!(
                "fractal with m = {m}, k = {k} exceeds the edge budget {edge_budget}"
            )))
        }
    }
    let s_list = outer_ordered(&base.graph, &base.coords, base.s);
    let t_list = outer_ordered(&base.graph, &base.coords, base.t);

    let mut current = base.graph.clone();
    let mut copies = Vec::new();
    for _ in 1..k {
        let (next, level_copies) = substitute(&current, &base, &s_list, &t_list)?;
        current = next;
        copies = level_copies;
    }
    if k == 1 {
        copies = vec![FractalCopy {
            replaced_edge: 0,
            edges: 0..m,
            interior_vertices: 0..base.graph.n(),
        }];
    }
    Ok(FractalInstance {
        graph: current,
        level: k,
        s: base.s,
        t: base.t,
        base_edge_count: m,
        path_count: 2 * (n + 1),
        path_hop_length: 4 * n,
        copies,
    })
}

/// Rotation at `v` started right after its widest angular gap, which for
/// the corners `s` and `t` is the outer face.
fn outer_ordered(g: &WeightedGraph, coords: &[(f64, f64)], v: usize) -> Vec<usize> {
    let rot = &g.rotation().expect("geodesic grid has a rotation")[v];
    let angle = |e: usize| {
        let x = g.edge(e).other(v);
        (coords[x].1 - coords[v].1).atan2(coords[x].0 - coords[v].0)
    };
    let k = rot.len();
    let tau = std::f64::consts::TAU;
    let start = (0..k)
        .max_by(|&i, &j| {
            let gap = |i: usize| (angle(rot[i]) - angle(rot[(i + k - 1) % k])).rem_euclid(tau);
            let (gi, gj) = (gap(i), gap(j));
            gi.total_cmp(&gj).then(j.cmp(&i))
        })
        .expect("corner has edges");
    (0..k).map(|j| rot[(start + j) % k]).collect()
}

fn substitute(
    host: &WeightedGraph,
    base: &GeodesicGrid,
    s_list: &[usize],
    t_list: &[usize],
) -> Result<(WeightedGraph, Vec<FractalCopy>)> {
    let bg = &base.graph;
    let m = bg.m();
    let interior = bg.n() - 2;
    let mut n = host.n();
    let mut edges = Vec::with_capacity(host.m() * m);
    let mut copies = Vec::with_capacity(host.m());
    let host_rot = host.rotation().expect("fractal levels carry rotations");
    let base_rot = bg.rotation().expect("geodesic grid has a rotation");
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); host.n()];
    // Replacement lists for each host edge at its endpoints.
    let mut at_s: Vec<Vec<usize>> = Vec::with_capacity(host.m());
    let mut at_t: Vec<Vec<usize>> = Vec::with_capacity(host.m());
    for (eid, e) in host.edges().iter().enumerate() {
        let (a, b) = (e.u.min(e.v), e.u.max(e.v));
        let first_vertex = n;
        let map = |x: usize| -> usize {
            if x == base.s {
                a
            } else if x == base.t {
                b
            } else {
                // Interior ids skip s and t.
                let shift = (x > base.s) as usize + (x > base.t) as usize;
                first_vertex + x - shift
            }
        };
        let first_edge = edges.len();
        for be in bg.edges() {
            edges.push(Edge::new(map(be.u), map(be.v), e.w * be.w));
        }
        for x in 0..bg.n() {
            if x != base.s && x != base.t {
                rotation.push(base_rot[x].iter().map(|&id| first_edge + id).collect());
            }
        }
        at_s.push(s_list.iter().map(|&id| first_edge + id).collect());
        at_t.push(t_list.iter().map(|&id| first_edge + id).collect());
        copies.push(FractalCopy {
            replaced_edge: eid,
            edges: first_edge..first_edge + m,
            interior_vertices: first_vertex..first_vertex + interior,
        });
        n += interior;
    }
    for (v, list) in host_rot.iter().enumerate() {
        for &eid in list {
            let e = host.edge(eid);
            let replacement = if v == e.u.min(e.v) { &at_s[eid] } else { &at_t[eid] };
            rotation[v].extend_from_slice(replacement);
        }
    }
    Ok((WeightedGraph::from_parts(n, edges, Some(rotation), false)?, copies))
}

/// Random recursive tree with weights uniform in `[1, 10)`, rooted at 0,
/// with vertex labels shuffled.
pub fn random_tree(n: usize, seed: u64) -> Result<RootedTree> {
    if n == 0 {
        return Err(Error::Argument("empty tree".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels[1..].shuffle(&mut rng);
    let mut edges = Vec::with_capacity(n - 1);
    for i in 1..n {
        let p = rng.gen_range(0..i);
        edges.push((labels[i], labels[p], rng.gen_range(1.0..10.0)));
    }
    RootedTree::from_edges(n, 0, &edges)
}

pub fn path_tree(n: usize, w: Length) -> Result<RootedTree> {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i, w)).collect();
    RootedTree::from_edges(n, 0, &edges)
}

pub fn star_tree(n: usize, w: Length) -> Result<RootedTree> {
    let edges: Vec<_> = (1..n).map(|i| (0, i, w)).collect();
    RootedTree::from_edges(n, 0, &edges)
}

/// Spine of `spine` vertices, each carrying `legs` pendant vertices.
pub fn caterpillar(spine: usize, legs: usize, w: Length) -> Result<RootedTree> {
    let n = spine * (legs + 1);
    let mut edges = Vec::new();
    for i in 1..spine {
        edges.push((i - 1, i, w));
    }
    for i in 0..spine {
        for j in 0..legs {
            edges.push((i, spine + i * legs + j, w));
        }
    }
    RootedTree::from_edges(n, 0, &edges)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs, diameter, dijkstra, is_planar_embedding};

    #[test]
    fn small_grid() {
        let g = grid(2, WeightMode::Unit).unwrap();
        assert_eq!((g.n(), g.m()), (4, 4));
        assert!(is_planar_embedding(&g).unwrap());
        let a = grid(5, WeightMode::Random(3)).unwrap();
        let b = grid(5, WeightMode::Random(3)).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn subdivision_of_edge() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let s = subdivide(&g, 4).unwrap();
        assert_eq!((s.n(), s.m()), (5, 4));
        assert_eq!(dijkstra(&s, 0).unwrap().dist[1], 4.0);
        assert_eq!(subdivide(&g, 1).unwrap().edges(), g.edges());
    }

    #[test]
    fn subdivided_grid_stays_planar() {
        let g = subdivide(&grid(3, WeightMode::Unit).unwrap(), 3).unwrap();
        assert!(is_planar_embedding(&g).unwrap());
    }

    #[test]
    fn lower_bound_sizes() {
        assert_eq!(lower_bound_side(1.0 / 42.0), 2);
        let g = lower_bound_instance(1.0 / 42.0, 84).unwrap();
        assert_eq!(g.n(), 84);
        assert_eq!(diameter(&g).unwrap(), 42.0);
        assert!(lower_bound_instance(1.0 / 42.0, 80).is_err());
        let g = lower_bound_instance(1.0 / 42.0, 100).unwrap();
        assert!(diameter(&g).unwrap() <= 44.0);
        assert!(is_planar_embedding(&g).unwrap());
    }

    #[test]
    fn star_attach_on_singleton() {
        let g = WeightedGraph::new(1, []).unwrap();
        let s = star_attach(&g, 0, 3).unwrap();
        assert_eq!((s.n(), s.m()), (4, 3));
        assert!(s.edges().iter().all(|e| e.u == 0));
        assert_eq!(star_attach(&g, 0, 0).unwrap().n(), 1);
    }

    #[test]
    fn geodesic_grid_two() {
        let q = geodesic_grid(2).unwrap();
        assert_eq!(q.graph.m(), 48);
        assert_eq!(q.paths.len(), 6);
        assert!(is_planar_embedding(&q.graph).unwrap());
        let d = all_pairs(&q.graph);
        assert_eq!(d.get(q.s, q.t), 8.0);
    }

    #[test]
    fn fractal_levels() {
        let f1 = fractal(2, 1, DEFAULT_EDGE_BUDGET).unwrap();
        assert_eq!(f1.graph.m(), 48);
        let f2 = fractal(2, 2, DEFAULT_EDGE_BUDGET).unwrap();
        assert_eq!(f2.graph.m(), 2304);
        assert_eq!(f2.copies.len(), 48);
        assert!(is_planar_embedding(&f2.graph).unwrap());
        assert_eq!(dijkstra(&f2.graph, f2.s).unwrap().dist[f2.t], 64.0);
        assert!(matches!(fractal(2, 5, 1000), Err(Error::Resource(_))));
    }

    #[test]
    fn random_trees_are_reproducible() {
        assert_eq!(random_tree(50, 9).unwrap(), random_tree(50, 9).unwrap());
        assert_eq!(caterpillar(4, 2, 1.0).unwrap().n(), 12);
    }
}
