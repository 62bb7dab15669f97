//! Rooted shortest-path decompositions of planar graphs.
//!
//! The graph is triangulated and a shortest-path tree `T_r` is fixed. The
//! edges outside `T_r` form a spanning tree of the dual; a piece is a
//! connected set of faces in that dual tree, and cutting one dual edge
//! `{a, b}` splits a piece along the cycle `T_r[r, a] + {a, b} + T_r[r, b]`.
//! A piece is stored by its faces and by the endpoints `B` of its boundary
//! `r`-paths; membership on a boundary path is an ancestor query in `T_r`.

mod triangulate;
mod validate;

pub use triangulate::triangulate;
pub use validate::{depth_bound, separation_check, validate_rspd, RspdReport, SeparationReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{dijkstra, faces, RootedTree, TreeOracle, WeightedGraph};

pub const DEFAULT_ETA: usize = 4;
pub const MIN_ETA: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct RspdNode {
    /// Endpoints of the boundary `r`-paths; none is an ancestor of another.
    pub boundary: Vec<usize>,
    /// Endpoints of the dual edge that split this node (internal nodes only).
    pub separator: Vec<usize>,
    /// Faces of the triangulation forming the piece.
    pub faces: Vec<usize>,
    /// Internal vertices; materialized for leaves only.
    pub internal: Vec<usize>,
    pub children: Option<(usize, usize)>,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Boundary edges of the piece (non-tree edges to faces outside it).
    #[serde(skip)]
    cuts: Vec<usize>,
}

impl RspdNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Rspd {
    pub root_vertex: usize,
    pub sp_tree: RootedTree,
    pub eta: usize,
    pub nodes: Vec<RspdNode>,
    oracle: TreeOracle,
    /// Vertex triples of the triangulation's faces.
    face_vertices: Vec<Vec<usize>>,
    n: usize,
}

impl Rspd {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn oracle(&self) -> &TreeOracle {
        &self.oracle
    }

    pub fn face_vertices(&self, f: usize) -> &[usize] {
        &self.face_vertices[f]
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|x| x.depth).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.preorder().into_iter().filter(|&a| self.nodes[a].is_leaf()).collect()
    }

    /// Node ids in preorder, left child first.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(a) = stack.pop() {
            order.push(a);
            if let Some((l, r)) = self.nodes[a].children {
                stack.push(r);
                stack.push(l);
            }
        }
        order
    }

    /// True when `v` lies on one of the node's boundary paths.
    pub fn on_boundary(&self, node: usize, v: usize) -> bool {
        self.nodes[node].boundary.iter().any(|&b| self.oracle.is_ancestor(v, b))
    }

    /// True when `v` lies on a boundary path or on a separator path of the node.
    pub fn on_extended_boundary(&self, node: usize, v: usize) -> bool {
        let x = &self.nodes[node];
        x.boundary.iter().chain(&x.separator).any(|&b| self.oracle.is_ancestor(v, b))
    }

    /// Vertices of all boundary paths of the node, sorted.
    pub fn boundary_path_vertices(&self, node: usize) -> Vec<usize> {
        self.path_union(&self.nodes[node].boundary)
    }

    fn path_union(&self, ends: &[usize]) -> Vec<usize> {
        let mut out = Vec::new();
        for &b in ends {
            let mut x = Some(b);
            while let Some(v) = x {
                out.push(v);
                x = self.sp_tree.parent(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `V(X_α)`: vertices of the piece's faces and of its boundary paths.
    pub fn piece_vertices(&self, node: usize) -> Vec<usize> {
        if node == 0 {
            return (0..self.n).collect();
        }
        let mut out = self.boundary_path_vertices(node);
        for &f in &self.nodes[node].faces {
            out.extend_from_slice(&self.face_vertices[f]);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn internal_vertices(&self, node: usize) -> Vec<usize> {
        if self.nodes[node].is_leaf() {
            return self.nodes[node].internal.clone();
        }
        self.piece_vertices(node).into_iter().filter(|&v| !self.on_boundary(node, v)).collect()
    }

    /// Node sequence on the tree path from `a` to `b`.
    pub fn path_nodes(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut left = Vec::new();
        let mut right = Vec::new();
        while self.nodes[x].depth > self.nodes[y].depth {
            left.push(x);
            x = self.nodes[x].parent.expect("deeper node has a parent");
        }
        while self.nodes[y].depth > self.nodes[x].depth {
            right.push(y);
            y = self.nodes[y].parent.expect("deeper node has a parent");
        }
        while x != y {
            left.push(x);
            right.push(y);
            x = self.nodes[x].parent.expect("non-root node has a parent");
            y = self.nodes[y].parent.expect("non-root node has a parent");
        }
        left.push(x);
        left.extend(right.into_iter().rev());
        left
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        let path = self.path_nodes(a, b);
        *path.iter().min_by_key(|&&x| self.nodes[x].depth).expect("path is nonempty")
    }

    /// For each vertex, the leaf with the smallest preorder index whose piece
    /// contains it.
    pub fn home_leaves(&self) -> Vec<usize> {
        let mut home = vec![usize::MAX; self.n];
        for leaf in self.leaves() {
            for v in self.piece_vertices(leaf) {
                if home[v] == usize::MAX {
                    home[v] = leaf;
                }
            }
        }
        home
    }

    /// Leaf whose materialized internal set contains each vertex, if any.
    pub fn internal_owner(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.n];
        for leaf in self.leaves() {
            for &v in &self.nodes[leaf].internal {
                owner[v] = Some(leaf);
            }
        }
        owner
    }

    /// The decomposition tree as a weighted tree over node ids (unit weights).
    pub fn node_tree(&self) -> RootedTree {
        let parent = self.nodes.iter().map(|x| x.parent).collect();
        RootedTree::new(0, parent, vec![1.0; self.nodes.len()]).expect("decomposition is a tree")
    }
}

/// Planar structure shared by every split.
struct Frame<'a> {
    tri: &'a WeightedGraph,
    oracle: &'a TreeOracle,
    face_vertices: &'a [Vec<usize>],
    /// `(face, face)` on the two sides of each non-tree edge; `None` for tree edges.
    dual: Vec<Option<(usize, usize)>>,
    /// Dual neighbours of each face: `(face, edge id)`.
    dual_adj: Vec<Vec<(usize, usize)>>,
}

impl Frame<'_> {
    fn reduce(&self, cuts: &[usize]) -> Vec<usize> {
        let mut ends: Vec<usize> = cuts
            .iter()
            .flat_map(|&e| {
                let x = self.tri.edge(e);
                [x.u, x.v]
            })
            .collect();
        ends.sort_unstable();
        ends.dedup();
        let keep: Vec<usize> = ends
            .iter()
            .copied()
            .filter(|&a| !ends.iter().any(|&b| b != a && self.oracle.is_ancestor(a, b)))
            .collect();
        keep
    }

    fn on_paths(&self, ends: &[usize], v: usize) -> bool {
        ends.iter().any(|&b| self.oracle.is_ancestor(v, b))
    }

    /// Internal vertices of a face set with the given boundary endpoints.
    fn internal(&self, faces: &[usize], ends: &[usize], stamp: &mut [u32], tick: u32) -> Vec<usize> {
        let mut out = Vec::new();
        for &f in faces {
            for &v in &self.face_vertices[f] {
                if stamp[v] != tick {
                    stamp[v] = tick;
                    if !self.on_paths(ends, v) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    fn internal_count(&self, faces: &[usize], ends: &[usize], stamp: &mut [u32], tick: u32) -> usize {
        let mut count = 0;
        for &f in faces {
            for &v in &self.face_vertices[f] {
                if stamp[v] != tick {
                    stamp[v] = tick;
                    if !self.on_paths(ends, v) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// The face of `S` on the inside of a cut edge.
    fn attachment(&self, e: usize, in_piece: &[bool]) -> usize {
        let (a, b) = self.dual[e].expect("cut edges are non-tree edges");
        if in_piece[a] {
            a
        } else {
            b
        }
    }
}

/// Builds a decomposition with at most `eta` boundary paths per node.
pub fn build_rspd(g: &WeightedGraph, r: usize, eta: usize) -> Result<Rspd> {
    g.check_vertex(r)?;
    if eta < MIN_ETA {
        return Err(Error::Argument(format!("eta must be at least {MIN_ETA}, got {eta}")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.n();
    let sp = dijkstra(g, r)?;
    let sp_tree = sp.tree()?;
    let oracle = sp_tree.oracle();

    if n <= eta || n < 3 {
        let node = RspdNode {
            boundary: Vec::new(),
            separator: Vec::new(),
            faces: Vec::new(),
            internal: (0..n).collect(),
            children: None,
            parent: None,
            depth: 0,
            cuts: Vec::new(),
        };
        return Ok(Rspd { root_vertex: r, sp_tree, eta, nodes: vec![node], oracle, face_vertices: Vec::new(), n });
    }

    let tri = triangulate(g)?;
    let fs = faces(&tri)?;
    let face_vertices: Vec<Vec<usize>> = fs
        .faces
        .iter()
        .map(|f| f.darts.iter().map(|&d| crate::graph::dart_tail(&tri, d)).collect())
        .collect();
    let mut is_tree_edge = vec![false; tri.m()];
    for v in 0..n {
        if let Some(p) = sp_tree.parent(v) {
            let e = tri.find_edge(v, p).expect("tree edge exists in the triangulation");
            is_tree_edge[e] = true;
        }
    }
    let mut dual = vec![None; tri.m()];
    let mut dual_adj = vec![Vec::new(); fs.faces.len()];
    for e in 0..tri.m() {
        if is_tree_edge[e] {
            continue;
        }
        let (a, b) = (fs.face_of_dart[2 * e], fs.face_of_dart[2 * e + 1]);
        if a == b {
            return Err(Error::Embedding("non-tree edge bounds a single face".into()));
        }
        dual[e] = Some((a, b));
        dual_adj[a].push((b, e));
        dual_adj[b].push((a, e));
    }
    let frame = Frame { tri: &tri, oracle: &oracle, face_vertices: &face_vertices, dual, dual_adj };

    let f_count = face_vertices.len();
    let mut nodes = vec![RspdNode {
        boundary: Vec::new(),
        separator: Vec::new(),
        faces: (0..f_count).collect(),
        internal: Vec::new(),
        children: None,
        parent: None,
        depth: 0,
        cuts: Vec::new(),
    }];
    let mut stamp = vec![0u32; n];
    let mut tick = 0u32;
    let mut in_piece = vec![false; f_count];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        let piece = nodes[id].faces.clone();
        let cuts = nodes[id].cuts.clone();
        let ends = nodes[id].boundary.clone();
        tick += 1;
        let internal = frame.internal(&piece, &ends, &mut stamp, tick);
        if internal.len() <= eta {
            nodes[id].internal = internal;
            continue;
        }
        for &f in &piece {
            in_piece[f] = true;
        }
        let split = best_split(&frame, &piece, &cuts, &in_piece, eta, &mut stamp, &mut tick);
        for &f in &piece {
            in_piece[f] = false;
        }
        let Some(split) = split else {
            return Err(Error::Embedding(format!(
                "no admissible split for a piece with {} faces and {} cuts",
                piece.len(),
                cuts.len()
            )));
        };
        let depth = nodes[id].depth + 1;
        let e = tri.edge(split.edge);
        nodes[id].separator = {
            let mut s = vec![e.u, e.v];
            s.sort_unstable();
            s
        };
        let mut child_ids = [0; 2];
        for (k, (faces, cuts)) in [(split.left, split.left_cuts), (split.right, split.right_cuts)]
            .into_iter()
            .enumerate()
        {
            child_ids[k] = nodes.len();
            let boundary = frame.reduce(&cuts);
            nodes.push(RspdNode {
                boundary,
                separator: Vec::new(),
                faces,
                internal: Vec::new(),
                children: None,
                parent: Some(id),
                depth,
                cuts,
            });
        }
        nodes[id].children = Some((child_ids[0], child_ids[1]));
        stack.push(child_ids[1]);
        stack.push(child_ids[0]);
    }
    Ok(Rspd { root_vertex: r, sp_tree, eta, nodes, oracle, face_vertices, n })
}

struct Split {
    edge: usize,
    left: Vec<usize>,
    right: Vec<usize>,
    left_cuts: Vec<usize>,
    right_cuts: Vec<usize>,
}

/// Most balanced admissible split of a piece.
///
/// A side is admissible when it has at most two cut edges or is a single
/// face; this keeps every node within four boundary paths.
fn best_split(
    frame: &Frame,
    piece: &[usize],
    cuts: &[usize],
    in_piece: &[bool],
    eta: usize,
    stamp: &mut [u32],
    tick: &mut u32,
) -> Option<Split> {
    // Root the piece's dual tree at its first face; record preorder.
    let root = piece[0];
    let mut order = Vec::with_capacity(piece.len());
    let mut parent_edge: std::collections::HashMap<usize, (usize, usize)> = Default::default();
    let mut stack = vec![root];
    let mut seen: std::collections::HashSet<usize> = [root].into_iter().collect();
    while let Some(f) = stack.pop() {
        order.push(f);
        for &(h, e) in &frame.dual_adj[f] {
            if in_piece[h] && seen.insert(h) {
                parent_edge.insert(h, (f, e));
                stack.push(h);
            }
        }
    }
    debug_assert_eq!(order.len(), piece.len(), "piece is connected in the dual tree");
    let pos: std::collections::HashMap<usize, usize> = order.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    // Subtree sizes give each subtree as a contiguous preorder range.
    let mut size = vec![1usize; order.len()];
    for i in (1..order.len()).rev() {
        let (p, _) = parent_edge[&order[i]];
        size[pos[&p]] += size[i];
    }
    let attach: Vec<usize> = cuts.iter().map(|&c| pos[&frame.attachment(c, in_piece)]).collect();

    let mut best: Option<(usize, usize, usize)> = None; // (score, edge, child index)
    for i in 1..order.len() {
        let (_, e) = parent_edge[&order[i]];
        let inside = |p: usize| p >= i && p < i + size[i];
        let below: Vec<usize> = (0..cuts.len()).filter(|&k| inside(attach[k])).map(|k| cuts[k]).collect();
        let above: Vec<usize> = (0..cuts.len()).filter(|&k| !inside(attach[k])).map(|k| cuts[k]).collect();
        let below_ok = below.len() < 2 || size[i] == 1;
        let above_ok = above.len() < 2 || order.len() - size[i] == 1;
        if !(below_ok && above_ok) {
            continue;
        }
        let mut below_cuts = below;
        below_cuts.push(e);
        let mut above_cuts = above;
        above_cuts.push(e);
        let bel_ends = frame.reduce(&below_cuts);
        let abo_ends = frame.reduce(&above_cuts);
        if (bel_ends.len() > eta && size[i] > 1) || (abo_ends.len() > eta && order.len() - size[i] > 1) {
            continue;
        }
        *tick += 1;
        let below_faces = &order[i..i + size[i]];
        let bc = frame.internal_count(below_faces, &bel_ends, stamp, *tick);
        *tick += 1;
        let above_faces: Vec<usize> = order[..i].iter().chain(&order[i + size[i]..]).copied().collect();
        let ac = frame.internal_count(&above_faces, &abo_ends, stamp, *tick);
        let score = bc.max(ac);
        if best.is_none_or(|(s, be, _)| (score, e) < (s, be)) {
            best = Some((score, e, i));
        }
    }
    let (_, edge, i) = best?;
    let below_set: Vec<usize> = order[i..i + size[i]].to_vec();
    let above_set: Vec<usize> = order[..i].iter().chain(&order[i + size[i]..]).copied().collect();
    let inside = |p: usize| p >= i && p < i + size[i];
    let mut left_cuts: Vec<usize> = (0..cuts.len()).filter(|&k| !inside(attach[k])).map(|k| cuts[k]).collect();
    let mut right_cuts: Vec<usize> = (0..cuts.len()).filter(|&k| inside(attach[k])).map(|k| cuts[k]).collect();
    left_cuts.push(edge);
    right_cuts.push(edge);
    let mut left = above_set;
    let mut right = below_set;
    left.sort_unstable();
    right.sort_unstable();
    Some(Split { edge, left, right, left_cuts, right_cuts })
}
