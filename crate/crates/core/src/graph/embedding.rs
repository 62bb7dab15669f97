//! Combinatorial embeddings: faces of a rotation system.
//!
//! Edge `e = {u, v}` (as stored, `u` first) has darts `2e` (u to v) and
//! `2e + 1` (v to u). The face after dart `a -> b` along edge `e` continues
//! with the edge that follows `e` in the rotation at `b`.

use super::WeightedGraph;
use crate::error::{Error, Result};

pub type Dart = usize;

#[derive(Clone, Debug)]
pub struct Face {
    pub darts: Vec<Dart>,
}

#[derive(Clone, Debug)]
pub struct Faces {
    pub faces: Vec<Face>,
    pub face_of_dart: Vec<usize>,
}

pub fn dart_tail(g: &WeightedGraph, d: Dart) -> usize {
    let e = g.edge(d / 2);
    if d.is_multiple_of(2) {
        e.u
    } else {
        e.v
    }
}

pub fn dart_head(g: &WeightedGraph, d: Dart) -> usize {
    let e = g.edge(d / 2);
    if d.is_multiple_of(2) {
        e.v
    } else {
        e.u
    }
}

/// The dart leaving `v` along edge `e`.
pub fn dart_from(g: &WeightedGraph, v: usize, e: usize) -> Dart {
    if g.edge(e).u == v {
        2 * e
    } else {
        2 * e + 1
    }
}

/// Position of each dart's edge in the rotation list at the dart's tail.
fn positions(g: &WeightedGraph, rot: &[Vec<usize>]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; 2 * g.m()];
    for (v, list) in rot.iter().enumerate() {
        for (i, &e) in list.iter().enumerate() {
            pos[dart_from(g, v, e)] = i;
        }
    }
    pos
}

/// Traces all faces of the graph's rotation system.
pub fn faces(g: &WeightedGraph) -> Result<Faces> {
    let rot = g
        .rotation()
        .ok_or_else(|| Error::Embedding("graph has no rotation system".into()))?;
    let pos = positions(g, rot);
    let mut face_of_dart = vec![usize::MAX; 2 * g.m()];
    let mut faces = Vec::new();
    for start in 0..2 * g.m() {
        if face_of_dart[start] != usize::MAX {
            continue;
        }
        let id = faces.len();
        let mut darts = Vec::new();
        let mut d = start;
        loop {
            face_of_dart[d] = id;
            darts.push(d);
            let b = dart_head(g, d);
            let back = d ^ 1;
            let list = &rot[b];
            let e = list[(pos[back] + 1) % list.len()];
            d = dart_from(g, b, e);
            if d == start {
                break;
            }
            if face_of_dart[d] != usize::MAX {
                return Err(Error::Embedding("inconsistent rotation system".into()));
            }
        }
        faces.push(Face { darts });
    }
    Ok(Faces { faces, face_of_dart })
}

/// Euler's formula for a connected graph embedded in the sphere.
pub fn is_planar_embedding(g: &WeightedGraph) -> Result<bool> {
    if g.n() == 0 {
        return Ok(true);
    }
    let f = faces(g)?.faces.len();
    let connected = all_edges_connected(g);
    Ok(connected && g.n() as i64 - g.m() as i64 + f as i64 == 2)
}

fn all_edges_connected(g: &WeightedGraph) -> bool {
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &(x, _) in g.neighbors(v) {
            if !seen[x] {
                seen[x] = true;
                count += 1;
                stack.push(x);
            }
        }
    }
    count == g.n()
}

/// Counterclockwise rotation system of a straight-line drawing.
pub fn rotation_from_coordinates(g: &WeightedGraph, coords: &[(f64, f64)]) -> Vec<Vec<usize>> {
    (0..g.n())
        .map(|v| {
            let (x0, y0) = coords[v];
            let mut list: Vec<(f64, usize)> = g
                .neighbors(v)
                .iter()
                .map(|&(x, e)| {
                    let (x1, y1) = coords[x];
                    ((y1 - y0).atan2(x1 - x0), e)
                })
                .collect();
            list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            list.into_iter().map(|(_, e)| e).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_two_faces() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let coords = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let rot = rotation_from_coordinates(&g, &coords);
        let g = g.with_rotation(rot).unwrap();
        let f = faces(&g).unwrap();
        assert_eq!(f.faces.len(), 2);
        assert!(f.faces.iter().all(|face| face.darts.len() == 4));
        assert!(is_planar_embedding(&g).unwrap());
    }

    #[test]
    fn twisted_rotation_fails_euler() {
        // K4 with a rotation that embeds it on the torus.
        let edges = [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)];
        let g = WeightedGraph::new(4, edges).unwrap();
        let rot = vec![vec![0, 1, 2], vec![0, 3, 4], vec![1, 3, 5], vec![2, 4, 5]];
        let g = g.with_rotation(rot).unwrap();
        assert!(!is_planar_embedding(&g).unwrap());
    }
}
