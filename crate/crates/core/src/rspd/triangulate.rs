use crate::error::{Error, Result};
use crate::graph::{dart_head, faces, is_planar_embedding, Edge, WeightedGraph};

/// Adds structural edges until every face is a triangle.
///
/// Faces are cut by ears: for consecutive darts `a -> b -> c` with `a != c`
/// and `a`, `c` not adjacent, the chord `{a, c}` is added inside the face.
pub fn triangulate(g: &WeightedGraph) -> Result<WeightedGraph> {
    let rot = g
        .rotation()
        .ok_or_else(|| Error::Embedding("triangulation needs a rotation system".into()))?;
    if !is_planar_embedding(g)? {
        return Err(Error::Embedding("rotation system is not a planar embedding".into()));
    }
    if g.n() < 3 {
        return Ok(g.clone());
    }
    let mut edges: Vec<Edge> = g.edges().to_vec();
    let mut rot: Vec<Vec<usize>> = rot.to_vec();
    let mut adjacent: std::collections::HashSet<(usize, usize)> =
        edges.iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();

    loop {
        let current = WeightedGraph::from_parts(g.n(), edges.clone(), Some(rot.clone()), false)?;
        let fs = faces(&current)?;
        let mut changed = false;
        // Faces are re-traced after each batch. Chords within a batch use
        // pairwise disjoint vertex triples, so earlier chords cannot
        // invalidate the darts of later ones.
        let mut touched = vec![false; g.n()];
        for face in &fs.faces {
            let k = face.darts.len();
            if k <= 3 {
                continue;
            }
            for i in 0..k {
                let d1 = face.darts[i];
                let d2 = face.darts[(i + 1) % k];
                let a = dart_head(&current, d1 ^ 1);
                let b = dart_head(&current, d1);
                let c = dart_head(&current, d2);
                if a == c || adjacent.contains(&(a.min(c), a.max(c))) {
                    continue;
                }
                if touched[a] || touched[b] || touched[c] {
                    continue;
                }
                let (e1, e2) = (d1 / 2, d2 / 2);
                let id = edges.len();
                edges.push(Edge { u: a, v: c, w: 0.0, structural: true });
                adjacent.insert((a.min(c), a.max(c)));
                let pc = rot[c].iter().position(|&e| e == e2).expect("e2 is incident to c");
                rot[c].insert(pc + 1, id);
                let pa = rot[a].iter().position(|&e| e == e1).expect("e1 is incident to a");
                rot[a].insert(pa, id);
                touched[a] = true;
                touched[b] = true;
                touched[c] = true;
                changed = true;
            }
        }
        if !changed {
            let stuck = fs.faces.iter().any(|f| f.darts.len() > 3);
            if stuck {
                return Err(Error::Embedding("could not triangulate a face without creating a parallel edge".into()));
            }
            let out = current;
            if !is_planar_embedding(&out)? {
                return Err(Error::Embedding("triangulation broke the embedding".into()));
            }
            return Ok(out);
        }
    }
}
