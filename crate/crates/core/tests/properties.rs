use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use serde_json::{json, Value};

use lowtw::baker::{brute_force_rho_is, inner_cover_counts, shift_count, snap_eps};
use lowtw::emulator::{build_emulator, chop_to_pieces, lca_closure, tree_division};
use lowtw::graph::{
    all_pairs, dijkstra, hop_bounded_distances, validate_tree_decomposition, RootedTree, WeightedGraph,
};
use lowtw::harness::{from_csv, to_csv};
use lowtw::instances::{grid_rect, random_tree, WeightMode};
use lowtw::io::{read_graph, read_td, write_graph, write_td};
use lowtw::portal::{build_host_graph_with, measure_distortion};
use lowtw::rspd::{build_rspd, validate_rspd};
use lowtw::stochastic::BandSlicing;

fn components_without(t: &RootedTree, removed: &HashSet<usize>) -> Vec<usize> {
    let g = t.to_graph();
    let mut seen = vec![false; t.n()];
    let mut sizes = Vec::new();
    for s in 0..t.n() {
        if seen[s] || removed.contains(&s) {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &(w, _) in g.neighbors(v) {
                if !seen[w] && !removed.contains(&w) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Exhaustive subset search for the best separated set.
fn naive_best(dist: &[Vec<f64>], mu: &[f64], rho: f64) -> f64 {
    let k = mu.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let ok = members
            .iter()
            .all(|&a| members.iter().all(|&b| a == b || dist[a][b] + 1e-9 >= rho));
        if ok {
            best = best.max(members.iter().map(|&i| mu[i]).sum());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emulator_is_exact_within_hop_bound(n in 1usize..120, seed in any::<u64>()) {
        let t = random_tree(n, seed).unwrap();
        let k = build_emulator(&t);
        let oracle = t.oracle();
        for u in 0..n {
            let d = hop_bounded_distances(&k.graph, u, k.hop_bound).unwrap();
            for (v, &x) in d.iter().enumerate() {
                let truth = oracle.distance(u, v);
                prop_assert!((x - truth).abs() <= 1e-9 * truth.max(1.0));
            }
        }
        let td = validate_tree_decomposition(&k.graph, &k.decomposition);
        prop_assert!(td.valid() && td.width <= k.hop_bound);
    }

    #[test]
    fn chopping_bounds_pieces(n in 1usize..200, ell in 1usize..40, seed in any::<u64>()) {
        let t = random_tree(n, seed).unwrap();
        let a = chop_to_pieces(&t, ell);
        prop_assert!(a.len() <= n / (ell + 1));
        let removed: HashSet<usize> = a.into_iter().collect();
        prop_assert!(components_without(&t, &removed).into_iter().all(|s| s <= ell));
    }

    #[test]
    fn closure_at_most_doubles(n in 1usize..150, seed in any::<u64>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..12)) {
        let t = random_tree(n, seed).unwrap();
        let a: BTreeSet<usize> = picks.iter().map(|i| i.index(n)).collect();
        let a: Vec<usize> = a.into_iter().collect();
        let x = lca_closure(&t.oracle(), &a);
        prop_assert!(x.len() < 2 * a.len());
        prop_assert!(a.iter().all(|v| x.contains(v)));
        // Closed under pairwise lowest common ancestors.
        let oracle = t.oracle();
        for &p in &x {
            for &q in &x {
                prop_assert!(x.contains(&oracle.lca(p, q)));
            }
        }
    }

    #[test]
    fn division_invariants(n in 1usize..300, ell in 1usize..60, seed in any::<u64>()) {
        let t = random_tree(n, seed).unwrap();
        let div = tree_division(&t, ell);
        let x: HashSet<usize> = div.separator.iter().copied().collect();
        if !x.is_empty() {
            prop_assert!(x.len() as f64 <= 2.0 * n as f64 / (ell as f64 + 1.0) - 1.0);
        }
        let mut covered = x.len();
        for (c, out) in div.components.iter().zip(&div.outgoing) {
            prop_assert!(c.len() <= ell && out.len() <= 2);
            covered += c.len();
        }
        prop_assert_eq!(covered, n);
    }

    #[test]
    fn graph_files_round_trip(rows in 1usize..6, cols in 2usize..6, seed in any::<u64>()) {
        let g = grid_rect(rows, cols, WeightMode::Random(seed)).unwrap();
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let back = read_graph(buf.as_slice()).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.rotation(), g.rotation());
    }

    #[test]
    fn decomposition_files_round_trip(n in 1usize..80, seed in any::<u64>()) {
        let t = random_tree(n, seed).unwrap();
        let k = build_emulator(&t);
        let mut buf = Vec::new();
        write_td(&k.decomposition, n, &mut buf).unwrap();
        let back = read_td(buf.as_slice()).unwrap();
        prop_assert_eq!(back, k.decomposition);
    }

    #[test]
    fn exact_solver_matches_enumeration(
        k in 0usize..10,
        seed in any::<u64>(),
        rho in 0.5f64..6.0,
    ) {
        let g = grid_rect(3, 4, WeightMode::Random(seed)).unwrap();
        let terminals: Vec<usize> = (0..k).map(|i| (i * 5 + seed as usize % 3) % g.n()).collect::<BTreeSet<_>>().into_iter().collect();
        let mu: Vec<f64> = (0..g.n()).map(|v| ((v as u64 * 31 + seed) % 7) as f64).collect();
        let best = brute_force_rho_is(&g, rho, &mu, &terminals).unwrap();
        let dist: Vec<Vec<f64>> = terminals
            .iter()
            .map(|&a| { let d = dijkstra(&g, a).unwrap().dist; terminals.iter().map(|&b| d[b]).collect() })
            .collect();
        let weights: Vec<f64> = terminals.iter().map(|&t| mu[t]).collect();
        prop_assert!((best.value - naive_best(&dist, &weights, rho)).abs() < 1e-9);
    }

    #[test]
    fn layers_cover_each_vertex_often(rows in 2usize..7, cols in 2usize..7, seed in any::<u64>(), inv in 1u32..6, rho in 0.5f64..4.0) {
        let g = grid_rect(rows, cols, WeightMode::Random(seed)).unwrap();
        let eps = snap_eps(1.0 / inv as f64).unwrap();
        let counts = inner_cover_counts(&g, 0, rho, eps).unwrap();
        let need = shift_count(eps).saturating_sub(2);
        prop_assert!(counts.iter().all(|&c| c >= need));
    }

    #[test]
    fn rspd_is_valid_on_small_grids(rows in 2usize..9, cols in 2usize..9, seed in any::<u64>(), root in any::<prop::sample::Index>()) {
        let g = grid_rect(rows, cols, WeightMode::Random(seed)).unwrap();
        let phi = build_rspd(&g, root.index(g.n()), 4).unwrap();
        let rep = validate_rspd(&g, &phi);
        prop_assert!(rep.valid(), "{:?}", rep.failures);
    }

    #[test]
    fn embedding_dominates(rows in 2usize..8, cols in 2usize..8, seed in any::<u64>(), eps in 0.05f64..0.9) {
        let g = grid_rect(rows, cols, WeightMode::Random(seed)).unwrap();
        let dist = all_pairs(&g);
        let phi = build_rspd(&g, 0, 4).unwrap();
        let e = build_host_graph_with(&g, &phi, eps, &dist).unwrap();
        let rep = measure_distortion(&g, &e, &dist, usize::MAX).unwrap();
        prop_assert!(rep.dominating());
        prop_assert!(validate_tree_decomposition(&e.host, &e.host_decomposition).valid());
    }

    #[test]
    fn band_index_brackets_distance(x in 0.0f64..1.0, d in 1.0f64..1e9, k in 4u32..12) {
        let eps = 1.0 / k as f64;
        let s = BandSlicing::new(vec![0.0], 0, eps, x, 1.0).unwrap();
        let i = s.band_of(d);
        prop_assert!(s.lower(i) <= d && d < s.upper(i));
    }

    #[test]
    fn csv_export_round_trips(values in prop::collection::vec((-1e6f64..1e6, any::<bool>(), "[a-z ,\"]{0,8}"), 0..6)) {
        let rows: Vec<Value> = values.iter().map(|(x, b, s)| json!({"x": x, "flag": b, "label": s})).collect();
        let v = json!({"rows": rows, "meta": {"count": values.len()}});
        prop_assert_eq!(from_csv(&to_csv(&v).unwrap()).unwrap(), v);
    }
}

#[test]
fn disconnected_graph_is_rejected() {
    let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    assert!(build_rspd(&g, 0, 4).is_err());
}
