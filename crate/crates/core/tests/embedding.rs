use lowtw::constants::{boundary_gap_bound, embed_gap_bound, embed_width_bound};
use lowtw::graph::{all_pairs, validate_tree_decomposition};
use lowtw::instances::{grid_rect, WeightMode};
use lowtw::portal::{build_host_graph_with, measure_distortion, measure_portal_distortion};
use lowtw::rspd::build_rspd;

const EPS: [f64; 3] = [0.5, 0.25, 0.1];

#[test]
fn gap_shrinks_with_eps() {
    for (side, mode) in [(8, WeightMode::Unit), (10, WeightMode::Random(3)), (12, WeightMode::Random(12))] {
        let g = grid_rect(side, side, mode).unwrap();
        let dist = all_pairs(&g);
        let phi = build_rspd(&g, 0, 4).unwrap();
        let mut last = f64::INFINITY;
        for eps in EPS {
            let e = build_host_graph_with(&g, &phi, eps, &dist).unwrap();
            let rep = measure_distortion(&g, &e, &dist, usize::MAX).unwrap();
            assert!(rep.dominating());
            assert!(rep.max_gap <= embed_gap_bound(eps, e.diameter), "side {side} eps {eps}: {}", rep.max_gap);
            assert!(rep.max_gap <= last + 1e-9, "side {side}: gap grew at eps {eps}");
            last = rep.max_gap;

            let (_, portal_gap) = measure_portal_distortion(&e, &dist, 64, 7).unwrap();
            assert!(portal_gap <= boundary_gap_bound(eps, e.diameter), "side {side} eps {eps}: {portal_gap}");
            assert!(validate_tree_decomposition(&e.host, &e.host_decomposition).valid());
            assert!(e.width() as f64 <= embed_width_bound(eps, g.n()));
        }
    }
}
