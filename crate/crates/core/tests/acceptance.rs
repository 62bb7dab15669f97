//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset.

use std::collections::{HashSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lowtw::baker::{bicriteria_is, brute_force_rho_is, inner_cover_counts, min_pairwise_distance, shift_count};
use lowtw::constants::{embed_gap_bound, embed_width_bound, EMBED_GAP, EMBED_WIDTH, ROOTED_GAP, UNSUCCESSFUL_RATE};
use lowtw::emulator::{build_emulator, tree_division};
use lowtw::graph::{all_pairs, dijkstra, hop_bounded_distances, validate_tree_decomposition, RootedTree};
use lowtw::harness::multiplicative_report;
use lowtw::instances::{
    caterpillar, fractal, geodesic_grid, grid, grid_rect, lower_bound_instance, path_tree, random_tree, star_tree,
    WeightMode, DEFAULT_EDGE_BUDGET,
};
use lowtw::portal::{build_host_graph_with, measure_distortion};
use lowtw::rspd::{build_rspd, separation_check, validate_rspd};
use lowtw::stochastic::rooted_distortion_stats;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `1 + ceil((2 / log2 1.5) * log2 log2 n)`, and 2 for `n <= 4`.
fn expected_hops(n: usize) -> usize {
    if n <= 4 {
        return 2;
    }
    let c = 2.0 / 1.5f64.log2();
    1 + (c * (n as f64).log2().log2() - 1e-12).ceil() as usize
}

struct TreeCheck {
    pairs: usize,
    exact: bool,
    width_ok: bool,
}

/// Tree distance by a plain traversal, independent of the LCA oracle.
fn tree_distances_from(t: &RootedTree, s: usize) -> Vec<f64> {
    let n = t.n();
    let mut adj = vec![Vec::new(); n];
    for (c, p, w) in t.edges() {
        adj[c].push((p, w));
        adj[p].push((c, w));
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[s] = 0.0;
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        for &(x, w) in &adj[v] {
            if dist[x].is_infinite() {
                dist[x] = dist[v] + w;
                stack.push(x);
            }
        }
    }
    dist
}

/// Equal up to floating-point rounding of sums of real weights.
fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

fn check_tree(t: &RootedTree, seed: u64) -> TreeCheck {
    let n = t.n();
    let k = build_emulator(t);
    let h = expected_hops(n);
    let sources: Vec<usize> = if n <= 400 {
        (0..n).collect()
    } else {
        // At least 10^4 ordered pairs with distinct ends.
        let count = 10_000usize.div_ceil(n - 1) + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = rng.gen_range(i..n);
            s.swap(i, j);
        }
        s.truncate(count);
        s
    };
    let mut exact = k.hop_bound == h;
    for &u in &sources {
        let truth = tree_distances_from(t, u);
        let bounded = hop_bounded_distances(&k.graph, u, h).unwrap();
        let unbounded = dijkstra(&k.graph, u).unwrap().dist;
        exact &= truth.iter().zip(&bounded).all(|(a, b)| same(*a, *b));
        exact &= truth.iter().zip(&unbounded).all(|(a, b)| same(*a, *b));
    }
    let td = validate_tree_decomposition(&k.graph, &k.decomposition);
    TreeCheck { pairs: sources.len() * (n - 1), exact, width_ok: td.valid() && td.width <= h }
}

fn tree_families() -> Vec<(String, RootedTree)> {
    let mut out = Vec::new();
    for n in [10, 100, 1000] {
        for s in 0..1000u64 {
            out.push((format!("random n={n} seed={s}"), random_tree(n, s * 7919 + n as u64).unwrap()));
        }
    }
    for n in [1, 2, 3, 4, 5, 10, 100, 500, 1000] {
        out.push((format!("path n={n}"), path_tree(n, 1.0).unwrap()));
        out.push((format!("star n={n}"), star_tree(n, 2.0).unwrap()));
    }
    for (spine, legs) in [(3, 2), (10, 3), (50, 5), (200, 4)] {
        out.push((format!("caterpillar {spine}x{legs}"), caterpillar(spine, legs, 1.5).unwrap()));
    }
    out
}

fn criteria_1_and_2() -> (Outcome, Outcome) {
    let start = Instant::now();
    let trees = tree_families();
    let results: Vec<(String, TreeCheck)> = trees
        .par_iter()
        .enumerate()
        .map(|(i, (name, t))| (name.clone(), check_tree(t, i as u64)))
        .collect();
    let elapsed = start.elapsed();
    let inexact: Vec<&String> = results.iter().filter(|r| !r.1.exact).map(|r| &r.0).collect();
    let wide: Vec<&String> = results.iter().filter(|r| !r.1.width_ok).map(|r| &r.0).collect();
    let min_sampled = results.iter().filter(|r| r.1.pairs > 0 && r.0.contains("n=1000")).map(|r| r.1.pairs).min();
    let c1 = outcome(
        inexact.is_empty() && elapsed < Duration::from_secs(300) && min_sampled.unwrap_or(0) >= 10_000,
        format!(
            "{} trees, {} inexact (first: {:?}), min sampled pairs at n=1000: {:?}, {:.1}s",
            results.len(),
            inexact.len(),
            inexact.first(),
            min_sampled,
            elapsed.as_secs_f64()
        ),
    );
    let c2 = outcome(
        wide.is_empty(),
        format!("{} decompositions, {} invalid or wider than h (first: {:?})", results.len(), wide.len(), wide.first()),
    );
    (c1, c2)
}

fn criterion_3() -> Outcome {
    let violations: usize = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let n = rng.gen_range(1..=300usize);
            let ell = rng.gen_range(1..=n.max(2));
            let t = random_tree(n, i ^ 0x5eed).unwrap();
            let div = tree_division(&t, ell);
            let in_x: HashSet<usize> = div.separator.iter().copied().collect();
            let mut bad = 0;
            if !in_x.is_empty() && in_x.len() as f64 > 2.0 * n as f64 / (ell as f64 + 1.0) - 1.0 {
                bad += 1;
            }
            // Components of T minus X by breadth-first search.
            let g = t.to_graph();
            let mut seen = vec![false; n];
            for s in 0..n {
                if seen[s] || in_x.contains(&s) {
                    continue;
                }
                let (mut size, mut outgoing) = (0, 0);
                let mut queue = VecDeque::from([s]);
                seen[s] = true;
                while let Some(v) = queue.pop_front() {
                    size += 1;
                    for &(w, _) in g.neighbors(v) {
                        if in_x.contains(&w) {
                            outgoing += 1;
                        } else if !seen[w] {
                            seen[w] = true;
                            queue.push_back(w);
                        }
                    }
                }
                if size > ell || outgoing > 2 {
                    bad += 1;
                }
            }
            bad
        })
        .sum();
    outcome(violations == 0, format!("10000 instances, {violations} violations"))
}

fn criterion_4() -> Outcome {
    let mut instances = Vec::new();
    for side in 8..=16 {
        instances.push((side, WeightMode::Unit));
        for s in 0..10 {
            instances.push((side, WeightMode::Random(1000 + s)));
        }
    }
    let failures: Vec<String> = instances
        .par_iter()
        .filter_map(|&(side, mode)| {
            let g = grid(side, mode).unwrap();
            let phi = build_rspd(&g, 0, 4).unwrap();
            let rep = validate_rspd(&g, &phi);
            let sep = separation_check(&g, &phi, 200, side as u64);
            let depth_ok = rep.depth as f64 <= 4.0 * (g.n() as f64).log2() + 8.0;
            let ok = rep.valid() && depth_ok && sep.pairs >= 200 && sep.violations == 0;
            (!ok).then(|| format!("{side} {mode:?}: {:?} sep {sep:?}", rep.failures))
        })
        .collect();
    outcome(failures.is_empty(), format!("{} grids, {} failing {:?}", instances.len(), failures.len(), failures.first()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rows = Vec::new();
    let (mut worst_gap, mut worst_width) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for side in [8, 10, 12, 16, 17, 20, 24, 32, 40] {
        for mode in [WeightMode::Unit, WeightMode::Random(side as u64)] {
            let g = grid(side, mode).unwrap();
            let n = g.n();
            let dist = all_pairs(&g);
            let d = dist.max();
            let phi = build_rspd(&g, 0, 4).unwrap();
            for eps in [0.5, 0.25, 0.1] {
                let e = build_host_graph_with(&g, &phi, eps, &dist).unwrap();
                let budget = if n <= 300 { n * n } else { 20 * n };
                let rep = measure_distortion(&g, &e, &dist, budget).unwrap();
                let td = validate_tree_decomposition(&e.host, &e.host_decomposition);
                worst_gap = worst_gap.max(rep.max_gap / (eps * d));
                let ll = (n as f64).log2().log2();
                worst_width = worst_width.max(e.width() as f64 * eps / (ll * ll));
                let ok = rep.min_gap >= -1e-9
                    && rep.max_gap <= embed_gap_bound(eps, d)
                    && e.width() as f64 <= embed_width_bound(eps, n)
                    && td.valid()
                    && rep.exhaustive == (n <= 300);
                if !ok {
                    failures.push(format!("{side} {mode:?} eps={eps}: {rep:?} width {}", e.width()));
                }
                rows.push(());
            }
        }
    }
    outcome(
        failures.is_empty() && EMBED_GAP <= 20.0,
        format!(
            "{} runs, max gap/(eps D) {worst_gap:.3} <= {EMBED_GAP}, max width eps/loglog^2 {worst_width:.3} <= {EMBED_WIDTH}, {:.0}s, failures {:?}",
            rows.len(),
            start.elapsed().as_secs_f64(),
            failures.first()
        ),
    )
}

fn criterion_6() -> Outcome {
    let eps = 1.0 / 42.0;
    let mut details = Vec::new();
    let mut pass = true;
    for n in [84, 100, 150] {
        let g = lower_bound_instance(eps, n).unwrap();
        let dist = all_pairs(&g);
        let d = dist.max();
        let phi = build_rspd(&g, 0, 4).unwrap();
        let e = build_host_graph_with(&g, &phi, eps, &dist).unwrap();
        let rep = multiplicative_report(&g, &e, &dist, usize::MAX).unwrap();
        let additive_ok = rep.max_gap <= eps * d + 1e-9;
        let ok = d <= 44.0 && rep.min_gap >= -1e-9 && (!additive_ok || rep.max_ratio <= 2.0 + 1e-6);
        pass &= ok;
        details.push(format!(
            "n={n} D={d} gap={:.3} (eps D {:.3}) ratio={:.4}",
            rep.max_gap,
            eps * d,
            rep.max_ratio
        ));
    }
    outcome(pass, details.join("; "))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    for n in 1..=4usize {
        let q = geodesic_grid(n).unwrap();
        let g = &q.graph;
        let mut ok = g.m() == 8 * n * (n + 1) && q.paths.len() == 2 * (n + 1);
        let st = dijkstra(g, q.s).unwrap().dist[q.t];
        let mut used = vec![0usize; g.m()];
        for p in &q.paths {
            let len: f64 = p.iter().map(|&e| g.edge(e).w).sum();
            ok &= (len - st).abs() < 1e-9;
            // Consecutive edges chain from s to t.
            let mut at = q.s;
            for &e in p {
                used[e] += 1;
                let edge = g.edge(e);
                ok &= edge.u == at || edge.v == at;
                at = edge.other(at);
            }
            ok &= at == q.t;
        }
        ok &= used.iter().all(|&c| c == 1);
        let base = grid(n + 1, WeightMode::Unit).unwrap();
        let dq = all_pairs(&base);
        let dh = all_pairs(g);
        for a in 0..base.n() {
            for b in 0..base.n() {
                let (x, y) = (q.grid_vertex_map[a], q.grid_vertex_map[b]);
                ok &= (dh.get(x, y) - 2.0 * dq.get(a, b)).abs() < 1e-9;
            }
        }
        if !ok {
            failures.push(n);
        }
    }
    outcome(failures.is_empty(), format!("n = 1..4, failing {failures:?}"))
}

fn criterion_8() -> Outcome {
    let n = 2;
    let m = geodesic_grid(n).unwrap().graph.m();
    let mut details = Vec::new();
    let mut pass = true;
    for k in 1..=2u32 {
        let f = fractal(n, k as usize, DEFAULT_EDGE_BUDGET).unwrap();
        let edges_ok = f.graph.m() == m.pow(k);
        let copies_ok = f.copies.len() == m.pow(k - 1);
        let mut edge_seen = vec![false; f.graph.m()];
        let mut vertex_seen = vec![false; f.graph.n()];
        let mut disjoint = true;
        for c in &f.copies {
            disjoint &= c.edges.len() == m;
            for e in c.edges.clone() {
                disjoint &= !std::mem::replace(&mut edge_seen[e], true);
            }
            for v in c.interior_vertices.clone() {
                disjoint &= !std::mem::replace(&mut vertex_seen[v], true);
            }
        }
        let product_ok = f.path_count * f.path_hop_length == m && f.path_hop_length == 4 * n;
        pass &= edges_ok && copies_ok && disjoint && product_ok;
        details.push(format!(
            "k={k}: |E|={} (m^k={}), copies={}, disjoint={disjoint}, rho*l={}*{}",
            f.graph.m(),
            m.pow(k),
            f.copies.len(),
            f.path_count,
            f.path_hop_length
        ));
    }
    outcome(pass, details.join("; "))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for mode in [WeightMode::Unit, WeightMode::Random(12), WeightMode::Random(13)] {
        let g = grid(12, mode).unwrap();
        for eps in [0.25, 0.125] {
            let s = rooted_distortion_stats(&g, 0, eps, 1000, 2024).unwrap();
            let ok = s.dominating()
                && s.max_unsuccessful_rate <= UNSUCCESSFUL_RATE * eps
                && s.max_successful_ratio <= ROOTED_GAP;
            pass &= ok;
            details.push(format!(
                "{mode:?} eps={eps}: unsuccessful {:.3} <= {:.3}, gap ratio {:.3} <= {ROOTED_GAP}",
                s.max_unsuccessful_rate,
                UNSUCCESSFUL_RATE * eps,
                s.max_successful_ratio
            ));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(600);
    outcome(pass, format!("{}; {:.0}s", details.join("; "), elapsed.as_secs_f64()))
}

fn criterion_10() -> Outcome {
    let eps = 0.5;
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for (rows, cols) in [(4, 4), (5, 4)] {
        let g = grid_rect(rows, cols, WeightMode::Unit).unwrap();
        let all: Vec<usize> = (0..g.n()).collect();
        for rho in [1.5, 2.0] {
            let counts = inner_cover_counts(&g, 0, rho, eps).unwrap();
            if counts.iter().any(|&c| c < shift_count(eps) - 2) {
                violations.push(format!("{rows}x{cols} rho={rho}: cover counts {counts:?}"));
            }
            for seed in 0..10u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mu: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(0.0..1.0)).collect();
                let out = bicriteria_is(&g, 0, rho, eps, &mu).unwrap();
                let opt = brute_force_rho_is(&g, rho, &mu, &all).unwrap();
                let sep = min_pairwise_distance(&g, &out.members).unwrap();
                let value: f64 = out.members.iter().map(|&v| mu[v]).sum();
                worst = worst.min(value / opt.value);
                if sep + 1e-9 < (1.0 - eps) * rho || value + 1e-9 < (1.0 - eps) * opt.value {
                    violations.push(format!("{rows}x{cols} rho={rho} seed={seed}"));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("40 runs, worst value/OPT {worst:.3}, violations {violations:?}"),
    )
}

fn main() {
    let wanted: HashSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let run = |k: u32| wanted.is_empty() || wanted.contains(&k);
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let guarded = |f: &dyn Fn() -> Outcome| {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| outcome(false, "panicked".into()))
    };
    if run(1) || run(2) {
        let (c1, c2) = catch_unwind(criteria_1_and_2).unwrap_or_else(|_| {
            (outcome(false, "panicked".into()), outcome(false, "panicked".into()))
        });
        if run(1) {
            results.push((1, c1));
        }
        if run(2) {
            results.push((2, c2));
        }
    }
    let rest: [(u32, fn() -> Outcome); 8] = [
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    for (k, f) in rest {
        if run(k) {
            results.push((k, guarded(&f)));
        }
    }
    let mut failed = 0;
    for (k, o) in &results {
        println!("criterion {k:>2}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
