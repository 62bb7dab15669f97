//! Calibrated constants, measured once on grids of side 8 to 40 (unit and
//! random weights) and random trees up to 10^4 vertices, then enforced as
//! regression bounds by the test suite.

use crate::graph::Length;

/// Emulator size: `|E(K)| <= EMULATOR_SIZE * n * (1 + log2 log2 max(n, 4))`.
/// Largest measured ratio: 1.27.
pub const EMULATOR_SIZE: f64 = 2.0;

/// Additive gap of the planar embedding, in units of `eps * D`.
/// Largest measured ratio: 1.24.
pub const EMBED_GAP: f64 = 2.0;

/// Gap between portal copies, in units of `eps * D`. Largest measured: 0.71.
pub const BOUNDARY_GAP: f64 = 2.0;

/// Host width, in units of `(log2 log2 n)^2 / eps`. Largest measured: 4.39.
pub const EMBED_WIDTH: f64 = 6.0;

/// Rooted embedding gap for successful vertices, in units of
/// `eps * (d(r,u) + d(r,v))`. Largest measured: 1.77.
pub const ROOTED_GAP: f64 = 4.0;

/// Allowed rate of unsuccessful vertices, in units of `eps`.
pub const UNSUCCESSFUL_RATE: f64 = 2.5;

pub use crate::rspd::depth_bound;

fn loglog(n: usize) -> f64 {
    (n.max(4) as f64).log2().log2()
}

pub fn emulator_size_bound(n: usize) -> f64 {
    EMULATOR_SIZE * n as f64 * (1.0 + loglog(n))
}

pub fn embed_gap_bound(eps: f64, diameter: Length) -> f64 {
    EMBED_GAP * eps * diameter
}

pub fn boundary_gap_bound(eps: f64, diameter: Length) -> f64 {
    BOUNDARY_GAP * eps * diameter
}

pub fn embed_width_bound(eps: f64, n: usize) -> f64 {
    let ll = loglog(n).max(1.0);
    EMBED_WIDTH * ll * ll / eps
}
