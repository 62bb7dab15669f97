//! C interface to `lowtw`.
//!
//! Graphs and embeddings are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`LowtwStatus`]; on failure, [`lowtw_last_error`] describes the problem
//! until the next call on the same thread. Vertex ids are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lowtw::baker::bicriteria_is;
use lowtw::graph::{dijkstra, WeightedGraph};
use lowtw::harness::load_graph;
use lowtw::instances::{grid_rect, WeightMode};
use lowtw::portal::{build_host_graph, OneToManyEmbedding};
use lowtw::rspd::build_rspd;
use lowtw::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowtwStatus {
    Ok = 0,
    InvalidArgument = 1,
    ValidationFailed = 2,
    ResourceExceeded = 3,
    Io = 4,
    Parse = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Opaque weighted graph.
pub struct LowtwGraph {
    inner: WeightedGraph,
}

/// Opaque low-treewidth embedding of a planar graph.
pub struct LowtwEmbedding {
    inner: OneToManyEmbedding,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes were removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LowtwStatus {
    match e {
        Error::Argument(_) | Error::VertexOutOfRange { .. } => LowtwStatus::InvalidArgument,
        Error::Validation(_) | Error::Disconnected | Error::Embedding(_) => LowtwStatus::ValidationFailed,
        Error::Resource(_) => LowtwStatus::ResourceExceeded,
        Error::Io(_) => LowtwStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => LowtwStatus::Parse,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (LowtwStatus, String)>>(f: F) -> LowtwStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LowtwStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LowtwStatus::Panic
        }
    }
}

fn lib(e: Error) -> (LowtwStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LowtwStatus, String) {
    (LowtwStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for reads of one `T` for the returned lifetime.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (LowtwStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or point to `len` readable elements.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (LowtwStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn out<T>(p: *mut T, value: T, what: &str) -> Result<(), (LowtwStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: checked non-null; the caller guarantees it is writable.
    unsafe { p.write(value) };
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn lowtw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lowtw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph on `n` vertices from `m` edges `(us[i], vs[i], ws[i])`.
///
/// # Safety
/// `us`, `vs` and `ws` must each point to `m` readable elements; `out_graph`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_graph_new(
    n: usize,
    us: *const usize,
    vs: *const usize,
    ws: *const f64,
    m: usize,
    out_graph: *mut *mut LowtwGraph,
) -> LowtwStatus {
    guard(|| {
        let (us, vs, ws) = (slice(us, m, "us")?, slice(vs, m, "vs")?, slice(ws, m, "ws")?);
        let edges = (0..m).map(|i| (us[i], vs[i], ws[i]));
        let g = WeightedGraph::new(n, edges).map_err(lib)?;
        out(out_graph, Box::into_raw(Box::new(LowtwGraph { inner: g })), "out_graph")
    })
}

/// Builds a `rows x cols` grid with its planar rotation system. Weights are
/// 1, or uniform in `[1, 10)` drawn from `seed` when `random_weights` is set.
///
/// # Safety
/// `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_graph_grid(
    rows: usize,
    cols: usize,
    random_weights: bool,
    seed: u64,
    out_graph: *mut *mut LowtwGraph,
) -> LowtwStatus {
    guard(|| {
        let mode = if random_weights { WeightMode::Random(seed) } else { WeightMode::Unit };
        let g = grid_rect(rows, cols, mode).map_err(lib)?;
        out(out_graph, Box::into_raw(Box::new(LowtwGraph { inner: g })), "out_graph")
    })
}

/// Reads a graph in `.gr` format.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_graph_read(path: *const c_char, out_graph: *mut *mut LowtwGraph) -> LowtwStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (LowtwStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        let g = load_graph(Path::new(path)).map_err(lib)?;
        out(out_graph, Box::into_raw(Box::new(LowtwGraph { inner: g })), "out_graph")
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lowtw_graph_free(graph: *mut LowtwGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of vertices, or 0 for null.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lowtw_graph_vertex_count(graph: *const LowtwGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n())
}

/// Number of edges, or 0 for null.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lowtw_graph_edge_count(graph: *const LowtwGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.m())
}

/// Height of the rooted shortest-path decomposition with at most `eta`
/// boundary paths per piece.
///
/// # Safety
/// `graph` must be a live handle; `out_depth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_rspd_depth(
    graph: *const LowtwGraph,
    root: usize,
    eta: usize,
    out_depth: *mut usize,
) -> LowtwStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let phi = build_rspd(&g.inner, root, eta).map_err(lib)?;
        out(out_depth, phi.height(), "out_depth")
    })
}

/// Embeds a planar graph (with a rotation system) into a host of low
/// treewidth with additive distortion proportional to `eps` times the
/// diameter.
///
/// # Safety
/// `graph` must be a live handle; `out_embedding` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_embed(
    graph: *const LowtwGraph,
    root: usize,
    eps: f64,
    out_embedding: *mut *mut LowtwEmbedding,
) -> LowtwStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let phi = build_rspd(&g.inner, root, lowtw::rspd::DEFAULT_ETA).map_err(lib)?;
        let e = build_host_graph(&g.inner, &phi, eps).map_err(lib)?;
        out(out_embedding, Box::into_raw(Box::new(LowtwEmbedding { inner: e })), "out_embedding")
    })
}

/// Releases an embedding. Null is ignored.
///
/// # Safety
/// `embedding` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lowtw_embedding_free(embedding: *mut LowtwEmbedding) {
    if !embedding.is_null() {
        drop(Box::from_raw(embedding));
    }
}

/// Host vertex count and the width of the host decomposition.
///
/// # Safety
/// `embedding` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_embedding_info(
    embedding: *const LowtwEmbedding,
    out_host_vertices: *mut usize,
    out_width: *mut usize,
) -> LowtwStatus {
    guard(|| {
        let e = &deref(embedding, "embedding")?.inner;
        out(out_host_vertices, e.host.n(), "out_host_vertices")?;
        out(out_width, e.width(), "out_width")
    })
}

/// Host distance between the canonical copies of `u` and `v`.
///
/// # Safety
/// `embedding` must be a live handle; `out_distance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_embedding_distance(
    embedding: *const LowtwEmbedding,
    u: usize,
    v: usize,
    out_distance: *mut f64,
) -> LowtwStatus {
    guard(|| {
        let e = &deref(embedding, "embedding")?.inner;
        let n = e.copies.len();
        if u >= n || v >= n {
            return Err(lib(Error::VertexOutOfRange { vertex: u.max(v), n }));
        }
        let sp = dijkstra(&e.host, e.copies[u][0]).map_err(lib)?;
        out(out_distance, sp.dist[e.copies[v][0]], "out_distance")
    })
}

/// Bicriteria `rho`-independent set for the measure `mu` (one value per
/// vertex). Writes up to `capacity` members to `out_members`, the full
/// member count to `out_len` and the measure of the set to `out_value`.
/// A capacity below the member count fails with `InvalidArgument` after
/// setting `out_len`.
///
/// # Safety
/// `graph` must be a live handle, `mu` must point to one value per vertex,
/// `out_members` to `capacity` writable slots; the other out pointers must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn lowtw_baker_is(
    graph: *const LowtwGraph,
    root: usize,
    rho: f64,
    eps: f64,
    mu: *const f64,
    out_members: *mut usize,
    capacity: usize,
    out_len: *mut usize,
    out_value: *mut f64,
) -> LowtwStatus {
    guard(|| {
        let g = &deref(graph, "graph")?.inner;
        let mu = slice(mu, g.n(), "mu")?;
        let res = bicriteria_is(g, root, rho, eps, mu).map_err(lib)?;
        out(out_len, res.members.len(), "out_len")?;
        if res.members.len() > capacity {
            return Err((LowtwStatus::InvalidArgument, format!("{} members exceed capacity {capacity}", res.members.len())));
        }
        if !res.members.is_empty() {
            if out_members.is_null() {
                return Err(null("out_members"));
            }
            // SAFETY: the caller provides `capacity` slots, checked above.
            ptr::copy_nonoverlapping(res.members.as_ptr(), out_members, res.members.len());
        }
        out(out_value, res.value, "out_value")
    })
}
