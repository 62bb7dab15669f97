//! Experiment pipelines behind the command line: load or generate a graph,
//! run one construction, check it, and emit a versioned report.

mod measure;
mod report;

pub use measure::{
    average_edge_distortion, multiplicative_report, verify_emulator, EmulatorCheck, HostEmbedding,
    MultiplicativeReport, EXHAUSTIVE_PAIR_LIMIT, SAMPLED_PAIRS,
};
pub use report::{from_csv, to_csv, validate_report, Report, Timing, REPORT_VERSION};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::baker::{bicriteria_is, brute_force_rho_is, min_pairwise_distance, MAX_TERMINALS};
use crate::constants::{
    boundary_gap_bound, embed_gap_bound, embed_width_bound, ROOTED_GAP, UNSUCCESSFUL_RATE,
};
use crate::emulator::build_emulator;
use crate::error::{Error, Result};
use crate::graph::{
    all_pairs, is_planar_embedding, validate_tree_decomposition, RootedTree, TreeDecomposition,
    WeightedGraph, TOLERANCE,
};
use crate::instances::{self, WeightMode};
use crate::io::{read_graph, read_td, write_graph, write_td};
use crate::portal::{build_host_graph_with, measure_distortion, measure_portal_distortion};
use crate::rspd::{build_rspd, separation_check, validate_rspd, DEFAULT_ETA};
use crate::stochastic::rooted_distortion_stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Emulator,
    Rspd,
    Embed,
    Stochastic,
    BakerIs,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Emulator => "emulator",
            Algorithm::Rspd => "rspd",
            Algorithm::Embed => "embed",
            Algorithm::Stochastic => "stochastic",
            Algorithm::BakerIs => "baker-is",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "emulator" => Algorithm::Emulator,
            "rspd" => Algorithm::Rspd,
            "embed" => Algorithm::Embed,
            "stochastic" => Algorithm::Stochastic,
            "baker-is" => Algorithm::BakerIs,
            other => return Err(Error::Argument(format!("unknown algorithm '{other}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Generated graph families with their parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Grid with unit weights, or random weights when seeded.
    Grid { rows: usize, cols: usize, seed: Option<u64> },
    Subdiv { rows: usize, cols: usize, k: usize },
    LbInstance { eps: f64, n: Option<usize> },
    Geodesic { n: usize },
    Fractal { n: usize, k: usize },
    Tree { n: usize, seed: u64 },
    Path { n: usize },
}

pub struct Generated {
    pub graph: WeightedGraph,
    /// Structural metadata for the sidecar file; vertex ids are 0-based.
    pub meta: Value,
}

impl Family {
    /// Parses `key=value` pairs separated by commas, e.g. `side=8,seed=3`.
    pub fn parse(name: &str, params: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("parameter '{item}' is not key=value")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |key: &str| -> Result<Option<String>> { Ok(kv.get(key).cloned()) };
        fn num<T: FromStr>(key: &str, v: Option<String>) -> Result<Option<T>> {
            v.map(|s| s.parse().map_err(|_| Error::Argument(format!("bad value '{s}' for '{key}'"))))
                .transpose()
        }
        let need = |key: &str| -> Result<usize> {
            num(key, take(key)?)?.ok_or_else(|| Error::Argument(format!("missing parameter '{key}'")))
        };
        let dims = || -> Result<(usize, usize)> {
            match num::<usize>("side", take("side")?)? {
                Some(s) => Ok((s, s)),
                None => Ok((need("rows")?, need("cols")?)),
            }
        };
        let known: &[&str] = match name {
            "grid" => &["side", "rows", "cols", "seed"],
            "subdiv" => &["side", "rows", "cols", "k"],
            "lbinstance" => &["eps", "n"],
            "geodesic" => &["n"],
            "fractal" => &["n", "k"],
            "tree" => &["n", "seed"],
            "path" => &["n"],
            other => return Err(Error::Argument(format!("unknown family '{other}'"))),
        };
        if let Some(k) = kv.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Argument(format!("family '{name}' takes no parameter '{k}'")));
        }
        Ok(match name {
            "grid" => {
                let (rows, cols) = dims()?;
                Family::Grid { rows, cols, seed: num("seed", take("seed")?)? }
            }
            "subdiv" => {
                let (rows, cols) = dims()?;
                Family::Subdiv { rows, cols, k: need("k")? }
            }
            "lbinstance" => Family::LbInstance {
                eps: num("eps", take("eps")?)?.ok_or_else(|| Error::Argument("missing parameter 'eps'".into()))?,
                n: num("n", take("n")?)?,
            },
            "geodesic" => Family::Geodesic { n: need("n")? },
            "fractal" => Family::Fractal { n: need("n")?, k: need("k")? },
            "tree" => Family::Tree { n: need("n")?, seed: num("seed", take("seed")?)?.unwrap_or(0) },
            _ => Family::Path { n: need("n")? },
        })
    }

    pub fn generate(&self) -> Result<Generated> {
        let meta = serde_json::to_value(self)?;
        Ok(match *self {
            Family::Grid { rows, cols, seed } => {
                let mode = seed.map_or(WeightMode::Unit, WeightMode::Random);
                Generated { graph: instances::grid_rect(rows, cols, mode)?, meta }
            }
            Family::Subdiv { rows, cols, k } => {
                let g = instances::subdivide(&instances::grid_rect(rows, cols, WeightMode::Unit)?, k)?;
                Generated { graph: g, meta: json!({"params": meta, "original_vertices": rows * cols}) }
            }
            Family::LbInstance { eps, n } => {
                let side = instances::lower_bound_side(eps);
                let base = instances::subdivide(&instances::grid(side, WeightMode::Unit)?, 21)?.n();
                let g = instances::lower_bound_instance(eps, n.unwrap_or(base))?;
                Generated { graph: g, meta: json!({"params": meta, "grid_side": side, "pad_vertex": 0}) }
            }
            Family::Geodesic { n } => {
                let q = instances::geodesic_grid(n)?;
                let meta = json!({"params": meta, "structure": q.meta()});
                Generated { graph: q.graph, meta }
            }
            Family::Fractal { n, k } => {
                let f = instances::fractal(n, k, instances::DEFAULT_EDGE_BUDGET)?;
                let meta = json!({
                    "params": meta,
                    "s": f.s,
                    "t": f.t,
                    "base_edge_count": f.base_edge_count,
                    "path_count": f.path_count,
                    "path_hop_length": f.path_hop_length,
                    "copies": f.copies,
                });
                Generated { graph: f.graph, meta }
            }
            Family::Tree { n, seed } => {
                Generated { graph: instances::random_tree(n, seed)?.to_graph(), meta }
            }
            Family::Path { n } => Generated { graph: instances::path_tree(n, 1.0)?.to_graph(), meta },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Input {
    File(PathBuf),
    Generated(Family),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub td: Option<PathBuf>,
    pub map: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub input: Input,
    /// 0-based root vertex.
    pub root: usize,
    pub eps: f64,
    pub eta: usize,
    pub rho: f64,
    pub seed: u64,
    pub trials: usize,
    pub pair_budget: usize,
    pub separation_pairs: usize,
    /// Per-vertex measure file for `baker-is`; uniform when absent.
    pub measure: Option<PathBuf>,
    pub outputs: Outputs,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, input: Input) -> Self {
        ExperimentConfig {
            algorithm,
            input,
            root: 0,
            eps: 0.25,
            eta: DEFAULT_ETA,
            rho: 1.0,
            seed: 0,
            trials: 200,
            pair_budget: 90_000,
            separation_pairs: 200,
            measure: None,
            outputs: Outputs::default(),
            format: Format::Json,
        }
    }

    /// Input files must exist and output directories must be writable targets.
    pub fn check(&self) -> Result<()> {
        let inputs = match &self.input {
            Input::File(p) => vec![p],
            Input::Generated(_) => vec![],
        };
        for p in inputs.into_iter().chain(self.measure.as_ref()) {
            if !p.is_file() {
                return Err(Error::Argument(format!("input file {} does not exist", p.display())));
            }
        }
        let o = &self.outputs;
        for p in [&o.report, &o.graph, &o.td, &o.map].into_iter().flatten() {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            if !dir.is_dir() {
                return Err(Error::Argument(format!("output directory {} does not exist", dir.display())));
            }
        }
        Ok(())
    }
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    read_graph(BufReader::new(File::open(path)?))
}

pub fn load_td(path: &Path) -> Result<TreeDecomposition> {
    read_td(BufReader::new(File::open(path)?))
}

/// Reads a measure: either one value per line in vertex order, or
/// `vertex,value` rows with 1-based vertices (missing vertices get 0).
/// A non-numeric first row is taken as a header.
pub fn load_measure(path: &Path, n: usize) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut mu = vec![0.0; n];
    let mut next = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let fields: Vec<&str> = rec.iter().filter(|s| !s.is_empty()).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|s| s.parse().ok()).collect();
        let bad = || Error::Parse { line: i + 1, msg: "expected 'value' or 'vertex,value'".into() };
        let Some(vals) = parsed else {
            if i == 0 {
                continue;
            }
            return Err(bad());
        };
        let (v, x) = match vals[..] {
            [] => continue,
            [x] => (next, x),
            [v, x] if v >= 1.0 && v.fract() == 0.0 => (v as usize - 1, x),
            _ => return Err(bad()),
        };
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::Parse { line: i + 1, msg: format!("measure {x} is not a finite non-negative number") });
        }
        mu[v] = x;
        next = v + 1;
    }
    Ok(mu)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_report(report: &Report, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Runs the configured pipeline, writes the requested files and returns the
/// report. A failed check yields a report with `passed = false`, not an error.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.check()?;
    let start = Instant::now();
    let g = match &config.input {
        Input::File(p) => load_graph(p)?,
        Input::Generated(f) => f.generate()?.graph,
    };
    g.check_vertex(config.root)?;
    let (passed, result) = match config.algorithm {
        Algorithm::Emulator => run_emulator(&g, config)?,
        Algorithm::Rspd => run_rspd(&g, config)?,
        Algorithm::Embed => run_embed(&g, config)?,
        Algorithm::Stochastic => run_stochastic(&g, config)?,
        Algorithm::BakerIs => run_baker(&g, config)?,
    };
    let report = Report::new(
        config.algorithm.name(),
        serde_json::to_value(config)?,
        passed,
        result,
        start.elapsed().as_secs_f64(),
    );
    if let Some(p) = &config.outputs.report {
        write_report(&report, p, config.format)?;
    }
    Ok(report)
}

fn run_emulator(g: &WeightedGraph, c: &ExperimentConfig) -> Result<(bool, Value)> {
    let edges: Vec<_> = g.edges().iter().map(|e| (e.u, e.v, e.w)).collect();
    let t = RootedTree::from_edges(g.n(), c.root, &edges)?;
    let k = build_emulator(&t);
    let check = verify_emulator(&t, &k)?;
    if let Some(p) = &c.outputs.graph {
        write_graph(&k.graph, create(p)?)?;
    }
    if let Some(p) = &c.outputs.td {
        write_td(&k.decomposition, g.n(), create(p)?)?;
    }
    Ok((check.passed(), serde_json::to_value(check)?))
}

fn run_rspd(g: &WeightedGraph, c: &ExperimentConfig) -> Result<(bool, Value)> {
    let phi = build_rspd(g, c.root, c.eta)?;
    let rep = validate_rspd(g, &phi);
    let sep = separation_check(g, &phi, c.separation_pairs, c.seed);
    let passed = rep.valid() && sep.violations == 0;
    Ok((passed, json!({"eta": c.eta, "validation": rep, "separation": sep})))
}

#[derive(Serialize)]
struct EmbedSummary {
    n: usize,
    diameter: f64,
    spacing: f64,
    width: usize,
    width_bound: f64,
    host_vertices: usize,
    host_edges: usize,
    decomposition_valid: bool,
    distortion: crate::portal::DistortionReport,
    gap_bound: f64,
    portal_pairs: usize,
    portal_max_gap: f64,
    portal_gap_bound: f64,
}

fn run_embed(g: &WeightedGraph, c: &ExperimentConfig) -> Result<(bool, Value)> {
    let dist = all_pairs(g);
    let phi = build_rspd(g, c.root, c.eta)?;
    let e = build_host_graph_with(g, &phi, c.eps, &dist)?;
    let distortion = measure_distortion(g, &e, &dist, c.pair_budget)?;
    let (portal_pairs, portal_max_gap) = measure_portal_distortion(&e, &dist, 30, c.seed)?;
    let td = validate_tree_decomposition(&e.host, &e.host_decomposition);
    let s = EmbedSummary {
        n: g.n(),
        diameter: e.diameter,
        spacing: e.spacing,
        width: e.width(),
        width_bound: embed_width_bound(c.eps, g.n()),
        host_vertices: e.host.n(),
        host_edges: e.host.m(),
        decomposition_valid: td.valid(),
        gap_bound: embed_gap_bound(c.eps, e.diameter),
        portal_pairs,
        portal_max_gap,
        portal_gap_bound: boundary_gap_bound(c.eps, e.diameter),
        distortion,
    };
    let passed = s.decomposition_valid
        && s.distortion.dominating()
        && s.distortion.max_gap <= s.gap_bound + TOLERANCE
        && s.portal_max_gap <= s.portal_gap_bound + TOLERANCE
        && s.width as f64 <= s.width_bound;
    if let Some(p) = &c.outputs.graph {
        write_graph(&e.host, create(p)?)?;
    }
    if let Some(p) = &c.outputs.td {
        write_td(&e.host_decomposition, e.host.n(), create(p)?)?;
    }
    if let Some(p) = &c.outputs.map {
        let mut w = create(p)?;
        for (x, &v) in e.preimage.iter().enumerate() {
            match e.copy_node[x] {
                Some(node) => writeln!(w, "{} {} {}", v + 1, x + 1, node)?,
                None => writeln!(w, "{} {} -", v + 1, x + 1)?,
            }
        }
        w.flush()?;
    }
    Ok((passed, serde_json::to_value(s)?))
}

fn run_stochastic(g: &WeightedGraph, c: &ExperimentConfig) -> Result<(bool, Value)> {
    let stats = rooted_distortion_stats(g, c.root, c.eps, c.trials, c.seed)?;
    let rate_bound = UNSUCCESSFUL_RATE * c.eps;
    let passed = stats.dominating()
        && stats.max_unsuccessful_rate <= rate_bound
        && stats.max_successful_ratio <= ROOTED_GAP;
    Ok((
        passed,
        json!({"stats": stats, "unsuccessful_rate_bound": rate_bound, "successful_ratio_bound": ROOTED_GAP}),
    ))
}

fn run_baker(g: &WeightedGraph, c: &ExperimentConfig) -> Result<(bool, Value)> {
    let mu = match &c.measure {
        Some(p) => load_measure(p, g.n())?,
        None => vec![1.0; g.n()],
    };
    let out = bicriteria_is(g, c.root, c.rho, c.eps, &mu)?;
    let separation = min_pairwise_distance(g, &out.members)?;
    let required = (1.0 - out.eps) * c.rho;
    let independent = separation + TOLERANCE >= required;
    let optimum = if g.n() <= MAX_TERMINALS {
        let all: Vec<usize> = (0..g.n()).collect();
        Some(brute_force_rho_is(g, c.rho, &mu, &all)?)
    } else {
        None
    };
    let competitive = optimum.as_ref().map(|o| out.value + TOLERANCE >= (1.0 - out.eps) * o.value);
    let passed = independent && competitive.unwrap_or(true);
    Ok((
        passed,
        json!({
            "rho": c.rho,
            "result": out,
            "min_pairwise_distance": if separation.is_finite() { Some(separation) } else { None },
            "required_separation": required,
            "optimum": optimum,
            "within_factor_of_optimum": competitive,
        }),
    ))
}

/// Checks a graph file and, optionally, a tree decomposition of it.
pub fn verify_files(graph: &Path, td: Option<&Path>) -> Result<Report> {
    let start = Instant::now();
    let g = load_graph(graph)?;
    let connected = g.is_connected();
    let planar = if g.has_rotation() { Some(is_planar_embedding(&g)?) } else { None };
    let td_report = td.map(|p| load_td(p).map(|t| validate_tree_decomposition(&g, &t))).transpose()?;
    let passed = connected && planar.unwrap_or(true) && td_report.as_ref().is_none_or(|r| r.valid());
    let result = json!({
        "n": g.n(),
        "m": g.m(),
        "connected": connected,
        "planar_rotation": planar,
        "decomposition": td_report,
    });
    let config = json!({"graph": graph, "td": td});
    Ok(Report::new("verify", config, passed, result, start.elapsed().as_secs_f64()))
}

/// Process exit code for an error: 1 usage, 2 validation, 3 resource.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => 3,
        Error::Validation(_) | Error::Disconnected | Error::Embedding(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parsing() {
        assert_eq!(Family::parse("grid", "side=8").unwrap(), Family::Grid { rows: 8, cols: 8, seed: None });
        assert_eq!(
            Family::parse("fractal", "n=2, k=1").unwrap(),
            Family::Fractal { n: 2, k: 1 }
        );
        assert!(Family::parse("grid", "side=8,bogus=1").is_err());
        assert!(Family::parse("cube", "").is_err());
        assert!(Family::parse("geodesic", "").is_err());
    }

    #[test]
    fn unknown_algorithm_is_a_usage_error() {
        let e = "spanner".parse::<Algorithm>().unwrap_err();
        assert_eq!(exit_code(&e), 1);
        assert_eq!("baker-is".parse::<Algorithm>().unwrap(), Algorithm::BakerIs);
    }

    #[test]
    fn emulator_on_path() {
        let c = ExperimentConfig::new(Algorithm::Emulator, Input::Generated(Family::Path { n: 10 }));
        let r = run(&c).unwrap();
        assert!(r.passed);
        assert_eq!(r.result["max_error"], json!(0.0));
        assert!(r.result["hop_bound"].as_u64().unwrap() >= 2);
    }

    #[test]
    fn embed_on_grid() {
        let mut c = ExperimentConfig::new(
            Algorithm::Embed,
            Input::Generated(Family::Grid { rows: 8, cols: 8, seed: None }),
        );
        c.eps = 0.25;
        let r = run(&c).unwrap();
        assert!(r.passed, "{}", r.result);
        assert!(r.result["distortion"]["min_gap"].as_f64().unwrap() >= -1e-9);
        assert!(r.result["host_vertices"].as_u64().unwrap() >= 64);
    }
}
