use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lowtw::harness::{
    self, exit_code, from_csv, run, to_csv, verify_files, Algorithm, ExperimentConfig, Family, Format, Input,
    Outputs, Report,
};
use lowtw::io::write_graph;
use lowtw::{Error, Result};

#[derive(Parser)]
#[command(name = "lowtw", version, about = "Low-treewidth embeddings of trees and planar graphs")]
struct Cli {
    /// Random seed recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Report encoding.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and a sidecar JSON of its structure.
    Gen {
        #[arg(long)]
        family: String,
        /// Comma-separated key=value pairs, e.g. side=8,seed=3.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: PathBuf,
        /// Sidecar path (default: the output path with ".json" appended).
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Build and verify a low-hop emulator of a tree.
    Emulator {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        td: Option<PathBuf>,
    },
    /// Build and validate a rooted shortest-path decomposition.
    Rspd {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = lowtw::rspd::DEFAULT_ETA)]
        eta: usize,
    },
    /// Embed a planar graph into a low-treewidth host.
    Embed {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        td: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Pairs measured; all pairs when n^2 fits.
        #[arg(long, default_value_t = 90_000)]
        pair_budget: usize,
    },
    /// Monte Carlo statistics of the rooted stochastic embedding.
    Stochastic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Bicriteria rho-independent set.
    BakerIs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Measure file: one value per line, or vertex,value rows.
        #[arg(long)]
        mu: Option<PathBuf>,
    },
    /// Check a graph file and optionally a tree decomposition of it.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        td: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Validate reports and summarize them.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long = "in")]
    input: PathBuf,
    /// Root vertex, 1-based.
    #[arg(long, default_value_t = 1)]
    root: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn config(cli: &Cli, algorithm: Algorithm, common: &Common) -> Result<ExperimentConfig> {
    let root = common
        .root
        .checked_sub(1)
        .ok_or_else(|| Error::Argument("vertex ids are 1-based".into()))?;
    let mut c = ExperimentConfig::new(algorithm, Input::File(common.input.clone()));
    c.root = root;
    c.seed = cli.seed;
    c.format = cli.format.into();
    c.outputs = Outputs { report: common.report.clone(), ..Outputs::default() };
    Ok(c)
}

fn emit(report: &Report, to: Option<&Path>, format: Format) -> Result<()> {
    match to {
        Some(p) => {
            harness::write_report(report, p, format)?;
            println!("{} {}", report.algorithm, if report.passed { "PASS" } else { "FAIL" });
        }
        None => {
            let text = match format {
                Format::Json => report.to_json()?,
                Format::Csv => report.to_csv()?,
            };
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn read_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text)?
    } else {
        from_csv(&text)?
    };
    Report::from_value(value)
}

fn execute(cli: &Cli) -> Result<bool> {
    let format: Format = cli.format.into();
    let mut c = match &cli.command {
        Command::Gen { family, params, out, meta } => {
            let generated = Family::parse(family, params)?.generate()?;
            write_graph(&generated.graph, std::io::BufWriter::new(std::fs::File::create(out)?))?;
            let meta_path = meta.clone().unwrap_or_else(|| {
                let mut s = out.clone().into_os_string();
                s.push(".json");
                s.into()
            });
            let sidecar = json!({
                "vertices": generated.graph.n(),
                "edges": generated.graph.m(),
                "index_base": 0,
                "meta": generated.meta,
            });
            std::fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
            return Ok(true);
        }
        Command::Verify { input, td, report } => {
            let r = verify_files(input, td.as_deref())?;
            emit(&r, report.as_deref(), format)?;
            return Ok(r.passed);
        }
        Command::Report { files } => {
            let mut rows = Vec::new();
            let mut all = true;
            for f in files {
                let row = match read_report(f) {
                    Ok(r) => {
                        all &= r.passed;
                        json!({"file": f, "algorithm": r.algorithm, "passed": r.passed,
                               "wall_seconds": r.timing.wall_seconds})
                    }
                    Err(e) => {
                        all = false;
                        json!({"file": f, "error": e.to_string(), "passed": false})
                    }
                };
                rows.push(row);
            }
            let summary = json!({"reports": rows, "all_passed": all});
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
                Format::Csv => to_csv(&summary)?,
            };
            std::io::stdout().write_all(text.as_bytes())?;
            return Ok(all);
        }
        Command::Emulator { common, out, td } => {
            let mut c = config(cli, Algorithm::Emulator, common)?;
            c.outputs.graph = out.clone();
            c.outputs.td = td.clone();
            c
        }
        Command::Rspd { common, eta } => {
            let mut c = config(cli, Algorithm::Rspd, common)?;
            c.eta = *eta;
            c
        }
        Command::Embed { common, eps, out, td, map, pair_budget } => {
            let mut c = config(cli, Algorithm::Embed, common)?;
            c.eps = *eps;
            c.pair_budget = *pair_budget;
            c.outputs.graph = out.clone();
            c.outputs.td = td.clone();
            c.outputs.map = map.clone();
            c
        }
        Command::Stochastic { common, eps, trials } => {
            let mut c = config(cli, Algorithm::Stochastic, common)?;
            c.eps = *eps;
            c.trials = *trials;
            c
        }
        Command::BakerIs { common, rho, eps, mu } => {
            let mut c = config(cli, Algorithm::BakerIs, common)?;
            c.rho = *rho;
            c.eps = *eps;
            c.measure = mu.clone();
            c
        }
    };
    // The report is emitted here rather than inside `run`.
    let to = c.outputs.report.take();
    let report = run(&c)?;
    emit(&report, to.as_deref(), format)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
