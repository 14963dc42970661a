use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use fdp::artifacts;
use fdp::growth::FiberGraph;
use fdp::protocols::{self, Format};
use fdp::render::{render_svg, SvgStyle};
use fdp::script::parse_script;
use fdp::{Diagnostic, Error};

const PASS: u8 = 0;
const CRITERIA_FAIL: u8 = 1;
const INPUT_ERROR: u8 = 2;
const NUMERIC_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "fdp", version, about = "Field-directed polymerization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a script and write its artifacts. Exits 0 when every criterion
    /// passes, 1 when one fails.
    Run {
        script: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Extra geometry snapshot every K growth cycles.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        snapshot_every: Option<u64>,
        /// Comma-separated subset of csv, json, svg; defaults to the script's.
        #[arg(long, value_delimiter = ',', value_parser = parse_format)]
        formats: Option<Vec<Format>>,
    },
    /// Parse and check a script without running it.
    Validate { script: PathBuf },
    /// Draw a fiber-graph snapshot as SVG.
    Render {
        graph: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("unknown format `{s}` (csv, json, svg)"))
}

pub struct RunConfig {
    pub script_path: PathBuf,
    pub seed_override: Option<u64>,
    pub output_dir: PathBuf,
    pub snapshot_every: Option<u64>,
    pub formats: Option<Vec<Format>>,
}

/// Failure printed as one JSON object on stderr.
struct Failure {
    code: u8,
    body: serde_json::Value,
}

impl Failure {
    fn diagnostic(path: &Path, d: &Diagnostic) -> Self {
        Failure {
            code: INPUT_ERROR,
            body: json!({
                "status": "input_error",
                "file": path.display().to_string(),
                "line": d.line,
                "section": d.section,
                "field": d.field,
                "message": d.message,
            }),
        }
    }

    fn input(msg: impl Into<String>) -> Self {
        Failure { code: INPUT_ERROR, body: json!({ "status": "input_error", "message": msg.into() }) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure { code: NUMERIC_FAILURE, body: json!({ "status": "numeric_failure", "message": e.to_string() }) }
        } else {
            Failure::input(e.to_string())
        }
    }
}

fn load(path: &Path) -> Result<protocols::ExperimentScript, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_script(&text).map_err(|d| Failure::diagnostic(path, &d))
}

fn run(cfg: &RunConfig) -> Result<u8, Failure> {
    let mut script = load(&cfg.script_path)?;
    if let Some(seed) = cfg.seed_override {
        script = script.with_seed(seed);
    }
    if let Some(k) = cfg.snapshot_every {
        script.options.snapshot_every = k;
    }
    let formats = cfg.formats.clone().unwrap_or_else(|| script.outputs.clone());
    let report = protocols::run(&script)?;
    let arts = artifacts::build(&report, &script, &formats, &SvgStyle::default())?;
    let manifest = artifacts::manifest(&report, &arts)?;
    artifacts::write_all(&cfg.output_dir, &arts, &manifest)?;
    for c in &report.criteria {
        let v = c.value.map_or("missing".to_string(), |v| format!("{v:.4}"));
        println!("{} {} ({v})", if c.passed { "PASS" } else { "FAIL" }, c.criterion);
    }
    println!("{} artifacts in {}", arts.len() + 1, cfg.output_dir.display());
    Ok(if report.passed() { PASS } else { CRITERIA_FAIL })
}

fn validate(path: &Path) -> Result<u8, Failure> {
    let s = load(path)?;
    println!(
        "ok: {} ({}, {} phases, {} seeds, {} criteria)",
        s.name,
        s.protocol.name(),
        s.phases.len(),
        s.seeds.len(),
        s.criteria.len()
    );
    Ok(PASS)
}

fn render(graph: &Path, out: Option<&Path>) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(graph).map_err(|e| Failure::input(format!("{}: {e}", graph.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", graph.display())))?;
    let (domain, g) = FiberGraph::from_json(&v)?;
    let svg = render_svg(&g, &domain, &SvgStyle::default());
    match out {
        Some(p) => std::fs::write(p, svg).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => print!("{svg}"),
    }
    Ok(PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { script, seed, out, snapshot_every, formats } => run(&RunConfig {
            script_path: script,
            seed_override: seed,
            output_dir: out,
            snapshot_every,
            formats,
        }),
        Command::Validate { script } => validate(&script),
        Command::Render { graph, out } => render(&graph, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
