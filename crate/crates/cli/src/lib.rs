//! Command-line driver: parses flags and a TOML config, runs one command
//! and writes a JSON report.

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use warpgraph::Error;

use config::{read_file_config, resolve, Command, FileConfig, Overrides, RunConfig};
use report::{envelope, error_status, write_report, Status};

#[derive(Debug, Parser)]
#[command(name = "warpgraph", version, about = "Minimal graphs in warped products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Sub {
    /// Classify a warping function against the theorem hypotheses.
    ClassifyWarp,
    /// Convergence study of the Laplacian identities.
    VerifyIdentities,
    /// First integrals, ODE round trips and witnesses of the two counterexamples.
    VerifyCounterexamples,
    /// Solve the minimal-surface equation.
    Solve,
    /// Relax toward a minimal graph by mean curvature flow.
    Flow,
    /// Report which uniqueness theorems apply to the initial field.
    Hypotheses,
    /// Solve on a box with f = 1 and measure area inside Euclidean balls.
    AreaGrowth,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::ClassifyWarp => Command::ClassifyWarp,
            Sub::VerifyIdentities => Command::VerifyIdentities,
            Sub::VerifyCounterexamples => Command::VerifyCounterexamples,
            Sub::Solve => Command::Solve,
            Sub::Flow => Command::Flow,
            Sub::Hypotheses => Command::Hypotheses,
            Sub::AreaGrowth => Command::AreaGrowth,
        }
    }
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    let v = floats(s)?;
    <[f64; 2]>::try_from(v).map_err(|_| format!("expected two numbers, got `{s}`"))
}

fn triple(s: &str) -> Result<[f64; 3], String> {
    let v = floats(s)?;
    <[f64; 3]>::try_from(v).map_err(|_| format!("expected three numbers, got `{s}`"))
}

fn floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// TOML config with [grid] [warp] [init] [solver] [analysis] [output].
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Grid shorthand, e.g. torus2:64 or box1:33.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Warping preset: constant, cosh, exp, counter-a, counter-b.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Two-column CSV (t, f) for a tabulated warping function.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Restrict the warping function to (a, b), given as `a,b`.
    #[arg(long, global = true, value_parser = pair, allow_hyphen_values = true)]
    pub domain: Option<[f64; 2]>,
    /// Initial field preset: zero, constant:c, affine:a,b,c, sincos:A, tanh[:s], random:A, scherk:a.
    #[arg(long, global = true)]
    pub init: Option<String>,
    /// Initial field from a CSV or .bin file.
    #[arg(long, global = true)]
    pub init_file: Option<PathBuf>,
    /// newton, descent or flow.
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Residual tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Keep a flow snapshot every k steps.
    #[arg(long, global = true)]
    pub snapshot_every: Option<usize>,
    /// Tolerance of the sign tests on f' and (log f)''.
    #[arg(long, global = true)]
    pub sign_tol: Option<f64>,
    /// Identities or counterexamples to check, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub which: Option<Vec<String>>,
    /// Refinement levels for identity checks.
    #[arg(long, global = true, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    /// Ball radii for area growth.
    #[arg(long, global = true, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Ball center `x,y,t`.
    #[arg(long, global = true, value_parser = triple, allow_hyphen_values = true)]
    pub center: Option<[f64; 3]>,
    /// Solve before checking hypotheses and compare with the prediction.
    #[arg(long, global = true)]
    pub solve_first: bool,
    /// Output directory (default: $WARPGRAPH_OUT or ./warpgraph-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Field file format: csv, binary or none.
    #[arg(long, global = true)]
    pub fields: Option<String>,
}

impl Opts {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            grid: self.grid.clone(),
            preset: self.preset.clone(),
            table: self.table.clone(),
            domain: self.domain,
            init: self.init.clone(),
            init_file: self.init_file.clone(),
            method: self.method.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            snapshot_every: self.snapshot_every,
            sign_tol: self.sign_tol,
            which: self.which.clone(),
            counts: self.counts.clone(),
            radii: self.radii.clone(),
            center: self.center,
            solve_first: self.solve_first,
            out: self.out.clone(),
            fields: self.fields.clone(),
        }
    }
}

/// Parse the config file (if any) and merge the flags into it.
pub fn parse_config(command: Command, opts: &Opts) -> warpgraph::Result<RunConfig> {
    let file = match &opts.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    resolve(command, file, &opts.overrides())
}

/// Run one command, write its report and return the exit code.
pub fn run(cli: &Cli) -> i32 {
    let command: Command = cli.command.into();
    let name = command.name();
    let cfg = match parse_config(command, &cli.opts) {
        Ok(c) => c,
        Err(e) => {
            let dir = cli.opts.out.clone().unwrap_or_else(|| {
                std::env::var_os(config::OUT_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("warpgraph-out"))
            });
            return emit(name, &dir, Value::Null, Status::InvalidInput, Value::Null, Some(&e), 0.0);
        }
    };
    let cfg_json = serde_json::to_value(&cfg).expect("config is plain data");
    match commands::execute(&cfg) {
        Ok(o) => emit(name, &cfg.output.dir, cfg_json, o.status, o.result, None, o.wall_time),
        Err(e) => emit(name, &cfg.output.dir, cfg_json, error_status(&e), Value::Null, Some(&e), 0.0),
    }
}

fn emit(
    name: &str,
    dir: &std::path::Path,
    cfg: Value,
    status: Status,
    result: Value,
    err: Option<&Error>,
    wall: f64,
) -> i32 {
    if let Some(e) = err {
        eprintln!("error: {e}");
    }
    let report = envelope(name, cfg, status, result, err.map(|e| e.to_string()), wall);
    match write_report(dir, name, &report) {
        Ok(path) => eprintln!("{name}: {:?} ({})", status, path.display()),
        Err(e) => eprintln!("{name}: could not write the report to {}: {e}", dir.display()),
    }
    // a closed pipe on stdout is not an error of the run
    let _ = writeln!(
        std::io::stdout().lock(),
        "{}",
        serde_json::to_string_pretty(&report).expect("reports are plain JSON")
    );
    status.exit_code()
}
