//! The `ridgeline` experiment runner.
//!
//! Each subcommand writes a CSV to `--out` (or stdout) and, when `--out` is
//! given, a `<out>.manifest.json` recording the parameters, seed, version,
//! wall time and every file written. Exit status is 0 on success, 2 for
//! usage errors and 3 for numerical failures.

mod commands;
pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::regression::{Family, TargetClass};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ridgeline", version, about = "Ridge-function approximation and rate experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output path for the main artifact; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key value` file of default flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "RIDGELINE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Activation spectrum: closed form against quadrature.
    Spectrum(SpectrumArgs),
    /// Smoothed projection error and variation estimates for a target.
    Project(ProjectArgs),
    /// Monte-Carlo network error across cutoff degrees.
    ApproxSweep(ApproxSweepArgs),
    /// Sample one network from a ridge density.
    Discretize(DiscretizeArgs),
    /// Compile a shallow ReLU network into a CNN and verify it.
    CnnCompile(CnnCompileArgs),
    /// Regression risk against sample size.
    Regress(RegressArgs),
    /// Predicted approximation and regression exponents.
    PredictRates(PredictRatesArgs),
    /// SVG line plot of two CSV columns.
    Plot(PlotArgs),
}

pub const SUBCOMMANDS: [&str; 8] =
    ["spectrum", "project", "approx-sweep", "discretize", "cnn-compile", "regress", "predict-rates", "plot"];

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub nmax: usize,
    /// Quadrature nodes (default `max(nmax + k + 16, 64)`).
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TargetArgs {
    /// Catalog name: holder_profile, abs, gauss_bump or random_shallow.
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub k: u32,
    /// Smoothness of `holder_profile`.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApproxSweepArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long = "m-list", value_delimiter = ',', required = true)]
    pub m_list: Vec<usize>,
    /// Network sizes, one per `m`; the balancing rule when absent.
    #[arg(long = "n-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiscretizeArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long)]
    pub m: usize,
    /// Number of sampled units `N`.
    #[arg(long = "n-units")]
    pub n_units: usize,
    /// Where to write the network (default `<out>.net.txt`).
    #[arg(long = "net-out")]
    pub net_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CnnCompileArgs {
    /// Shallow network in text or JSON form.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Depth; `⌊Nd/(s−1)⌋ + 1` when absent.
    #[arg(long = "L")]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub points: usize,
    /// Where to write the CNN (default `<out>.cnn.txt`).
    #[arg(long = "cnn-out")]
    pub cnn_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegressArgs {
    #[arg(long)]
    pub family: Family,
    #[arg(long = "class")]
    pub class: TargetClass,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long = "n-list", value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = crate::regression::data::DEFAULT_NOISE)]
    pub noise: f64,
    /// Overrides the scheduled variation budget `M_n`.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Catalog target (default by class).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long = "n-mc", default_value_t = 4096)]
    pub n_mc: usize,
    #[arg(long = "max-iter", default_value_t = 2000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictRatesArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub loglog: bool,
}

/// Files produced by a command: the main artifact goes to `--out`, extras
/// to their own paths.
pub struct Artifacts {
    pub main: String,
    pub extra: Vec<(PathBuf, String)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a Command,
    common: &'a Common,
    seed: u64,
    version: &'static str,
    wall_time_s: f64,
    outputs: Vec<String>,
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

/// Appends `suffix` to the full file name of `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(Error::InvalidArgument("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| commands::dispatch(&cli.command, &cli.common))?;

    let mut outputs = Vec::new();
    match &cli.common.out {
        Some(path) => {
            write_file(path, &artifacts.main)?;
            outputs.push(path.display().to_string());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(artifacts.main.as_bytes())?;
        }
    }
    for (path, content) in &artifacts.extra {
        write_file(path, content)?;
        outputs.push(path.display().to_string());
    }
    if let Some(path) = &cli.common.out {
        let manifest = Manifest {
            command: &cli.command,
            common: &cli.common,
            seed: cli.common.seed,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: start.elapsed().as_secs_f64(),
            outputs,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Numerical(e.to_string()))?;
        write_file(&sibling(path, ".manifest.json"), &(json + "\n"))?;
    }
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_config(args, &SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
