//! Configuration-driven experiment runner for `qglab-core`.
//!
//! Each subcommand runs one pipeline over a size sweep and writes
//! `<command>.csv` (plus any extra tables), `<command>.dat`,
//! `<command>.json` and `<command>.meta.json` into the output directory.
//! Exit code `0` means every criterion passed, `2` that at least one
//! failed and `1` that the run could not be completed.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};

use crate::config::Config;
use crate::output::{artifact_path, write_bytes};
use crate::report::{Outcome, RunMeta};

/// Output directory when neither flag, environment nor config names one.
pub const DEFAULT_OUT_DIR: &str = "qglab-out";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qglab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool error: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    GapSweep,
    WStats,
    SourceScaling,
    ContractionCheck,
    CosetVerify,
    FormFactor,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GapSweep => "gap-sweep",
            Command::WStats => "w-stats",
            Command::SourceScaling => "source-scaling",
            Command::ContractionCheck => "contraction-check",
            Command::CosetVerify => "coset-verify",
            Command::FormFactor => "form-factor",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "qglab", version, about = "Quantum-graph ensemble experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "QGLAB_OUT")]
    pub out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Suppress the per-criterion summary.
    #[arg(long, short)]
    pub quiet: bool,
}

impl Cli {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve_config(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(threads) = self.threads {
            cfg.threads = threads;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        Ok(cfg)
    }
}

/// Runs `command` inside a pool of `cfg.threads` workers.
pub fn run_with_threads(command: Command, cfg: &Config) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    pool.install(|| commands::run(command, cfg))
}

/// Writes every artifact of `outcome` into `dir`.
pub fn write_outcome(dir: &Path, outcome: &Outcome, meta: &RunMeta) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let stem = outcome.report.command.as_str();
    let mut written = Vec::new();
    for t in &outcome.tables {
        let p = artifact_path(dir, stem, &t.suffix, "csv");
        write_bytes(&p, &t.to_csv()?)?;
        written.push(p);
    }
    for s in &outcome.series {
        let p = artifact_path(dir, stem, &s.suffix, "dat");
        write_bytes(&p, &s.to_dat())?;
        written.push(p);
    }
    let p = artifact_path(dir, stem, "", "json");
    let mut json = serde_json::to_vec_pretty(&outcome.report)?;
    json.push(b'\n');
    write_bytes(&p, &json)?;
    written.push(p);
    let p = artifact_path(dir, stem, "meta", "json");
    let mut json = serde_json::to_vec_pretty(meta)?;
    json.push(b'\n');
    write_bytes(&p, &json)?;
    written.push(p);
    Ok(written)
}

/// Full run: resolve, compute, write. Returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let cfg = cli.resolve_config()?;
    let start = Instant::now();
    let outcome = run_with_threads(cli.command, &cfg)?;
    let meta = RunMeta {
        command: cli.command.name().into(),
        unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        runtime_seconds: start.elapsed().as_secs_f64(),
        threads: if cfg.threads == 0 { rayon::current_num_threads() } else { cfg.threads },
    };
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let written = write_outcome(&dir, &outcome, &meta)?;
    if !cli.quiet {
        for c in &outcome.report.criteria {
            println!("[{}] criterion {} {:?}: {}", if c.passed { "PASS" } else { "FAIL" }, c.number, c.id, c.detail);
        }
        for f in &outcome.report.failures {
            println!("[ERROR] {}: {}", f.task, f.error);
        }
        for p in &written {
            println!("wrote {}", p.display());
        }
    }
    Ok(if outcome.report.all_passed { 0 } else { 2 })
}
