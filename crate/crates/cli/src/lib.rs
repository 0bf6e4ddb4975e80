//! `mazur`: reproducible experiments on finite truncations of the Mazur operator.
//!
//! Every subcommand reads an optional JSON config, applies flag overrides,
//! stages its outputs in memory and writes them atomically together with a
//! manifest of SHA-256 hashes. Exit codes: 0 success, 2 configuration error,
//! 3 numerical failure, 1 I/O failure.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mazur_core::seqspace::EnumerationMode;

use artifacts::{commit, Artifacts};
use commands::RunError;
use config::{ConfigError, ExperimentConfig, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Output directory when neither `--out`, the config, nor `MAZUR_OUT_DIR` set one.
pub const DEFAULT_OUT_DIR: &str = "mazur-out";

#[derive(Debug, Parser)]
#[command(
    name = "mazur",
    version,
    about = "Finite-truncation experiments for the Mazur operator l1 -> l2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON experiment config; flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Enumeration mode: canonical, no-singleton or adversarial:N
    #[arg(long, global = true)]
    pub mode: Option<EnumerationMode>,

    /// Column budget
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Row truncation
    #[arg(long, global = true)]
    pub m: Option<usize>,

    /// Selection depth
    #[arg(long = "L", global = true)]
    pub levels: Option<usize>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (default: $MAZUR_OUT_DIR, then ./mazur-out)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// First n terms of the sphere enumeration
    Enumerate,
    /// Finite section B_{m,n} as a dense matrix
    Build,
    /// Greedy Riesz selection of depth L and the matrix of T
    Select,
    /// One l1-Tikhonov solve on the selected subspace
    Tikhonov,
    /// Error of the l1-Tikhonov minimizer along a noise grid
    Study,
    /// Unrestricted l1-Tikhonov on growing sections
    Probe,
    /// Minimal-norm dual certificate LP
    Certify,
    /// Rank and extreme singular values of sections
    Rank,
    /// Quotient-norm distance for a matrix operator
    Qdist,
    /// Well-posedness verdicts for the operator catalog
    Classify,
    /// Factorization identities on random rank-deficient matrices
    Factor,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::Build => "build",
            Command::Select => "select",
            Command::Tikhonov => "tikhonov",
            Command::Study => "study",
            Command::Probe => "probe",
            Command::Certify => "certify",
            Command::Rank => "rank",
            Command::Qdist => "qdist",
            Command::Classify => "classify",
            Command::Factor => "factor",
        }
    }

    pub fn execute(self, cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
        match self {
            Command::Enumerate => commands::enumerate(cfg),
            Command::Build => commands::build(cfg),
            Command::Select => commands::select(cfg),
            Command::Tikhonov => commands::tikhonov(cfg),
            Command::Study => commands::study(cfg),
            Command::Probe => commands::probe(cfg),
            Command::Certify => commands::certify(cfg),
            Command::Rank => commands::rank(cfg),
            Command::Qdist => commands::qdist_cmd(cfg),
            Command::Classify => commands::classify_cmd(cfg),
            Command::Factor => commands::factor(cfg),
        }
    }
}

/// Loads the config file (if any) and applies the flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                line: None,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            ExperimentConfig::from_json(&text).map_err(|mut e| {
                e.message = format!("{}: {}", path.display(), e.message);
                e
            })?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = cli.mode {
        cfg.mode = v;
    }
    if let Some(v) = cli.n {
        cfg.n = v;
    }
    if let Some(v) = cli.m {
        cfg.m = v;
    }
    if let Some(v) = cli.levels {
        cfg.levels = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.validate(None)?;
    Ok(cfg)
}

pub fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out
        .clone()
        .or_else(|| std::env::var_os("MAZUR_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Parses arguments, runs one subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let artifacts = match cli.command.execute(&cfg) {
        Ok(a) => a,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
        Err(RunError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            return EXIT_NUMERICAL;
        }
    };
    let dir = out_dir(&cfg);
    // where outputs land does not affect them; keep manifests location-independent
    let echoed = ExperimentConfig { out: None, ..cfg };
    match commit(&dir, cli.command.name(), &echoed, &artifacts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", dir.display());
            EXIT_IO
        }
    }
}
