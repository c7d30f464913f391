//! Command-line front end: configuration, commands and output encoding.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_bounds, cmd_certify, cmd_simulate, cmd_sweep};
pub use config::{Format, RunConfig};
pub use output::Report;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qcp", version, about = "Unambiguous quantum change-point identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Upper bound, adaptive lower bound and exact value for one N.
    Bounds,
    /// Bounds for a range of N as CSV.
    Sweep,
    /// Build and verify the optimal tester for a unitary pair.
    Certify,
    /// Monte Carlo check of the adaptive strategy.
    Simulate,
}

/// Overrides applied on top of the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, conflicts_with = "n_range")]
    pub n: Option<usize>,
    /// Inclusive range `A:B`.
    #[arg(long, global = true, value_parser = parse_range)]
    pub n_range: Option<[usize; 2]>,
    /// Change point for `simulate`.
    #[arg(long, global = true)]
    pub k: Option<usize>,
}

fn parse_range(s: &str) -> std::result::Result<[usize; 2], String> {
    let (a, b) = s.split_once(':').ok_or("expected A:B")?;
    let a = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok([a, b])
}

impl Flags {
    /// Config file (if any) with the flags layered on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.n.is_some() {
            cfg.n = self.n;
            cfg.n_range = None;
        }
        if self.n_range.is_some() {
            cfg.n_range = self.n_range;
            cfg.n = None;
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if self.$f.is_some() { cfg.$f = self.$f.clone(); } )* };
        }
        over!(format, out, grid, trials, seed, k);
        Ok(cfg)
    }
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<Report> {
    match command {
        Command::Bounds => cmd_bounds(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Certify => cmd_certify(cfg),
        Command::Simulate => cmd_simulate(cfg),
    }
}

/// Run the tool and return its exit code: 0 success, 1 invalid input,
/// 2 verification failure. A well-formed document is emitted either way.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match cli.flags.resolve() {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e, cli.flags.format, cli.flags.out.as_deref()),
    };
    let out = cfg.out.clone();
    match run_command(cli.command, &cfg) {
        Ok(report) => {
            if let Err(e) = output::emit(&report.render(cfg.format), out.as_deref()) {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
            if report.passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => fail(&e, cfg.format, out.as_deref()),
    }
}

fn fail(e: &Error, format: Option<Format>, out: Option<&std::path::Path>) -> i32 {
    eprintln!("error: {e}");
    let (kind, code) = match e {
        Error::Verification { .. } => ("verification", EXIT_FAILED),
        Error::Validation(_) => ("validation", EXIT_INVALID),
        Error::Config(_) => ("config", EXIT_INVALID),
        Error::Io(_) => ("io", EXIT_INVALID),
        Error::Consistency(_) => ("consistency", EXIT_FAILED),
    };
    if format != Some(Format::Csv) {
        let doc = serde_json::json!({"status": "error", "kind": kind, "message": e.to_string()});
        let _ = output::emit(&output::render_json(&doc), out);
    }
    code
}
