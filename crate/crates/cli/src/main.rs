//! `thindom` command-line driver.

mod commands;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use thindom::model::{AnnulusStackConfig, GridSpec};

use output::{OutputDir, RunManifest, MANIFEST_NAME};

#[derive(Parser)]
#[command(name = "thindom", version, about = "Spectra, mode export, verification, epsilon sweeps and simulation of the notched thin-domain limit problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the spectrum and write spectrum.csv
    Eigs(commands::EigsArgs),
    /// Compare the analytic spectrum with the finite element oracle
    Verify(commands::VerifyArgs),
    /// Squeezed eigenvalues for a decreasing list of eps
    Sweep(commands::SweepArgs),
    /// Run the reaction-diffusion flow of the limit problem
    Simulate(commands::SimulateArgs),
    /// Export radial mode profiles
    Modes(commands::ModesArgs),
}

/// Config file plus flat overrides.
#[derive(Args, Clone)]
pub struct ConfigArgs {
    /// JSON config document
    #[arg(long)]
    config: PathBuf,
    /// Override the inner radius
    #[arg(long = "r")]
    inner: Option<f64>,
    /// Override the outer radius
    #[arg(long = "R")]
    outer: Option<f64>,
    /// Override the heights, as h1,h2,h3
    #[arg(long = "h")]
    heights: Option<String>,
    /// Override the boundary condition (neumann | dirichlet_lateral)
    #[arg(long)]
    bc: Option<String>,
    /// Override grid.n1
    #[arg(long)]
    n1: Option<usize>,
    /// Override grid.n2
    #[arg(long)]
    n2: Option<usize>,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Solver(anyhow::Error),
    Mismatch,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Mismatch => 4,
        }
    }
}

impl From<thindom::Error> for Failure {
    fn from(e: thindom::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.into())
        } else {
            Failure::Solver(e.into())
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

impl ConfigArgs {
    /// Reads, overrides and validates the config; returns it with the
    /// digest of the file contents.
    pub fn load(&self) -> CmdResult<(AnnulusStackConfig, String)> {
        let bytes = fs::read(&self.config)
            .map_err(|e| Failure::Usage(anyhow!("cannot read config {}: {e}", self.config.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Failure::Usage(anyhow!("config {} is not UTF-8", self.config.display())))?;
        let base = AnnulusStackConfig::from_json(&text)?;
        let heights = match &self.heights {
            None => base.heights,
            Some(s) => {
                let v: Vec<f64> = parse_list(s, "--h")?;
                <[f64; 3]>::try_from(v).map_err(|_| Failure::Usage(anyhow!("--h needs exactly three values")))?
            }
        };
        let bc = match &self.bc {
            None => base.bc,
            Some(s) => s.parse()?,
        };
        let grid = GridSpec {
            n1: self.n1.unwrap_or(base.grid.n1),
            n2: self.n2.unwrap_or(base.grid.n2),
        };
        let cfg = AnnulusStackConfig::with_grid(
            self.inner.unwrap_or(base.inner_radius),
            self.outer.unwrap_or(base.outer_radius),
            heights,
            bc,
            grid,
        )?;
        Ok((cfg, output::digest(&bytes)))
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str, flag: &str) -> CmdResult<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Failure::Usage(anyhow!("bad value {t:?} in {flag}")))
        })
        .collect()
}

pub fn config_params(cfg: &AnnulusStackConfig) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("r".into(), cfg.inner_radius.to_string());
    p.insert("R".into(), cfg.outer_radius.to_string());
    p.insert(
        "h".into(),
        cfg.heights.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","),
    );
    p.insert("bc".into(), cfg.bc.tag().into());
    p.insert("grid.n1".into(), cfg.grid.n1.to_string());
    p.insert("grid.n2".into(), cfg.grid.n2.to_string());
    p
}

/// Runs `body` against the output directory; on success (or a
/// verification mismatch) writes the manifest, otherwise removes
/// everything the command created.
pub fn with_output<F>(
    out: &Path,
    command: &str,
    digest: String,
    params: BTreeMap<String, String>,
    body: F,
) -> CmdResult
where
    F: FnOnce(&mut OutputDir) -> CmdResult,
{
    let started = output::now();
    let mut dir = OutputDir::open(out).map_err(Failure::Usage)?;
    let res = body(&mut dir);
    let outcome = match &res {
        Ok(()) => "ok",
        Err(Failure::Mismatch) => "mismatch",
        Err(_) => {
            dir.discard();
            return res;
        }
    };
    let mut outputs = dir.names();
    outputs.push(MANIFEST_NAME.into());
    let manifest = RunManifest {
        command: command.into(),
        config_digest: digest,
        parameters: params,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started,
        finished: output::now(),
        outputs,
        outcome: outcome.into(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = dir.write(MANIFEST_NAME, &(text + "\n")) {
        dir.discard();
        return Err(Failure::Solver(e));
    }
    res
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let res = match cli.command {
        Command::Eigs(a) => commands::eigs(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Modes(a) => commands::modes(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) | Failure::Solver(e) => eprintln!("error: {e:#}"),
                Failure::Mismatch => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
