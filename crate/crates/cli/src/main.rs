//! `eigenstrain`: residual-stress eigenstrain analyses from the command line.
//!
//! Parameters come from an optional TOML file (`--config`), one table per
//! subcommand plus `[material]`, and `--key=value` overrides. Every run writes its
//! artifacts and a JSON report to `--out`; errors go to stderr as JSON.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "eigenstrain", version, about = "Eigenstrain analysis of residual stress")]
struct Cli {
    /// TOML file with `[material]` and per-subcommand tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Embed the generation time in SVG files.
    #[arg(long, global = true)]
    stamp: bool,
    /// Parameter override `key=value`; `--key=value` is accepted as well.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    set: Vec<(String, String)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Polynomial eigenstrain in a cylinder to a stress profile CSV.
    AxisymForward,
    /// Fit a polynomial eigenstrain to a stress profile.
    AxisymFit,
    /// Fit eigenstrain and a radial d0 polynomial to lattice spacings.
    AxisymFitD0,
    /// Fit a Maxwell stress function to stress samples in a cube.
    CubeFit,
    /// Trivial, potential and solenoidal eigenstrains of a cube stress field.
    Decompose,
    /// Simulated longitudinal-ray-transform projections of elastic strain.
    LrtSim,
    /// Stress reconstruction from LRT-visible strain under mesh refinement.
    LinkCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::AxisymForward => "axisym-forward",
            Command::AxisymFit => "axisym-fit",
            Command::AxisymFitD0 => "axisym-fit-d0",
            Command::CubeFit => "cube-fit",
            Command::Decompose => "decompose",
            Command::LrtSim => "lrt-sim",
            Command::LinkCheck => "link-check",
        }
    }

    /// Config table name.
    pub fn section(self) -> String {
        self.name().replace('-', "_")
    }
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected KEY=VALUE, got `{s}`")),
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or parameters.
    Usage(String),
    /// Unreadable configuration file.
    Config(String),
    /// Solver or fit failure detected by the tool itself.
    Numerical(String),
    Lib(eigenstrain::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use eigenstrain::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numerical(_) => 1,
            CliError::Lib(E::Parse { .. } | E::Io { .. }) => 3,
            CliError::Lib(E::InvalidInput(_) | E::MeshMismatch | E::EmptyMesh | E::MeshTooSmall(_)) => 2,
            CliError::Lib(_) => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        use eigenstrain::Error as E;
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Config(m) => ("config", m.clone()),
            CliError::Numerical(m) => ("numerical", m.clone()),
            CliError::Lib(e @ (E::Parse { .. } | E::Io { .. })) => ("io", e.to_string()),
            CliError::Lib(e @ (E::InvalidInput(_) | E::MeshMismatch | E::EmptyMesh | E::MeshTooSmall(_))) => ("invalid_input", e.to_string()),
            CliError::Lib(e) => ("numerical", e.to_string()),
        };
        let mut v = json!({ "error": { "kind": kind, "message": message, "exit_code": self.exit_code() } });
        if let CliError::Lib(E::Parse { path, line, .. }) = self {
            v["error"]["path"] = json!(path);
            v["error"]["line"] = json!(line);
        }
        v
    }
}

impl From<eigenstrain::Error> for CliError {
    fn from(e: eigenstrain::Error) -> Self {
        CliError::Lib(e)
    }
}

const GLOBAL_FLAGS: [&str; 6] = ["config", "out", "set", "stamp", "help", "version"];

/// Splits `--key=value` overrides for non-global keys out of the argument list.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        if let Some((k, v)) = a.strip_prefix("--").and_then(|s| s.split_once('=')) {
            if !GLOBAL_FLAGS.contains(&k) && !k.is_empty() {
                overrides.push((k.to_string(), v.to_string()));
                continue;
            }
        }
        rest.push(a);
    }
    (rest, overrides)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let (args, mut overrides) = split_overrides(std::env::args().collect());
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { ExitCode::from(2) } else { ExitCode::SUCCESS };
            }
            eprint!("{}", e.render());
            return fail(&CliError::Usage(e.kind().to_string()));
        }
    };
    overrides.extend(cli.set.iter().cloned());
    let section = cli.command.section();
    let (cfg, _) = match config::load(cli.config.as_deref(), &section, &overrides) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let ctx = commands::Ctx { cfg, config_path: cli.config.clone(), out: cli.out.clone(), stamp: cli.stamp };
    match commands::run(cli.command, &ctx) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
