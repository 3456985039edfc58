//! `entdomain`: poles, stability, steady-state covariance, entanglement maps
//! and line sweeps for two atoms near a conducting plate.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::Status;
use config::{Loader, RunConfig, Task};
use error::CliError;
use output::{to_json, Sink};

#[derive(Parser)]
#[command(name = "entdomain", version, about = "Entanglement domain of two atoms near a conducting plate")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Sectioned TOML config file ([physical], [numerics], [task], [output]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set z1=1.8` or `--set numerics.cutoff=200`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Output file; `-` for stdout.
    #[arg(long, global = true)]
    out: Option<String>,

    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Shorthand for `--set z1=...`; likewise for the flags below.
    #[arg(long, global = true)]
    z1: Option<f64>,
    #[arg(long, global = true)]
    z2: Option<f64>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<f64>,
}

#[derive(clap::Args, Clone, Default)]
struct Assignments {
    /// Trailing `key=value` overrides, applied after `--set`.
    #[arg(value_name = "KEY=VALUE")]
    assignments: Vec<String>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Complex poles of the kernel determinant.
    Poles(Assignments),
    /// Stability verdict and margin.
    Stability(Assignments),
    /// Steady-state covariance and its symplectic analysis.
    Covariance(Assignments),
    /// Purity and entropy of each atom.
    Purity(Assignments),
    /// Entanglement map over (rho, z2).
    Map(Assignments),
    /// One-parameter sweep.
    Line(Assignments),
    /// Run the task named in the config.
    Run(Assignments),
}

impl Command {
    fn task(&self) -> Option<Task> {
        match self {
            Command::Poles(_) => Some(Task::Poles),
            Command::Stability(_) => Some(Task::Stability),
            Command::Covariance(_) => Some(Task::Covariance),
            Command::Purity(_) => Some(Task::Purity),
            Command::Map(_) => Some(Task::Map),
            Command::Line(_) => Some(Task::Line),
            Command::Run(_) => None,
        }
    }

    fn assignments(&self) -> &[String] {
        match self {
            Command::Poles(a)
            | Command::Stability(a)
            | Command::Covariance(a)
            | Command::Purity(a)
            | Command::Map(a)
            | Command::Line(a)
            | Command::Run(a) => &a.assignments,
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut loader = Loader::new();
    if let Some(p) = &cli.config {
        loader = loader.file(p)?;
    }
    loader = loader.env(std::env::vars())?;
    if let Some(t) = cli.command.task() {
        loader = loader.set(&format!("task.kind={}", t.name()))?;
    }
    let shorthands = [
        ("z1", cli.z1),
        ("z2", cli.z2),
        ("rho", cli.rho),
        ("gamma", cli.gamma),
        ("beta", cli.beta),
        ("cutoff", cli.cutoff),
    ];
    for (key, value) in shorthands {
        if let Some(v) = value {
            loader = loader.set(&format!("{key}={v:?}"))?;
        }
    }
    for s in cli.set.iter().chain(cli.command.assignments()) {
        loader = loader.set(s)?;
    }
    if let Some(o) = &cli.out {
        loader = loader.set(&format!("output.path=\"{}\"", o.replace('\\', "\\\\").replace('"', "\\\"")))?;
    }
    if let Some(f) = &cli.format {
        loader = loader.set(&format!("output.format={f}"))?;
    }
    loader.finish()
}

fn execute(cli: &Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    }
    let cfg = load(cli)?;
    let mut sink = Sink::new(&cfg.output.path);
    let result = commands::run(&cfg.task.kind, &cfg, &mut sink);
    let (status, code) = match &result {
        Ok(o) => (Some(o.status), if o.status == Status::Clean { 0 } else { 2 }),
        Err(e) => (None, e.exit_code()),
    };
    if let Some(path) = sink.sidecar_path("manifest.json") {
        let (headline, summary, error) = match &result {
            Ok(o) => (o.headline.clone(), o.summary.clone(), None),
            Err(e) => (String::new(), serde_json::Value::Null, Some(e.to_string())),
        };
        let manifest = json!({
            "program": "entdomain",
            "version": env!("CARGO_PKG_VERSION"),
            "task": cfg.task.kind.name(),
            "config": cfg,
            "status": status,
            "exit_code": code,
            "verdict": headline,
            "summary": summary,
            "error": error,
            "outputs": sink.written,
        });
        let text = to_json(&manifest)?;
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let outcome = result?;
    if sink.is_stdout() {
        eprintln!("{}", outcome.headline);
    } else {
        println!("{}", outcome.headline);
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("entdomain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Format;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn format_flag_maps_to_config() {
        let cli = Cli::parse_from(["entdomain", "poles", "--format", "json", "--set", "z2=1.8"]);
        let cfg = load(&cli).unwrap();
        assert_eq!(cfg.output.format, Format::Json);
        assert_eq!(cfg.task.kind, Task::Poles);
        assert_eq!(cfg.physical.z2, 1.8);
    }

    #[test]
    fn trailing_assignments_override_flags() {
        let cli = Cli::parse_from(["entdomain", "--z1", "0.5", "run", "task=poles", "z1=1.8", "rho=0.05"]);
        let cfg = load(&cli).unwrap();
        assert_eq!(cfg.task.kind, Task::Poles);
        assert_eq!(cfg.physical.z1, 1.8);
        assert_eq!(cfg.physical.rho, 0.05);
    }

    #[test]
    fn shorthand_flags_set_physical_keys() {
        let cli = Cli::parse_from(["entdomain", "covariance", "--gamma", "0.01", "--cutoff", "200"]);
        let cfg = load(&cli).unwrap();
        assert_eq!(cfg.physical.gamma, 0.01);
        assert_eq!(cfg.numerics.cutoff, 200.0);
    }
}
