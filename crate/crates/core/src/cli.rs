//! Command-line front end.
//!
//! Exit codes: `0` success, `1` runtime failure (including failed strict
//! checks), `2` malformed command line or configuration.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::algorithms::AlgorithmRegistry;
use crate::compliance;
use crate::error::{Error, Result};
use crate::games::GameRegistry;
use crate::harness::{run_experiment, variance_study, ExperimentConfig, VarianceStudyConfig};
use crate::operators::residual;

#[derive(Debug, Parser)]
#[command(name = "snep", version, about = "Stochastic Nash equilibrium seeking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a multi-seed experiment and write CSV output.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Fail when a configuration is not covered by a convergence result.
        #[arg(long)]
        strict: bool,
    },
    /// Iterations-to-threshold for a grid of noise variances.
    VarianceStudy {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate the residual of a game at one point.
    Residual {
        game: String,
        #[arg(required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        /// Game parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
    },
    /// Report convergence-condition compliance of an experiment config.
    Validate {
        config: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// List the registered games.
    ListGames,
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path_str = e.path().to_string();
        Error::InvalidConfig(format!("{}: field `{}`: {}", path.display(), path_str, e.into_inner()))
    })
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Run { config, out: dir, runs, workers, strict } => {
            let mut cfg: ExperimentConfig = load(&config)?;
            if dir.is_some() {
                cfg.output_dir = dir;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            cfg.strict |= strict;
            let outcome = run_experiment(&cfg)?;
            for a in &outcome.series.algorithms {
                let last = |v: &Option<Vec<f64>>| {
                    v.as_ref().and_then(|s| s.last()).map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
                };
                writeln!(
                    out,
                    "{:<12} runs={} excluded={} final_smoothed_residual={} final_distance={}",
                    a.label,
                    a.included_runs,
                    a.excluded_runs,
                    last(&a.smooth_residual),
                    last(&a.mean_distance)
                )?;
            }
            if let Some(d) = &cfg.output_dir {
                writeln!(out, "wrote {}", d.display())?;
            }
        }
        Command::VarianceStudy { config, out: dir, workers } => {
            let mut cfg: VarianceStudyConfig = load(&config)?;
            if dir.is_some() {
                cfg.output_dir = dir;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            let table = variance_study(&cfg)?;
            write!(out, "{:>10}", "variance")?;
            for t in &table.thresholds {
                write!(out, " {:>14}", format!("<= {t:e}"))?;
            }
            writeln!(out)?;
            for row in &table.rows {
                write!(out, "{:>10}", row.variance)?;
                for c in &row.cells {
                    let s = match c.mean_iterations {
                        Some(m) if c.reached_by_all() => format!("{m:.1}"),
                        _ => format!("n/r ({}/{})", c.reached_runs, c.runs),
                    };
                    write!(out, " {s:>14}")?;
                }
                writeln!(out)?;
            }
        }
        Command::Residual { game, x, params } => {
            let params = match params {
                Some(p) => serde_json::from_str(&p)
                    .map_err(|e| Error::InvalidConfig(format!("--params: {e}")))?,
                None => serde_json::Value::Null,
            };
            let spec = GameRegistry::with_builtins().build(&game, &params)?;
            let profile = spec.profile(x)?;
            if !spec.is_feasible(profile.values()) {
                return Err(Error::InvalidConfig("point lies outside the feasible set".into()));
            }
            writeln!(out, "{}", residual(&spec, &profile)?)?;
        }
        Command::Validate { config, strict } => {
            let cfg: ExperimentConfig = load(&config)?;
            cfg.validate()?;
            let game = cfg.game.build(&GameRegistry::with_builtins())?;
            let registry = AlgorithmRegistry::with_builtins();
            let c = game.constants();
            let show = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "unknown".into());
            writeln!(
                out,
                "game {}: mu={} l={} beta={}",
                game.name(),
                show(c.strong_monotonicity),
                show(c.lipschitz),
                show(c.cocoercivity)
            )?;
            let mut first_err = None;
            for a in &cfg.algorithms {
                a.validate(&game, &registry)?;
                let report = compliance::check(a, c);
                write!(out, "{report}")?;
                if strict || cfg.strict {
                    if let Err(e) = report.enforce() {
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
        Command::ListGames => {
            for (name, entry) in GameRegistry::with_builtins().iter() {
                writeln!(out, "{name:<16} {}", entry.description)?;
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}
