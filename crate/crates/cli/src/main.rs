use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tcloak_core::experiment::{
    convergence_study, feasibility, metric_check, parse_override, run_cloak_experiment, Timings,
};
use tcloak_core::symbol::max_admissible_c0_for;
use tcloak_core::{io, Error, ExperimentConfig};

/// Exit codes.
const PASS: u8 = 0;
const CHECKS_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;
const NUMERICAL_ERROR: u8 = 3;
const IO_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "tcloak", version, about = "Temporal cloaking laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hyperbolicity gate only; prints the feasibility report.
    Check(Common),
    /// Full pipeline: solve, map, verify, write artifacts.
    Run(Common),
    /// Refinement study with fitted orders.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Number of grids (at least 3); defaults to `experiment.levels`.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Transformed-metric checks for the configured metric preset.
    MetricCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; the built-in 2D demo when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Dotted-key override, e.g. `--set profile.c0=0.04`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Required hyperbolicity margin before any solver runs.
    #[arg(long)]
    margin_floor: Option<f64>,
    /// Print stage timings and written paths to stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Config(_)
            | Error::Json(_)
            | Error::InsufficientLevels { .. }
            | Error::SignalOutsideWindow { .. }
            | Error::VoidNearBoundary { .. } => CONFIG_ERROR,
            Error::Io(_) => IO_ERROR,
            _ => NUMERICAL_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let config_error = |e: Error| Failure {
            code: CONFIG_ERROR,
            message: e.to_string(),
        };
        let mut overrides = self
            .overrides
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(config_error)?;
        if let Some(floor) = self.margin_floor {
            overrides.push(("experiment.margin_floor".into(), floor.to_string()));
        }
        match &self.config {
            Some(path) => ExperimentConfig::load(path, &overrides),
            None => ExperimentConfig::from_json_str(&ExperimentConfig::demo_2d().to_json(), &overrides),
        }
        .map_err(config_error)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.experiment.output_dir.clone().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("tcloak-out"))
    }

    fn report(&self, timings: &Timings, written: &[PathBuf]) {
        if self.verbose == 0 {
            return;
        }
        for s in &timings.stages {
            eprintln!("{:<24} {:>5} pts {:>9.3} s", s.stage, s.points, s.seconds);
        }
        for p in written {
            eprintln!("wrote {}", p.display());
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::from(Error::Json(e)))?;
    println!("{text}");
    Ok(())
}

fn verdict(ok: bool) -> u8 {
    if ok {
        PASS
    } else {
        CHECKS_FAILED
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check(common) => {
            let cfg = common.load()?;
            let report = feasibility(&cfg)?;
            let a = cfg.params()?.speed;
            print_json(&json!({
                "margin_min": report.margin_min,
                "argmin": report.argmin,
                "admissible": report.admissible,
                "max_admissible_c0": max_admissible_c0_for(cfg.profile.bump, a, cfg.profile.c1),
            }))?;
            Ok(verdict(report.admissible))
        }
        Command::Run(common) => {
            let cfg = common.load()?;
            let run = run_cloak_experiment(&cfg)?;
            let written = io::write_run_artifacts(&common.out_dir(&cfg), &run)?;
            common.report(&run.timings, &written);
            for c in &run.report.checks {
                println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            }
            Ok(verdict(run.report.passed))
        }
        Command::Converge { common, levels } => {
            let cfg = common.load()?;
            let (table, timings) = convergence_study(&cfg, levels.unwrap_or(cfg.experiment.levels))?;
            let written = io::write_convergence_artifacts(&common.out_dir(&cfg), &table, &timings)?;
            common.report(&timings, &written);
            print!("{}", table.to_csv());
            for name in &table.flagged {
                println!("FLAGGED {name}");
            }
            Ok(verdict(table.flagged.is_empty()))
        }
        Command::MetricCheck(common) => {
            let cfg = common.load()?;
            let report = metric_check(&cfg)?;
            print_json(&report)?;
            Ok(verdict(report.admissible))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
