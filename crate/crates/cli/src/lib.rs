//! Command-line front end for `nmq-core`: scenario files, figure presets,
//! parameter sweeps and verification suites.

pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nmq_core::entanglement::DEFAULT_EVENT_THRESHOLD;
use nmq_core::presets::{preset, Preset, PRESETS};
use nmq_core::simulation::Simulation;
use rayon::prelude::*;

pub use error::CliError;

use config::{params_from, parse_scenario, parse_sweep, Scenario};
use output::{
    concurrence_svg, events_csv, summary_csv, summary_row, trajectory_csv, write_file, RunRecord,
};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "NMQ_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "nmq",
    version,
    about = "Exact non-Markovian two-qubit entanglement dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write trajectory.csv, events.csv and summary.csv.
    Simulate {
        /// Scenario file (flat TOML).
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Use a built-in preset instead of a scenario file.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory, created if missing.
        #[arg(long, short, default_value = "nmq-out")]
        out: PathBuf,
        /// Also write concurrence.svg.
        #[arg(long)]
        svg: bool,
        /// Precursor level below which the state counts as disentangled.
        #[arg(long, default_value_t = DEFAULT_EVENT_THRESHOLD)]
        threshold: f64,
    },
    /// Run the cross product of parameter values and write summary.csv.
    Sweep {
        /// Sweep file: scenario keys with scalar, array or {start, stop, num} values.
        config: PathBuf,
        #[arg(long, short, default_value = "nmq-sweep")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EVENT_THRESHOLD)]
        threshold: f64,
    },
    /// Run the self-verification suite.
    Verify {
        #[arg(value_enum, default_value_t = VerifyLevel::Quick)]
        level: VerifyLevel,
        /// Restrict to these presets (repeatable); default is all.
        #[arg(long = "preset")]
        presets: Vec<String>,
        /// Include the memory-kernel solve at any level.
        #[arg(long)]
        nz: bool,
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
    /// List the built-in figure presets.
    ListPresets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyLevel {
    Quick,
    Full,
}

/// Applies `NMQ_THREADS` to the global rayon pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn check_threshold(threshold: f64) -> Result<(), CliError> {
    if threshold.is_finite() && threshold >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--threshold must be finite and >= 0, got {threshold}"
        )))
    }
}

fn prepare_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

pub fn simulate(
    scenario: &Scenario,
    out: &Path,
    svg: bool,
    threshold: f64,
) -> Result<Vec<PathBuf>, CliError> {
    check_threshold(threshold)?;
    let sim = Simulation::new(scenario.params)?;
    let result = sim.run(&scenario.grid)?;
    let events = sim.events(&result, threshold);

    prepare_dir(out)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<(), CliError> {
        let path = out.join(name);
        write_file(&path, &body)?;
        written.push(path);
        Ok(())
    };
    emit("trajectory.csv", trajectory_csv(&result))?;
    emit("events.csv", events_csv(&events))?;
    emit("summary.csv", summary_csv([&summary_row(&result, &events)]))?;
    if svg {
        emit("concurrence.svg", concurrence_svg(&result))?;
    }
    let record = RunRecord::new(scenario.hash(), &written);
    write_file(&out.join("run.toml"), &record.to_toml())?;
    Ok(written)
}

pub fn sweep(text: &str, out: &Path, threshold: f64) -> Result<PathBuf, CliError> {
    check_threshold(threshold)?;
    let spec = parse_sweep(text)?;
    let points = spec.points();
    let params = points
        .iter()
        .map(params_from)
        .collect::<Result<Vec<_>, _>>()?;
    let rows = params
        .par_iter()
        .map(|p| -> Result<String, CliError> {
            let sim = Simulation::new(*p)?;
            let result = sim.run(&spec.grid)?;
            Ok(summary_row(&result, &sim.events(&result, threshold)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    prepare_dir(out)?;
    let path = out.join("summary.csv");
    write_file(&path, &summary_csv(&rows))?;
    Ok(path)
}

fn select_presets(names: &[String]) -> Result<Vec<&'static Preset>, CliError> {
    if names.is_empty() {
        return Ok(PRESETS.iter().collect());
    }
    names
        .iter()
        .map(|n| preset(n).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

pub fn list_presets() -> String {
    let mut out = String::from("name   delta  alpha  gamma     nbar  description\n");
    for p in &PRESETS {
        out.push_str(&format!(
            "{:<6} {:<6} {:<6} {:<9.6} {:<5} {}\n",
            p.name, p.delta, p.alpha, p.gamma, p.nbar, p.description
        ));
    }
    out
}

/// Executes a parsed command, printing progress to stdout.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            preset: preset_name,
            out,
            svg,
            threshold,
        } => {
            let scenario = match (config, preset_name) {
                (Some(path), None) => parse_scenario(&read(&path)?)?,
                (None, Some(name)) => Scenario::from_preset(
                    preset(&name).map_err(|e| CliError::Usage(e.to_string()))?,
                ),
                _ => {
                    return Err(CliError::Usage(
                        "give either a config file or --preset".into(),
                    ))
                }
            };
            for path in simulate(&scenario, &out, svg, threshold)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Sweep {
            config,
            out,
            threshold,
        } => {
            let path = sweep(&read(&config)?, &out, threshold)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Verify {
            level,
            presets,
            nz,
            inject_sign_flip,
        } => {
            let selected = select_presets(&presets)?;
            let level = match level {
                VerifyLevel::Quick => verify::Level::Quick,
                VerifyLevel::Full => verify::Level::Full,
            };
            let checks = verify::run_suite(level, &selected, nz, inject_sign_flip);
            for c in &checks {
                println!("{}", c.line());
            }
            let failed: Vec<&str> = checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            if failed.is_empty() {
                println!("all {} checks passed", checks.len());
                Ok(())
            } else {
                Err(CliError::Verification(format!(
                    "{} of {} checks failed: {}",
                    failed.len(),
                    checks.len(),
                    failed.join(", ")
                )))
            }
        }
        Command::ListPresets => {
            print!("{}", list_presets());
            Ok(())
        }
    }
}
