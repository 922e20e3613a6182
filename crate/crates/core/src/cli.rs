//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::{format_violations, Config, ConfigError, ScenarioSelection, Violation};
use crate::metrics::ExperimentSummary;
use crate::output::{render_series, render_summary, series_file_name, Manifest, Series};
use crate::simulator::{run_experiment_with_threads, SimError};

pub const THREADS_ENV: &str = "WBASN_SIM_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wbasn-sim", version, about = "Event-driven body area sensor network and soldier fatigue simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run experiments and write the output bundle.
    Run(RunArgs),
    /// Check a config file without running anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Walking,
    Slow,
    Fast,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Config file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Round cap per run.
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long, value_enum)]
    pub noise: Option<Switch>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Simulation(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Simulation(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// Files written by one `run` invocation.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub dir: PathBuf,
    pub series_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    pub manifest_file: PathBuf,
    pub summaries: Vec<ExperimentSummary>,
}

/// Merge the config file (if any) with command-line overrides.
pub fn resolve_config(args: &RunArgs) -> Result<Config, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(s) = args.scenario {
        cfg.scenario = match s {
            ScenarioArg::Walking => ScenarioSelection::One(crate::Scenario::Walking),
            ScenarioArg::Slow => ScenarioSelection::One(crate::Scenario::SlowRunning),
            ScenarioArg::Fast => ScenarioSelection::One(crate::Scenario::FastRunning),
            ScenarioArg::All => ScenarioSelection::All,
        };
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(rounds) = args.rounds {
        cfg.max_rounds = rounds;
    }
    if let Some(noise) = args.noise {
        cfg.noise = noise == Switch::On;
    }
    let problems = cfg.violations();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(problems))
    }
}

pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok().filter(|&n| n > 0)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn cmd_run(args: &RunArgs) -> Result<OutputBundle, CliError> {
    let cfg = resolve_config(args)?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::Io { path: args.out.clone(), source })?;
    let threads = threads_from_env();

    let mut summaries = Vec::new();
    let mut series_files = Vec::new();
    for scenario in cfg.scenario.scenarios() {
        let summary = run_experiment_with_threads(&cfg.sim_config(scenario), threads)?;
        for series in Series::ALL {
            let path = args.out.join(series_file_name(&summary, series));
            write_file(&path, &render_series(&summary, series))?;
            series_files.push(path);
        }
        summaries.push(summary);
    }

    let summary_file = args.out.join("summary.csv");
    write_file(&summary_file, &render_summary(&summaries))?;

    let file_name = |p: &PathBuf| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut files: Vec<String> = series_files.iter().map(file_name).collect();
    files.push(file_name(&summary_file));
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        runs: cfg.runs,
        max_rounds: cfg.max_rounds,
        noise: cfg.noise,
        scenarios: cfg.scenario.scenarios().iter().map(|s| s.name().to_string()).collect(),
        files,
        config: cfg.to_text(),
    };
    let manifest_file = args.out.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write_file(&manifest_file, &(json + "\n"))?;

    Ok(OutputBundle { dir: args.out.clone(), series_files, summary_file, manifest_file, summaries })
}

/// All problems found in a config file; empty means clean.
pub fn cmd_validate(path: &Path) -> Vec<Violation> {
    match fs::read_to_string(path) {
        Err(e) => vec![Violation::new(path.display().to_string(), format!("cannot read config: {e}"))],
        Ok(text) => {
            let (cfg, mut problems) = Config::from_text(&text);
            problems.extend(cfg.violations());
            problems
        }
    }
}

/// Run a parsed command line and return the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Run(args) => match cmd_run(&args) {
            Ok(bundle) => {
                for s in &bundle.summaries {
                    eprintln!(
                        "{}: fatigue round {}, throughput {}",
                        s.scenario,
                        s.fatigue_round.mean().map_or("censored".into(), |m| format!("{m:.0}")),
                        s.throughput.mean().map_or("-".into(), |m| format!("{m:.0}")),
                    );
                }
                eprintln!("wrote {}", bundle.dir.display());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Validate(args) => {
            let problems = cmd_validate(&args.config);
            if problems.is_empty() {
                println!("{}: ok", args.config.display());
                EXIT_OK
            } else {
                println!("{}", format_violations(&problems));
                EXIT_CONFIG
            }
        }
    }
}
