use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use spillover::network::DEFAULT_EDGE_THRESHOLD;
use spillover::pipeline::{self, FixtureKind, Lag, Overrides, RunConfig, RunOutcome};
use spillover::{Error, Result};

const OUTPUT_ENV: &str = "SPILLOVER_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "spillover", version, about = "Connectedness and spillover analysis for multi-asset return panels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics, ADF and Chow tests.
    Diagnostics(RunArgs),
    /// Diagnostics plus the full-sample VAR connectedness table and network.
    Static(RunArgs),
    /// TVP-VAR dynamic connectedness with per-segment averages.
    Dynamic(RunArgs),
    /// Rebuild network files from a saved connectedness.json.
    Network {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
        edge_threshold: f64,
        #[arg(long, env = OUTPUT_ENV, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Write a seeded synthetic price fixture and a config that runs on it.
    Simulate {
        /// "three" or "seven"
        #[arg(long, default_value = "seven")]
        fixture: FixtureKind,
        #[arg(long, default_value_t = 2100)]
        rows: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, env = OUTPUT_ENV)]
        output_dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long, env = OUTPUT_ENV)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    start: Option<NaiveDate>,
    #[arg(long)]
    end: Option<NaiveDate>,
    /// Lag order or "auto".
    #[arg(long)]
    lag: Option<Lag>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    kappa1: Option<f64>,
    #[arg(long)]
    kappa2: Option<f64>,
    #[arg(long)]
    prior_window: Option<usize>,
    #[arg(long)]
    inflation: Option<f64>,
    #[arg(long)]
    include_prior_window: Option<bool>,
    #[arg(long)]
    edge_threshold: Option<f64>,
    /// Replaces the configured break dates; repeat for several.
    #[arg(long = "break-date")]
    break_dates: Vec<NaiveDate>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        let output_dir = self.output_dir.clone().map(|p| {
            // Flag and environment paths are relative to the working directory, not the config.
            if p.is_absolute() {
                p
            } else {
                std::env::current_dir().map(|d| d.join(&p)).unwrap_or(p)
            }
        });
        cfg.apply(&Overrides {
            output_dir,
            start: self.start,
            end: self.end,
            lag: self.lag,
            p_max: self.p_max,
            horizon: self.horizon,
            kappa1: self.kappa1,
            kappa2: self.kappa2,
            prior_window: self.prior_window,
            inflation: self.inflation,
            include_prior_window: self.include_prior_window,
            edge_threshold: self.edge_threshold,
            break_dates: (!self.break_dates.is_empty()).then(|| self.break_dates.clone()),
        });
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<RunOutcome> {
    match cli.command {
        Command::Diagnostics(a) => pipeline::run_diagnostics(&a.load()?),
        Command::Static(a) => pipeline::run_static(&a.load()?),
        Command::Dynamic(a) => pipeline::run_dynamic(&a.load()?),
        Command::Network {
            report,
            edge_threshold,
            output_dir,
        } => pipeline::run_network(&report, edge_threshold, &output_dir),
        Command::Simulate {
            fixture,
            rows,
            seed,
            output_dir,
        } => pipeline::run_simulate(fixture, rows, seed, &output_dir),
    }
}

fn fail(e: &Error) -> ExitCode {
    let cat = e.category();
    eprintln!("error category={}: {e}", cat.as_str());
    ExitCode::from(cat.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return fail(&Error::Config(first.to_string()));
        }
    };
    let started = Instant::now();
    match run(cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("{}", outcome.output_dir.join(f).display());
            }
            eprintln!("done in {:.2}s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
