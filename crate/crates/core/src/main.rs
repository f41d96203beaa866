use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hccc_core::cli::{self, CliError, SweepAxis, OUT_DIR_ENV};
use hccc_core::metrics::summary_row;
use hccc_core::metrics::SUMMARY_HEADER;
use hccc_core::ScenarioConfig;

#[derive(Parser)]
#[command(name = "hccc", version, about = "Wireless sensor network congestion-control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (`[section]` headers, `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Enable traces: mac, hccc, packets, topology (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    trace: Vec<String>,
    /// Override a config field, e.g. `--set traffic.offered_load=15`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its CSV reports.
    Run {
        #[command(flatten)]
        common: Common,
        /// Seed (defaults to the first configured seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one simulation per axis value (crossed with seeds) and aggregate.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: SweepAxis,
        /// Axis values, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Seeds to cross with each value (defaults to the configured seeds).
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the default scenario in config-file form.
    DumpDefaults,
    /// Parse and range-check a scenario file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(common: &Common) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_path(path)?,
        None => ScenarioConfig::default(),
    };
    for spec in &common.overrides {
        cli::apply_override(&mut cfg, spec)?;
    }
    for name in &common.trace {
        if !cfg.trace.enable(name) {
            return Err(CliError::Override(format!("--trace {name}"), "unknown trace".into()));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { common, seed } => {
            let cfg = load(&common)?;
            let seed = seed.unwrap_or(cfg.run.seeds[0]);
            let out_dir = cli::resolve_out_dir(common.out);
            let report = cli::run_one(&cfg, seed, &out_dir)?;
            println!("{}", SUMMARY_HEADER.join(","));
            println!("{}", summary_row(&report).join(","));
            eprintln!("wrote {}/{}_*.csv", out_dir.display(), report.file_stem());
        }
        Command::Sweep {
            common,
            axis,
            values,
            seeds,
            jobs,
        } => {
            let cfg = load(&common)?;
            let seeds = if seeds.is_empty() { cfg.run.seeds.clone() } else { seeds };
            let out_dir = cli::resolve_out_dir(common.out);
            let plan = cli::plan_sweep(&cfg, axis, &values, &seeds)?;
            let run = || cli::run_sweep(&plan, axis, &out_dir);
            let outcome = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::Sweep(e.to_string()))?
                    .install(run)?,
                None => run()?,
            };
            print!("{}", cli::format_table(&outcome));
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::DumpDefaults => print!("{}", ScenarioConfig::default().to_config_string()),
        Command::Validate { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            cfg.validate()?;
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
