//! `dricarbon`: carbon accounting runs for research computing
//! infrastructure.
//!
//! Exit codes: 0 success, 2 invalid input or configuration, 3 intensity
//! endpoint unreachable.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{EnergyInputs, FetchArgs};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "dricarbon",
    version,
    about = "Active and embodied carbon accounting for compute infrastructure"
)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconcile energy measurements and print canonical per-site energy.
    Ingest {
        /// Measurements CSV (site,source,period_start,period_end,kwh,nodes) or normalized JSON.
        #[arg(long)]
        measurements: Option<PathBuf>,
        /// Power samples CSV (site,node_id,timestamp,watts).
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Channel that sample-derived energy is attributed to.
        #[arg(long, default_value = "ipmi")]
        samples_source: String,
        /// Directly metered network/cooling/power/facility energy CSV.
        #[arg(long)]
        components: Option<PathBuf>,
        /// Per-source energy multiplier, e.g. `ipmi=1.05`.
        #[arg(long = "adjust", value_name = "SOURCE=FACTOR")]
        adjustments: Vec<String>,
        /// Write the normalized measurements JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a run configuration and emit the scenario report.
    Report {
        #[command(flatten)]
        run: RunArgs,
        /// Intensity cache directory for api mode.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Download a grid carbon-intensity series.
    FetchIntensity {
        /// Range start, UTC (e.g. 2022-11-01T00:00Z).
        #[arg(long)]
        from: String,
        /// Range end, UTC.
        #[arg(long)]
        to: String,
        /// API base URL.
        #[arg(long, env = commands::ENDPOINT_ENV)]
        endpoint: Option<String>,
        /// Reuse and store API responses here.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Series JSON destination; written only if the whole range was fetched.
        #[arg(long)]
        out: PathBuf,
        /// Also write the series as CSV for plotting.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Delay before the first retry; doubles for each later retry.
        #[arg(long)]
        retry_base_ms: Option<u64>,
        /// Concurrent requests, default 4.
        #[arg(long)]
        max_in_flight: Option<usize>,
    },
    /// Check a run configuration and every input it references.
    Validate {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Override any config key, e.g. `--set pue.points=Low=1.1,High=1.6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Pin the constants that reproduce the published scenario tables.
    #[arg(long)]
    paper_compat: bool,
    /// Report destination; `-` is stdout.
    #[arg(long)]
    output: Option<String>,
    /// json or markdown.
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn load(&self) -> Result<config::LoadedConfig, CliError> {
        let mut overrides = self.overrides.clone();
        if self.paper_compat {
            overrides.push("paper_compat=true".into());
        }
        if let Some(o) = &self.output {
            overrides.push(format!(
                "output.path=\"{}\"",
                o.replace('\\', "\\\\").replace('"', "\\\"")
            ));
        }
        if let Some(f) = &self.format {
            overrides.push(format!("output.format={f}"));
        }
        config::load(&self.config, &overrides)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest {
            measurements,
            samples,
            samples_source,
            components,
            adjustments,
            out,
        } => {
            let pairs = adjustments
                .iter()
                .map(|a| {
                    a.split_once('=')
                        .map(|(s, f)| (s.trim(), f.trim().to_owned()))
                        .ok_or_else(|| CliError::invalid(format!("--adjust {a:?} is not SOURCE=FACTOR")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let inputs = EnergyInputs {
                measurements: measurements.as_deref(),
                samples: samples.as_deref(),
                samples_source: samples_source.parse()?,
                components: components.as_deref(),
                adjustments: commands::parse_adjustments(pairs)?,
            };
            commands::ingest(&inputs, out.as_deref())
        }
        Command::Report { run, cache_dir } => commands::report(&run.load()?, cache_dir.as_deref()),
        Command::FetchIntensity {
            from,
            to,
            endpoint,
            cache_dir,
            out,
            csv,
            retry_base_ms,
            max_in_flight,
        } => commands::fetch_intensity(&FetchArgs {
            from: &from,
            to: &to,
            endpoint,
            cache_dir,
            out: &out,
            csv: csv.as_deref(),
            retry_base_ms,
            max_in_flight,
        }),
        Command::Validate { run } => commands::validate(&run.load()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dricarbon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
