use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nilmsim::analysis::AGGREGATE_CHANNEL;
use nilmsim::cli::{self, ExportConfig, OutputFormat, OUT_DIR_ENV};
use nilmsim::panel::{SimConfig, SourceParams};
use nilmsim::scenario::Scenario;
use nilmsim::{Error, Result};

#[derive(Parser)]
#[command(name = "nilmsim", version, about = "Synthetic household load dataset simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and export the dataset.
    Simulate(SimulateArgs),
    /// Mean and standard deviation of one channel over an interval.
    Stats(StatsArgs),
    /// Correlation and percentage error of a model dataset against a reference.
    Compare(CompareArgs),
    /// List appliance kinds, or the appliances of a scenario.
    ListAppliances {
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Parse and check a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20.0)]
    report_hz: f64,
    #[arg(long, default_value_t = 10_000)]
    wave_hz: u32,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    out: PathBuf,
    /// Comma-separated subset of aggregate_csv, per_appliance_csv,
    /// events_jsonl, meta_json.
    #[arg(long, value_delimiter = ',', value_parser = parse_format)]
    format: Vec<OutputFormat>,
    #[arg(long, default_value_t = 6)]
    decimals: usize,
    /// Source RMS voltage.
    #[arg(long, default_value_t = 235.0)]
    v_nominal: f64,
    #[arg(long, default_value_t = 50.0)]
    freq: f64,
    /// Standard deviation of the per-cycle source amplitude, volts.
    #[arg(long, default_value_t = 0.0)]
    noise_std: f64,
    /// Source resistance, ohms.
    #[arg(long, default_value_t = 0.0)]
    r_src: f64,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset directory written by `simulate`.
    #[arg(long)]
    dataset: PathBuf,
    /// Appliance id, or `aggregate`.
    #[arg(long, default_value = AGGREGATE_CHANNEL)]
    appliance: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// Drop the settling time after every event.
    #[arg(long)]
    steady: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Also write the per-tick percentage errors to this CSV file.
    #[arg(long)]
    errors_csv: Option<PathBuf>,
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let source = SourceParams {
                v_nominal: a.v_nominal,
                freq: a.freq,
                noise_std: a.noise_std,
                source_resistance: a.r_src,
                rng_seed: a.seed,
            };
            let config = SimConfig {
                report_hz: a.report_hz,
                wave_hz: a.wave_hz,
            };
            let mut export = ExportConfig::new(a.out);
            if !a.format.is_empty() {
                export.formats = a.format.into_iter().collect();
            }
            export.decimal_places = a.decimals;
            println!("{}", cli::cmd_simulate(&a.scenario, &source, &config, &export)?);
        }
        Command::Stats(a) => {
            let stats = cli::cmd_stats(&a.dataset, &a.appliance, a.from, a.to, a.steady)?;
            print!("{}", cli::format_statistics(&a.appliance, &stats));
        }
        Command::Compare(a) => {
            let report = cli::cmd_compare(&a.reference, &a.model)?;
            print!("{}", cli::format_comparison(&report));
            if let Some(path) = a.errors_csv {
                let times: Vec<f64> = cli::read_dataset(&a.reference)?.aggregate.iter().map(|r| r.t).collect();
                cli::write_error_series(&report, &times, &path)?;
            }
        }
        Command::ListAppliances { scenario: None } => print!("{}", cli::list_kinds()),
        Command::ListAppliances { scenario: Some(path) } => {
            print!("{}", cli::describe_scenario(&Scenario::load(path)?))
        }
        Command::Validate { scenario } => {
            let s = Scenario::load(&scenario)?;
            print!("{}: ok\n{}", scenario.display(), cli::describe_scenario(&s));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nilmsim: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
