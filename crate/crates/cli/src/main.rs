use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use cat0ot::harness::{emit_report, run_scenario, Experiment, Format, Scenario};
use cat0ot::Error;
use clap::{builder::PossibleValuesParser, Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// Runs one experiment scenario and reports whether it passed.
///
/// Exit status: 0 pass, 1 fail or runtime error, 2 invalid configuration.
#[derive(Debug, Parser)]
#[command(name = "cat0ot", version)]
struct Cli {
    /// Experiment to run; must agree with the config's `experiment` field if present.
    #[arg(value_parser = PossibleValuesParser::new(Experiment::ALL.map(|e| e.tag())))]
    experiment: String,
    /// Scenario document (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load(cli: &Cli) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("cannot read {}", cli.config.display()))
        .map_err(Failure::Config)?;
    let mut doc: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not JSON", cli.config.display()))
        .map_err(Failure::Config)?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| Failure::Config(anyhow::anyhow!("the scenario must be a JSON object")))?;
    match obj.get("experiment").and_then(|v| v.as_str()) {
        Some(tag) if tag != cli.experiment => {
            return Err(Failure::Config(anyhow::anyhow!(
                "config declares experiment `{tag}` but `{}` was requested",
                cli.experiment
            )))
        }
        _ => {
            obj.insert("experiment".into(), cli.experiment.clone().into());
        }
    }
    if let Some(seed) = cli.seed {
        obj.insert("seed".into(), seed.into());
    }
    Scenario::from_json(&doc.to_string()).map_err(|e| Failure::Config(e.into()))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let scenario = load(cli)?;
    let report = run_scenario(&scenario).map_err(|e| match e {
        Error::ConfigInvalid { .. } => Failure::Config(e.into()),
        e => Failure::Runtime(e.into()),
    })?;
    let format = match cli.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
    };
    match &cli.out {
        Some(path) => emit_report(&report, format, path)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::Runtime)?,
        None => {
            let text = match format {
                Format::Json => report.to_json().map_err(|e| Failure::Runtime(e.into()))?,
                Format::Csv => report.to_csv(),
            };
            print!("{text}");
        }
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
