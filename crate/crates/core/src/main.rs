use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lrd_core::config::{parse_date, parse_ladder, InputSpec, RunConfig};
use lrd_core::estimators::{hurst_dfa, hurst_rs, BlockLadder, Method};
use lrd_core::hypothesis::{build_report_with, Alternative, Centering, ReportOptions};
use lrd_core::io::{emit_synth, ingest_csv, read_rolling, write_atomic, write_rolling};
use lrd_core::pipeline::{run_pipeline, to_json, ExitStatus};
use lrd_core::rolling::{rolling_hurst, RollingProtocol, SplitRule};
use lrd_core::series::{describe, log_returns};
use lrd_core::synth::FgnSpec;

#[derive(Parser)]
#[command(
    name = "lrd",
    version,
    about = "Rolling Hurst exponents and before/after tests for return series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics of the percent log returns of a price file.
    Describe {
        /// PATH or PATH:LABEL
        #[arg(long)]
        input: String,
    },
    /// One Hurst estimate over the whole return series.
    Hurst {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Sliding-window Hurst estimates as CSV.
    Rolling {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        estimator: EstimatorArgs,
        #[arg(long, default_value_t = 500)]
        window: usize,
        #[arg(long, default_value_t = 7)]
        step: usize,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Before/after test battery on a rolling CSV.
    Test {
        /// Rolling CSV as produced by `rolling`.
        #[arg(long)]
        rolling: PathBuf,
        #[arg(long, default_value = "series")]
        label: String,
        #[arg(long, default_value = "2008-09-15")]
        split_date: String,
        /// start or end: which window date decides the side.
        #[arg(long, default_value = "start")]
        split_rule: String,
        #[arg(long, default_value_t = 0.999)]
        confidence_level: f64,
        /// two-sided, less or greater.
        #[arg(long, default_value = "two-sided")]
        alternative: String,
        /// mean (Levene) or median (Brown-Forsythe).
        #[arg(long, default_value = "mean")]
        centering: String,
    },
    /// Write a synthetic fGn price file.
    Synth {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Full pipeline over one or more price files.
    Run(RunArgs),
}

#[derive(Args)]
struct EstimatorArgs {
    /// dfa or rs.
    #[arg(long, default_value = "dfa")]
    estimator: String,
    /// Comma-separated block sizes.
    #[arg(long, default_value = "4,8,16,32,64,128")]
    ladder: String,
    #[arg(long, default_value_t = 1)]
    detrend_order: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Key-value config file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// PATH or PATH:LABEL, repeatable.
    #[arg(long)]
    input: Vec<String>,
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    ladder: Option<String>,
    #[arg(long)]
    detrend_order: Option<String>,
    #[arg(long)]
    split_date: Option<String>,
    #[arg(long)]
    split_rule: Option<String>,
    #[arg(long)]
    confidence_level: Option<String>,
    #[arg(long)]
    alternative: Option<String>,
    #[arg(long)]
    centering: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    /// Comma-separated subset of json,csv.
    #[arg(long)]
    formats: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::Usage.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => return run(args),
        other => execute(other),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ExitStatus::Usage.code() as u8)
        }
    }
}

fn estimate_protocol(args: &EstimatorArgs, window: usize, step: usize) -> Result<RollingProtocol> {
    let estimator: Method = args.estimator.parse().map_err(anyhow::Error::msg)?;
    let ladder = parse_ladder(&args.ladder).map_err(anyhow::Error::msg)?;
    Ok(RollingProtocol::new(
        window,
        step,
        estimator,
        ladder,
        args.detrend_order,
    )?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    std::io::stdout().write_all(&to_json(value)?)?;
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Describe { input } => {
            let input = InputSpec::parse(&input)?;
            let prices = ingest_csv(&input.path, &input.label)?;
            print_json(&describe(&log_returns(&prices))?)
        }
        Command::Hurst { input, estimator } => {
            let input = InputSpec::parse(&input)?;
            let returns = log_returns(&ingest_csv(&input.path, &input.label)?);
            let method: Method = estimator.estimator.parse().map_err(anyhow::Error::msg)?;
            let ladder: BlockLadder =
                parse_ladder(&estimator.ladder).map_err(anyhow::Error::msg)?;
            let x = returns.values();
            let est = match method {
                Method::Dfa => hurst_dfa(&x, &ladder, estimator.detrend_order)?,
                Method::Rs => hurst_rs(&x, &ladder)?,
            };
            print_json(&est)
        }
        Command::Rolling {
            input,
            estimator,
            window,
            step,
            output,
        } => {
            let input = InputSpec::parse(&input)?;
            let protocol = estimate_protocol(&estimator, window, step)?;
            let returns = log_returns(&ingest_csv(&input.path, &input.label)?);
            let result = rolling_hurst(&returns, &protocol)?;
            let mut buf = Vec::new();
            write_rolling(&mut buf, &result)?;
            match output {
                Some(path) => write_atomic(&path, &buf)?,
                None => std::io::stdout().write_all(&buf)?,
            }
            Ok(())
        }
        Command::Test {
            rolling,
            label,
            split_date,
            split_rule,
            confidence_level,
            alternative,
            centering,
        } => {
            let split_date = parse_date(&split_date).map_err(anyhow::Error::msg)?;
            let rule: SplitRule = split_rule.parse().map_err(anyhow::Error::msg)?;
            let options = ReportOptions {
                level: confidence_level,
                alternative: alternative
                    .parse::<Alternative>()
                    .map_err(anyhow::Error::msg)?,
                centering: centering.parse::<Centering>().map_err(anyhow::Error::msg)?,
            };
            let rows = read_rolling(&rolling)?;
            let (before, after): (Vec<_>, Vec<_>) = rows.iter().partition(|r| {
                let key = match rule {
                    SplitRule::StartDate => r.start_date,
                    SplitRule::EndDate => r.end_date,
                };
                key < split_date
            });
            let before: Vec<f64> = before.iter().map(|r| r.h).collect();
            let after: Vec<f64> = after.iter().map(|r| r.h).collect();
            let report =
                build_report_with(&before, &after, &label, &options).with_context(|| {
                    format!("{} before / {} after the split", before.len(), after.len())
                })?;
            print_json(&report)
        }
        Command::Synth {
            h,
            n,
            sigma,
            seed,
            output,
        } => {
            let spec = FgnSpec::new(h, n, sigma, seed)?;
            emit_synth(&spec, &output)?;
            Ok(())
        }
        Command::Run(_) => unreachable!("handled in main"),
    }
}

fn build_config(args: RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_kv_file(path)?,
        None => RunConfig::default(),
    };
    let overrides = [
        ("estimator", args.estimator),
        ("window", args.window),
        ("step", args.step),
        ("ladder", args.ladder),
        ("detrend_order", args.detrend_order),
        ("split_date", args.split_date),
        ("split_rule", args.split_rule),
        ("confidence_level", args.confidence_level),
        ("alternative", args.alternative),
        ("centering", args.centering),
        ("output_dir", args.output_dir),
        ("formats", args.formats),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    for input in &args.input {
        cfg.set("input", input)?;
    }
    if cfg.inputs.is_empty() {
        bail!("no input series; pass --input PATH[:LABEL] or list inputs in --config");
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("usage: lrd run --input PATH[:LABEL] [--input ...] [--config FILE] [--output-dir DIR]");
            return ExitCode::from(ExitStatus::Usage.code() as u8);
        }
    };
    let summary = run_pipeline(&cfg);
    if let Some(message) = &summary.usage_error {
        eprintln!("error: {message}");
    }
    for outcome in &summary.outcomes {
        match &outcome.result {
            Ok(paths) => {
                for p in paths {
                    println!("{}: wrote {}", outcome.label, p.display());
                }
            }
            Err(e) => eprintln!("{}: failed: {e}", outcome.label),
        }
    }
    ExitCode::from(summary.status.code() as u8)
}
