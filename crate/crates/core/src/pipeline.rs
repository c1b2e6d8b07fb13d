//! End-to-end run: ingest → returns → descriptive statistics → rolling
//! Hurst → split → test battery → report files.
//!
//! Per series the run writes, under the output directory:
//!
//! * `<label>_rolling.csv` (csv format): one row per window,
//!   `window_start_date,window_end_date,h,r_squared`.
//! * `<label>_stats.json` (json format): [`StatsFile`].
//! * `<label>_report.json` (json format): [`ReportFile`].
//!
//! JSON layouts are published in `schema/` at the crate root.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::estimators::Method;
use crate::hypothesis::{build_report_with, HypothesisError, TestReport};
use crate::io::{ingest_csv, write_atomic, write_rolling, IoError};
use crate::rolling::{rolling_hurst, split_at_by, RollingError, RollingResult, SplitRule};
use crate::series::{describe, log_returns, DescriptiveStats, PriceSeries, SeriesError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("descriptive statistics: {0}")]
    Series(#[from] SeriesError),
    #[error("rolling estimation: {0}")]
    Rolling(#[from] RollingError),
    #[error("tests: {0}")]
    Hypothesis(#[from] HypothesisError),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    SeriesFailed = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Contents of `<label>_stats.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub label: String,
    /// Daily percent log returns.
    pub returns: DescriptiveStats,
    /// Rolling Hurst estimates; `None` with fewer than four windows.
    pub hurst: Option<DescriptiveStats>,
}

/// Contents of `<label>_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub label: String,
    pub estimator: Method,
    pub window: usize,
    pub step: usize,
    pub ladder: Vec<usize>,
    pub detrend_order: usize,
    pub returns: usize,
    pub window_count: usize,
    pub count_rule: String,
    pub split_date: NaiveDate,
    pub split_rule: SplitRule,
    pub tests: TestReport,
}

pub const COUNT_RULE: &str = "floor((returns - window) / step) + 1";

#[derive(Debug, Clone)]
pub struct SeriesArtifacts {
    pub stats: StatsFile,
    pub rolling: RollingResult,
    pub report: ReportFile,
}

/// Runs every analysis step for one price series.
pub fn analyze_series(
    prices: &PriceSeries,
    config: &RunConfig,
) -> Result<SeriesArtifacts, PipelineError> {
    let label = prices.id().to_string();
    let returns = log_returns(prices);
    let return_stats = describe(&returns)?;
    let rolling = rolling_hurst(&returns, &config.protocol())?;
    let h = rolling.hurst_values();
    let hurst = if h.len() >= DescriptiveStats::MIN_LEN {
        Some(DescriptiveStats::from_values(&h)?)
    } else {
        None
    };
    let split = split_at_by(&rolling, config.split_date, config.split_rule);
    let tests = build_report_with(
        &split.before_h(),
        &split.after_h(),
        &label,
        &config.report_options(),
    )?;
    let protocol = &rolling.protocol;
    let report = ReportFile {
        label: label.clone(),
        estimator: protocol.estimator,
        window: protocol.window,
        step: protocol.step,
        ladder: protocol.ladder.sizes().to_vec(),
        detrend_order: protocol.detrend_order,
        returns: rolling.series_len,
        window_count: rolling.estimates.len(),
        count_rule: COUNT_RULE.to_string(),
        split_date: config.split_date,
        split_rule: config.split_rule,
        tests,
    };
    Ok(SeriesArtifacts {
        stats: StatsFile {
            label,
            returns: return_stats,
            hurst,
        },
        rolling,
        report,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the selected report files and returns their paths.
pub fn write_artifacts(
    artifacts: &SeriesArtifacts,
    config: &RunConfig,
) -> Result<Vec<PathBuf>, PipelineError> {
    let dir = &config.output_dir;
    let label = &artifacts.stats.label;
    let mut written = Vec::new();
    if config.formats.csv {
        let path = dir.join(format!("{label}_rolling.csv"));
        let mut buf = Vec::new();
        write_rolling(&mut buf, &artifacts.rolling).expect("writing to memory");
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    if config.formats.json {
        let path = dir.join(format!("{label}_stats.json"));
        write_atomic(&path, &to_json(&artifacts.stats)?)?;
        written.push(path);
        let path = dir.join(format!("{label}_report.json"));
        write_atomic(&path, &to_json(&artifacts.report)?)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug)]
pub struct SeriesOutcome {
    pub label: String,
    pub result: Result<Vec<PathBuf>, PipelineError>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub status: ExitStatus,
    /// Why the run stopped before any series was processed.
    pub usage_error: Option<String>,
    pub outcomes: Vec<SeriesOutcome>,
}

impl RunSummary {
    fn usage(message: String) -> Self {
        Self {
            status: ExitStatus::Usage,
            usage_error: Some(message),
            outcomes: Vec::new(),
        }
    }
}

fn check_output_dir(dir: &Path) -> Result<(), String> {
    std::fs::create_dir_all(dir)
        .map_err(|e| format!("cannot create output directory {}: {e}", dir.display()))?;
    let probe = dir.join(format!(".write-probe-{}", std::process::id()));
    std::fs::write(&probe, b"")
        .map_err(|e| format!("output directory {} is not writable: {e}", dir.display()))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

/// Processes every input. Series run in parallel and fail independently.
pub fn run_pipeline(config: &RunConfig) -> RunSummary {
    if config.inputs.is_empty() {
        return RunSummary::usage("no input series given".into());
    }
    if let Err(e) = config.validate() {
        return RunSummary::usage(e.to_string());
    }
    let mut seen = HashSet::new();
    for input in &config.inputs {
        if input.label.contains(['/', '\\']) || input.label.is_empty() {
            return RunSummary::usage(format!(
                "label '{}' is not usable as a file name",
                input.label
            ));
        }
        if !seen.insert(input.label.as_str()) {
            return RunSummary::usage(format!("duplicate series label '{}'", input.label));
        }
    }
    if let Err(e) = check_output_dir(&config.output_dir) {
        return RunSummary::usage(e);
    }

    let outcomes: Vec<SeriesOutcome> = config
        .inputs
        .par_iter()
        .map(|input| {
            let result = ingest_csv(&input.path, &input.label)
                .map_err(PipelineError::from)
                .and_then(|prices| analyze_series(&prices, config))
                .and_then(|artifacts| write_artifacts(&artifacts, config));
            SeriesOutcome {
                label: input.label.clone(),
                result,
            }
        })
        .collect();
    let status = if outcomes.iter().all(|o| o.result.is_ok()) {
        ExitStatus::Success
    } else {
        ExitStatus::SeriesFailed
    };
    RunSummary {
        status,
        usage_error: None,
        outcomes,
    }
}
