//! Run configuration, its defaults and the flat `key = value` file format.
//!
//! ```text
//! # comment
//! input = data/oe_bond.csv:OE
//! input = data/fn_bond.csv:FN
//! estimator = dfa
//! window = 500
//! step = 7
//! ladder = 4,8,16,32,64,128
//! detrend_order = 1
//! split_date = 2008-09-15
//! confidence_level = 0.999
//! output_dir = out
//! formats = json,csv
//! ```
//!
//! `split_rule`, `alternative` and `centering` are also accepted. Keys may
//! use `-` in place of `_`.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::estimators::{BlockLadder, Method};
use crate::hypothesis::{Alternative, Centering, ReportOptions};
use crate::rolling::{RollingProtocol, SplitRule};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid value for {key}: {message}")]
    Value { key: String, message: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub label: String,
}

impl InputSpec {
    /// `PATH` or `PATH:LABEL`; the label defaults to the file stem.
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ConfigError::Value {
                key: "input".into(),
                message: "empty".into(),
            });
        }
        if let Some((path, label)) = s.rsplit_once(':') {
            if !label.is_empty() && !label.contains(['/', '\\']) && !path.is_empty() {
                return Ok(Self {
                    path: PathBuf::from(path),
                    label: label.to_string(),
                });
            }
        }
        let path = PathBuf::from(s);
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| s.to_string());
        Ok(Self { path, label })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self {
            json: true,
            csv: true,
        }
    }
}

impl std::str::FromStr for Formats {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut f = Formats {
            json: false,
            csv: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "json" => f.json = true,
                "csv" => f.csv = true,
                other => return Err(format!("unknown format '{other}'")),
            }
        }
        if !f.json && !f.csv {
            return Err("at least one of json, csv".into());
        }
        Ok(f)
    }
}

pub fn parse_ladder(s: &str) -> Result<BlockLadder, String> {
    let sizes = s
        .split([',', ';'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| format!("bad block size '{p}'"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    BlockLadder::new(sizes).map_err(|e| e.to_string())
}

pub fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
        .map_err(|e| format!("'{s}' is not an ISO-8601 date: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub inputs: Vec<InputSpec>,
    pub estimator: Method,
    pub window: usize,
    pub step: usize,
    pub ladder: BlockLadder,
    pub detrend_order: usize,
    pub split_date: NaiveDate,
    pub split_rule: SplitRule,
    pub confidence_level: f64,
    pub alternative: Alternative,
    pub centering: Centering,
    pub output_dir: PathBuf,
    pub formats: Formats,
}

impl Default for RunConfig {
    /// 500/7 DFA-1 over `{4, …, 128}`, split on 2008-09-15, 0.999 bounds.
    fn default() -> Self {
        let protocol = RollingProtocol::default();
        Self {
            inputs: Vec::new(),
            estimator: protocol.estimator,
            window: protocol.window,
            step: protocol.step,
            ladder: protocol.ladder,
            detrend_order: protocol.detrend_order,
            split_date: NaiveDate::from_ymd_opt(2008, 9, 15).expect("valid date"),
            split_rule: SplitRule::StartDate,
            confidence_level: 0.999,
            alternative: Alternative::TwoSided,
            centering: Centering::Mean,
            output_dir: PathBuf::from("out"),
            formats: Formats::default(),
        }
    }
}

impl RunConfig {
    /// Longer window used for robustness runs; every other field keeps its
    /// default.
    pub const ROBUST_WINDOW: usize = 1024;

    pub fn protocol(&self) -> RollingProtocol {
        RollingProtocol {
            window: self.window,
            step: self.step,
            estimator: self.estimator,
            ladder: self.ladder.clone(),
            detrend_order: self.detrend_order,
        }
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            level: self.confidence_level,
            alternative: self.alternative,
            centering: self.centering,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.protocol()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.confidence_level > 0.5 && self.confidence_level < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "confidence_level {} outside (0.5, 1)",
                self.confidence_level
            )));
        }
        if !self.formats.json && !self.formats.csv {
            return Err(ConfigError::Invalid("no output format selected".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting. `input` appends.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |message: String| ConfigError::Value {
            key: key.clone(),
            message,
        };
        match key.as_str() {
            "input" | "inputs" => self.inputs.push(InputSpec::parse(value)?),
            "estimator" => self.estimator = value.parse().map_err(bad)?,
            "window" => self.window = value.parse().map_err(|e| bad(format!("{e}")))?,
            "step" => self.step = value.parse().map_err(|e| bad(format!("{e}")))?,
            "ladder" => self.ladder = parse_ladder(value).map_err(bad)?,
            "detrend_order" => {
                self.detrend_order = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            "split_date" => self.split_date = parse_date(value).map_err(bad)?,
            "split_rule" => self.split_rule = value.parse().map_err(bad)?,
            "confidence_level" => {
                self.confidence_level = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            "alternative" => self.alternative = value.parse().map_err(bad)?,
            "centering" => self.centering = value.parse().map_err(bad)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "formats" => self.formats = value.parse().map_err(bad)?,
            _ => return Err(ConfigError::UnknownKey(key)),
        }
        Ok(())
    }

    /// Parses the flat key-value format on top of the defaults.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_kv_str(text)?;
        Ok(cfg)
    }

    pub fn apply_kv_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected key = value, got '{line}'"),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_kv_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_kv_str(&text)
    }
}
