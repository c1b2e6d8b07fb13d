//! Sliding-window Hurst estimation and the before/after split.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{hurst_dfa, hurst_rs, BlockLadder, EstimatorError, HurstEstimate, Method};
use crate::series::ReturnSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RollingError {
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("series has {len} returns, window needs {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("window starting {start_date} (offset {offset}): {source}")]
    Window {
        offset: usize,
        start_date: NaiveDate,
        #[source]
        source: EstimatorError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingProtocol {
    pub window: usize,
    pub step: usize,
    pub estimator: Method,
    pub ladder: BlockLadder,
    pub detrend_order: usize,
}

impl Default for RollingProtocol {
    /// 500-point window advanced by 7, DFA-1 over `{4, …, 128}`.
    fn default() -> Self {
        Self {
            window: 500,
            step: 7,
            estimator: Method::Dfa,
            ladder: BlockLadder::default(),
            detrend_order: 1,
        }
    }
}

impl RollingProtocol {
    pub fn new(
        window: usize,
        step: usize,
        estimator: Method,
        ladder: BlockLadder,
        detrend_order: usize,
    ) -> Result<Self, RollingError> {
        let p = Self {
            window,
            step,
            estimator,
            ladder,
            detrend_order,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RollingError> {
        if self.step < 1 {
            return Err(RollingError::InvalidProtocol(
                "step must be at least 1".into(),
            ));
        }
        if self.window < 2 * self.ladder.max_size() {
            return Err(RollingError::InvalidProtocol(format!(
                "window {} is smaller than twice the largest block {}",
                self.window,
                self.ladder.max_size()
            )));
        }
        if self.estimator == Method::Dfa {
            if self.detrend_order < 1 {
                return Err(RollingError::InvalidProtocol(
                    "detrend order must be at least 1".into(),
                ));
            }
            let smallest = self.ladder.sizes()[0];
            if smallest < self.detrend_order + 2 {
                return Err(RollingError::InvalidProtocol(format!(
                    "block size {smallest} too small for detrend order {}",
                    self.detrend_order
                )));
            }
        }
        Ok(())
    }

    /// Runs the configured estimator on one window.
    pub fn estimate(&self, x: &[f64]) -> Result<HurstEstimate, EstimatorError> {
        match self.estimator {
            Method::Dfa => hurst_dfa(x, &self.ladder, self.detrend_order),
            Method::Rs => hurst_rs(x, &self.ladder),
        }
    }
}

/// `floor((n − window) / step) + 1`, or zero when the series is shorter than
/// one window.
pub fn window_count(n: usize, window: usize, step: usize) -> usize {
    if n < window || step == 0 {
        0
    } else {
        (n - window) / step + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    /// Offset of the first return in the window.
    pub offset: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub estimate: HurstEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingResult {
    pub id: String,
    pub protocol: RollingProtocol,
    /// Number of returns the windows were cut from.
    pub series_len: usize,
    pub estimates: Vec<WindowEstimate>,
}

impl RollingResult {
    pub fn hurst_values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.estimate.h).collect()
    }
}

/// Estimates H on windows starting at `0, step, 2·step, …`; a trailing
/// partial window is discarded. Windows are evaluated in parallel and
/// assembled in offset order.
pub fn rolling_hurst(
    returns: &ReturnSeries,
    protocol: &RollingProtocol,
) -> Result<RollingResult, RollingError> {
    protocol.validate()?;
    let n = returns.len();
    if n < protocol.window {
        return Err(RollingError::SeriesTooShort {
            len: n,
            window: protocol.window,
        });
    }
    let values = returns.values();
    let obs = returns.observations();
    let count = window_count(n, protocol.window, protocol.step);
    let results: Vec<Result<WindowEstimate, RollingError>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let offset = i * protocol.step;
            let end = offset + protocol.window;
            let start_date = obs[offset].date;
            protocol
                .estimate(&values[offset..end])
                .map(|estimate| WindowEstimate {
                    offset,
                    start_date,
                    end_date: obs[end - 1].date,
                    estimate,
                })
                .map_err(|source| RollingError::Window {
                    offset,
                    start_date,
                    source,
                })
        })
        .collect();
    let estimates = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(RollingResult {
        id: returns.id().to_string(),
        protocol: protocol.clone(),
        series_len: n,
        estimates,
    })
}

/// Which window date decides the side of the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    #[default]
    StartDate,
    EndDate,
}

impl std::str::FromStr for SplitRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "start" | "start_date" => Ok(SplitRule::StartDate),
            "end" | "end_date" => Ok(SplitRule::EndDate),
            other => Err(format!(
                "unknown split rule '{other}' (expected start or end)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<'a> {
    pub before: Vec<&'a WindowEstimate>,
    pub after: Vec<&'a WindowEstimate>,
}

impl Split<'_> {
    pub fn before_h(&self) -> Vec<f64> {
        self.before.iter().map(|e| e.estimate.h).collect()
    }

    pub fn after_h(&self) -> Vec<f64> {
        self.after.iter().map(|e| e.estimate.h).collect()
    }
}

/// Windows whose start date precedes `split_date` go before, the rest after.
pub fn split_at(result: &RollingResult, split_date: NaiveDate) -> Split<'_> {
    split_at_by(result, split_date, SplitRule::StartDate)
}

pub fn split_at_by(result: &RollingResult, split_date: NaiveDate, rule: SplitRule) -> Split<'_> {
    let (before, after) = result.estimates.iter().partition(|e| {
        let key = match rule {
            SplitRule::StartDate => e.start_date,
            SplitRule::EndDate => e.end_date,
        };
        key < split_date
    });
    Split { before, after }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ReturnPoint;
    use crate::synth::generate_gaussian;

    fn returns(n: usize) -> ReturnSeries {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let values = generate_gaussian(n, 1.0, 11).unwrap();
        let obs = values
            .into_iter()
            .enumerate()
            .map(|(i, ret)| ReturnPoint {
                date: start + chrono::Days::new(i as u64),
                ret,
            })
            .collect();
        ReturnSeries::new("G", obs).unwrap()
    }

    #[test]
    fn count_formula() {
        assert_eq!(window_count(4203, 500, 7), 530);
        assert_eq!(window_count(500, 500, 7), 1);
        assert_eq!(window_count(499, 500, 7), 0);
    }

    #[test]
    fn single_window_covers_everything() {
        let r = returns(500);
        let res = rolling_hurst(&r, &RollingProtocol::default()).unwrap();
        assert_eq!(res.estimates.len(), 1);
        let w = &res.estimates[0];
        assert_eq!(w.start_date, r.observations()[0].date);
        assert_eq!(w.end_date, r.observations()[499].date);
    }

    #[test]
    fn too_short() {
        let r = returns(499);
        assert_eq!(
            rolling_hurst(&r, &RollingProtocol::default()),
            Err(RollingError::SeriesTooShort {
                len: 499,
                window: 500
            })
        );
    }

    #[test]
    fn protocol_validation() {
        let ladder = BlockLadder::default();
        assert!(RollingProtocol::new(255, 7, Method::Dfa, ladder.clone(), 1).is_err());
        assert!(RollingProtocol::new(256, 0, Method::Dfa, ladder.clone(), 1).is_err());
        assert!(RollingProtocol::new(256, 1, Method::Dfa, ladder.clone(), 3).is_err());
        assert!(RollingProtocol::new(256, 1, Method::Rs, ladder.clone(), 3).is_ok());
        assert!(RollingProtocol::new(1024, 7, Method::Dfa, ladder, 2).is_ok());
    }

    #[test]
    fn windows_match_standalone_calls() {
        let r = returns(700);
        let p = RollingProtocol {
            step: 33,
            ..RollingProtocol::default()
        };
        let res = rolling_hurst(&r, &p).unwrap();
        let values = r.values();
        for (i, w) in res.estimates.iter().enumerate() {
            assert_eq!(w.offset, i * 33);
            let fresh = hurst_dfa(&values[w.offset..w.offset + 500], &p.ladder, 1).unwrap();
            assert_eq!(w.estimate, fresh);
        }
    }

    #[test]
    fn split_boundaries() {
        let r = returns(600);
        let res = rolling_hurst(
            &r,
            &RollingProtocol {
                step: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let first = res.estimates[0].start_date;
        let last = res.estimates.last().unwrap().start_date;

        let s = split_at(&res, first);
        assert!(s.before.is_empty());
        assert_eq!(s.after.len(), res.estimates.len());

        let s = split_at(&res, last + chrono::Days::new(1));
        assert_eq!(s.before.len(), res.estimates.len());
        assert!(s.after.is_empty());

        // the split date itself lands after
        let mid = res.estimates[4].start_date;
        let s = split_at(&res, mid);
        assert_eq!(s.before.len(), 4);
        assert_eq!(s.after[0].offset, 40);

        // classifying by end date moves spanning windows to after
        let s = split_at_by(&res, res.estimates[0].end_date, SplitRule::EndDate);
        assert!(s.before.is_empty());
    }
}
