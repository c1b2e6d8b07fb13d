//! Price and return series, the log-return transform and descriptive
//! statistics of a sample.
//!
//! Observations are treated as equally spaced in index; calendar gaps
//! (weekends, holidays) carry no weight.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("series needs at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("non-positive or non-finite price {price} on {date}")]
    BadPrice { date: NaiveDate, price: f64 },
    #[error("non-finite return on {date}")]
    BadReturn { date: NaiveDate },
    #[error("dates not strictly increasing at {date} (previous {previous})")]
    DateOrder {
        date: NaiveDate,
        previous: NaiveDate,
    },
    #[error("sample contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub price: f64,
}

/// Dated price levels for one index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    id: String,
    observations: Vec<PricePoint>,
}

impl PriceSeries {
    pub fn new(id: impl Into<String>, observations: Vec<PricePoint>) -> Result<Self, SeriesError> {
        if observations.len() < 2 {
            return Err(SeriesError::TooShort {
                need: 2,
                got: observations.len(),
            });
        }
        for p in &observations {
            if !(p.price.is_finite() && p.price > 0.0) {
                return Err(SeriesError::BadPrice {
                    date: p.date,
                    price: p.price,
                });
            }
        }
        check_dates(observations.iter().map(|p| p.date))?;
        Ok(Self {
            id: id.into(),
            observations,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn observations(&self) -> &[PricePoint] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub date: NaiveDate,
    /// Continuously compounded return in percent.
    pub ret: f64,
}

/// Dated log returns (percent) derived from a [`PriceSeries`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    id: String,
    observations: Vec<ReturnPoint>,
}

impl ReturnSeries {
    pub fn new(id: impl Into<String>, observations: Vec<ReturnPoint>) -> Result<Self, SeriesError> {
        if observations.is_empty() {
            return Err(SeriesError::TooShort { need: 1, got: 0 });
        }
        if let Some(p) = observations.iter().find(|p| !p.ret.is_finite()) {
            return Err(SeriesError::BadReturn { date: p.date });
        }
        check_dates(observations.iter().map(|p| p.date))?;
        Ok(Self {
            id: id.into(),
            observations,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn observations(&self) -> &[ReturnPoint] {
        &self.observations
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|p| p.ret).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.observations.iter().map(|p| p.date).collect()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

fn check_dates(dates: impl Iterator<Item = NaiveDate>) -> Result<(), SeriesError> {
    let mut previous: Option<NaiveDate> = None;
    for date in dates {
        if let Some(prev) = previous {
            if date <= prev {
                return Err(SeriesError::DateOrder {
                    date,
                    previous: prev,
                });
            }
        }
        previous = Some(date);
    }
    Ok(())
}

/// `r_{t+1} = 100 · ln(P_{t+1} / P_t)`, dated with the later observation.
pub fn log_returns(prices: &PriceSeries) -> ReturnSeries {
    let observations = prices
        .observations
        .windows(2)
        .map(|w| {
            let (p0, p1) = (w[0].price, w[1].price);
            let mut r = (p1 / p0).ln();
            if !r.is_finite() {
                // ratio overflowed; the difference of logs is always finite here
                r = p1.ln() - p0.ln();
            }
            ReturnPoint {
                date: w[1].date,
                ret: 100.0 * r,
            }
        })
        .collect();
    ReturnSeries {
        id: prices.id.clone(),
        observations,
    }
}

/// Summary of a sample. Moments use the population (1/n) convention and
/// kurtosis is non-excess (3 for a normal). Higher moments are `None` when the
/// sample has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    pub jarque_bera: Option<f64>,
}

/// `n/6 · (S² + (K − 3)²/4)`.
pub fn jarque_bera(n: usize, skewness: f64, kurtosis: f64) -> f64 {
    let excess = kurtosis - 3.0;
    n as f64 / 6.0 * (skewness * skewness + excess * excess / 4.0)
}

impl DescriptiveStats {
    pub const MIN_LEN: usize = 4;

    pub fn from_values(values: &[f64]) -> Result<Self, SeriesError> {
        let n = values.len();
        if n < Self::MIN_LEN {
            return Err(SeriesError::TooShort {
                need: Self::MIN_LEN,
                got: n,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SeriesError::NonFinite);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let min = sorted[0];
        let max = sorted[n - 1];
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };

        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        if min == max {
            return Ok(Self {
                n,
                mean: min,
                median,
                min,
                max,
                std_dev: 0.0,
                skewness: None,
                kurtosis: None,
                jarque_bera: None,
            });
        }
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        let skewness = m3 / m2.powf(1.5);
        let kurtosis = m4 / (m2 * m2);
        Ok(Self {
            n,
            mean,
            median,
            min,
            max,
            std_dev: m2.sqrt(),
            skewness: Some(skewness),
            kurtosis: Some(kurtosis),
            jarque_bera: Some(jarque_bera(n, skewness, kurtosis)),
        })
    }
}

pub fn describe(returns: &ReturnSeries) -> Result<DescriptiveStats, SeriesError> {
    DescriptiveStats::from_values(&returns.values())
}
