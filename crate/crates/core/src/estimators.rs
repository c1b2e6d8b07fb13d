//! Hurst exponent estimators: rescaled range (R/S) and detrended fluctuation
//! analysis (DFA).
//!
//! Both estimators evaluate a scale-dependent quantity over a [`BlockLadder`]
//! and take the slope of the log-log OLS line as `H`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regression::LinearFit;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("invalid block ladder: {0}")]
    InvalidLadder(String),
    #[error("ladder maximum {max} exceeds half the series length {len}")]
    LadderTooLong { max: usize, len: usize },
    #[error("series needs at least {need} points, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("degenerate window: zero variance")]
    DegenerateWindow,
    #[error("block size {size} too small for detrending order {order}")]
    BlockTooSmall { size: usize, order: usize },
    #[error("insufficient scaling points: {got} survive, 3 needed")]
    InsufficientPoints { got: usize },
    #[error("scaling point at size {size} has non-positive value {value}")]
    BadPoint { size: usize, value: f64 },
    #[error("series contains a non-finite value")]
    NonFinite,
}

/// Block sizes at which the scaling quantity is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockLadder {
    sizes: Vec<usize>,
}

impl BlockLadder {
    pub const MIN_SIZE: usize = 4;
    pub const MIN_POINTS: usize = 3;

    pub fn new(sizes: Vec<usize>) -> Result<Self, EstimatorError> {
        if sizes.len() < Self::MIN_POINTS {
            return Err(EstimatorError::InvalidLadder(format!(
                "need at least {} sizes, got {}",
                Self::MIN_POINTS,
                sizes.len()
            )));
        }
        if let Some(&s) = sizes.iter().find(|&&s| s < Self::MIN_SIZE) {
            return Err(EstimatorError::InvalidLadder(format!(
                "size {s} is below the minimum {}",
                Self::MIN_SIZE
            )));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EstimatorError::InvalidLadder(
                "sizes must be strictly increasing".into(),
            ));
        }
        Ok(Self { sizes })
    }

    /// Powers of two from `4` up to `max`, inclusive.
    pub fn dyadic(max: usize) -> Result<Self, EstimatorError> {
        let sizes = std::iter::successors(Some(Self::MIN_SIZE), |s| Some(s * 2))
            .take_while(|&s| s <= max)
            .collect();
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn max_size(&self) -> usize {
        *self.sizes.last().expect("ladder is never empty")
    }

    /// Largest block must not exceed half the series.
    pub fn check_fits(&self, len: usize) -> Result<(), EstimatorError> {
        if self.max_size() > len / 2 {
            return Err(EstimatorError::LadderTooLong {
                max: self.max_size(),
                len,
            });
        }
        Ok(())
    }
}

impl Default for BlockLadder {
    /// `{4, 8, 16, 32, 64, 128}`.
    fn default() -> Self {
        Self {
            sizes: vec![4, 8, 16, 32, 64, 128],
        }
    }
}

impl TryFrom<Vec<usize>> for BlockLadder {
    type Error = EstimatorError;
    fn try_from(sizes: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(sizes)
    }
}

impl From<BlockLadder> for Vec<usize> {
    fn from(l: BlockLadder) -> Self {
        l.sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dfa,
    Rs,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Dfa => "dfa",
            Method::Rs => "rs",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dfa" => Ok(Method::Dfa),
            "rs" | "r/s" => Ok(Method::Rs),
            other => Err(format!("unknown estimator '{other}' (expected dfa or rs)")),
        }
    }
}

/// One (block size, scaling value) pair fed to the log-log regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub size: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub method: Method,
    /// Polynomial detrending order; DFA only.
    pub detrend_order: Option<usize>,
    pub ladder: BlockLadder,
    /// Retained points, in ladder order.
    pub points: Vec<ScalingPoint>,
}

impl HurstEstimate {
    /// Regresses `ln value` on `ln size`. Every point must be positive and
    /// at least three must be supplied.
    pub fn from_points(
        method: Method,
        detrend_order: Option<usize>,
        ladder: BlockLadder,
        points: Vec<ScalingPoint>,
    ) -> Result<Self, EstimatorError> {
        if let Some(p) = points
            .iter()
            .find(|p| !(p.value > 0.0 && p.value.is_finite()))
        {
            return Err(EstimatorError::BadPoint {
                size: p.size,
                value: p.value,
            });
        }
        if points.len() < BlockLadder::MIN_POINTS {
            return Err(EstimatorError::InsufficientPoints { got: points.len() });
        }
        let fit =
            log_log_fit(&points).ok_or(EstimatorError::InsufficientPoints { got: points.len() })?;
        Ok(Self {
            h: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            method,
            detrend_order,
            ladder,
            points,
        })
    }
}

/// OLS of `ln value` on `ln size`.
pub fn log_log_fit(points: &[ScalingPoint]) -> Option<LinearFit> {
    let xs: Vec<f64> = points.iter().map(|p| (p.size as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    LinearFit::fit(&xs, &ys)
}

fn check_finite(x: &[f64]) -> Result<(), EstimatorError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(EstimatorError::NonFinite)
    }
}

/// Range of the partial sums of mean deviations divided by the population
/// standard deviation.
pub fn rs_statistic(x: &[f64]) -> Result<f64, EstimatorError> {
    if x.len() < 2 {
        return Err(EstimatorError::TooShort {
            need: 2,
            got: x.len(),
        });
    }
    check_finite(x)?;
    if x.iter().all(|&v| v == x[0]) {
        return Err(EstimatorError::DegenerateWindow);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut cum = 0.0;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    let mut ss = 0.0;
    for &v in x {
        let d = v - mean;
        ss += d * d;
        cum += d;
        hi = hi.max(cum);
        lo = lo.min(cum);
    }
    let s = (ss / n).sqrt();
    if s == 0.0 {
        return Err(EstimatorError::DegenerateWindow);
    }
    Ok((hi - lo) / s)
}

/// R/S Hurst estimate: for each size, the mean R/S over non-overlapping
/// blocks; zero-variance blocks are skipped and sizes with no usable block
/// are dropped.
pub fn hurst_rs(x: &[f64], ladder: &BlockLadder) -> Result<HurstEstimate, EstimatorError> {
    check_finite(x)?;
    ladder.check_fits(x.len())?;
    let mut points = Vec::with_capacity(ladder.sizes().len());
    for &size in ladder.sizes() {
        let mut total = 0.0;
        let mut used = 0usize;
        for block in x.chunks_exact(size) {
            match rs_statistic(block) {
                Ok(rs) => {
                    total += rs;
                    used += 1;
                }
                Err(EstimatorError::DegenerateWindow) => {}
                Err(e) => return Err(e),
            }
        }
        if used > 0 {
            let value = total / used as f64;
            if value > 0.0 {
                points.push(ScalingPoint { size, value });
            }
        }
    }
    HurstEstimate::from_points(Method::Rs, None, ladder.clone(), points)
}

/// Integrated mean-subtracted series, `x(i) = Σ_{t ≤ i} (y(t) − ȳ)`.
pub fn dfa_profile(y: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    if y.is_empty() {
        return Err(EstimatorError::TooShort { need: 1, got: 0 });
    }
    check_finite(y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    Ok(y.iter()
        .scan(0.0, |acc, &v| {
            *acc += v - mean;
            Some(*acc)
        })
        .collect())
}

/// Orthonormal basis of polynomials of degree `0..=order` sampled at the
/// `m` within-window positions.
fn polynomial_basis(m: usize, order: usize) -> Vec<Vec<f64>> {
    let half = (m as f64 - 1.0) / 2.0;
    let scale = if half > 0.0 { half } else { 1.0 };
    let t: Vec<f64> = (0..m).map(|i| (i as f64 - half) / scale).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for degree in 0..=order {
        let mut v: Vec<f64> = t.iter().map(|&ti| ti.powi(degree as i32)).collect();
        // Gram-Schmidt, two passes
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    basis
}

/// Root mean square residual of per-window polynomial fits of the given
/// order to the profile. Windows of length `m` start at the first point;
/// trailing points past the last full window are ignored and the mean runs
/// over covered points only. Residuals at rounding level are reported as
/// exactly `0.0`.
pub fn dfa_fluctuation(profile: &[f64], m: usize, order: usize) -> Result<f64, EstimatorError> {
    if m < order + 2 {
        return Err(EstimatorError::BlockTooSmall { size: m, order });
    }
    if profile.len() < m {
        return Err(EstimatorError::TooShort {
            need: m,
            got: profile.len(),
        });
    }
    check_finite(profile)?;
    let basis = polynomial_basis(m, order);
    let mut rss = 0.0;
    let mut scale = 0.0;
    let mut resid = vec![0.0; m];
    for window in profile.chunks_exact(m) {
        resid.copy_from_slice(window);
        for q in &basis {
            let dot: f64 = resid.iter().zip(q).map(|(a, b)| a * b).sum();
            resid.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
        rss += resid.iter().map(|r| r * r).sum::<f64>();
        scale += window.iter().map(|v| v * v).sum::<f64>();
    }
    let covered = (profile.len() / m * m) as f64;
    const ROUNDING: f64 = 1e-24; // (1e-12)² relative to the profile energy
    if rss <= ROUNDING * scale {
        return Ok(0.0);
    }
    Ok((rss / covered).sqrt())
}

/// DFA Hurst estimate with polynomial detrending of the given order.
pub fn hurst_dfa(
    y: &[f64],
    ladder: &BlockLadder,
    order: usize,
) -> Result<HurstEstimate, EstimatorError> {
    if order < 1 {
        return Err(EstimatorError::BlockTooSmall {
            size: ladder.sizes()[0],
            order,
        });
    }
    ladder.check_fits(y.len())?;
    let profile = dfa_profile(y)?;
    let mut points = Vec::with_capacity(ladder.sizes().len());
    for &size in ladder.sizes() {
        let f = dfa_fluctuation(&profile, size, order)?;
        if f > 0.0 {
            points.push(ScalingPoint { size, value: f });
        }
    }
    HurstEstimate::from_points(Method::Dfa, Some(order), ladder.clone(), points)
}
