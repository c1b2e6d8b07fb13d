//! Time-varying long-range dependence in return series.
//!
//! Hurst exponents are estimated by detrended fluctuation analysis or
//! rescaled range over sliding windows of a log-return series; the resulting
//! sequence is split at a date and the two halves are compared with a
//! Mann-Whitney test, a Levene test and Student-t bounds around the
//! random-walk value `H = 0.5`.
//!
//! ```
//! use lrd_core::estimators::{hurst_dfa, BlockLadder};
//! use lrd_core::synth::{generate_fgn, FgnSpec};
//!
//! let x = generate_fgn(&FgnSpec::new(0.7, 4096, 1.0, 7).unwrap()).unwrap();
//! let est = hurst_dfa(&x, &BlockLadder::default(), 1).unwrap();
//! assert!((est.h - 0.7).abs() < 0.15);
//! ```

pub mod config;
pub mod estimators;
pub mod hypothesis;
pub mod io;
pub mod pipeline;
pub mod regression;
pub mod rolling;
pub mod series;
pub mod special;
pub mod synth;

pub use estimators::{hurst_dfa, hurst_rs, BlockLadder, HurstEstimate, Method};
pub use rolling::{rolling_hurst, split_at, RollingProtocol, RollingResult};
pub use series::{describe, log_returns, DescriptiveStats, PriceSeries, ReturnSeries};
