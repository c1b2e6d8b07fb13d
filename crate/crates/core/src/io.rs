//! File formats: price CSV input, rolling-estimate CSV, synthetic price
//! files, and atomic writes.
//!
//! Price files carry a `date,price` header (column order free, names
//! case-insensitive), ISO-8601 dates and `#` comment lines.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use thiserror::Error;

use crate::rolling::RollingResult;
use crate::series::{PricePoint, PriceSeries, SeriesError};
use crate::synth::{generate_fgn, FgnSpec, SynthError, RNG_ALGORITHM};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", .path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: header must name a '{missing}' column", .path.display())]
    MissingColumn {
        path: PathBuf,
        missing: &'static str,
    },
    #[error("{}: row {row}: {message}", .path.display())]
    Row {
        path: PathBuf,
        row: u64,
        message: String,
    },
    #[error("{}: {source}", .path.display())]
    Series {
        path: PathBuf,
        #[source]
        source: SeriesError,
    },
    #[error(transparent)]
    Synth(#[from] SynthError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a price CSV into a validated [`PriceSeries`].
pub fn ingest_csv(path: &Path, label: &str) -> Result<PriceSeries, IoError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    read_prices(file, path, label)
}

/// Parses price CSV text from any reader; `path` is used only in errors.
/// Row numbers are file line numbers, header included.
pub fn read_prices<R: Read>(reader: R, path: &Path, label: &str) -> Result<PriceSeries, IoError> {
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(IoError::MissingColumn {
                path: path.to_path_buf(),
                missing: name,
            })
    };
    let date_col = find("date")?;
    let price_col = find("price")?;

    let row_err = |row: u64, message: String| IoError::Row {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut observations: Vec<PricePoint> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let date_cell = record.get(date_col).unwrap_or("");
        let price_cell = record.get(price_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d")
            .map_err(|e| row_err(row, format!("unparsable date '{date_cell}': {e}")))?;
        if price_cell.is_empty() {
            return Err(row_err(row, "missing price".into()));
        }
        let price: f64 = price_cell
            .parse()
            .map_err(|_| row_err(row, format!("unparsable price '{price_cell}'")))?;
        if !(price.is_finite() && price > 0.0) {
            return Err(row_err(row, format!("price {price} is not positive")));
        }
        if let Some(prev) = observations.last() {
            if date == prev.date {
                return Err(row_err(row, format!("duplicate date {date}")));
            }
            if date < prev.date {
                return Err(row_err(
                    row,
                    format!("date {date} precedes previous row {}", prev.date),
                ));
            }
        }
        observations.push(PricePoint { date, price });
    }
    PriceSeries::new(label, observations).map_err(|source| IoError::Series {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `date,price` rows preceded by `# ` comment lines. Prices use the
/// shortest round-trip representation.
pub fn write_prices<W: Write>(
    mut out: W,
    comments: &[String],
    points: &[PricePoint],
) -> io::Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "date,price")?;
    for p in points {
        writeln!(out, "{},{}", p.date, p.price)?;
    }
    Ok(())
}

/// `count` weekdays starting at `start` (moved forward to a weekday).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// First date of synthetic price files.
pub fn synth_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

/// Prices `exp(cumsum(x)/100)` from 1.0, so that percent log returns give
/// back `x`. Dated on business days from `start`; length `x.len() + 1`.
pub fn integrate_returns(x: &[f64], start: NaiveDate) -> Vec<PricePoint> {
    let dates = business_days(start, x.len() + 1);
    let mut level = 0.0;
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(PricePoint {
        date: dates[0],
        price: 1.0,
    });
    for (r, &date) in x.iter().zip(&dates[1..]) {
        level += r / 100.0;
        out.push(PricePoint {
            date,
            price: level.exp(),
        });
    }
    out
}

/// Generates fGn for `spec` and writes it as a price file at `path`.
pub fn emit_synth(spec: &FgnSpec, path: &Path) -> Result<(), IoError> {
    let x = generate_fgn(spec)?;
    let points = integrate_returns(&x, synth_start_date());
    let comments = vec![format!(
        "synthetic fgn h={} n={} sigma={} seed={} rng={}",
        spec.h, spec.n, spec.sigma, spec.seed, RNG_ALGORITHM
    )];
    let mut buf = Vec::new();
    write_prices(&mut buf, &comments, &points).map_err(io_err(path))?;
    write_atomic(path, &buf)
}

/// Header of the rolling-estimate CSV.
pub const ROLLING_HEADER: &str = "window_start_date,window_end_date,h,r_squared";

pub fn write_rolling<W: Write>(mut out: W, result: &RollingResult) -> io::Result<()> {
    let p = &result.protocol;
    let ladder: Vec<String> = p.ladder.sizes().iter().map(|s| s.to_string()).collect();
    writeln!(
        out,
        "# series={} estimator={} window={} step={} ladder={} detrend_order={}",
        result.id,
        p.estimator,
        p.window,
        p.step,
        ladder.join(";"),
        p.detrend_order
    )?;
    writeln!(
        out,
        "# returns={} windows={} (floor((returns - window) / step) + 1)",
        result.series_len,
        result.estimates.len()
    )?;
    writeln!(out, "{ROLLING_HEADER}")?;
    for e in &result.estimates {
        writeln!(
            out,
            "{},{},{},{}",
            e.start_date, e.end_date, e.estimate.h, e.estimate.r_squared
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingRow {
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub h: f64,
    pub r_squared: f64,
}

/// Reads a rolling-estimate CSV as written by [`write_rolling`].
pub fn read_rolling(path: &Path) -> Result<Vec<RollingRow>, IoError> {
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let expected: Vec<&str> = ROLLING_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(IoError::MissingColumn {
            path: path.to_path_buf(),
            missing: "window_start_date",
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| IoError::Row {
            path: path.to_path_buf(),
            row,
            message,
        };
        let date = |i: usize| {
            NaiveDate::parse_from_str(&record[i], "%Y-%m-%d")
                .map_err(|e| bad(format!("bad date '{}': {e}", &record[i])))
        };
        let num = |i: usize| {
            record[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("bad number '{}'", &record[i])))
        };
        rows.push(RollingRow {
            start_date: date(0)?,
            end_date: date(1)?,
            h: num(2)?,
            r_squared: num(3)?,
        });
    }
    Ok(rows)
}

/// Writes `bytes` to a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}
