//! Before/after comparison of Hurst subsamples: Mann-Whitney location test,
//! Levene dispersion test and Student-t bounds on the mean.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{erfc, f_sf, normal_cdf, student_t_quantile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypothesisError {
    #[error("{what} needs at least {need} observations, got {got}")]
    TooFew {
        what: &'static str,
        need: usize,
        got: usize,
    },
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("confidence level {0} outside (0.5, 1)")]
    BadLevel(f64),
    #[error("standard deviation {0} must be non-negative")]
    BadSd(f64),
}

fn require(what: &'static str, x: &[f64], need: usize) -> Result<(), HypothesisError> {
    if x.len() < need {
        return Err(HypothesisError::TooFew {
            what,
            need,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(HypothesisError::NonFinite);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// First sample tends to be smaller.
    Less,
    /// First sample tends to be larger.
    Greater,
}

impl std::str::FromStr for Alternative {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            "less" => Ok(Alternative::Less),
            "greater" => Ok(Alternative::Greater),
            other => Err(format!("unknown alternative '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U for the first sample: pairs where it is larger, ties counted ½.
    pub u: f64,
    /// U for the second sample; `u + u_other = n₁n₂`.
    pub u_other: f64,
    /// Midrank sum of the first sample in the pooled ranking.
    pub rank_sum: f64,
    pub p: f64,
    pub method: PValueMethod,
    pub alternative: Alternative,
}

/// Largest pooled size for which the exact null distribution is used.
pub const EXACT_MAX_TOTAL: usize = 16;

/// Midranks (1-based) of the pooled sample, plus Σ(t³ − t) over tie groups.
fn midranks(pooled: &[f64]) -> (Vec<f64>, f64) {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && pooled[idx[j]] == pooled[idx[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Number of arrangements giving each U value for sample sizes `(n1, n2)`,
/// indexed by U.
fn exact_u_counts(n1: usize, n2: usize) -> Vec<u64> {
    // counts[i][j][u] = #arrangements of i firsts and j seconds with U = u,
    // built by conditioning on whether the largest element is a first
    // (contributing j) or a second.
    let max_u = n1 * n2;
    let mut prev_row: Vec<Vec<u64>> = (0..=n2).map(|_| vec![1]).collect(); // i = 0
    for i in 1..=n1 {
        let mut row: Vec<Vec<u64>> = Vec::with_capacity(n2 + 1);
        row.push(vec![1]); // j = 0
        for j in 1..=n2 {
            let mut c = vec![0u64; i * j + 1];
            for (u, &k) in prev_row[j].iter().enumerate() {
                c[u + j] += k;
            }
            for (u, &k) in row[j - 1].iter().enumerate() {
                c[u] += k;
            }
            row.push(c);
        }
        prev_row = row;
    }
    let mut counts = prev_row.swap_remove(n2);
    counts.resize(max_u + 1, 0);
    counts
}

fn exact_p(u: f64, n1: usize, n2: usize, alternative: Alternative) -> f64 {
    let counts = exact_u_counts(n1, n2);
    let total: u64 = counts.iter().sum();
    // tie-free U is an integer
    let u = u.round() as usize;
    let le: u64 = counts[..=u].iter().sum();
    let ge: u64 = counts[u..].iter().sum();
    let total = total as f64;
    match alternative {
        Alternative::Less => le as f64 / total,
        Alternative::Greater => ge as f64 / total,
        Alternative::TwoSided => (2.0 * le.min(ge) as f64 / total).min(1.0),
    }
}

/// Two-sided Mann-Whitney U test.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney, HypothesisError> {
    mann_whitney_with(a, b, Alternative::TwoSided)
}

/// Mann-Whitney U test. Exact null distribution when `|a| + |b| ≤ 16` and
/// there are no ties; otherwise the normal approximation with tie-corrected
/// variance and continuity correction.
pub fn mann_whitney_with(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
) -> Result<MannWhitney, HypothesisError> {
    require("first sample", a, 1)?;
    require("second sample", b, 1)?;
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let rank_sum: f64 = ranks[..n1].iter().sum();
    let rank_sum_b: f64 = ranks[n1..].iter().sum();
    let n1f = n1 as f64;
    let n2f = n2 as f64;
    let u = rank_sum - n1f * (n1f + 1.0) / 2.0;
    let u_other = rank_sum_b - n2f * (n2f + 1.0) / 2.0;

    let (p, method) = if n1 + n2 <= EXACT_MAX_TOTAL && tie_term == 0.0 {
        (exact_p(u, n1, n2, alternative), PValueMethod::Exact)
    } else {
        (
            normal_p(u, n1f, n2f, tie_term, alternative),
            PValueMethod::Normal,
        )
    };
    Ok(MannWhitney {
        u,
        u_other,
        rank_sum,
        p,
        method,
        alternative,
    })
}

fn normal_p(u: f64, n1: f64, n2: f64, tie_term: f64, alternative: Alternative) -> f64 {
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 || var.is_nan() {
        // every observation tied
        return 1.0;
    }
    let sd = var.sqrt();
    let p = match alternative {
        Alternative::TwoSided => {
            let z = ((u - mean).abs() - 0.5).max(0.0) / sd;
            erfc(z / std::f64::consts::SQRT_2)
        }
        Alternative::Less => normal_cdf((u - mean + 0.5) / sd),
        Alternative::Greater => normal_cdf(-(u - mean - 0.5) / sd),
    };
    p.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Original Levene: deviations from the group mean.
    #[default]
    Mean,
    /// Brown-Forsythe: deviations from the group median.
    Median,
}

impl std::str::FromStr for Centering {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Centering::Mean),
            "median" => Ok(Centering::Median),
            other => Err(format!(
                "unknown centering '{other}' (expected mean or median)"
            )),
        }
    }
}

/// `w` and `p` are `None` when there is no within-group dispersion of the
/// absolute deviations, which leaves the F ratio undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Levene {
    pub w: Option<f64>,
    pub p: Option<f64>,
    pub df1: usize,
    pub df2: usize,
    pub centering: Centering,
}

pub fn levene(a: &[f64], b: &[f64]) -> Result<Levene, HypothesisError> {
    levene_with(&[a, b], Centering::Mean)
}

/// One-way ANOVA F on absolute deviations from each group's center, with
/// `(k − 1, N − k)` degrees of freedom.
pub fn levene_with(groups: &[&[f64]], centering: Centering) -> Result<Levene, HypothesisError> {
    if groups.len() < 2 {
        return Err(HypothesisError::TooFew {
            what: "levene groups",
            need: 2,
            got: groups.len(),
        });
    }
    for g in groups {
        require("levene group", g, 2)?;
    }
    let k = groups.len();
    let total: usize = groups.iter().map(|g| g.len()).sum();
    let deviations: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let center = match centering {
                Centering::Mean => g.iter().sum::<f64>() / g.len() as f64,
                Centering::Median => median(g),
            };
            g.iter().map(|v| (v - center).abs()).collect()
        })
        .collect();
    let group_means: Vec<f64> = deviations
        .iter()
        .map(|z| z.iter().sum::<f64>() / z.len() as f64)
        .collect();
    let grand = deviations.iter().flatten().sum::<f64>() / total as f64;
    let equal_means = group_means.iter().all(|&m| m == group_means[0]);
    let between: f64 = if equal_means {
        0.0
    } else {
        deviations
            .iter()
            .zip(&group_means)
            .map(|(z, m)| z.len() as f64 * (m - grand).powi(2))
            .sum()
    };
    let within: f64 = deviations
        .iter()
        .zip(&group_means)
        .map(|(z, m)| z.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    let df1 = k - 1;
    let df2 = total - k;
    let (w, p) = if within > 0.0 {
        let w = (df2 as f64 / df1 as f64) * between / within;
        (Some(w), Some(f_sf(w, df1 as f64, df2 as f64)))
    } else {
        (None, None)
    };
    Ok(Levene {
        w,
        p,
        df1,
        df2,
        centering,
    })
}

fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBounds {
    pub lower: f64,
    pub upper: f64,
    pub std_error: f64,
    /// One-sided `level` quantile of Student's t with `n − 1` df.
    pub t_critical: f64,
}

/// `mean ± t_{level, n−1} · sd/√n`, with the one-sided `level` quantile.
pub fn t_bounds(mean: f64, sd: f64, n: usize, level: f64) -> Result<TBounds, HypothesisError> {
    if n < 2 {
        return Err(HypothesisError::TooFew {
            what: "t bounds",
            need: 2,
            got: n,
        });
    }
    if !(level > 0.5 && level < 1.0) {
        return Err(HypothesisError::BadLevel(level));
    }
    if !(sd >= 0.0 && sd.is_finite()) {
        return Err(HypothesisError::BadSd(sd));
    }
    if !mean.is_finite() {
        return Err(HypothesisError::NonFinite);
    }
    let std_error = sd / (n as f64).sqrt();
    let t_critical = student_t_quantile(level, (n - 1) as f64);
    let half = t_critical * std_error;
    Ok(TBounds {
        lower: mean - half,
        upper: mean + half,
        std_error,
        t_critical,
    })
}

/// The random-walk benchmark for H.
pub const RANDOM_WALK_H: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleBounds {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 divisor).
    pub sd: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
    /// `0.5` lies outside `[lower, upper]`.
    pub inefficient: bool,
}

impl SubsampleBounds {
    pub fn from_sample(x: &[f64], level: f64) -> Result<Self, HypothesisError> {
        require("subsample", x, 2)?;
        let (mean, sd) = mean_sd(x);
        let b = t_bounds(mean, sd, x.len(), level)?;
        Ok(Self::from_parts(x.len(), mean, sd, b))
    }

    pub fn from_summary(mean: f64, sd: f64, n: usize, level: f64) -> Result<Self, HypothesisError> {
        let b = t_bounds(mean, sd, n, level)?;
        Ok(Self::from_parts(n, mean, sd, b))
    }

    fn from_parts(n: usize, mean: f64, sd: f64, b: TBounds) -> Self {
        Self {
            n,
            mean,
            sd,
            std_error: b.std_error,
            lower: b.lower,
            upper: b.upper,
            inefficient: !(b.lower <= RANDOM_WALK_H && RANDOM_WALK_H <= b.upper),
        }
    }
}

/// Mean and sample (n − 1) standard deviation.
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub level: f64,
    pub alternative: Alternative,
    pub centering: Centering,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            level: 0.999,
            alternative: Alternative::TwoSided,
            centering: Centering::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsSet {
    pub whole: SubsampleBounds,
    pub before: SubsampleBounds,
    pub after: SubsampleBounds,
}

/// Before/after comparison for one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub label: String,
    pub level: f64,
    pub mean_before: f64,
    pub mean_after: f64,
    pub sd_before: f64,
    pub sd_after: f64,
    pub mann_whitney: MannWhitney,
    pub levene: Levene,
    pub bounds: BoundsSet,
}

pub fn build_report(
    before: &[f64],
    after: &[f64],
    label: &str,
) -> Result<TestReport, HypothesisError> {
    build_report_with(before, after, label, &ReportOptions::default())
}

pub fn build_report_with(
    before: &[f64],
    after: &[f64],
    label: &str,
    options: &ReportOptions,
) -> Result<TestReport, HypothesisError> {
    let mann_whitney = mann_whitney_with(before, after, options.alternative)?;
    let levene = levene_with(&[before, after], options.centering)?;
    let whole: Vec<f64> = before.iter().chain(after).copied().collect();
    let bounds = BoundsSet {
        whole: SubsampleBounds::from_sample(&whole, options.level)?,
        before: SubsampleBounds::from_sample(before, options.level)?,
        after: SubsampleBounds::from_sample(after, options.level)?,
    };
    Ok(TestReport {
        label: label.to_string(),
        level: options.level,
        mean_before: bounds.before.mean,
        mean_after: bounds.after.mean,
        sd_before: bounds.before.sd,
        sd_after: bounds.after.sd,
        mann_whitney,
        levene,
        bounds,
    })
}
