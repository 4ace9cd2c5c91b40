//! Normality battery for forecast errors: Jarque–Bera, Kolmogorov–Smirnov
//! against a fixed normal reference, and Lilliefors (KS with estimated mean
//! and standard deviation).
//!
//! Each test returns a reject/accept decision at a significance level; no
//! p-values are computed. Kurtosis is always *excess* kurtosis (0 for a
//! Gaussian).

mod lilliefors_table;

use std::fmt;

use statrs::function::erf::erfc;
use thiserror::Error;

pub use lilliefors_table::{
    LillieforsTable, DEFAULT_TABLE_SEED, TABLE_HEADER, TABLE_LEVELS, TABLE_REPLICATES, TABLE_SIZES,
};

/// Smallest sample any test accepts.
pub const MIN_SAMPLES: usize = 8;
pub const DEFAULT_LEVEL: f64 = 0.05;

/// Header of the report CSV produced by [`NormalityReport::csv_row`].
pub const REPORT_HEADER: &str = "test,n,statistic,threshold,level,reject,mean,std";

#[derive(Debug, Error, PartialEq)]
pub enum NormalityError {
    #[error("normality: need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("normality: degenerate sample (zero variance)")]
    Degenerate,
    #[error("normality: sample contains a non-finite value")]
    NonFinite,
    #[error("normality: level {0} is outside (0, 1)")]
    LevelOutOfRange(f64),
    #[error("normality: no Lilliefors critical values tabulated for level {0}")]
    UnsupportedLevel(f64),
    #[error("normality: reference standard deviation must be positive (got {0})")]
    BadReference(f64),
    #[error("normality: histogram needs at least one sample and one bin")]
    EmptyHistogram,
    #[error("normality: Lilliefors table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    JarqueBera,
    KolmogorovSmirnov,
    Lilliefors,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::JarqueBera => "jarque_bera",
            TestKind::KolmogorovSmirnov => "kolmogorov_smirnov",
            TestKind::Lilliefors => "lilliefors",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub test: TestKind,
    pub n: usize,
    pub statistic: f64,
    /// Critical value at `level`; the null is rejected when `statistic > threshold`.
    pub threshold: f64,
    pub level: f64,
    pub reject: bool,
    pub sample_mean: f64,
    /// Sample standard deviation with the `n - 1` denominator.
    pub sample_std: f64,
}

impl NormalityReport {
    fn new(test: TestKind, stats: &Moments, statistic: f64, threshold: f64, level: f64) -> Self {
        Self {
            test,
            n: stats.n,
            statistic,
            threshold,
            level,
            reject: statistic > threshold,
            sample_mean: stats.mean,
            sample_std: stats.std_unbiased(),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.test,
            self.n,
            self.statistic,
            self.threshold,
            self.level,
            self.reject,
            self.sample_mean,
            self.sample_std
        )
    }
}

/// Central moments with `1/n` normalisation.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    fn of(x: &[f64]) -> Self {
        let n = x.len();
        let nf = n as f64;
        let mean = x.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in x {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        Self {
            n,
            mean,
            m2: m2 / nf,
            m3: m3 / nf,
            m4: m4 / nf,
        }
    }

    fn std_unbiased(&self) -> f64 {
        (self.m2 * self.n as f64 / (self.n as f64 - 1.0)).sqrt()
    }
}

fn validate(x: &[f64], level: f64) -> Result<Moments, NormalityError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(NormalityError::LevelOutOfRange(level));
    }
    if x.len() < MIN_SAMPLES {
        return Err(NormalityError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NormalityError::NonFinite);
    }
    let m = Moments::of(x);
    // relative test so that large constant offsets still count as degenerate
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    if m.m2.sqrt() <= 1e-12 * scale {
        return Err(NormalityError::Degenerate);
    }
    Ok(m)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper `level` quantile of chi-square with 2 degrees of freedom.
///
/// The chi-square(2) survival function is `exp(-x/2)`, so the quantile has a
/// closed form.
pub fn chi2_2_critical(level: f64) -> f64 {
    -2.0 * level.ln()
}

/// Survival function of the limiting Kolmogorov distribution,
/// `2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 c^2)`.
pub fn kolmogorov_survival(c: f64) -> f64 {
    if c <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * c * c).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `c` with `kolmogorov_survival(c) = level`, by bisection.
pub fn kolmogorov_critical(level: f64) -> f64 {
    let (mut lo, mut hi) = (0.1, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `x` and the
/// normal CDF with the given parameters.
pub fn ks_distance(x: &[f64], mean: f64, std: f64) -> f64 {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_distance_sorted(&sorted, mean, std)
}

pub(crate) fn ks_distance_sorted(sorted: &[f64], mean: f64, std: f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal_cdf((v - mean) / std);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

pub fn jarque_bera(x: &[f64], level: f64) -> Result<NormalityReport, NormalityError> {
    let m = validate(x, level)?;
    let skew = m.m3 / m.m2.powf(1.5);
    let excess_kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
    let jb = m.n as f64 / 6.0 * (skew * skew + excess_kurtosis * excess_kurtosis / 4.0);
    Ok(NormalityReport::new(
        TestKind::JarqueBera,
        &m,
        jb,
        chi2_2_critical(level),
        level,
    ))
}

/// KS test against `N(mean, std)` with parameters fixed in advance, using the
/// asymptotic threshold `c(level) / sqrt(n)`.
pub fn ks_normal(
    x: &[f64],
    level: f64,
    mean: f64,
    std: f64,
) -> Result<NormalityReport, NormalityError> {
    let m = validate(x, level)?;
    if !(std.is_finite() && std > 0.0) || !mean.is_finite() {
        return Err(NormalityError::BadReference(std));
    }
    let d = ks_distance(x, mean, std);
    let threshold = kolmogorov_critical(level) / (m.n as f64).sqrt();
    Ok(NormalityReport::new(
        TestKind::KolmogorovSmirnov,
        &m,
        d,
        threshold,
        level,
    ))
}

/// KS test against the normal with mean and standard deviation estimated from
/// the sample. Critical values come from the built-in Monte-Carlo table.
pub fn lilliefors(x: &[f64], level: f64) -> Result<NormalityReport, NormalityError> {
    lilliefors_with_table(x, level, LillieforsTable::builtin())
}

pub fn lilliefors_with_table(
    x: &[f64],
    level: f64,
    table: &LillieforsTable,
) -> Result<NormalityReport, NormalityError> {
    let m = validate(x, level)?;
    let d = lilliefors_statistic(x);
    let threshold = table.critical(m.n, level)?;
    Ok(NormalityReport::new(
        TestKind::Lilliefors,
        &m,
        d,
        threshold,
        level,
    ))
}

/// KS distance after standardising by the sample mean and `n - 1` standard deviation.
pub fn lilliefors_statistic(x: &[f64]) -> f64 {
    let m = Moments::of(x);
    ks_distance(x, m.mean, m.std_unbiased())
}

/// Runs all three tests. The KS reference is the sample's own mean and
/// standard deviation, which makes that row approximate (its asymptotic
/// threshold is conservative once parameters are estimated).
pub fn battery(x: &[f64], level: f64) -> Result<Vec<NormalityReport>, NormalityError> {
    let m = validate(x, level)?;
    Ok(vec![
        jarque_bera(x, level)?,
        ks_normal(x, level, m.mean, m.std_unbiased())?,
        lilliefors(x, level)?,
    ])
}

/// Equal-width histogram plus the fitted normal curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
    pub mean: f64,
    pub std: f64,
    /// `(x, n * bin_width * pdf(x))` on a uniform grid over `[lo, hi]`; empty
    /// when the sample has no spread.
    pub curve: Vec<(f64, f64)>,
}

/// Points on the fitted curve.
pub const CURVE_POINTS: usize = 201;

pub fn diff_histogram(x: &[f64], bins: usize) -> Result<Histogram, NormalityError> {
    if x.is_empty() || bins == 0 {
        return Err(NormalityError::EmptyHistogram);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NormalityError::NonFinite);
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        let b = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
    }

    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let std = if x.len() > 1 {
        (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let curve = if std > 0.0 && width > 0.0 {
        let norm = n * width / (std * (2.0 * std::f64::consts::PI).sqrt());
        (0..CURVE_POINTS)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
                let z = (t - mean) / std;
                (t, norm * (-0.5 * z * z).exp())
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(Histogram {
        lo,
        hi,
        bin_width: width,
        counts,
        mean,
        std,
        curve,
    })
}
