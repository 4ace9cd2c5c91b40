//! Minute-cadence irradiance series, CSV ingestion/emission and the daylight mask.
//!
//! The on-disk format is fixed:
//!
//! ```text
//! timestamp,ghi_wm2
//! 2013-06-01T10:00:00Z,412.5
//! 2013-06-01T10:01:00Z,420
//! ```
//!
//! Gaps are first-class: a missing minute is a `None` slot, never an
//! interpolated value. Emission omits gap rows and ingestion restores them.

use std::fmt::Write as _;

use chrono::{DateTime, Duration, NaiveDateTime, Timelike, Utc};
use thiserror::Error;

/// Header of the series CSV.
pub const SERIES_HEADER: &str = "timestamp,ghi_wm2";

/// Default daylight threshold, W/m².
pub const DEFAULT_EPS_DAY: f64 = 5.0;

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("series: malformed header (expected `{expected}`, found `{found}`)")]
    MalformedHeader { expected: String, found: String },
    #[error("series: line {line}: malformed row `{row}`")]
    MalformedRow { line: usize, row: String },
    #[error("series: line {line}: non-monotone timestamp")]
    NonMonotoneTimestamp { line: usize },
    #[error("series: line {line}: duplicate timestamp")]
    DuplicateTimestamp { line: usize },
    #[error("series: line {line}: negative irradiance {value}")]
    NegativeIrradiance { line: usize, value: f64 },
    #[error("series: line {line}: non-finite irradiance")]
    NonFiniteIrradiance { line: usize },
    #[error("series: line {line}: timestamp not aligned to the minute")]
    NotMinuteAligned { line: usize },
    #[error("series: no data rows")]
    Empty,
    #[error("series: invalid sample at index {index}")]
    InvalidSample { index: usize },
}

/// Uniformly sampled irradiance, one slot per minute starting at `start`.
///
/// `None` marks a gap. Every present value is finite and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceSeries {
    start: DateTime<Utc>,
    values: Vec<Option<f64>>,
}

impl IrradianceSeries {
    pub fn new(start: DateTime<Utc>, values: Vec<Option<f64>>) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if start.second() != 0 || start.nanosecond() != 0 {
            return Err(SeriesError::NotMinuteAligned { line: 0 });
        }
        if let Some(index) = values
            .iter()
            .position(|v| matches!(v, Some(x) if !x.is_finite() || *x < 0.0))
        {
            return Err(SeriesError::InvalidSample { index });
        }
        Ok(Self { start, values })
    }

    /// Builds a gap-free series.
    pub fn from_values(start: DateTime<Utc>, values: &[f64]) -> Result<Self, SeriesError> {
        Self::new(start, values.iter().copied().map(Some).collect())
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied().flatten()
    }

    /// Timestamp of slot `index`.
    pub fn time_at(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::minutes(index as i64)
    }

    /// Slot index of `t`, if `t` is minute aligned and inside the series.
    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        minute_offset(self.start, t).filter(|&k| k < self.len())
    }

    pub fn gap_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Parses the series CSV format.
    pub fn from_csv(text: &str) -> Result<Self, SeriesError> {
        let mut lines = text.split('\n').enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        if header != SERIES_HEADER {
            return Err(SeriesError::MalformedHeader {
                expected: SERIES_HEADER.to_string(),
                found: header.to_string(),
            });
        }

        let mut start: Option<DateTime<Utc>> = None;
        let mut values: Vec<Option<f64>> = Vec::new();
        for (i, row) in lines {
            let line = i + 1;
            if row.is_empty() {
                continue;
            }
            let (ts, val) = row.split_once(',').ok_or_else(|| SeriesError::MalformedRow {
                line,
                row: row.to_string(),
            })?;
            let t = parse_timestamp(ts, line, row)?;
            let value = parse_value(val, line, row)?;
            if value < 0.0 {
                return Err(SeriesError::NegativeIrradiance { line, value });
            }

            match start {
                None => {
                    start = Some(t);
                    values.push(Some(value));
                }
                Some(s) => {
                    let offset = minute_offset(s, t);
                    let last = values.len() - 1;
                    match offset {
                        Some(k) if k > last => {
                            values.resize(k, None);
                            values.push(Some(value));
                        }
                        Some(k) if k == last => {
                            return Err(SeriesError::DuplicateTimestamp { line })
                        }
                        _ => return Err(SeriesError::NonMonotoneTimestamp { line }),
                    }
                }
            }
        }
        let start = start.ok_or(SeriesError::Empty)?;
        Ok(Self { start, values })
    }

    /// Renders the series CSV; gap slots are omitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.len() + 1));
        out.push_str(SERIES_HEADER);
        out.push('\n');
        for (k, v) in self.values.iter().enumerate() {
            if let Some(x) = v {
                let _ = writeln!(out, "{},{}", format_timestamp(self.time_at(k)), x);
            }
        }
        out
    }
}

/// Per-sample eligibility for statistics: present and strictly above `eps_day`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaylightMask {
    flags: Vec<bool>,
}

impl DaylightMask {
    pub fn new(series: &IrradianceSeries, eps_day: f64) -> Self {
        Self::from_values(series.values(), eps_day)
    }

    pub fn from_values(values: &[Option<f64>], eps_day: f64) -> Self {
        Self {
            flags: values
                .iter()
                .map(|v| matches!(v, Some(x) if *x > eps_day))
                .collect(),
        }
    }

    /// A mask with every flag set; useful when statistics should see all samples.
    pub fn all(len: usize) -> Self {
        Self {
            flags: vec![true; len],
        }
    }

    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn is_set(&self, index: usize) -> bool {
        self.flags.get(index).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Convenience wrapper matching the free-function form of the mask.
pub fn daylight_mask(series: &IrradianceSeries, eps_day: f64) -> DaylightMask {
    DaylightMask::new(series, eps_day)
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:00Z").to_string()
}

/// Parses a `YYYY-MM-DDTHH:MM:SSZ` timestamp; seconds must be zero.
pub fn parse_timestamp(ts: &str, line: usize, row: &str) -> Result<DateTime<Utc>, SeriesError> {
    let naive = NaiveDateTime::parse_from_str(ts, TIMESTAMP_FORMAT).map_err(|_| {
        SeriesError::MalformedRow {
            line,
            row: row.to_string(),
        }
    })?;
    if naive.second() != 0 {
        return Err(SeriesError::NotMinuteAligned { line });
    }
    Ok(naive.and_utc())
}

fn parse_value(val: &str, line: usize, row: &str) -> Result<f64, SeriesError> {
    let value: f64 = val.parse().map_err(|_| SeriesError::MalformedRow {
        line,
        row: row.to_string(),
    })?;
    if !value.is_finite() {
        return Err(SeriesError::NonFiniteIrradiance { line });
    }
    Ok(value)
}

/// Whole minutes from `start` to `t`, or `None` if `t` precedes `start`.
pub(crate) fn minute_offset(start: DateTime<Utc>, t: DateTime<Utc>) -> Option<usize> {
    let d = t.signed_duration_since(start);
    if d < Duration::zero() || d.num_seconds() % 60 != 0 {
        return None;
    }
    usize::try_from(d.num_minutes()).ok()
}
