//! Horizon-ahead forecasts: trend extrapolation and the persistence baseline.
//!
//! A [`ForecastTrack`] is indexed by *target* time, aligned with the series it
//! was built from: `predicted[t]` is the forecast of `value[t]` issued at
//! `t - horizon`, and `realized[t]` is the measurement itself.

use std::fmt::Write as _;

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

use crate::decomposition::Decomposition;
use crate::series::{format_timestamp, minute_offset, parse_timestamp, IrradianceSeries, SeriesError};

/// Default forecast horizon, minutes.
pub const DEFAULT_HORIZON: usize = 60;

/// Header of the forecast-track CSV.
pub const TRACK_HEADER: &str = "timestamp,predicted_wm2,realized_wm2";

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("forecast: horizon must be at least 1 minute")]
    ZeroHorizon,
    #[error("forecast: decomposition does not match the series ({0})")]
    Mismatch(&'static str),
    #[error("forecast: track CSV: {0}")]
    Csv(#[from] SeriesError),
    #[error("forecast: track CSV: line {line}: bad field `{field}`")]
    BadField { line: usize, field: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastTrack {
    start: DateTime<Utc>,
    horizon: usize,
    predicted: Vec<Option<f64>>,
    realized: Vec<Option<f64>>,
}

impl ForecastTrack {
    pub fn new(
        start: DateTime<Utc>,
        horizon: usize,
        predicted: Vec<Option<f64>>,
        realized: Vec<Option<f64>>,
    ) -> Result<Self, ForecastError> {
        if horizon == 0 {
            return Err(ForecastError::ZeroHorizon);
        }
        if predicted.len() != realized.len() {
            return Err(ForecastError::Mismatch("column lengths differ"));
        }
        Ok(Self {
            start,
            horizon,
            predicted,
            realized,
        })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.predicted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted.is_empty()
    }

    pub fn predicted(&self) -> &[Option<f64>] {
        &self.predicted
    }

    pub fn realized(&self) -> &[Option<f64>] {
        &self.realized
    }

    pub fn time_at(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::minutes(index as i64)
    }

    /// Signed error `realized - predicted` where both are present.
    pub fn error(&self, index: usize) -> Option<f64> {
        match (self.realized.get(index)?, self.predicted.get(index)?) {
            (Some(r), Some(p)) => Some(r - p),
            _ => None,
        }
    }

    /// Rows are written for every slot where at least one column is present;
    /// an absent column is an empty field.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.len() + 1));
        out.push_str(TRACK_HEADER);
        out.push('\n');
        for k in 0..self.len() {
            let (p, r) = (self.predicted[k], self.realized[k]);
            if p.is_none() && r.is_none() {
                continue;
            }
            let _ = writeln!(
                out,
                "{},{},{}",
                format_timestamp(self.time_at(k)),
                opt_field(p),
                opt_field(r)
            );
        }
        out
    }

    pub fn from_csv(text: &str, horizon: usize) -> Result<Self, ForecastError> {
        let rows = parse_optional_columns(text, TRACK_HEADER, 2)?;
        let (start, cols) = rows;
        ForecastTrack::new(start, horizon, cols[0].clone(), cols[1].clone())
    }
}

pub(crate) fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

type Columns = (DateTime<Utc>, Vec<Vec<Option<f64>>>);

/// Parses a timestamped CSV whose value columns may be empty. Returns the
/// start time and one dense column per value field.
pub(crate) fn parse_optional_columns(
    text: &str,
    header: &str,
    width: usize,
) -> Result<Columns, ForecastError> {
    let mut lines = text.split('\n').enumerate();
    let found = lines.next().map(|(_, l)| l).unwrap_or("");
    if found != header {
        return Err(SeriesError::MalformedHeader {
            expected: header.to_string(),
            found: found.to_string(),
        }
        .into());
    }
    let mut start = None;
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); width];
    for (i, row) in lines {
        let line = i + 1;
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != width + 1 {
            return Err(SeriesError::MalformedRow {
                line,
                row: row.to_string(),
            }
            .into());
        }
        let t = parse_timestamp(fields[0], line, row)?;
        let s = *start.get_or_insert(t);
        let k = match minute_offset(s, t) {
            Some(k) if k >= cols[0].len() => k,
            Some(k) if k + 1 == cols[0].len() => {
                return Err(SeriesError::DuplicateTimestamp { line }.into())
            }
            _ => return Err(SeriesError::NonMonotoneTimestamp { line }.into()),
        };
        for (c, field) in cols.iter_mut().zip(&fields[1..]) {
            c.resize(k, None);
            let v = if field.is_empty() {
                None
            } else {
                let x: f64 = field.parse().map_err(|_| ForecastError::BadField {
                    line,
                    field: field.to_string(),
                })?;
                if !x.is_finite() {
                    return Err(ForecastError::BadField {
                        line,
                        field: field.to_string(),
                    });
                }
                Some(x)
            };
            c.push(v);
        }
    }
    let start = start.ok_or(SeriesError::Empty)?;
    Ok((start, cols))
}

/// First-order extrapolation of the trailing trend fit, clamped at zero.
///
/// A fit available at issue time `t0` yields `predicted[t0 + horizon]`.
pub fn forecast_trend(
    series: &IrradianceSeries,
    decomposition: &Decomposition,
    horizon: usize,
) -> Result<ForecastTrack, ForecastError> {
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    if decomposition.len() != series.len() {
        return Err(ForecastError::Mismatch("length"));
    }
    if decomposition.start() != series.start() {
        return Err(ForecastError::Mismatch("start time"));
    }
    let n = series.len();
    let h = horizon as f64;
    let predicted = (0..n)
        .map(|t| {
            let issue = t.checked_sub(horizon)?;
            decomposition
                .fit(issue)
                .map(|fit| fit.extrapolate(h).max(0.0))
        })
        .collect();
    ForecastTrack::new(series.start(), horizon, predicted, series.values().to_vec())
}

/// `predicted[t] = value[t - horizon]`.
pub fn forecast_persistence(
    series: &IrradianceSeries,
    horizon: usize,
) -> Result<ForecastTrack, ForecastError> {
    if horizon == 0 {
        return Err(ForecastError::ZeroHorizon);
    }
    let predicted = (0..series.len())
        .map(|t| t.checked_sub(horizon).and_then(|i| series.get(i)))
        .collect();
    ForecastTrack::new(series.start(), horizon, predicted, series.values().to_vec())
}
