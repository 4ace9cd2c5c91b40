//! Trend/fluctuation split `X = E(X) + X_fluct` by causal local least squares.
//!
//! For each sample `k` whose trailing window `[k - w + 1, k]` is gap free, a
//! straight line is fitted to the window and evaluated at `k`. The fitted
//! value is the trend, the residual at `k` is the fluctuation, and the slope
//! is kept for extrapolation by the forecaster.

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::exec::Execution;
use crate::series::IrradianceSeries;

/// Default trailing window, minutes.
pub const DEFAULT_WINDOW_W: usize = 120;

#[derive(Debug, Error, PartialEq)]
pub enum DecompositionError {
    #[error("decomposition: window must be at least 2 samples (got {0})")]
    WindowTooShort(usize),
    #[error("decomposition: series has {len} samples, shorter than the window {window}")]
    SeriesTooShort { len: usize, window: usize },
}

/// Straight-line fit over one trailing window, expressed at the window's last sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFit {
    /// Fitted value at the last sample of the window.
    pub level: f64,
    /// Slope, W/m² per minute.
    pub slope: f64,
}

impl LocalFit {
    /// Value of the fitted line `minutes` after the window's last sample.
    pub fn extrapolate(&self, minutes: f64) -> f64 {
        self.level + self.slope * minutes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    start: DateTime<Utc>,
    window_w: usize,
    fits: Vec<Option<LocalFit>>,
    fluctuation: Vec<Option<f64>>,
}

impl Decomposition {
    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn window_w(&self) -> usize {
        self.window_w
    }

    pub fn len(&self) -> usize {
        self.fits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fits.is_empty()
    }

    pub fn fit(&self, k: usize) -> Option<LocalFit> {
        self.fits.get(k).copied().flatten()
    }

    pub fn trend(&self, k: usize) -> Option<f64> {
        self.fit(k).map(|f| f.level)
    }

    pub fn fluctuation(&self, k: usize) -> Option<f64> {
        self.fluctuation.get(k).copied().flatten()
    }

    pub fn trend_values(&self) -> Vec<Option<f64>> {
        self.fits.iter().map(|f| f.map(|f| f.level)).collect()
    }

    pub fn fluctuation_values(&self) -> &[Option<f64>] {
        &self.fluctuation
    }
}

pub fn extract_trend(
    series: &IrradianceSeries,
    window_w: usize,
) -> Result<Decomposition, DecompositionError> {
    extract_trend_with(series, window_w, Execution::default())
}

pub fn extract_trend_with(
    series: &IrradianceSeries,
    window_w: usize,
    exec: Execution,
) -> Result<Decomposition, DecompositionError> {
    if window_w < 2 {
        return Err(DecompositionError::WindowTooShort(window_w));
    }
    if series.len() < window_w {
        return Err(DecompositionError::SeriesTooShort {
            len: series.len(),
            window: window_w,
        });
    }

    let values = series.values();
    // run[k]: number of consecutive present samples ending at k
    let mut run = vec![0usize; values.len()];
    let mut current = 0;
    for (k, v) in values.iter().enumerate() {
        current = if v.is_some() { current + 1 } else { 0 };
        run[k] = current;
    }

    let fits = exec.map_range(values.len(), |k| {
        if run[k] < window_w {
            return None;
        }
        let window: Vec<f64> = values[k + 1 - window_w..=k]
            .iter()
            .map(|v| v.expect("window is gap free"))
            .collect();
        Some(fit_window(&window))
    });

    let fluctuation = fits
        .iter()
        .zip(values)
        .map(|(fit, v)| match (fit, v) {
            (Some(fit), Some(x)) => Some(x - fit.level),
            _ => None,
        })
        .collect();

    Ok(Decomposition {
        start: series.start(),
        window_w,
        fits,
        fluctuation,
    })
}

/// Least-squares line through `(i, y[i])`, reported at `i = len - 1`.
///
/// Abscissae are centred on the window midpoint so the normal equations
/// decouple. Summation runs in index order, so the result does not depend on
/// how windows are scheduled.
fn fit_window(y: &[f64]) -> LocalFit {
    let n = y.len() as f64;
    let centre = (n - 1.0) / 2.0;
    let mean = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - centre;
        sxy += dx * (v - mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    LocalFit {
        level: mean + slope * centre,
        slope,
    }
}
