//! Forecast-error volatility and its persistence forecast.
//!
//! `diff[t] = realized[t] - predicted[t]`, `vol[t] = |diff[t]|`, and the
//! volatility forecast for `t` is simply the volatility observed one horizon
//! earlier: `vol_pred[t] = vol[t - horizon]`.

use thiserror::Error;

use crate::forecast::ForecastTrack;

#[derive(Debug, Error, PartialEq)]
pub enum RiskError {
    #[error("risk: forecast track has no record with both prediction and measurement")]
    NoDefinedRecords,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityTrack {
    horizon: usize,
    diff: Vec<Option<f64>>,
    vol: Vec<Option<f64>>,
    vol_pred: Vec<Option<f64>>,
}

impl VolatilityTrack {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.vol.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vol.is_empty()
    }

    pub fn diff(&self) -> &[Option<f64>] {
        &self.diff
    }

    pub fn vol(&self) -> &[Option<f64>] {
        &self.vol
    }

    pub fn vol_pred(&self) -> &[Option<f64>] {
        &self.vol_pred
    }

    /// Replaces the volatility forecast, keeping length. Used to build
    /// scaled or synthetic inputs for band construction.
    pub fn with_vol_pred(mut self, vol_pred: Vec<Option<f64>>) -> Self {
        assert_eq!(vol_pred.len(), self.vol.len(), "vol_pred length");
        self.vol_pred = vol_pred;
        self
    }
}

pub fn volatility(track: &ForecastTrack) -> Result<VolatilityTrack, RiskError> {
    let diff: Vec<Option<f64>> = (0..track.len()).map(|t| track.error(t)).collect();
    if diff.iter().all(Option::is_none) {
        return Err(RiskError::NoDefinedRecords);
    }
    let vol: Vec<Option<f64>> = diff.iter().map(|d| d.map(f64::abs)).collect();
    let h = track.horizon();
    let vol_pred = (0..vol.len())
        .map(|t| t.checked_sub(h).and_then(|i| vol[i]))
        .collect();
    Ok(VolatilityTrack {
        horizon: h,
        diff,
        vol,
        vol_pred,
    })
}
