//! Short-term solar irradiance forecasting with volatility-based confidence bands.
//!
//! The pipeline runs on minute-cadence irradiance:
//!
//! 1. [`decomposition`] splits the series into a smooth local trend and a
//!    fluctuation, using causal sliding-window least squares.
//! 2. [`forecast`] extrapolates the trend one horizon ahead (60 min by default).
//! 3. [`risk`] turns forecast errors into a volatility signal and forecasts it
//!    by persistence.
//! 4. [`bands`] builds the confidence bands: `prediction ± volatility` and the
//!    calibrated variant `prediction ± alpha * volatility`.
//! 5. [`normality`] tests forecast errors against the Gaussian hypothesis.
//! 6. [`report`] scores forecasts and bands and renders SVG figures.
//!
//! [`synth`] produces synthetic test data and [`cli`] wires everything into
//! the `sunband` executable.

pub mod bands;
pub mod cli;
pub mod decomposition;
pub mod exec;
pub mod forecast;
pub mod normality;
pub mod report;
pub mod risk;
pub mod series;
pub mod synth;

pub use bands::{band_cb1, band_cb2, calibrate_alpha, BandTrack, Cb2Config};
pub use decomposition::{extract_trend, Decomposition};
pub use exec::Execution;
pub use forecast::{forecast_persistence, forecast_trend, ForecastTrack};
pub use normality::{jarque_bera, ks_normal, lilliefors, NormalityReport};
pub use report::{score, ScoreCard};
pub use risk::{volatility, VolatilityTrack};
pub use series::{daylight_mask, DaylightMask, IrradianceSeries};
pub use synth::{generate, CloudRegime, SynthConfig};
