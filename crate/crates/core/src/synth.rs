//! Synthetic minute-resolution irradiance.
//!
//! `value(t) = clear_sky(t) * cloud(t)` where `clear_sky` follows the sine of
//! the solar elevation (declination/hour-angle approximation, UTC taken as
//! local solar time) and `cloud` is a seeded mean-reverting transmittance in
//! `[0.05, 1]`. Each day draws from its own stream, so days can be generated
//! independently.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use thiserror::Error;

use crate::exec::{derive_seed, Execution};
use crate::series::IrradianceSeries;

const MIN_TRANSMITTANCE: f64 = 0.05;
const SYNTH_YEAR: i32 = 2013;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("synth: invalid {field}: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },
    #[error("synth: unknown cloud regime `{0}` (expected clear, broken or overcast)")]
    UnknownRegime(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudRegime {
    Clear,
    Broken,
    Overcast,
}

impl FromStr for CloudRegime {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clear" => Ok(CloudRegime::Clear),
            "broken" => Ok(CloudRegime::Broken),
            "overcast" => Ok(CloudRegime::Overcast),
            other => Err(SynthError::UnknownRegime(other.to_string())),
        }
    }
}

impl fmt::Display for CloudRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CloudRegime::Clear => "clear",
            CloudRegime::Broken => "broken",
            CloudRegime::Overcast => "overcast",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Degrees north.
    pub latitude: f64,
    /// First simulated day, 1..=366 of 2013.
    pub day_of_year: u32,
    pub days: usize,
    /// W/m².
    pub clear_sky_peak: f64,
    pub cloud_regime: CloudRegime,
    pub seed: u64,
    /// Mean dwell time in the high-transmittance state (broken regime), minutes.
    pub dwell_high_minutes: f64,
    /// Mean dwell time in the low-transmittance state (broken regime), minutes.
    pub dwell_low_minutes: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            latitude: 48.69,
            day_of_year: 152,
            days: 1,
            clear_sky_peak: 1000.0,
            cloud_regime: CloudRegime::Broken,
            seed: 0,
            dwell_high_minutes: 20.0,
            dwell_low_minutes: 8.0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |field, reason| Err(SynthError::InvalidConfig { field, reason });
        if !(-90.0..=90.0).contains(&self.latitude) {
            return bad("latitude", "must lie in [-90, 90]");
        }
        if !(1..=366).contains(&self.day_of_year) {
            return bad("day_of_year", "must lie in 1..=366");
        }
        if self.days == 0 {
            return bad("days", "must be at least 1");
        }
        if !(self.clear_sky_peak.is_finite() && self.clear_sky_peak > 0.0) {
            return bad("clear_sky_peak", "must be positive");
        }
        if !(self.dwell_high_minutes.is_finite() && self.dwell_high_minutes > 0.0)
            || !(self.dwell_low_minutes.is_finite() && self.dwell_low_minutes > 0.0)
        {
            return bad("dwell time", "must be positive");
        }
        Ok(())
    }
}

/// Solar declination, radians, for a day of the year.
fn declination(day_of_year: u32) -> f64 {
    (23.45f64).to_radians() * (2.0 * PI * (284.0 + day_of_year as f64) / 365.0).sin()
}

/// Sine of the solar elevation at `minute` (UTC, 0..1440) of `day_of_year`.
pub fn sin_elevation(latitude: f64, day_of_year: u32, minute: usize) -> f64 {
    let phi = latitude.to_radians();
    let delta = declination(day_of_year);
    let hour_angle = (15.0 * (minute as f64 / 60.0 - 12.0)).to_radians();
    phi.sin() * delta.sin() + phi.cos() * delta.cos() * hour_angle.cos()
}

/// Clear-sky irradiance, W/m²; exactly zero when the sun is at or below the horizon.
pub fn clear_sky(peak: f64, latitude: f64, day_of_year: u32, minute: usize) -> f64 {
    peak * sin_elevation(latitude, day_of_year, minute).max(0.0)
}

struct Transmittance {
    level: f64,
    mean_reversion: f64,
    noise: f64,
}

impl Transmittance {
    fn step(&mut self, target: f64, rng: &mut ChaCha8Rng) -> f64 {
        let eps: f64 = StandardNormal.sample(rng);
        self.level += self.mean_reversion * (target - self.level) + self.noise * eps;
        self.level = self.level.clamp(MIN_TRANSMITTANCE, 1.0);
        self.level
    }
}

fn cloud_day(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    const MINUTES: usize = 1440;
    match cfg.cloud_regime {
        CloudRegime::Clear => {
            let mut t = Transmittance { level: 0.995, mean_reversion: 0.2, noise: 0.001 };
            (0..MINUTES).map(|_| t.step(0.995, rng)).collect()
        }
        CloudRegime::Overcast => {
            let mut t = Transmittance { level: 0.25, mean_reversion: 0.05, noise: 0.01 };
            (0..MINUTES).map(|_| t.step(0.25, rng)).collect()
        }
        CloudRegime::Broken => {
            let (high, low) = (0.95, 0.3);
            let dwell_high = Exp::new(1.0 / cfg.dwell_high_minutes).expect("positive rate");
            let dwell_low = Exp::new(1.0 / cfg.dwell_low_minutes).expect("positive rate");
            let mut in_high = true;
            let mut remaining: f64 = dwell_high.sample(rng);
            let mut t = Transmittance { level: high, mean_reversion: 0.3, noise: 0.03 };
            (0..MINUTES)
                .map(|_| {
                    while remaining < 1.0 {
                        in_high = !in_high;
                        remaining += if in_high {
                            dwell_high.sample(rng)
                        } else {
                            dwell_low.sample(rng)
                        };
                    }
                    remaining -= 1.0;
                    t.step(if in_high { high } else { low }, rng)
                })
                .collect()
        }
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<IrradianceSeries, SynthError> {
    generate_with(cfg, Execution::default())
}

pub fn generate_with(cfg: &SynthConfig, exec: Execution) -> Result<IrradianceSeries, SynthError> {
    cfg.validate()?;
    let start = NaiveDate::from_yo_opt(SYNTH_YEAR, cfg.day_of_year.min(365))
        .expect("valid ordinal")
        .and_hms_opt(0, 0, 0)
        .expect("midnight")
        .and_utc()
        + Duration::days(i64::from(cfg.day_of_year.saturating_sub(365)));

    let days = exec.map_range(cfg.days, |d| {
        let doy = (cfg.day_of_year - 1 + d as u32) % 365 + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, d as u64, 0x5EED));
        cloud_day(cfg, &mut rng)
            .into_iter()
            .enumerate()
            .map(|(minute, cloud)| {
                Some(clear_sky(cfg.clear_sky_peak, cfg.latitude, doy, minute) * cloud)
            })
            .collect::<Vec<_>>()
    });
    let values = days.into_iter().flatten().collect();
    Ok(IrradianceSeries::new(start, values).expect("generated samples are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(regime: CloudRegime) -> SynthConfig {
        SynthConfig {
            cloud_regime: regime,
            ..SynthConfig::default()
        }
    }

    fn p95_increment(s: &IrradianceSeries) -> f64 {
        let v: Vec<f64> = s.values().iter().map(|x| x.unwrap()).collect();
        let mut inc: Vec<f64> = v
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| (w[1] - w[0]).abs())
            .collect();
        inc.sort_by(f64::total_cmp);
        inc[(inc.len() as f64 * 0.95) as usize]
    }

    #[test]
    fn clear_equinox_equator_peaks_at_noon() {
        let c = SynthConfig {
            latitude: 0.0,
            day_of_year: 81,
            cloud_regime: CloudRegime::Clear,
            ..SynthConfig::default()
        };
        let s = generate(&c).unwrap();
        assert_eq!(s.len(), 1440);
        let v: Vec<f64> = s.values().iter().map(|x| x.unwrap()).collect();
        let (argmax, max) = v
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        assert!(max >= 0.98 * c.clear_sky_peak && max <= c.clear_sky_peak);
        assert!((argmax as i64 - 720).abs() <= 30);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1439], 0.0);
        // smooth: consecutive daytime increments stay small
        assert!(p95_increment(&s) < 10.0);
    }

    #[test]
    fn same_seed_same_series() {
        let c = SynthConfig { days: 3, seed: 9, ..cfg(CloudRegime::Broken) };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let d = SynthConfig { seed: 10, ..c.clone() };
        assert_ne!(generate(&c).unwrap(), generate(&d).unwrap());
        assert_eq!(
            generate_with(&c, Execution::Sequential).unwrap(),
            generate_with(&c, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn broken_is_rougher_than_clear() {
        let clear = generate(&SynthConfig { days: 2, ..cfg(CloudRegime::Clear) }).unwrap();
        let broken = generate(&SynthConfig { days: 2, ..cfg(CloudRegime::Broken) }).unwrap();
        assert!(p95_increment(&broken) > p95_increment(&clear));
    }

    #[test]
    fn samples_bounded_and_zero_at_night() {
        for regime in [CloudRegime::Clear, CloudRegime::Broken, CloudRegime::Overcast] {
            let c = SynthConfig { days: 2, latitude: 60.0, day_of_year: 20, ..cfg(regime) };
            let s = generate(&c).unwrap();
            for (k, v) in s.values().iter().enumerate() {
                let v = v.unwrap();
                assert!((0.0..=c.clear_sky_peak).contains(&v));
                let doy = 20 + (k / 1440) as u32;
                if sin_elevation(60.0, doy, k % 1440) <= 0.0 {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn overcast_is_dim() {
        let o = generate(&cfg(CloudRegime::Overcast)).unwrap();
        let c = generate(&cfg(CloudRegime::Clear)).unwrap();
        let sum = |s: &IrradianceSeries| s.values().iter().flatten().sum::<f64>();
        assert!(sum(&o) < 0.4 * sum(&c));
    }

    #[test]
    fn start_time_and_year_wrap() {
        let s = generate(&SynthConfig { day_of_year: 152, ..SynthConfig::default() }).unwrap();
        assert_eq!(s.start().to_rfc3339(), "2013-06-01T00:00:00+00:00");
        let s = generate(&SynthConfig { day_of_year: 366, ..SynthConfig::default() }).unwrap();
        assert_eq!(s.start().to_rfc3339(), "2014-01-01T00:00:00+00:00");
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            SynthConfig { days: 0, ..SynthConfig::default() },
            SynthConfig { clear_sky_peak: 0.0, ..SynthConfig::default() },
            SynthConfig { latitude: 91.0, ..SynthConfig::default() },
            SynthConfig { day_of_year: 0, ..SynthConfig::default() },
            SynthConfig { dwell_low_minutes: -1.0, ..SynthConfig::default() },
        ];
        for c in bad {
            assert!(matches!(generate(&c), Err(SynthError::InvalidConfig { .. })));
        }
        assert!("foggy".parse::<CloudRegime>().is_err());
        assert_eq!("broken".parse::<CloudRegime>(), Ok(CloudRegime::Broken));
    }
}
