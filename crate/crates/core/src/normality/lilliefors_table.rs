//! Monte-Carlo critical values for the Lilliefors statistic.
//!
//! For each tabulated sample size, standard-normal samples are drawn, the
//! Lilliefors statistic is computed, and the empirical upper quantiles of the
//! null distribution are stored. Replicates are split into a fixed number of
//! shards, each with its own seed derived from `(seed, n, shard)`, so the table
//! is identical whatever the thread count.
//!
//! Between tabulated sizes the scaled critical value `sqrt(n) * D` is
//! interpolated linearly in `1 / sqrt(n)`; above the largest size it is held
//! constant.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ks_distance_sorted, NormalityError, MIN_SAMPLES};
use crate::exec::{derive_seed, Execution};

pub const TABLE_HEADER: &str = "n,level,critical";

pub const TABLE_SIZES: &[usize] = &[
    8, 9, 10, 12, 15, 20, 25, 30, 40, 50, 75, 100, 150, 200, 300, 500, 1000, 2000, 5000,
];

pub const TABLE_LEVELS: &[f64] = &[0.01, 0.05, 0.10, 0.20];

pub const TABLE_REPLICATES: usize = 100_000;

pub const DEFAULT_TABLE_SEED: u64 = 20_130_601;

const SHARDS: usize = 64;

const BUILTIN: &str = include_str!("../../data/lilliefors.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct LillieforsTable {
    /// `(n, level, critical)` sorted by `n`, then by table level order.
    rows: Vec<(usize, f64, f64)>,
}

impl LillieforsTable {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static LillieforsTable {
        static TABLE: OnceLock<LillieforsTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            LillieforsTable::from_csv(BUILTIN).expect("bundled Lilliefors table is well formed")
        })
    }

    pub fn generate(
        sizes: &[usize],
        levels: &[f64],
        replicates: usize,
        seed: u64,
        exec: Execution,
    ) -> Self {
        let mut rows = Vec::with_capacity(sizes.len() * levels.len());
        for &n in sizes {
            let mut stats = null_statistics(n, replicates, seed, exec);
            stats.sort_by(f64::total_cmp);
            for &level in levels {
                rows.push((n, level, upper_quantile(&stats, level)));
            }
        }
        Self { rows }
    }

    pub fn rows(&self) -> &[(usize, f64, f64)] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for (n, level, crit) in &self.rows {
            let _ = writeln!(out, "{n},{level},{crit}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, NormalityError> {
        let mut lines = text.lines();
        if lines.next() != Some(TABLE_HEADER) {
            return Err(NormalityError::Table("bad header".into()));
        }
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let bad = || NormalityError::Table(format!("bad row `{line}`"));
            let mut it = line.split(',');
            let n: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let level: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let crit: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() || !(crit.is_finite() && crit > 0.0) {
                return Err(bad());
            }
            rows.push((n, level, crit));
        }
        if rows.is_empty() {
            return Err(NormalityError::Table("no rows".into()));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Self { rows })
    }

    /// Critical value for sample size `n` at `level`.
    pub fn critical(&self, n: usize, level: f64) -> Result<f64, NormalityError> {
        if n < MIN_SAMPLES {
            return Err(NormalityError::TooFewSamples {
                needed: MIN_SAMPLES,
                got: n,
            });
        }
        let points: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| (r.1 - level).abs() < 1e-12)
            .map(|r| (r.0, r.2))
            .collect();
        if points.is_empty() {
            return Err(NormalityError::UnsupportedLevel(level));
        }
        if let Some(&(_, c)) = points.iter().find(|p| p.0 == n) {
            return Ok(c);
        }
        let scaled = |(m, c): (usize, f64)| c * (m as f64).sqrt();
        let inv = |m: usize| 1.0 / (m as f64).sqrt();
        let root_n = (n as f64).sqrt();

        let first = points[0];
        let last = points[points.len() - 1];
        if n < first.0 {
            return Err(NormalityError::TooFewSamples {
                needed: first.0,
                got: n,
            });
        }
        if n > last.0 {
            return Ok(scaled(last) / root_n);
        }
        let hi = points.iter().position(|p| p.0 > n).expect("n inside the table");
        let (a, b) = (points[hi - 1], points[hi]);
        let w = (inv(n) - inv(a.0)) / (inv(b.0) - inv(a.0));
        Ok((scaled(a) + w * (scaled(b) - scaled(a))) / root_n)
    }
}

/// Sorted-sample Lilliefors statistics for `replicates` standard-normal samples of size `n`.
pub(crate) fn null_statistics(n: usize, replicates: usize, seed: u64, exec: Execution) -> Vec<f64> {
    let per_shard = replicates.div_ceil(SHARDS);
    let shards = exec.map_range(SHARDS, |shard| {
        let count = per_shard.min(replicates.saturating_sub(shard * per_shard));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64, shard as u64));
        let mut sample = vec![0.0; n];
        (0..count)
            .map(|_| {
                for v in sample.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                statistic_in_place(&mut sample)
            })
            .collect::<Vec<f64>>()
    });
    shards.into_iter().flatten().collect()
}

fn statistic_in_place(sample: &mut [f64]) -> f64 {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    sample.sort_by(f64::total_cmp);
    ks_distance_sorted(sample, mean, var.sqrt())
}

/// Empirical `1 - level` quantile: the smallest order statistic with at most
/// `level` of the replicates strictly above it.
fn upper_quantile(sorted: &[f64], level: f64) -> f64 {
    let r = sorted.len();
    let k = ((1.0 - level) * r as f64).ceil() as usize;
    sorted[k.clamp(1, r) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_covers_every_size_and_level() {
        let t = LillieforsTable::builtin();
        assert_eq!(t.rows().len(), TABLE_SIZES.len() * TABLE_LEVELS.len());
        for &n in TABLE_SIZES {
            let mut prev = f64::INFINITY;
            for &level in TABLE_LEVELS {
                let c = t.critical(n, level).unwrap();
                // smaller level, larger critical value
                assert!(c < prev);
                prev = c;
            }
        }
    }

    #[test]
    fn builtin_agrees_with_published_asymptotics() {
        // Dallal–Wilkinson approximation at level 0.05, accurate to a few percent
        let t = LillieforsTable::builtin();
        for &n in &[50usize, 100, 500, 1000, 5000] {
            let root = (n as f64).sqrt();
            let approx = 0.895 / (root - 0.01 + 0.85 / root);
            let c = t.critical(n, 0.05).unwrap();
            assert!((c / approx - 1.0).abs() < 0.03, "n={n}: {c} vs {approx}");
        }
    }

    #[test]
    fn interpolation_is_monotone_between_sizes() {
        let t = LillieforsTable::builtin();
        let mut prev = f64::INFINITY;
        for n in 8..6000 {
            let c = t.critical(n, 0.05).unwrap();
            assert!(c <= prev + 1e-12, "n={n}");
            prev = c;
        }
        assert_eq!(
            t.critical(7, 0.05),
            Err(NormalityError::TooFewSamples { needed: 8, got: 7 })
        );
    }

    #[test]
    fn regeneration_is_deterministic_and_thread_independent() {
        let a = LillieforsTable::generate(&[8, 20], &[0.05], 3000, 42, Execution::Sequential);
        let b = LillieforsTable::generate(&[8, 20], &[0.05], 3000, 42, Execution::Parallel);
        assert_eq!(a, b);
        let c = LillieforsTable::generate(&[8, 20], &[0.05], 3000, 43, Execution::Sequential);
        assert_ne!(a, c);
        assert_eq!(LillieforsTable::from_csv(&a.to_csv()).unwrap(), a);
    }

    #[test]
    fn fresh_simulation_agrees_with_builtin() {
        let fresh = LillieforsTable::generate(&[30], &[0.05], 20_000, 7, Execution::default());
        let c = fresh.critical(30, 0.05).unwrap();
        let b = LillieforsTable::builtin().critical(30, 0.05).unwrap();
        assert!((c / b - 1.0).abs() < 0.03, "{c} vs {b}");
    }

    #[test]
    fn quantile_rule() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&s, 0.05), 95.0);
        assert_eq!(upper_quantile(&s, 0.01), 99.0);
    }
}
