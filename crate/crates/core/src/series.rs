//! Series primitives: thresholds, exceedances, upcrossings and the
//! block-maxima cycle transform.
//!
//! Positions reported by [`ExceedanceSummary`] are 1-based, matching the
//! usual X_1, ..., X_n indexing of a sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, nonempty, real-valued sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData {
                needed: 1,
                found: 0,
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite value {} at position {}",
                values[pos],
                pos + 1
            )));
        }
        Ok(Series(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; a `Series` holds at least one value.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// First `m` observations.
    pub fn prefix(&self, m: usize) -> Result<Series> {
        if m == 0 || m > self.len() {
            return Err(Error::domain(format!(
                "prefix length {m} outside 1..={}",
                self.len()
            )));
        }
        Ok(Series(self.0[..m].to_vec()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Series::new(values)
    }
}

impl AsRef<[f64]> for Series {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// How a threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LevelSpec {
    /// The threshold itself.
    Absolute(f64),
    /// Empirical quantile at probability `p` in (0, 1).
    Quantile(f64),
    /// Normalized level: empirical quantile at `1 - tau / n`.
    Normalized(f64),
}

/// Maxima of consecutive disjoint blocks of length `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSeries {
    values: Vec<f64>,
    k: usize,
}

impl CycleSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn block_len(&self) -> usize {
        self.k - 1
    }

    /// Number of cycles, `floor(n / (k - 1))`.
    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// The cycles as a plain series, for applying series estimators to Z.
    pub fn to_series(&self) -> Series {
        Series(self.values.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceSummary {
    pub level: f64,
    /// 1-based positions `i` with `X_i > level`, increasing.
    pub indices: Vec<usize>,
    /// Gaps between consecutive exceedance positions.
    pub interexceedance_times: Vec<usize>,
}

impl ExceedanceSummary {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability {p} outside (0, 1)")))
    }
}

/// 1-based rank `ceil(n p)` of the order statistic used as the p-quantile.
pub(crate) fn quantile_rank(n: usize, p: f64) -> usize {
    let x = n as f64 * p;
    // n p is integral in exact arithmetic for the usual grids (0.95 * 100,
    // 1 - 50/1000); do not let representation error push ceil up by one.
    let nearest = x.round();
    let rank = if (x - nearest).abs() <= 1e-9 * (n as f64).max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (rank as usize).clamp(1, n)
}

/// Order statistic `X_(ceil(n p))` of the sample.
pub fn empirical_quantile(series: &Series, p: f64) -> Result<f64> {
    check_probability(p)?;
    let mut sorted = series.values().to_vec();
    let rank = quantile_rank(sorted.len(), p);
    let (_, nth, _) = sorted.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*nth)
}

pub fn resolve_level(series: &Series, spec: LevelSpec) -> Result<f64> {
    match spec {
        LevelSpec::Absolute(u) => {
            if u.is_nan() {
                return Err(Error::domain("absolute level is NaN"));
            }
            Ok(u)
        }
        LevelSpec::Quantile(p) => empirical_quantile(series, p),
        LevelSpec::Normalized(tau) => {
            let n = series.len() as f64;
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::domain(format!("tau = {tau} must be positive")));
            }
            if tau >= n {
                return Err(Error::domain(format!(
                    "tau = {tau} must be below the sample size {n}"
                )));
            }
            empirical_quantile(series, 1.0 - tau / n)
        }
    }
}

/// Exceedances strictly above `level`.
pub fn exceedance_summary(series: &Series, level: f64) -> ExceedanceSummary {
    let indices: Vec<usize> = series
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > level)
        .map(|(i, _)| i + 1)
        .collect();
    let interexceedance_times = indices.windows(2).map(|w| w[1] - w[0]).collect();
    ExceedanceSummary {
        level,
        indices,
        interexceedance_times,
    }
}

pub(crate) fn count_exceedances(values: &[f64], level: f64) -> usize {
    values.iter().filter(|&&x| x > level).count()
}

pub(crate) fn count_upcrossings(values: &[f64], level: f64) -> usize {
    values
        .windows(2)
        .filter(|w| w[0] <= level && level < w[1])
        .count()
}

/// Number of `i` with `X_i <= level < X_{i+1}`.
pub fn upcrossing_count(series: &Series, level: f64) -> usize {
    count_upcrossings(series.values(), level)
}

/// Maxima over disjoint blocks of `k - 1` consecutive values. A trailing
/// partial block is dropped.
pub fn block_cycles(series: &Series, k: usize) -> Result<CycleSeries> {
    if k < 2 {
        return Err(Error::domain(format!("cycle order k = {k} must be >= 2")));
    }
    let block = k - 1;
    if series.len() < block {
        return Err(Error::InsufficientData {
            needed: block,
            found: series.len(),
        });
    }
    let values = series
        .values()
        .chunks_exact(block)
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(CycleSeries { values, k })
}
