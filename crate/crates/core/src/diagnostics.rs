//! Empirical checks of the local dependence condition D(k)(u_n).
//!
//! For a sample of length `n` the window is `r_n = floor(n / k_n)` with
//! `k_n = floor((ln n)^s)`, and the level is the empirical `1 - tau / n`
//! quantile. An anti-D(k) event at `j` is an exceedance at `j`, no
//! exceedance at `j+1..=j+k-1`, and another exceedance somewhere in
//! `j+k..=j+r-1`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{resolve_level, LevelSpec, Series};

/// Default relative-gap threshold for [`k_selection_report`].
pub const DEFAULT_GAP_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnValue {
    pub k_n: usize,
    pub r_n: usize,
}

/// `k_n = floor((ln n)^s)` and `r_n = floor(n / k_n)`.
pub fn kn_value(n: usize, s: f64) -> Result<KnValue> {
    if n < 3 {
        return Err(Error::domain(format!("k_n needs n >= 3, got {n}")));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(format!("exponent s = {s} must be positive")));
    }
    let k_n = (n as f64).ln().powf(s).floor() as usize;
    if k_n == 0 {
        return Err(Error::domain(format!("k_n = floor((ln {n})^{s}) is zero")));
    }
    Ok(KnValue { k_n, r_n: n / k_n })
}

/// Which trajectory statistic a [`DiagnosticPoint`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Anti-D(k) proportion p_k.
    Proportion,
    /// Run count d_k.
    Count,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Proportion => "p_k",
            Statistic::Count => "d_k",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticPoint {
    pub m: usize,
    pub k: usize,
    pub tau: f64,
    pub s: f64,
    pub r: usize,
    pub statistic: Statistic,
    /// `None` when the prefix could not be evaluated.
    pub value: Option<f64>,
}

/// Level, window and next-exceedance table for one sample.
struct Scan {
    exceeds: Vec<bool>,
    /// `next[i]` is the first position `>= i` exceeding the level, or `n`.
    next: Vec<usize>,
    r: usize,
    total: usize,
}

impl Scan {
    fn new(series: &Series, k: usize, tau: f64, s: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k must be >= 1"));
        }
        let n = series.len();
        let KnValue { r_n: r, .. } = kn_value(n, s)?;
        if r < k {
            return Err(Error::Window { r, k });
        }
        let level = resolve_level(series, LevelSpec::Normalized(tau))?;
        let exceeds: Vec<bool> = series.values().iter().map(|&x| x > level).collect();
        let total = exceeds.iter().filter(|&&e| e).count();
        if total == 0 {
            return Err(Error::NoExceedances { level });
        }
        let mut next = vec![n; n + 1];
        for i in (0..n).rev() {
            next[i] = if exceeds[i] { i } else { next[i + 1] };
        }
        Ok(Scan {
            exceeds,
            next,
            r,
            total,
        })
    }

    /// Starting positions `j` (0-based) in `0..=n-r`.
    fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        let last = self.exceeds.len() - self.r;
        (0..=last).filter(move |&j| self.exceeds[j])
    }

    fn clear_run(&self, j: usize, k: usize) -> bool {
        self.next[j + 1] >= j + k
    }

    fn anti_count(&self, k: usize) -> usize {
        self.starts()
            .filter(|&j| self.clear_run(j, k) && self.next[j + k] < j + self.r)
            .count()
    }

    fn run_count(&self, k: usize) -> usize {
        self.starts().filter(|&j| self.clear_run(j, k)).count()
    }

    fn proportion(&self, k: usize) -> f64 {
        self.anti_count(k) as f64 / self.total as f64
    }
}

/// Proportion p_k of anti-D(k) events among all exceedances.
pub fn anti_dk_proportion(series: &Series, k: usize, tau: f64, s: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain(format!(
            "anti-D(k) proportion needs k >= 2, got {k}; use anti_d1_proportion"
        )));
    }
    Ok(Scan::new(series, k, tau, s)?.proportion(k))
}

/// p_1: exceedances followed by any further exceedance within the window.
pub fn anti_d1_proportion(series: &Series, tau: f64, s: f64) -> Result<f64> {
    Ok(Scan::new(series, 1, tau, s)?.proportion(1))
}

/// d_k: exceedances in `1..=n-r+1` followed by `k - 1` non-exceedances.
pub fn dk_count(series: &Series, k: usize, tau: f64, s: f64) -> Result<usize> {
    Ok(Scan::new(series, k, tau, s)?.run_count(k))
}

fn point_value(prefix: &Series, k: usize, tau: f64, s: f64, statistic: Statistic) -> Result<f64> {
    let scan = Scan::new(prefix, k, tau, s)?;
    Ok(match statistic {
        Statistic::Proportion => scan.proportion(k),
        Statistic::Count => scan.run_count(k) as f64,
    })
}

/// Evaluates p_k or d_k on each prefix length in `grid`, in grid order.
/// Prefixes that cannot be evaluated yield `value: None`.
pub fn trajectory(
    series: &Series,
    k: usize,
    tau: f64,
    s: f64,
    grid: &[usize],
    statistic: Statistic,
) -> Result<Vec<DiagnosticPoint>> {
    if grid.is_empty() {
        return Err(Error::domain("empty prefix grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("prefix grid must be strictly increasing"));
    }
    if let Some(&m) = grid.iter().find(|&&m| m == 0 || m > series.len()) {
        return Err(Error::domain(format!(
            "prefix length {m} outside 1..={}",
            series.len()
        )));
    }
    let points = grid
        .par_iter()
        .map(|&m| {
            let r = kn_value(m, s).map(|kn| kn.r_n).unwrap_or(0);
            let value = series
                .prefix(m)
                .and_then(|prefix| point_value(&prefix, k, tau, s, statistic))
                .ok();
            DiagnosticPoint {
                m,
                k,
                tau,
                s,
                r,
                statistic,
                value,
            }
        })
        .collect();
    Ok(points)
}

/// Up to `points` log-spaced prefix lengths ending at `n`, starting at the
/// larger of 500 and the smallest length where the window admits `k`.
pub fn default_grid(n: usize, k: usize, tau: f64, s: f64, points: usize) -> Vec<usize> {
    let feasible = (3..=n)
        .find(|&m| (m as f64) > tau && kn_value(m, s).map(|kn| kn.r_n >= k).unwrap_or(false));
    let start = match feasible {
        Some(m) => m.max(500).min(n),
        None => return vec![n],
    };
    if points <= 1 || start == n {
        return vec![n];
    }
    let (lo, hi) = ((start as f64).ln(), (n as f64).ln());
    let mut grid: Vec<usize> = (0..points)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .exp()
                .round() as usize
        })
        .map(|m| m.clamp(start, n))
        .collect();
    grid.dedup();
    *grid.last_mut().expect("nonempty") = n;
    grid
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelectionRow {
    pub k: usize,
    pub d_k: usize,
    /// p_k, with p_1 for `k = 1`.
    pub p_k: f64,
    /// `(d_{k-1} - d_k) / d_1`, absent for `k = 1`.
    pub backward_gap: Option<f64>,
    /// `(d_k - d_{k+1}) / d_1`.
    pub forward_gap: f64,
}

/// Terminal d_k / p_k table with a heuristic recommendation for `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSelectionReport {
    pub rows: Vec<KSelectionRow>,
    pub threshold: f64,
    /// Smallest `k` whose forward gap is below `threshold`. Heuristic only.
    pub recommended: Option<usize>,
    pub tau: f64,
    pub s: f64,
    pub r: usize,
}

impl KSelectionReport {
    pub const ADVISORY: &'static str =
        "heuristic: close d_k / d_(k+1) trajectories suggest D(k); inspect the trajectories before relying on it";
}

pub fn k_selection_report(
    series: &Series,
    k_max: usize,
    tau: f64,
    s: f64,
    threshold: f64,
) -> Result<KSelectionReport> {
    if k_max < 2 {
        return Err(Error::domain(format!("k_max must be >= 2, got {k_max}")));
    }
    // d_{k_max + 1} is needed for the last forward gap.
    let scan = Scan::new(series, k_max + 1, tau, s)?;
    let d: Vec<usize> = (1..=k_max + 1).map(|k| scan.run_count(k)).collect();
    let d1 = d[0] as f64;
    let rows: Vec<KSelectionRow> = (1..=k_max)
        .map(|k| KSelectionRow {
            k,
            d_k: d[k - 1],
            p_k: scan.proportion(k),
            backward_gap: (k > 1).then(|| (d[k - 2] - d[k - 1]) as f64 / d1),
            forward_gap: (d[k - 1] - d[k]) as f64 / d1,
        })
        .collect();
    let recommended = rows.iter().find(|r| r.forward_gap < threshold).map(|r| r.k);
    Ok(KSelectionReport {
        rows,
        threshold,
        recommended,
        tau,
        s,
        r: scan.r,
    })
}
