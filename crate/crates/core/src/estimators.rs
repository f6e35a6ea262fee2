//! Extremal index estimators.
//!
//! Direct estimators (runs, intervals, upcrossings, maximum likelihood) work
//! on any series at a fixed level. The cycle-based estimators first reduce
//! the series to block maxima `Z` of length `k - 1`, estimate the extremal
//! index of `Z` (where only the anti-D(2) behaviour matters), and map the
//! result back through the exceedance counts `N^Z / N^X`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{
    block_cycles, count_exceedances, count_upcrossings, exceedance_summary, resolve_level,
    CycleSeries, LevelSpec, Series,
};

/// Default fraction of upper order statistics used by [`tdc_estimator`].
pub const DEFAULT_UPPER_FRACTION: f64 = 0.05;

/// Estimator used for θ_Z inside [`find`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FindBase {
    Upcross,
    Intervals,
    Ml,
    Ff,
}

impl FindBase {
    pub const ALL: [FindBase; 4] = [
        FindBase::Upcross,
        FindBase::Intervals,
        FindBase::Ml,
        FindBase::Ff,
    ];

    fn as_str(self) -> &'static str {
        match self {
            FindBase::Upcross => "UPCROSS",
            FindBase::Intervals => "INTERVALS",
            FindBase::Ml => "ML",
            FindBase::Ff => "FF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorId {
    Runs,
    Intervals,
    Upcross,
    Ml,
    /// Max-stable moment estimator of θ_Z on the cycles.
    Ff,
    FfStar,
    FDir,
    FInd(FindBase),
    FIndTdc,
}

impl EstimatorId {
    /// Cycle-based estimators report the `k` they used.
    pub fn is_indirect(self) -> bool {
        !matches!(
            self,
            EstimatorId::Runs | EstimatorId::Intervals | EstimatorId::Upcross | EstimatorId::Ml
        )
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorId::Runs => f.write_str("RUNS"),
            EstimatorId::Intervals => f.write_str("INTERVALS"),
            EstimatorId::Upcross => f.write_str("UPCROSS"),
            EstimatorId::Ml => f.write_str("ML"),
            EstimatorId::Ff => f.write_str("FF"),
            EstimatorId::FfStar => f.write_str("FFSTAR"),
            EstimatorId::FDir => f.write_str("FDIR"),
            EstimatorId::FInd(base) => write!(f, "FIND_{}", base.as_str()),
            EstimatorId::FIndTdc => f.write_str("FINDTDC"),
        }
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s.trim().to_ascii_uppercase().as_str() {
            "RUNS" => EstimatorId::Runs,
            "INTERVALS" => EstimatorId::Intervals,
            "UPCROSS" => EstimatorId::Upcross,
            "ML" => EstimatorId::Ml,
            "FF" => EstimatorId::Ff,
            "FFSTAR" => EstimatorId::FfStar,
            "FDIR" => EstimatorId::FDir,
            "FIND_UPCROSS" => EstimatorId::FInd(FindBase::Upcross),
            "FIND_INTERVALS" => EstimatorId::FInd(FindBase::Intervals),
            "FIND_ML" => EstimatorId::FInd(FindBase::Ml),
            "FIND_FF" => EstimatorId::FInd(FindBase::Ff),
            "FINDTDC" | "FIND_TDC" => EstimatorId::FIndTdc,
            other => return Err(Error::Config(format!("unknown estimator '{other}'"))),
        };
        Ok(id)
    }
}

impl TryFrom<String> for EstimatorId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimatorId> for String {
    fn from(id: EstimatorId) -> String {
        id.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEstimate {
    /// `raw` clipped to [0, 1].
    pub value: f64,
    pub raw: f64,
    pub estimator: EstimatorId,
    /// Cycle order, for indirect estimators only.
    pub k: Option<usize>,
    /// Threshold, absent for the rank-based FF estimators.
    pub level: Option<f64>,
    /// Exceedances of `level` in the original series (N^X).
    pub n_exceedances: usize,
}

impl ThetaEstimate {
    fn new(
        estimator: EstimatorId,
        raw: f64,
        k: Option<usize>,
        level: Option<f64>,
        n_exceedances: usize,
    ) -> Self {
        ThetaEstimate {
            value: raw.clamp(0.0, 1.0),
            raw,
            estimator,
            k,
            level,
            n_exceedances,
        }
    }
}

fn nonempty_exceedances(n: usize, level: f64) -> Result<()> {
    if n == 0 {
        Err(Error::NoExceedances { level })
    } else {
        Ok(())
    }
}

fn runs_raw(values: &[f64], level: f64, run: usize) -> Result<f64> {
    if run == 0 {
        return Err(Error::domain("run length must be >= 1"));
    }
    let n = values.len();
    let mut exceedances = 0usize;
    let mut cluster_ends = 0usize;
    for (i, &x) in values.iter().enumerate() {
        if x > level {
            exceedances += 1;
            let end = (i + run).min(n);
            if values[i + 1..end].iter().all(|&y| y <= level) {
                cluster_ends += 1;
            }
        }
    }
    nonempty_exceedances(exceedances, level)?;
    Ok(cluster_ends as f64 / exceedances as f64)
}

/// Fraction of exceedances followed by `run - 1` non-exceedances. Past the
/// end of the series the window counts as clear.
pub fn runs_estimator(series: &Series, level: f64, run: usize) -> Result<ThetaEstimate> {
    let raw = runs_raw(series.values(), level, run)?;
    Ok(ThetaEstimate::new(
        EstimatorId::Runs,
        raw,
        None,
        Some(level),
        count_exceedances(series.values(), level),
    ))
}

fn upcross_raw(values: &[f64], level: f64) -> Result<f64> {
    let n = count_exceedances(values, level);
    nonempty_exceedances(n, level)?;
    Ok(count_upcrossings(values, level) as f64 / n as f64)
}

/// Upcrossings over exceedances.
pub fn upcrossings_estimator(series: &Series, level: f64) -> Result<ThetaEstimate> {
    let raw = upcross_raw(series.values(), level)?;
    Ok(ThetaEstimate::new(
        EstimatorId::Upcross,
        raw,
        None,
        Some(level),
        count_exceedances(series.values(), level),
    ))
}

fn intervals_raw(series: &Series, level: f64) -> Result<f64> {
    let summary = exceedance_summary(series, level);
    let n = summary.count();
    if n < 2 {
        return Err(Error::InsufficientExceedances {
            needed: 2,
            found: n,
        });
    }
    let times = &summary.interexceedance_times;
    let max_t = times.iter().copied().max().unwrap_or(0);
    let (num, den) = if max_t <= 2 {
        let sum: f64 = times.iter().map(|&t| t as f64).sum();
        let sum_sq: f64 = times.iter().map(|&t| (t * t) as f64).sum();
        (2.0 * sum * sum, (n - 1) as f64 * sum_sq)
    } else {
        let sum: f64 = times.iter().map(|&t| (t - 1) as f64).sum();
        let sum_prod: f64 = times
            .iter()
            .map(|&t| ((t - 1) * t.saturating_sub(2)) as f64)
            .sum();
        (2.0 * sum * sum, (n - 1) as f64 * sum_prod)
    };
    if den == 0.0 {
        return Err(Error::DegenerateTimes);
    }
    Ok(num / den)
}

/// Ferro–Segers intervals estimator from interexceedance times.
pub fn intervals_estimator(series: &Series, level: f64) -> Result<ThetaEstimate> {
    let raw = intervals_raw(series, level)?;
    Ok(ThetaEstimate::new(
        EstimatorId::Intervals,
        raw,
        None,
        Some(level),
        count_exceedances(series.values(), level),
    ))
}

fn ml_raw(series: &Series, level: f64) -> Result<f64> {
    let summary = exceedance_summary(series, level);
    let n_exc = summary.count();
    if n_exc < 2 {
        return Err(Error::InsufficientExceedances {
            needed: 2,
            found: n_exc,
        });
    }
    let q = n_exc as f64 / series.len() as f64;
    let gaps = summary.interexceedance_times.iter().map(|&t| t - 1);
    let scaled_sum: f64 = gaps.clone().map(|s| q * s as f64).sum();
    let nonzero = gaps.filter(|&s| s != 0).count() as f64;
    if scaled_sum == 0.0 {
        return Ok(0.0);
    }
    let b = scaled_sum + (n_exc - 1) as f64 + nonzero;
    let disc = (b * b - 8.0 * nonzero * scaled_sum).max(0.0);
    Ok((b - disc.sqrt()) / (2.0 * scaled_sum))
}

/// Süveges maximum likelihood estimator (closed-form root of the score
/// equation for the exponential/point-mass mixture of scaled gaps).
pub fn ml_estimator(series: &Series, level: f64) -> Result<ThetaEstimate> {
    let raw = ml_raw(series, level)?;
    Ok(ThetaEstimate::new(
        EstimatorId::Ml,
        raw,
        None,
        Some(level),
        count_exceedances(series.values(), level),
    ))
}

/// Ordinal ranks 1..=n; ties broken by position.
pub(crate) fn ordinal_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Rank-based upper tail dependence coefficient of consecutive cycle pairs
/// `(Z_i, Z_{i+1})`, counting joint membership in the top `j` ranks.
pub fn tdc_estimator(cycles: &CycleSeries, upper_fraction: f64) -> Result<f64> {
    if !(upper_fraction > 0.0 && upper_fraction < 1.0) {
        return Err(Error::domain(format!(
            "upper fraction {upper_fraction} outside (0, 1)"
        )));
    }
    let z = cycles.values();
    let m = z.len();
    if m < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: m,
        });
    }
    let pairs = m - 1;
    let first = ordinal_ranks(&z[..pairs]);
    let second = ordinal_ranks(&z[1..]);
    let j = ((upper_fraction * pairs as f64).ceil() as usize).clamp(1, pairs);
    let cut = pairs - j;
    let joint = first
        .iter()
        .zip(&second)
        .filter(|(&a, &b)| a > cut && b > cut)
        .count();
    Ok(joint as f64 / j as f64)
}

/// θ_Z from the expected joint df of consecutive cycles,
/// `1 / (1 - E[F(Z_1) ∨ F(Z_2)]) - 2`, with `F` the empirical df scaled by
/// `m + 1`.
pub fn ff_theta(cycles: &CycleSeries) -> Result<ThetaEstimate> {
    let z = cycles.values();
    let m = z.len();
    if m < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: m,
        });
    }
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let edf = |x: f64| sorted.partition_point(|&v| v <= x) as f64 / (m + 1) as f64;
    let e = z.windows(2).map(|w| edf(w[0].max(w[1]))).sum::<f64>() / (m - 1) as f64;
    if e >= 1.0 {
        return Err(Error::Degenerate("E[F(Z1) v F(Z2)] = 1".into()));
    }
    let raw = 1.0 / (1.0 - e) - 2.0;
    Ok(ThetaEstimate::new(
        EstimatorId::Ff,
        raw,
        Some(cycles.k()),
        None,
        0,
    ))
}

/// Rank transform to unit Fréchet margins: `-1 / ln(rank / (n + 1))`.
pub fn to_unit_frechet(series: &Series) -> Result<Series> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: n,
        });
    }
    let denom = (n + 1) as f64;
    let values = ordinal_ranks(series.values())
        .into_iter()
        .map(|r| -1.0 / (r as f64 / denom).ln())
        .collect();
    Series::new(values)
}

/// θ_X = θ_Z · (-ln F_Z(1)) / (k - 1) for a series with unit Fréchet
/// margins.
pub fn ffstar_theta(series: &Series, k: usize) -> Result<ThetaEstimate> {
    if k < 3 {
        return Err(Error::domain(format!("FF* needs k >= 3, got {k}")));
    }
    let z = block_cycles(series, k)?;
    let theta_z = ff_theta(&z)?;
    let below = z.values().iter().filter(|&&v| v <= 1.0).count();
    if below == 0 {
        return Err(Error::Degenerate("empirical F_Z(1) = 0".into()));
    }
    let f_z1 = below as f64 / z.m() as f64;
    let raw = theta_z.value * (-f_z1.ln()) / (k - 1) as f64;
    Ok(ThetaEstimate::new(
        EstimatorId::FfStar,
        raw,
        Some(k),
        None,
        0,
    ))
}

/// Level, cycles and N^X shared by the cycle-based estimators.
struct CycleSetup {
    level: f64,
    cycles: CycleSeries,
    n_x: usize,
}

impl CycleSetup {
    fn new(series: &Series, k: usize, spec: LevelSpec) -> Result<Self> {
        let level = resolve_level(series, spec)?;
        let cycles = block_cycles(series, k)?;
        let n_x = count_exceedances(series.values(), level);
        nonempty_exceedances(n_x, level)?;
        Ok(CycleSetup { level, cycles, n_x })
    }

    fn n_z(&self) -> usize {
        count_exceedances(self.cycles.values(), self.level)
    }

    fn estimate(&self, id: EstimatorId, raw: f64) -> ThetaEstimate {
        ThetaEstimate::new(id, raw, Some(self.cycles.k()), Some(self.level), self.n_x)
    }
}

/// `U^Z(u) / N^X(u)`.
pub fn fdir(series: &Series, k: usize, spec: LevelSpec) -> Result<ThetaEstimate> {
    let setup = CycleSetup::new(series, k, spec)?;
    let up = count_upcrossings(setup.cycles.values(), setup.level);
    Ok(setup.estimate(EstimatorId::FDir, up as f64 / setup.n_x as f64))
}

/// `θ_Z N^Z(u) / N^X(u)` with θ_Z from the chosen base estimator applied to
/// the cycles at the same level.
pub fn find(series: &Series, k: usize, spec: LevelSpec, base: FindBase) -> Result<ThetaEstimate> {
    let setup = CycleSetup::new(series, k, spec)?;
    let n_x = setup.n_x as f64;
    let id = EstimatorId::FInd(base);
    if base == FindBase::Upcross {
        // θ_Z N^Z = U^Z exactly; skip the round trip through a quotient.
        let up = count_upcrossings(setup.cycles.values(), setup.level);
        return Ok(setup.estimate(id, up as f64 / n_x));
    }
    let z = setup.cycles.to_series();
    let theta_z = match base {
        FindBase::Upcross => unreachable!(),
        FindBase::Intervals => intervals_raw(&z, setup.level)?.clamp(0.0, 1.0),
        FindBase::Ml => ml_raw(&z, setup.level)?.clamp(0.0, 1.0),
        FindBase::Ff => ff_theta(&setup.cycles)?.value,
    };
    Ok(setup.estimate(id, theta_z * setup.n_z() as f64 / n_x))
}

/// `(1 - λ_Z) N^Z(u) / N^X(u)` with λ_Z the tail dependence coefficient of
/// consecutive cycles.
pub fn findtdc(
    series: &Series,
    k: usize,
    spec: LevelSpec,
    upper_fraction: f64,
) -> Result<ThetaEstimate> {
    let setup = CycleSetup::new(series, k, spec)?;
    let lambda = tdc_estimator(&setup.cycles, upper_fraction)?;
    let raw = (1.0 - lambda) * setup.n_z() as f64 / setup.n_x as f64;
    Ok(setup.estimate(EstimatorId::FIndTdc, raw))
}

/// Dispatches on `id`. The level is ignored by FF and FFSTAR, `run` is
/// used by RUNS only, `k` by the cycle-based estimators.
pub fn estimate(
    series: &Series,
    id: EstimatorId,
    k: usize,
    spec: LevelSpec,
    run: usize,
    upper_fraction: f64,
) -> Result<ThetaEstimate> {
    match id {
        EstimatorId::Runs => runs_estimator(series, resolve_level(series, spec)?, run),
        EstimatorId::Intervals => intervals_estimator(series, resolve_level(series, spec)?),
        EstimatorId::Upcross => upcrossings_estimator(series, resolve_level(series, spec)?),
        EstimatorId::Ml => ml_estimator(series, resolve_level(series, spec)?),
        EstimatorId::Ff => ff_theta(&block_cycles(series, k)?),
        EstimatorId::FfStar => ffstar_theta(&to_unit_frechet(series)?, k),
        EstimatorId::FDir => fdir(series, k, spec),
        EstimatorId::FInd(base) => find(series, k, spec, base),
        EstimatorId::FIndTdc => findtdc(series, k, spec, upper_fraction),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    /// Series of zeros with 2.0 at the given 1-based positions.
    fn spikes(n: usize, at: &[usize]) -> Series {
        let mut v = vec![0.0; n];
        for &i in at {
            v[i - 1] = 2.0;
        }
        Series::new(v).unwrap()
    }

    #[test]
    fn runs_by_hand() {
        let x = s(&[2.0, 0.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0]);
        let est = runs_estimator(&x, 1.0, 2).unwrap();
        assert_eq!(est.raw, 2.0 / 3.0);
        assert_eq!(est.n_exceedances, 3);
        assert_eq!(est.k, None);
        for r in 1..6 {
            assert_eq!(
                runs_estimator(&spikes(20, &[7]), 1.0, r).unwrap().value,
                1.0
            );
        }
        assert!(matches!(
            runs_estimator(&s(&[0.0, 0.0]), 1.0, 2),
            Err(Error::NoExceedances { .. })
        ));
    }

    #[test]
    fn runs_window_past_end_counts_as_clear() {
        // exceedance at the last position: empty window is satisfied
        let x = s(&[0.0, 0.0, 2.0]);
        assert_eq!(runs_estimator(&x, 1.0, 5).unwrap().raw, 1.0);
    }

    #[test]
    fn upcrossings_by_hand() {
        assert_eq!(
            upcrossings_estimator(&s(&[0.0, 2.0, 0.0, 2.0, 0.0]), 1.0)
                .unwrap()
                .raw,
            1.0
        );
        assert_eq!(
            upcrossings_estimator(&s(&[0.0, 2.0, 2.0, 2.0, 0.0]), 1.0)
                .unwrap()
                .raw,
            1.0 / 3.0
        );
    }

    #[test]
    fn intervals_closed_form() {
        // T = (1, 1, 9): 2 * 8^2 / (3 * 56)
        let est = intervals_estimator(&spikes(20, &[1, 2, 3, 12]), 1.0).unwrap();
        assert!((est.raw - 128.0 / 168.0).abs() < 1e-15);
        // T = (1, 1): 2 * 2^2 / (2 * 2) = 2, clipped
        let est = intervals_estimator(&spikes(5, &[1, 2, 3]), 1.0).unwrap();
        assert_eq!(est.raw, 2.0);
        assert_eq!(est.value, 1.0);
        assert!(matches!(
            intervals_estimator(&spikes(5, &[2]), 1.0),
            Err(Error::InsufficientExceedances { found: 1, .. })
        ));
    }

    #[test]
    fn intervals_second_branch() {
        // T = (3): 2 * 2^2 / (1 * 2 * 1)
        let est = intervals_estimator(&spikes(5, &[1, 4]), 1.0).unwrap();
        assert_eq!(est.raw, 4.0);
    }

    #[test]
    fn ml_closed_form() {
        assert_eq!(ml_estimator(&spikes(10, &[3, 4, 5]), 1.0).unwrap().raw, 0.0);
        let est = ml_estimator(&spikes(100, &[10, 11, 50]), 1.0).unwrap();
        let a: f64 = 0.03 * 38.0;
        let b = a + 2.0 + 1.0;
        let expected = (b - (b * b - 8.0 * a).sqrt()) / (2.0 * a);
        assert!(
            (est.raw - expected).abs() < 1e-15,
            "{} vs {}",
            est.raw,
            expected
        );
        assert!((expected - 0.573_732_531).abs() < 1e-8);
    }

    #[test]
    fn tdc_comonotone_pairs() {
        let x = Series::new((0..50).map(f64::from).collect()).unwrap();
        let z = block_cycles(&x, 2).unwrap();
        assert_eq!(tdc_estimator(&z, 0.05).unwrap(), 1.0);
        let short = block_cycles(&s(&[1.0, 2.0]), 2).unwrap();
        assert!(tdc_estimator(&short, 0.05).is_err());
    }

    #[test]
    fn ff_perfect_dependence_is_zero() {
        // increasing cycles: F(Z_i v Z_{i+1}) = F(Z_{i+1}) is uniform, E = 1/2
        let x = Series::new((0..2000).map(f64::from).collect()).unwrap();
        let z = block_cycles(&x, 2).unwrap();
        let est = ff_theta(&z).unwrap();
        assert!(est.raw.abs() < 0.01, "{}", est.raw);
        assert_eq!(est.k, Some(2));
        assert_eq!(est.level, None);
    }

    #[test]
    fn unit_frechet_transform() {
        let x = s(&[3.0, -1.0, 10.0, 0.5]);
        let f = to_unit_frechet(&x).unwrap();
        assert!(f.values().iter().all(|&v| v > 0.0));
        assert_eq!(f.values()[2], -1.0 / (4.0f64 / 5.0).ln());
        let mut sorted = f.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn fdir_by_hand() {
        let x = s(&[2.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
        let est = fdir(&x, 3, LevelSpec::Absolute(1.0)).unwrap();
        assert_eq!(est.raw, 0.5);
        assert_eq!(est.k, Some(3));
        assert_eq!(est.n_exceedances, 2);
        assert!(matches!(
            fdir(&x, 3, LevelSpec::Absolute(5.0)),
            Err(Error::NoExceedances { .. })
        ));
    }

    #[test]
    fn findtdc_comonotone_is_zero() {
        let x = Series::new((0..60).map(f64::from).collect()).unwrap();
        let est = findtdc(&x, 3, LevelSpec::Quantile(0.9), 0.05).unwrap();
        assert_eq!(est.raw, 0.0);
    }

    #[test]
    fn estimator_ids_round_trip() {
        let all = [
            EstimatorId::Runs,
            EstimatorId::Intervals,
            EstimatorId::Upcross,
            EstimatorId::Ml,
            EstimatorId::Ff,
            EstimatorId::FfStar,
            EstimatorId::FDir,
            EstimatorId::FInd(FindBase::Upcross),
            EstimatorId::FInd(FindBase::Intervals),
            EstimatorId::FInd(FindBase::Ml),
            EstimatorId::FInd(FindBase::Ff),
            EstimatorId::FIndTdc,
        ];
        for id in all {
            assert_eq!(id.to_string().parse::<EstimatorId>().unwrap(), id);
        }
        assert!("NOPE".parse::<EstimatorId>().is_err());
    }

    fn series_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 10..300)
    }

    proptest! {
        #[test]
        fn fdir_k2_is_upcrossings(v in series_strategy(), p in 0.5f64..0.95) {
            let x = Series::new(v).unwrap();
            let spec = LevelSpec::Quantile(p);
            let u = resolve_level(&x, spec).unwrap();
            match (fdir(&x, 2, spec), upcrossings_estimator(&x, u)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.raw, b.raw),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn estimates_lie_in_unit_interval(v in series_strategy(), p in 0.5f64..0.95, k in 2usize..6) {
            let x = Series::new(v).unwrap();
            let spec = LevelSpec::Quantile(p);
            let u = resolve_level(&x, spec).unwrap();
            let mut all = vec![
                runs_estimator(&x, u, k),
                intervals_estimator(&x, u),
                upcrossings_estimator(&x, u),
                ml_estimator(&x, u),
                fdir(&x, k, spec),
                findtdc(&x, k, spec, 0.1),
            ];
            all.extend(FindBase::ALL.iter().map(|&b| find(&x, k, spec, b)));
            for est in all.into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&est.value));
                prop_assert_eq!(est.value, est.raw.clamp(0.0, 1.0));
                prop_assert_eq!(est.k.is_some(), est.estimator.is_indirect());
            }
        }

        #[test]
        fn invariant_under_increasing_maps(v in series_strategy(), p in 0.5f64..0.95, k in 2usize..6) {
            let x = Series::new(v.clone()).unwrap();
            let y = Series::new(v.iter().map(|t| t.exp() * 3.0 + 1.0).collect()).unwrap();
            let u = resolve_level(&x, LevelSpec::Quantile(p)).unwrap();
            let uy = u.exp() * 3.0 + 1.0;
            let pairs = [
                (runs_estimator(&x, u, k), runs_estimator(&y, uy, k)),
                (intervals_estimator(&x, u), intervals_estimator(&y, uy)),
                (ml_estimator(&x, u), ml_estimator(&y, uy)),
                (upcrossings_estimator(&x, u), upcrossings_estimator(&y, uy)),
                (
                    fdir(&x, k, LevelSpec::Absolute(u)),
                    fdir(&y, k, LevelSpec::Absolute(uy)),
                ),
            ];
            for (a, b) in pairs {
                match (a, b) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a.raw, b.raw),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
            let zx = block_cycles(&x, k).unwrap();
            let zy = block_cycles(&y, k).unwrap();
            if zx.m() >= 3 {
                prop_assert_eq!(tdc_estimator(&zx, 0.1).unwrap(), tdc_estimator(&zy, 0.1).unwrap());
                prop_assert_eq!(ff_theta(&zx).unwrap().raw, ff_theta(&zy).unwrap().raw);
            }
        }
    }
}
