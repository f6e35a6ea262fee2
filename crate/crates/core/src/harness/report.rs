use crate::error::{Error, Result};
use crate::estimators::{EstimatorId, FindBase, DEFAULT_UPPER_FRACTION};
use crate::harness::study::estimate_one;
use crate::series::{resolve_level, LevelSpec, Series};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub estimator: EstimatorId,
    pub value: Option<f64>,
    /// Why the estimator produced no value.
    pub error: Option<String>,
}

/// Estimates of θ for one observed series at one quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationReport {
    pub k: usize,
    pub quantile: f64,
    pub level: f64,
    pub n: usize,
    pub rows: Vec<ReportRow>,
}

impl ApplicationReport {
    pub fn value(&self, estimator: EstimatorId) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator)
            .and_then(|r| r.value)
    }
}

/// Report columns: direct runs (run `k`) and intervals, then the
/// cycle-based estimators with cycles of order `k`.
pub const REPORT_ESTIMATORS: [EstimatorId; 9] = [
    EstimatorId::Runs,
    EstimatorId::Intervals,
    EstimatorId::FDir,
    EstimatorId::FInd(FindBase::Upcross),
    EstimatorId::FInd(FindBase::Intervals),
    EstimatorId::FInd(FindBase::Ml),
    EstimatorId::FIndTdc,
    EstimatorId::FInd(FindBase::Ff),
    EstimatorId::FfStar,
];

pub fn application_report(series: &Series, k: usize, quantile: f64) -> Result<ApplicationReport> {
    application_report_with(series, k, quantile, DEFAULT_UPPER_FRACTION)
}

pub fn application_report_with(
    series: &Series,
    k: usize,
    quantile: f64,
    upper_fraction: f64,
) -> Result<ApplicationReport> {
    if k < 2 {
        return Err(Error::domain(format!("cycle order k = {k} must be >= 2")));
    }
    if series.len() < k - 1 {
        return Err(Error::domain(format!(
            "series of length {} is shorter than the cycle block {}",
            series.len(),
            k - 1
        )));
    }
    let level = resolve_level(series, LevelSpec::Quantile(quantile))?;
    let rows = REPORT_ESTIMATORS
        .iter()
        .map(
            |&estimator| match estimate_one(series, estimator, k, quantile, k, upper_fraction) {
                Ok(v) => ReportRow {
                    estimator,
                    value: Some(v),
                    error: None,
                },
                Err(e) => ReportRow {
                    estimator,
                    value: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    Ok(ApplicationReport {
        k,
        quantile,
        level,
        n: series.len(),
        rows,
    })
}
