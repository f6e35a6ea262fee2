use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorId, DEFAULT_UPPER_FRACTION};
use crate::rng::stream;
use crate::series::{LevelSpec, Series};
use crate::simulators::{reference_theta, simulate_with, ModelSpec, ReferenceTheta};

fn default_upper_fraction() -> f64 {
    DEFAULT_UPPER_FRACTION
}

/// A Monte-Carlo experiment: `replicates` samples of size `n` from `model`,
/// each scored by every estimator at every quantile level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub replicates: usize,
    /// Cycle order for the indirect estimators.
    pub k: usize,
    pub quantiles: Vec<f64>,
    pub estimators: Vec<EstimatorId>,
    /// Run length of the direct runs estimator; defaults to `k`.
    #[serde(default)]
    pub run: Option<usize>,
    pub master_seed: u64,
    #[serde(default = "default_upper_fraction")]
    pub upper_fraction: f64,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.model.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.k < 2 {
            return Err(Error::Config("k must be >= 2".into()));
        }
        if self.n < self.k - 1 {
            return Err(Error::Config("n must be at least k - 1".into()));
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::Config("quantiles must lie in (0, 1)".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators configured".into()));
        }
        if self.estimators.contains(&EstimatorId::FfStar) && self.k < 3 {
            return Err(Error::Config("FFSTAR needs k >= 3".into()));
        }
        if !(self.upper_fraction > 0.0 && self.upper_fraction < 1.0) {
            return Err(Error::Config("upper_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn run_length(&self) -> usize {
        self.run.unwrap_or(self.k)
    }
}

/// Summary of one (estimator, quantile) cell over the replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub estimator: EstimatorId,
    pub quantile: f64,
    pub rmse: Option<f64>,
    pub abias: Option<f64>,
    pub mean: Option<f64>,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub reference: ReferenceTheta,
    pub cells: Vec<StudyCell>,
}

impl StudyResult {
    pub fn cell(&self, estimator: EstimatorId, quantile: f64) -> Option<&StudyCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.quantile == quantile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Clipped estimate of `id` on one sample at one quantile.
pub fn estimate_one(
    series: &Series,
    id: EstimatorId,
    k: usize,
    quantile: f64,
    run: usize,
    upper_fraction: f64,
) -> Result<f64> {
    estimate(
        series,
        id,
        k,
        LevelSpec::Quantile(quantile),
        run,
        upper_fraction,
    )
    .map(|e| e.value)
}

/// Estimates for one replicate, ordered estimator-major then quantile.
fn replicate(config: &StudyConfig, index: usize) -> Result<Vec<Option<f64>>> {
    let mut rng = stream(config.master_seed, index as u64);
    let series = simulate_with(
        &config.model.model,
        config.model.burn_in,
        config.n,
        &mut rng,
    )?;
    let run = config.run_length();
    let mut out = Vec::with_capacity(config.estimators.len() * config.quantiles.len());
    for &id in &config.estimators {
        for &q in &config.quantiles {
            out.push(estimate_one(&series, id, config.k, q, run, config.upper_fraction).ok());
        }
    }
    Ok(out)
}

fn summarize(
    estimates: &[Option<f64>],
    theta: f64,
) -> (Option<f64>, Option<f64>, Option<f64>, usize) {
    let ok: Vec<f64> = estimates.iter().flatten().copied().collect();
    if ok.is_empty() {
        return (None, None, None, 0);
    }
    let n = ok.len() as f64;
    let mean = ok.iter().sum::<f64>() / n;
    let bias = mean - theta;
    let var = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    // mse = bias^2 + variance, so rmse >= |bias| holds by construction
    let rmse = bias.hypot(var.sqrt());
    (Some(rmse), Some(bias.abs()), Some(mean), ok.len())
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    run_study_with(config, Execution::Parallel)
}

/// Runs the study. Replicate `r` draws from stream `r` of the master seed,
/// so sequential and parallel runs agree exactly.
pub fn run_study_with(config: &StudyConfig, execution: Execution) -> Result<StudyResult> {
    config.validate()?;
    let reference = reference_theta(&config.model).ok_or_else(|| {
        Error::Config(format!(
            "no reference extremal index for model {}",
            config.model.model.name()
        ))
    })?;
    let rows: Vec<Vec<Option<f64>>> = match execution {
        Execution::Sequential => (0..config.replicates)
            .map(|r| replicate(config, r))
            .collect::<Result<_>>()?,
        Execution::Parallel => (0..config.replicates)
            .into_par_iter()
            .map(|r| replicate(config, r))
            .collect::<Result<_>>()?,
    };
    let nq = config.quantiles.len();
    let mut cells = Vec::with_capacity(config.estimators.len() * nq);
    for (ei, &estimator) in config.estimators.iter().enumerate() {
        for (qi, &quantile) in config.quantiles.iter().enumerate() {
            let column: Vec<Option<f64>> = rows.iter().map(|row| row[ei * nq + qi]).collect();
            let (rmse, abias, mean, successes) = summarize(&column, reference.value);
            cells.push(StudyCell {
                estimator,
                quantile,
                rmse,
                abias,
                mean,
                successes,
                failures: config.replicates - successes,
            });
        }
    }
    Ok(StudyResult {
        config: config.clone(),
        reference,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fdir, FindBase};
    use crate::simulators::Model;

    fn mm_config(replicates: usize) -> StudyConfig {
        StudyConfig {
            model: ModelSpec::new(Model::study_defaults()[2].clone(), 0),
            n: 1000,
            replicates,
            k: 3,
            quantiles: vec![0.95, 0.99],
            estimators: vec![
                EstimatorId::FDir,
                EstimatorId::FInd(FindBase::Ml),
                EstimatorId::FfStar,
            ],
            run: None,
            master_seed: 17,
            upper_fraction: DEFAULT_UPPER_FRACTION,
        }
    }

    #[test]
    fn single_replicate_collapses() {
        let cfg = mm_config(1);
        let res = run_study(&cfg).unwrap();
        let mut rng = stream(cfg.master_seed, 0);
        let x = simulate_with(&cfg.model.model, cfg.model.burn_in, cfg.n, &mut rng).unwrap();
        let est = fdir(&x, 3, LevelSpec::Quantile(0.95)).unwrap().value;
        let cell = res.cell(EstimatorId::FDir, 0.95).unwrap();
        assert!((cell.rmse.unwrap() - (est - 0.5).abs()).abs() < 1e-15);
        assert_eq!(cell.abias, cell.rmse);
        assert_eq!(cell.mean, Some(est));
    }

    #[test]
    fn accounting_and_jensen() {
        let res = run_study(&mm_config(30)).unwrap();
        assert_eq!(res.cells.len(), 6);
        for c in &res.cells {
            assert_eq!(c.successes + c.failures, 30);
            if let (Some(r), Some(a)) = (c.rmse, c.abias) {
                assert!(r >= a);
            }
        }
    }

    #[test]
    fn missing_reference_is_config_error() {
        let mut cfg = mm_config(2);
        cfg.model = ModelSpec::new(
            Model::Garch11 {
                lambda: 0.1,
                beta: 0.1,
            },
            0,
        );
        assert!(matches!(run_study(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn all_failing_estimator_is_counted() {
        // n = 20 at q = 0.99 leaves one exceedance: intervals needs two
        let mut cfg = mm_config(5);
        cfg.n = 20;
        cfg.quantiles = vec![0.99];
        cfg.estimators = vec![EstimatorId::Intervals];
        let res = run_study(&cfg).unwrap();
        assert_eq!(res.cells[0].failures, 5);
        assert_eq!(res.cells[0].rmse, None);
    }

    #[test]
    fn config_validation() {
        let mut cfg = mm_config(1);
        cfg.quantiles = vec![1.0];
        assert!(cfg.validate().is_err());
        let mut cfg = mm_config(1);
        cfg.replicates = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = mm_config(1);
        cfg.k = 2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json() {
        let json = r#"{
            "model": {"model": "MAR", "phi": 0.5},
            "n": 1000, "replicates": 10, "k": 3,
            "quantiles": [0.95, 0.975],
            "estimators": ["FDIR", "FIND_UPCROSS", "RUNS"],
            "master_seed": 1
        }"#;
        let cfg: StudyConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.run_length(), 3);
        assert_eq!(cfg.upper_fraction, DEFAULT_UPPER_FRACTION);
        assert_eq!(cfg.estimators[1], EstimatorId::FInd(FindBase::Upcross));
    }
}
