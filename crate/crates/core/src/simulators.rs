//! Seeded generators for the study models and their reference extremal
//! indices.
//!
//! Recursions:
//!
//! * `AR_CAUCHY`: `X_t = rho X_{t-1} + e_t`, `e_t` standard Cauchy; started
//!   from the stationary Cauchy law with scale `1 / (1 - |rho|)`.
//! * `AR_UNIF`: `X_t = -X_{t-1} / r + e_t`, `e_t` uniform on
//!   `{1/r, 2/r, ..., 1}`. If `X_{t-1}` is uniform on (0, 1) then so is
//!   `X_t`, and the lag-one correlation is `-1/r`.
//! * `MAR`: `X_t = max(phi X_{t-1}, (1 - phi) e_t)`, `e_t` unit Fréchet.
//! * `MARKOV_LOGISTIC`: Gumbel margins, consecutive pairs joined by the
//!   logistic copula `C(u, v) = exp(-((-ln u)^{1/a} + (-ln v)^{1/a})^a)`; the
//!   next state solves `dC/du (u, v) = w` for uniform `w` by bisection.
//! * `GARCH11`: `X_t = sigma_t eta_t`,
//!   `sigma_t^2 = omega + lambda X_{t-1}^2 + beta sigma_{t-1}^2` with
//!   Gaussian `eta` and `omega = 1 - lambda - beta` (unit variance).
//! * `MM`: see [`crate::mm`].

use std::sync::OnceLock;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Cauchy, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mm::{mm_extremal_index, mm_simulate_with, MMSignature};
use crate::rng::{stream, unit_frechet, StreamRng};
use crate::series::{empirical_quantile, Series};

pub const DEFAULT_BURN_IN: usize = 1000;

/// Bisection tolerance, on the Gumbel scale, for the logistic chain.
const LOGISTIC_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Model {
    ArCauchy { rho: f64 },
    ArUnif { r: u32 },
    Mar { phi: f64 },
    MarkovLogistic { alpha: f64 },
    Garch11 { lambda: f64, beta: f64 },
    Mm { signature: MMSignature },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::ArCauchy { .. } => "AR_CAUCHY",
            Model::ArUnif { .. } => "AR_UNIF",
            Model::Mar { .. } => "MAR",
            Model::MarkovLogistic { .. } => "MARKOV_LOGISTIC",
            Model::Garch11 { .. } => "GARCH11",
            Model::Mm { .. } => "MM",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Model::ArCauchy { rho } => rho.abs() < 1.0,
            Model::ArUnif { r } => r >= 2,
            Model::Mar { phi } => phi > 0.0 && phi < 1.0,
            Model::MarkovLogistic { alpha } => alpha > 0.0 && alpha < 1.0,
            Model::Garch11 { lambda, beta } => lambda >= 0.0 && beta >= 0.0 && lambda + beta < 1.0,
            Model::Mm { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid parameters for {self:?}")))
        }
    }

    /// The parameter values used in the simulation study tables.
    pub fn study_defaults() -> Vec<Model> {
        vec![
            Model::ArCauchy { rho: -0.6 },
            Model::ArUnif { r: 2 },
            Model::Mm {
                signature: MMSignature::parse_row("2/6,1/6,3/6").expect("valid signature"),
            },
            Model::Mar { phi: 0.5 },
            Model::MarkovLogistic { alpha: 0.5 },
            Model::Garch11 {
                lambda: 0.25,
                beta: 0.7,
            },
        ]
    }
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub model: Model,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: Model, seed: u64) -> Self {
        ModelSpec {
            model,
            burn_in: DEFAULT_BURN_IN,
            seed,
        }
    }
}

/// Stepwise generator for the recursive models.
enum Recursion {
    ArCauchy {
        rho: f64,
        x: f64,
    },
    ArUnif {
        r: u32,
        x: f64,
    },
    Mar {
        phi: f64,
        x: f64,
    },
    Logistic {
        alpha: f64,
        x: f64,
    },
    Garch {
        omega: f64,
        lambda: f64,
        beta: f64,
        x: f64,
        var: f64,
    },
}

fn standard_gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    -(-u.ln()).ln()
}

/// ln dC/du for the logistic copula with `a = -ln u`, `y = -ln v`.
fn logistic_log_conditional(alpha: f64, x: f64, x_next: f64) -> f64 {
    // a = e^{-x}, y = e^{-x_next}; s = a^{1/alpha} + y^{1/alpha}
    let inv = 1.0 / alpha;
    let a = (-x).exp();
    let log_s = {
        let (p, q) = (-x * inv, -x_next * inv);
        let m = p.max(q);
        m + ((p - m).exp() + (q - m).exp()).ln()
    };
    -(alpha * log_s).exp() + (alpha - 1.0) * log_s + (inv - 1.0) * (-x) + a
}

/// Next Gumbel state of the logistic chain given the current one.
fn logistic_step<R: Rng + ?Sized>(alpha: f64, x: f64, rng: &mut R) -> f64 {
    let w: f64 = Open01.sample(rng);
    let target = w.ln();
    let f = |z: f64| logistic_log_conditional(alpha, x, z) - target;
    let (mut lo, mut hi) = (x - 20.0, x + 20.0);
    while f(lo) > 0.0 {
        lo -= 20.0;
    }
    while f(hi) < 0.0 {
        hi += 20.0;
    }
    while hi - lo > LOGISTIC_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Recursion {
    fn start(model: &Model, rng: &mut StreamRng) -> Option<Self> {
        Some(match *model {
            Model::ArCauchy { rho } => {
                let scale = 1.0 / (1.0 - rho.abs());
                let x = Cauchy::new(0.0, scale).expect("positive scale").sample(rng);
                Recursion::ArCauchy { rho, x }
            }
            Model::ArUnif { r } => Recursion::ArUnif {
                r,
                x: Open01.sample(rng),
            },
            Model::Mar { phi } => Recursion::Mar {
                phi,
                x: unit_frechet(rng),
            },
            Model::MarkovLogistic { alpha } => Recursion::Logistic {
                alpha,
                x: standard_gumbel(rng),
            },
            Model::Garch11 { lambda, beta } => {
                let eta: f64 = StandardNormal.sample(rng);
                Recursion::Garch {
                    omega: 1.0 - lambda - beta,
                    lambda,
                    beta,
                    x: eta,
                    var: 1.0,
                }
            }
            Model::Mm { .. } => return None,
        })
    }

    fn step(&mut self, rng: &mut StreamRng) -> f64 {
        match self {
            Recursion::ArCauchy { rho, x } => {
                let e: f64 = Cauchy::new(0.0, 1.0).expect("unit scale").sample(rng);
                *x = *rho * *x + e;
                *x
            }
            Recursion::ArUnif { r, x } => {
                let r = *r;
                let e = rng.random_range(1..=r) as f64 / r as f64;
                *x = -*x / r as f64 + e;
                *x
            }
            Recursion::Mar { phi, x } => {
                *x = (*phi * *x).max((1.0 - *phi) * unit_frechet(rng));
                *x
            }
            Recursion::Logistic { alpha, x } => {
                *x = logistic_step(*alpha, *x, rng);
                *x
            }
            Recursion::Garch {
                omega,
                lambda,
                beta,
                x,
                var,
            } => {
                *var = *omega + *lambda * *x * *x + *beta * *var;
                let eta: f64 = StandardNormal.sample(rng);
                *x = var.sqrt() * eta;
                *x
            }
        }
    }
}

/// `n` observations drawn from `rng` after `burn_in` discarded steps.
pub fn simulate_with(
    model: &Model,
    burn_in: usize,
    n: usize,
    rng: &mut StreamRng,
) -> Result<Series> {
    model.validate()?;
    if n == 0 {
        return Err(Error::domain("sample size must be >= 1"));
    }
    if let Model::Mm { signature } = model {
        return mm_simulate_with(signature, n, rng);
    }
    let mut rec = Recursion::start(model, rng).expect("recursive model");
    for _ in 0..burn_in {
        rec.step(rng);
    }
    Series::new((0..n).map(|_| rec.step(rng)).collect())
}

/// `n` observations, reproducible from `spec.seed`.
pub fn simulate(spec: &ModelSpec, n: usize) -> Result<Series> {
    simulate_with(&spec.model, spec.burn_in, n, &mut stream(spec.seed, 0))
}

/// Ground-truth extremal index with a note on where it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTheta {
    pub value: f64,
    pub provenance: String,
}

/// Brute-force estimate of θ from `P(M_b <= u) ≈ exp(-theta tau)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Independent chains simulated in parallel.
    pub chains: usize,
    /// Observations per chain, a multiple of `block`.
    pub chain_length: usize,
    pub block: usize,
    pub taus: Vec<f64>,
    pub seed: u64,
    pub burn_in: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            chains: 20,
            chain_length: 1_000_000,
            block: 1000,
            taus: vec![1.0, 2.0, 3.0],
            seed: 20_131_107,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub config: OracleConfig,
    /// θ estimate per entry of `config.taus`.
    pub per_tau: Vec<f64>,
    /// Mean of `per_tau`.
    pub theta: f64,
    /// Largest pairwise difference across `per_tau`.
    pub spread: f64,
}

/// Simulates `chains * chain_length` observations, splits them into blocks
/// of length `b`, and for each `tau` sets `u` to the empirical
/// `1 - tau / b` quantile of all observations and reports
/// `-ln(#{blocks with max <= u} / #blocks) / tau`.
pub fn oracle_theta(model: &Model, config: &OracleConfig) -> Result<OracleRun> {
    model.validate()?;
    if config.block == 0 || !config.chain_length.is_multiple_of(config.block) || config.chains == 0
    {
        return Err(Error::Config(
            "oracle chain length must be a positive multiple of the block".into(),
        ));
    }
    if config.taus.is_empty()
        || config
            .taus
            .iter()
            .any(|&t| !(t > 0.0 && t < config.block as f64))
    {
        return Err(Error::Config("oracle taus must lie in (0, block)".into()));
    }
    let chains: Vec<Vec<f64>> = (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(config.seed, c as u64);
            simulate_with(model, config.burn_in, config.chain_length, &mut rng)
                .map(Series::into_vec)
        })
        .collect::<Result<_>>()?;
    let block_max: Vec<f64> = chains
        .iter()
        .flat_map(|c| c.chunks_exact(config.block))
        .map(|b| b.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let all = Series::new(chains.concat())?;
    let mut per_tau = Vec::with_capacity(config.taus.len());
    for &tau in &config.taus {
        let u = empirical_quantile(&all, 1.0 - tau / config.block as f64)?;
        let below = block_max.iter().filter(|&&m| m <= u).count();
        if below == 0 {
            return Err(Error::Degenerate(format!(
                "no block maximum below the tau = {tau} level"
            )));
        }
        let p = below as f64 / block_max.len() as f64;
        per_tau.push(-p.ln() / tau);
    }
    let theta = per_tau.iter().sum::<f64>() / per_tau.len() as f64;
    let spread = per_tau.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - per_tau.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OracleRun {
        config: config.clone(),
        per_tau,
        theta,
        spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub model: Model,
    pub theta: f64,
    pub oracle: OracleRun,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub entries: Vec<ReferenceEntry>,
}

impl ReferenceTable {
    /// Table shipped in `data/reference_theta.json`.
    pub fn bundled() -> &'static ReferenceTable {
        static TABLE: OnceLock<ReferenceTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            serde_json::from_str(include_str!("../data/reference_theta.json"))
                .expect("bundled reference table is valid JSON")
        })
    }

    pub fn lookup(&self, model: &Model) -> Option<&ReferenceEntry> {
        self.entries.iter().find(|e| &e.model == model)
    }
}

/// Ground truth used for rmse/abias. `None` for models with no known value.
pub fn reference_theta(spec: &ModelSpec) -> Option<ReferenceTheta> {
    match &spec.model {
        Model::Mm { signature } => Some(ReferenceTheta {
            value: mm_extremal_index(signature),
            provenance: "closed form: sum over rows of the largest signature coefficient".into(),
        }),
        Model::Garch11 { lambda, beta } if *lambda == 0.25 && *beta == 0.7 => {
            Some(ReferenceTheta {
                value: 0.3,
                provenance: "tabulated GARCH(1,1) extremal index (Laurini and Tawn, 2012)".into(),
            })
        }
        model => ReferenceTable::bundled().lookup(model).map(|e| {
            let c = &e.oracle.config;
            ReferenceTheta {
                value: e.theta,
                provenance: format!(
                    "block-maxima oracle: {} chains x {} obs, block {}, taus {:?}, per-tau {:?}, seed {}",
                    c.chains, c.chain_length, c.block, c.taus, e.oracle.per_tau, c.seed
                ),
            }
        }),
    }
}
