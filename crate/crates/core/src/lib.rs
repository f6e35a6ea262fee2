//! Extremal index estimation for stationary series, built on block-maxima
//! cycles of the data.

pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod mm;
pub mod rng;
pub mod series;
pub mod simulators;

pub use error::{Error, Result};
pub use estimators::{EstimatorId, FindBase, ThetaEstimate};
pub use mm::MMSignature;
pub use series::{CycleSeries, LevelSpec, Series};
pub use simulators::{Model, ModelSpec};
