//! Synthetic nonparametric regression: data, ℓ1-constrained ERM, excess
//! risk, and the size/budget schedules of each model family.

pub mod data;
pub mod erm;
pub mod rates;
pub mod schedule;
pub mod sweep;

pub use data::{generate_data, Dataset, RegressionModel, Truth};
pub use erm::{erm_fit, excess_risk, truncate_predict, ErmConfig, ErmFit, RiskEstimate};
pub use rates::{fit_slope, RateRecord, RateTable, SlopeFit};
pub use schedule::{approx_rate, predict_rate, rademacher_bound, schedule_hyper, Family, Schedule, TargetClass};
pub use sweep::{regression_sweep, RegressionReport, RegressionRow, RegressionSpec};
