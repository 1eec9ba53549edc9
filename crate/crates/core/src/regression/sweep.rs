use rayon::prelude::*;
use serde::Serialize;

use super::data::{generate_data, RegressionModel, Truth};
use super::erm::{erm_fit, excess_risk, ErmConfig};
use super::rates::{ols, RateRecord, RateTable, SlopeFit};
use super::schedule::{predict_rate, schedule_hyper, Family, Schedule, TargetClass};
use crate::error::{Error, Result};
use crate::lift::catalog_target;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSpec {
    pub family: Family,
    pub class: TargetClass,
    pub d: usize,
    pub alpha: f64,
    pub noise: f64,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Catalog target; defaults to `holder_profile` or `random_shallow`.
    pub target: Option<String>,
    /// Replaces the scheduled `M_n` when set.
    pub budget: Option<f64>,
    pub n_mc: usize,
    pub max_iter: usize,
}

impl RegressionSpec {
    pub fn new(family: Family, class: TargetClass, d: usize, alpha: f64, n_list: Vec<usize>, trials: usize) -> Self {
        Self {
            family,
            class,
            d,
            alpha,
            noise: super::data::DEFAULT_NOISE,
            n_list,
            trials,
            seed: 0,
            target: None,
            budget: None,
            n_mc: 4096,
            max_iter: 2000,
        }
    }

    pub fn target_name(&self) -> &str {
        self.target.as_deref().unwrap_or(match self.class {
            TargetClass::Holder => "holder_profile",
            TargetClass::Variation => "random_shallow",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionRow {
    pub n: usize,
    pub schedule: Schedule,
    pub risk_mean: f64,
    pub risk_std: f64,
    /// Risk of the untruncated fits on the same Monte-Carlo samples.
    pub raw_risk_mean: f64,
    /// Fits whose truncated risk exceeded the untruncated one.
    pub truncation_violations: usize,
    pub converged: usize,
    /// Fits whose ℓ1 norm reached the budget.
    pub budget_active: usize,
    pub slope_so_far: Option<SlopeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub spec: RegressionSpec,
    /// Exponent `p` of the predicted risk `n^{−p}`.
    pub predicted_exponent: f64,
    /// Whether `B_n ≥ sup |h|` holds for every row (estimated on a grid).
    pub truncation_covers_truth: bool,
    pub rows: Vec<RegressionRow>,
    pub table: RateTable,
}

impl RegressionReport {
    pub fn slope(&self) -> Option<SlopeFit> {
        self.table.fit_slope().ok()
    }
}

struct Cell {
    risk: f64,
    raw: f64,
    converged: bool,
    budget_active: bool,
}

pub fn regression_sweep(spec: &RegressionSpec) -> Result<RegressionReport> {
    if spec.trials == 0 || spec.n_list.is_empty() {
        return Err(Error::InvalidArgument("regression sweep needs trials >= 1 and a non-empty n list".into()));
    }
    if spec.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n list must be strictly increasing".into()));
    }
    let predicted_exponent = predict_rate(spec.family, spec.class, spec.d, spec.alpha)?;
    let schedules: Vec<Schedule> = spec
        .n_list
        .iter()
        .map(|&n| {
            let mut s = schedule_hyper(spec.family, spec.class, spec.d, spec.alpha, n)?;
            if let Some(m) = spec.budget {
                s.budget = m;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let target = catalog_target(spec.target_name(), spec.d, spec.alpha, 1, seeds::derive(spec.seed, &[0]))?;
    let model = RegressionModel::new(Truth::Target(target), spec.noise)?;
    let sup_h = crate::network::ball_grid(spec.d).iter().map(|x| model.h(x).abs()).fold(0.0, f64::max);

    let cells: Vec<(usize, usize)> =
        (0..spec.n_list.len()).flat_map(|i| (0..spec.trials).map(move |t| (i, t))).collect();
    let results: Vec<Cell> = cells
        .par_iter()
        .map(|&(i, t)| {
            let path = |tag: u64| seeds::derive(spec.seed, &[tag, i as u64, t as u64]);
            let s = &schedules[i];
            let data = generate_data(&model, spec.n_list[i], path(1))?;
            let cfg = ErmConfig { max_iter: spec.max_iter, ..ErmConfig::new(s.dictionary, s.budget, s.truncation, path(2)) };
            let fit = erm_fit(&data, &cfg)?;
            let risk = excess_risk(&fit.net, s.truncation, &model, spec.n_mc, path(3))?;
            let raw = excess_risk(&fit.net, f64::INFINITY, &model, spec.n_mc, path(3))?;
            Ok(Cell {
                risk: risk.estimate,
                raw: raw.estimate,
                converged: fit.converged,
                budget_active: fit.net.variation() >= s.budget * (1.0 - 1e-6),
            })
        })
        .collect::<Result<_>>()?;

    let mut table = RateTable::new(Some(-predicted_exponent));
    let mut rows = Vec::with_capacity(spec.n_list.len());
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (i, &n) in spec.n_list.iter().enumerate() {
        let cs = &results[i * spec.trials..(i + 1) * spec.trials];
        let tf = spec.trials as f64;
        let mean = cs.iter().map(|c| c.risk).sum::<f64>() / tf;
        let std = if spec.trials > 1 {
            (cs.iter().map(|c| (c.risk - mean).powi(2)).sum::<f64>() / (tf - 1.0)).sqrt()
        } else {
            0.0
        };
        table.push(RateRecord { scale: n as f64, error_mean: mean, error_std: std, trials: spec.trials })?;
        lx.push((n as f64).ln());
        ly.push(mean.ln());
        rows.push(RegressionRow {
            n,
            schedule: schedules[i],
            risk_mean: mean,
            risk_std: std,
            raw_risk_mean: cs.iter().map(|c| c.raw).sum::<f64>() / tf,
            truncation_violations: cs.iter().filter(|c| c.risk > c.raw).count(),
            converged: cs.iter().filter(|c| c.converged).count(),
            budget_active: cs.iter().filter(|c| c.budget_active).count(),
            slope_so_far: (lx.len() >= 3 && ly.iter().all(|v| v.is_finite())).then(|| ols(&lx, &ly)),
        });
    }
    let truncation_covers_truth = schedules.iter().all(|s| s.truncation >= sup_h);
    Ok(RegressionReport { spec: spec.clone(), predicted_exponent, truncation_covers_truth, rows, table })
}
