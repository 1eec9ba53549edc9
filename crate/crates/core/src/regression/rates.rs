use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRecord {
    pub scale: f64,
    pub error_mean: f64,
    pub error_std: f64,
    pub trials: usize,
}

/// `(scale, error)` records with a predicted log-log exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    records: Vec<RateRecord>,
    predicted: Option<f64>,
}

/// Fitted log-log slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

impl RateTable {
    pub fn new(predicted: Option<f64>) -> Self {
        Self { records: Vec::new(), predicted }
    }

    /// Appends a record; scales must strictly increase and `trials ≥ 1`.
    pub fn push(&mut self, record: RateRecord) -> Result<()> {
        if record.trials == 0 {
            return Err(Error::InvalidArgument("rate record needs trials >= 1".into()));
        }
        if let Some(last) = self.records.last() {
            if !(record.scale > last.scale) {
                return Err(Error::InvalidArgument(format!(
                    "rate table scales must strictly increase: {} after {}",
                    record.scale, last.scale
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[RateRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn predicted(&self) -> Option<f64> {
        self.predicted
    }

    pub fn fit_slope(&self) -> Result<SlopeFit> {
        let xs: Vec<f64> = self.records.iter().map(|r| r.scale).collect();
        let ys: Vec<f64> = self.records.iter().map(|r| r.error_mean).collect();
        fit_slope(&xs, &ys)
    }
}

/// Least-squares slope of `log y` against `log x`, needing at least 3
/// points with positive values.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("slope fit needs equal-length columns".into()));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("slope fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    Ok(ols(&lx, &ly))
}

/// Ordinary least squares `y ≈ intercept + slope · x` (at least 2 points).
pub fn ols(x: &[f64], y: &[f64]) -> SlopeFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    SlopeFit { slope, stderr, intercept }
}
