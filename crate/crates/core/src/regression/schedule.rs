//! Hyperparameter schedules and predicted exponents for the three model families.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `F_σ(N, M)`: width-`N` shallow nets with variation budget `M`.
    Shallow,
    /// `NN(W, L, M)`: norm-constrained nets wider than the sample size.
    Overparam,
    /// `CNN(s, L)`.
    Cnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetClass {
    /// Hölder ball `H^α`.
    Holder,
    /// Unit variation ball `F_σ(1)`.
    Variation,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Shallow, Family::Overparam, Family::Cnn];
}

impl TargetClass {
    pub const ALL: [TargetClass; 2] = [TargetClass::Holder, TargetClass::Variation];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Shallow => "shallow",
            Family::Overparam => "overparam",
            Family::Cnn => "cnn",
        })
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetClass::Holder => "holder",
            TargetClass::Variation => "variation",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shallow" => Ok(Family::Shallow),
            "overparam" => Ok(Family::Overparam),
            "cnn" => Ok(Family::Cnn),
            _ => Err(Error::InvalidArgument(format!("unknown family '{s}', expected shallow|overparam|cnn"))),
        }
    }
}

impl FromStr for TargetClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "holder" => Ok(TargetClass::Holder),
            "variation" => Ok(TargetClass::Variation),
            _ => Err(Error::InvalidArgument(format!("unknown class '{s}', expected holder|variation"))),
        }
    }
}

/// CNN filter parameter used by the shallow surrogate.
pub const CNN_FILTER_S: usize = 2;

fn check(class: TargetClass, d: usize, alpha: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if class == TargetClass::Holder {
        let cap = (d as f64 + 3.0) / 2.0;
        if !(alpha > 0.0 && alpha < cap) {
            return Err(Error::InvalidArgument(format!("holder smoothness must lie in (0, {cap}), got {alpha}")));
        }
    }
    Ok(())
}

/// `ceil` that ignores round-off just above an integer.
fn ceil_guarded(x: f64) -> usize {
    ((x - 1e-9).ceil().max(1.0)) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    /// `N_n`, `W_n` or `L_n` depending on the family.
    pub size: usize,
    /// Number of random directions the ERM searches over.
    pub dictionary: usize,
    pub budget: f64,
    pub truncation: f64,
}

/// Default constant budget for the over-parameterized variation case.
pub fn overparam_variation_budget(d: usize) -> f64 {
    2.0 * ((d + 1) as f64).sqrt()
}

pub fn schedule_hyper(family: Family, class: TargetClass, d: usize, alpha: f64, n: usize) -> Result<Schedule> {
    check(class, d, alpha)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let df = d as f64;
    let truncation = match class {
        TargetClass::Holder => nf.ln().max(1.0),
        TargetClass::Variation => nf.ln().max(std::f64::consts::SQRT_2),
    };
    let (size, dictionary, budget) = match (family, class) {
        (Family::Shallow, TargetClass::Holder) => {
            let size = ceil_guarded(nf.powf(df / (df + 2.0 * alpha)));
            (size, size, nf.powf((df + 3.0 - 2.0 * alpha) / (2.0 * df + 4.0 * alpha)))
        }
        (Family::Shallow, TargetClass::Variation) => {
            let size = ceil_guarded(nf.powf(df / (2.0 * df + 3.0)));
            (size, size, 1.0)
        }
        (Family::Overparam, TargetClass::Holder) => {
            let size = ceil_guarded(nf.powf(df / (df + 3.0 + 2.0 * alpha)));
            (size, size.max(4 * n), nf.powf(0.5 - 2.0 * alpha / (df + 3.0 + 2.0 * alpha)))
        }
        (Family::Overparam, TargetClass::Variation) => {
            let size = ceil_guarded(nf.powf(df / (2.0 * df + 6.0)));
            (size, size.max(4 * n), overparam_variation_budget(d))
        }
        (Family::Cnn, _) => {
            let e = match class {
                TargetClass::Holder => df / (2.0 * df + 2.0 * alpha),
                TargetClass::Variation => df / (3.0 * df + 3.0),
            };
            let depth = ceil_guarded(nf.powf(e));
            (depth, cnn_surrogate_width(depth, CNN_FILTER_S, d), nf.sqrt())
        }
    };
    Ok(Schedule { size, dictionary, budget, truncation })
}

/// Width of the shallow subclass a depth-`L` CNN contains.
pub fn cnn_surrogate_width(depth: usize, s: usize, d: usize) -> usize {
    ceil_guarded((depth * (s - 1)) as f64 / d as f64)
}

/// Exponent `p` in the risk rate `n^{−p}`.
pub fn predict_rate(family: Family, class: TargetClass, d: usize, alpha: f64) -> Result<f64> {
    check(class, d, alpha)?;
    let d = d as f64;
    Ok(match (family, class) {
        (Family::Shallow, TargetClass::Holder) => 2.0 * alpha / (d + 2.0 * alpha),
        (Family::Shallow, TargetClass::Variation) => (d + 3.0) / (2.0 * d + 3.0),
        (Family::Overparam, TargetClass::Holder) => 2.0 * alpha / (d + 3.0 + 2.0 * alpha),
        (Family::Overparam, TargetClass::Variation) => 0.5,
        (Family::Cnn, TargetClass::Holder) => alpha / (d + alpha),
        (Family::Cnn, TargetClass::Variation) => (d + 3.0) / (3.0 * d + 3.0),
    })
}

/// Approximation error `size^{−a} ∨ M^{−b}`; `budget` is `None` when the
/// bound does not depend on `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRate {
    pub size: f64,
    pub budget: Option<f64>,
}

impl ApproxRate {
    pub fn bound(&self, size: f64, budget: f64) -> f64 {
        let a = size.powf(-self.size);
        match self.budget {
            Some(b) => a.max(budget.powf(-b)),
            None => a,
        }
    }
}

pub fn approx_rate(family: Family, class: TargetClass, d: usize, alpha: f64) -> Result<ApproxRate> {
    check(class, d, alpha)?;
    let d = d as f64;
    Ok(match (family, class) {
        (Family::Shallow | Family::Overparam, TargetClass::Holder) => {
            ApproxRate { size: alpha / d, budget: Some(2.0 * alpha / (d + 3.0 - 2.0 * alpha)) }
        }
        (Family::Cnn, TargetClass::Holder) => ApproxRate { size: alpha / d, budget: None },
        (_, TargetClass::Variation) => ApproxRate { size: 0.5 + 1.5 / d, budget: None },
    })
}

/// `M √(2(L + 2 + ln(d + 1))) / √n`.
pub fn rademacher_bound(budget: f64, depth: usize, d: usize, n: usize) -> f64 {
    budget * (2.0 * (depth as f64 + 2.0 + ((d + 1) as f64).ln())).sqrt() / (n as f64).sqrt()
}
