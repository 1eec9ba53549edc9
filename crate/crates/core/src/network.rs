//! Finite shallow ReLU^k networks `f(x) = Σ a_i σ_k((xᵀ, 1) v_i)`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernelize::{build_density, GridSpec, RidgeDensity};
use crate::lift::{lift_to_sphere, Parity, TargetFunction};
use crate::regression::rates::{ols, RateRecord, RateTable, SlopeFit};
use crate::sampling::{halton_disk, norm, uniform_ball, uniform_sphere};
use crate::seeds;

/// `σ_k(t) = max(0, t)^k`, with the Heaviside value 0 at `t = 0` for `k = 0`.
#[inline]
pub fn relu_pow(k: u32, t: f64) -> f64 {
    if t > 0.0 {
        match k {
            0 => 1.0,
            1 => t,
            2 => t * t,
            _ => t.powi(k as i32),
        }
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unit {
    pub a: f64,
    /// Direction on `S^d`, `d + 1` coordinates.
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShallowNet {
    k: u32,
    d: usize,
    units: Vec<Unit>,
    seed: Option<u64>,
}

impl ShallowNet {
    pub fn new(k: u32, d: usize, units: Vec<Unit>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("network input dimension must be >= 1".into()));
        }
        for (i, u) in units.iter().enumerate() {
            if u.v.len() != d + 1 {
                return Err(Error::InvalidArgument(format!(
                    "unit {i} has {} inner weights, expected {}",
                    u.v.len(),
                    d + 1
                )));
            }
            if (norm(&u.v) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "unit {i} direction has norm {}, expected 1",
                    norm(&u.v)
                )));
            }
            if !u.a.is_finite() {
                return Err(Error::InvalidArgument(format!("unit {i} has a non-finite outer weight")));
            }
        }
        Ok(Self { k, d, units, seed: None })
    }

    pub fn empty(k: u32, d: usize) -> Self {
        Self { k, d, units: Vec::new(), seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Variation proxy `Σ|a_i|`.
    pub fn variation(&self) -> f64 {
        self.units.iter().map(|u| u.a.abs()).sum()
    }

    /// `f(x)` without a domain check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = self.d;
        self.units
            .iter()
            .map(|u| {
                let t = x.iter().zip(&u.v[..d]).map(|(p, q)| p * q).sum::<f64>() + u.v[d];
                u.a * relu_pow(self.k, t)
            })
            .sum()
    }
}

/// `f(x)` for `‖x‖ ≤ 1`.
pub fn eval_shallow(net: &ShallowNet, x: &[f64]) -> Result<f64> {
    if x.len() != net.d() {
        return Err(Error::InvalidArgument(format!("point has {} coordinates, net expects {}", x.len(), net.d())));
    }
    if norm(x) > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("network input must satisfy ||x|| <= 1, got {}", norm(x))));
    }
    Ok(net.eval(x))
}

/// Maximum number of envelope inflations in [`discretize_mc`].
pub const MAX_INFLATIONS: u32 = 6;

/// Samples `N` directions i.i.d. from `|φ|/‖φ‖_{L¹}` by rejection against the
/// uniform sphere and sets `a_i = sign φ(v_i) · ‖φ‖_{L¹}/N`.
///
/// The envelope starts at 1.2 times the grid maximum of `|φ|`. A proposal
/// above it doubles the envelope and restarts sampling.
pub fn discretize_mc(density: &RidgeDensity, n_units: usize, seed: u64) -> Result<ShallowNet> {
    let l1 = density.density_l1();
    if !(l1 > 0.0) {
        return Err(Error::InvalidArgument("cannot discretize a zero density".into()));
    }
    if n_units == 0 {
        return Err(Error::InvalidArgument("discretization needs N >= 1".into()));
    }
    let d = density.d();
    let mut envelope = 1.2 * density.density_sup();
    let mut rng = seeds::rng(seed);
    let mut inflations = 0;
    'restart: loop {
        let mut units = Vec::with_capacity(n_units);
        while units.len() < n_units {
            let v = uniform_sphere(&mut rng, d + 1);
            let p = density.eval_density(&v);
            if p.abs() > envelope {
                inflations += 1;
                if inflations > MAX_INFLATIONS {
                    return Err(Error::EnvelopeExhausted(MAX_INFLATIONS));
                }
                log::warn!("rejection envelope {envelope:e} violated by {:e}; doubling", p.abs());
                envelope *= 2.0;
                continue 'restart;
            }
            if rng.random::<f64>() * envelope < p.abs() {
                units.push(Unit { a: p.signum() * l1 / n_units as f64, v });
            }
        }
        return Ok(ShallowNet { k: density.k(), d, units, seed: Some(seed) });
    }
}

/// Evaluation grid on `B^d`: 2001 uniform points for `d = 1`, 4096 Halton
/// points for `d = 2`, 4096 seeded uniform points otherwise.
pub fn ball_grid(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => (0..2001).map(|i| vec![-1.0 + i as f64 / 1000.0]).collect(),
        2 => halton_disk(4096).into_iter().map(|p| p.to_vec()).collect(),
        _ => {
            let mut rng = seeds::rng(0xba11);
            (0..4096).map(|_| uniform_ball(&mut rng, d)).collect()
        }
    }
}

/// `max |f − g|` over [`ball_grid`].
pub fn sup_error<F, G>(f: F, g: G, d: usize) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    sup_error_on(&ball_grid(d), f, g)
}

pub fn sup_error_on<F, G>(grid: &[Vec<f64>], f: F, g: G) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    grid.par_iter().map(|x| (f(x) - g(x)).abs()).reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub sup_error: f64,
    pub l2_error: f64,
    pub l2_stderr: f64,
    pub grid: String,
    pub samples: usize,
    pub seed: u64,
}

/// Sup error on [`ball_grid`] and a Monte-Carlo `L²(B^d)` error with its
/// delta-method standard error.
pub fn error_report<F, G>(f: F, g: G, d: usize, samples: usize, seed: u64) -> ErrorReport
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    let grid = ball_grid(d);
    let sup = sup_error_on(&grid, &f, &g);
    let mut rng = seeds::rng(seed);
    let sq: Vec<f64> = (0..samples)
        .map(|_| {
            let x = uniform_ball(&mut rng, d);
            (f(&x) - g(&x)).powi(2)
        })
        .collect();
    let n = samples.max(1) as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let l2 = mean.sqrt();
    let se = if l2 > 0.0 { (var / n).sqrt() / (2.0 * l2) } else { 0.0 };
    let desc = match d {
        1 => "uniform-2001".to_string(),
        2 => "halton-4096".to_string(),
        _ => "uniform-ball-4096".to_string(),
    };
    ErrorReport { sup_error: sup, l2_error: l2, l2_stderr: se, grid: desc, samples, seed }
}

/// One scale of an approximation sweep: cutoff `m` and an explicit network
/// size, or `None` for the balancing rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub m: usize,
    pub n_units: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub n_units: usize,
    /// `‖φ‖_{L¹}`, the variation of every sampled network.
    pub variation: f64,
    pub gamma_l2: f64,
    pub sup_err_mean: f64,
    pub sup_err_std: f64,
    /// Slope of `log sup_err_mean` against `log N` over the rows so far.
    pub slope_so_far: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Error against `N`, predicted exponent `−α/d`.
    pub by_units: RateTable,
    /// Error against `‖φ‖_{L¹}`, predicted exponent `−2α/(d + 2k + 1 − 2α)`.
    pub by_variation: RateTable,
}

impl SweepResult {
    /// Slope of error against `N`; `None` with fewer than 3 distinct scales.
    pub fn slope_vs_units(&self) -> Option<SlopeFit> {
        self.by_units.fit_slope().ok()
    }

    pub fn slope_vs_variation(&self) -> Option<SlopeFit> {
        self.by_variation.fit_slope().ok()
    }
}

/// Network size from the balancing rule `N = ⌈γ^{2d/(d + 2k + 1 − 2α)}⌉`.
pub fn balanced_units(gamma_l2: f64, d: usize, k: u32, alpha: f64) -> usize {
    let expo = 2.0 * d as f64 / (d as f64 + 2.0 * k as f64 + 1.0 - 2.0 * alpha);
    (gamma_l2.powf(expo) - 1e-9).ceil().max(1.0) as usize
}

/// Builds densities for each `m`, samples `trials` networks per point and
/// records the sup error against the target on [`ball_grid`].
pub fn sweep_approx(
    target: &TargetFunction,
    k: u32,
    schedule: &[SweepPoint],
    trials: usize,
    seed: u64,
) -> Result<SweepResult> {
    let d = target.d();
    let alpha = target.alpha();
    let crit = (d as f64 + 2.0 * k as f64 + 1.0) / 2.0;
    if !(alpha < crit) {
        return Err(Error::InvalidArgument(format!(
            "approximation sweep needs alpha < (d + 2k + 1)/2 = {crit}, got {alpha}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("sweep needs trials >= 1".into()));
    }
    let lifted = lift_to_sphere(target, k, Parity::for_activation(k))?;
    let grid = ball_grid(d);
    let truth: Vec<f64> = grid.iter().map(|x| target.eval_unchecked(x)).collect();

    let densities: Vec<(RidgeDensity, f64)> = schedule
        .par_iter()
        .map(|p| {
            let dens = build_density(&lifted, k, p.m, GridSpec::Auto)?;
            let gamma = dens.variation_estimate()?.gamma_l2;
            Ok((dens, gamma))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> =
        (0..schedule.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let errors: Vec<f64> = cells
        .par_iter()
        .map(|&(i, t)| {
            let (dens, gamma) = &densities[i];
            let n = schedule[i].n_units.unwrap_or_else(|| balanced_units(*gamma, d, k, alpha));
            let net = discretize_mc(dens, n, seeds::derive(seed, &[i as u64, t as u64]))?;
            Ok(grid.iter().zip(&truth).map(|(x, y)| (net.eval(x) - y).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;

    let predicted_n = -alpha / d as f64;
    let predicted_m = -2.0 * alpha / (d as f64 + 2.0 * k as f64 + 1.0 - 2.0 * alpha);
    let mut by_units = RateTable::new(Some(predicted_n));
    let mut by_variation = RateTable::new(Some(predicted_m));
    let mut rows = Vec::with_capacity(schedule.len());
    let (mut log_n, mut log_e) = (Vec::new(), Vec::new());
    for (i, p) in schedule.iter().enumerate() {
        let (dens, gamma) = &densities[i];
        let n = p.n_units.unwrap_or_else(|| balanced_units(*gamma, d, k, alpha));
        let errs = &errors[i * trials..(i + 1) * trials];
        let mean = errs.iter().sum::<f64>() / trials as f64;
        let std = if trials > 1 {
            (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        let variation = dens.density_l1();
        log_n.push((n as f64).ln());
        log_e.push(mean.ln());
        let slope_so_far = if log_n.len() >= 2 && log_n.iter().any(|v| *v != log_n[0]) {
            Some(ols(&log_n, &log_e).slope)
        } else {
            None
        };
        let record = RateRecord { scale: n as f64, error_mean: mean, error_std: std, trials };
        // Repeated network sizes keep only the first record in the N table.
        if by_units.records().last().is_none_or(|r| r.scale < n as f64) {
            by_units.push(record)?;
        }
        if by_variation.records().last().is_none_or(|r| r.scale < variation) {
            by_variation.push(RateRecord { scale: variation, ..record })?;
        }
        rows.push(SweepRow {
            m: p.m,
            n_units: n,
            variation,
            gamma_l2: *gamma,
            sup_err_mean: mean,
            sup_err_std: std,
            slope_so_far,
        });
    }
    Ok(SweepResult { rows, by_units, by_variation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::sigma_hat_closed;
    use crate::lift::SphereFunction;

    #[test]
    fn eval_examples() {
        let empty = ShallowNet::empty(1, 2);
        assert_eq!(eval_shallow(&empty, &[0.1, 0.2]).unwrap(), 0.0);
        let top = ShallowNet::new(1, 2, vec![Unit { a: 1.0, v: vec![0.0, 0.0, 1.0] }]).unwrap();
        assert_eq!(eval_shallow(&top, &[0.3, -0.9]).unwrap(), 1.0);
        let sq = ShallowNet::new(2, 2, vec![Unit { a: 1.0, v: vec![1.0, 0.0, 0.0] }]).unwrap();
        assert_eq!(eval_shallow(&sq, &[0.5, 0.0]).unwrap(), 0.25);
        let step = ShallowNet::new(0, 1, vec![Unit { a: 1.0, v: vec![1.0, 0.0] }]).unwrap();
        assert_eq!(step.eval(&[0.0]), 0.0);
        assert_eq!(step.eval(&[0.1]), 1.0);
        assert!(ShallowNet::new(1, 1, vec![Unit { a: 1.0, v: vec![1.0, 1.0] }]).is_err());
        assert!(eval_shallow(&top, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn constant_density_network() {
        let c = SphereFunction::new(1, Parity::Even, |_| 1.0);
        let dens = build_density(&c, 1, 2, GridSpec::Auto).unwrap();
        let s0 = sigma_hat_closed(1, 1, 0).unwrap().value();
        // φ ≡ 1/σ̂(0), so φ ∗ σ_1 ≡ 1.
        assert!((dens.density_l1() - 1.0 / s0).abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for n in [64, 4096] {
            let net = discretize_mc(&dens, n, 5).unwrap();
            assert!((net.variation() - dens.density_l1()).abs() < 1e-12 * dens.density_l1());
            let dev = sup_error(|x| net.eval(x), |x| dens.lowered_convolution(x), 1);
            assert!(dev < prev);
            prev = dev;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn zero_density_rejected() {
        let z = SphereFunction::new(1, Parity::Even, |_| 0.0);
        let dens = build_density(&z, 1, 2, GridSpec::Auto).unwrap();
        assert!(discretize_mc(&dens, 10, 0).is_err());
    }

    #[test]
    fn discretization_is_deterministic() {
        let h = crate::lift::catalog_target("abs", 1, 1.0, 1, 0).unwrap();
        let lifted = lift_to_sphere(&h, 1, Parity::Even).unwrap();
        let dens = build_density(&lifted, 1, 4, GridSpec::Auto).unwrap();
        assert_eq!(discretize_mc(&dens, 50, 9).unwrap(), discretize_mc(&dens, 50, 9).unwrap());
        assert_ne!(discretize_mc(&dens, 50, 9).unwrap(), discretize_mc(&dens, 50, 10).unwrap());
    }

    #[test]
    fn sup_error_examples() {
        assert_eq!(sup_error(|x| x[0], |x| x[0], 1), 0.0);
        assert!((sup_error(|x| x[0] + 0.25, |x| x[0], 2) - 0.25).abs() < 1e-15);
        assert_eq!(ball_grid(1).len(), 2001);
        assert_eq!(ball_grid(2).len(), 4096);
        let rep = error_report(|x| x[0], |_| 0.0, 1, 4000, 3);
        assert!(rep.l2_error <= rep.sup_error * (1.0 + 3.0 * rep.l2_stderr / rep.l2_error));
    }

    #[test]
    fn single_point_sweep() {
        let h = crate::lift::catalog_target("abs", 1, 1.0, 1, 0).unwrap();
        let res = sweep_approx(&h, 1, &[SweepPoint { m: 4, n_units: None }], 2, 0).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert!(res.slope_vs_units().is_none());
        assert!(res.rows[0].slope_so_far.is_none());
    }
}
