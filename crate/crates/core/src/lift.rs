//! Transfer between functions on the ball `B^d` and the sphere `S^d`.
//!
//! A target `h` on `B^d` is lifted to `h̃(u) = χ(u_{d+1}) u_{d+1}^k h(u'/u_{d+1})`
//! on the upper hemisphere and extended to the lower one by parity. The
//! lowering `S_k g(x) = (‖x‖² + 1)^{k/2} g((x, 1)/√(‖x‖² + 1))` undoes the lift
//! on `B^d`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::{norm, uniform_ball, uniform_sphere};
use crate::seeds;

/// Radius of the ball a target must be defined on.
pub const TARGET_RADIUS: f64 = 2.645_751_311_064_590_7; // √7

fn psi(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// `C^∞` step rising from 0 at `t ≤ a` to 1 at `t ≥ b`.
pub fn smooth_step(t: f64, a: f64, b: f64) -> f64 {
    let up = psi(t - a);
    let down = psi(b - t);
    if up == 0.0 {
        0.0
    } else {
        up / (up + down)
    }
}

/// Cutoff `χ`, 0 below `1/(2√2)` and 1 above `1/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub lower: f64,
    pub upper: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self { lower: 0.5 * std::f64::consts::FRAC_1_SQRT_2, upper: std::f64::consts::FRAC_1_SQRT_2 }
    }
}

impl BumpProfile {
    pub fn eval(&self, t: f64) -> f64 {
        smooth_step(t, self.lower, self.upper)
    }
}

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function on the radius-√7 ball with its nominal smoothness.
#[derive(Clone)]
pub struct TargetFunction {
    name: String,
    d: usize,
    alpha: f64,
    norm_scale: f64,
    f: Eval,
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetFunction")
            .field("name", &self.name)
            .field("d", &self.d)
            .field("alpha", &self.alpha)
            .field("norm_scale", &self.norm_scale)
            .finish()
    }
}

impl TargetFunction {
    /// Wraps `f` as a target with `norm_scale = 1`.
    pub fn new(
        name: impl Into<String>,
        d: usize,
        alpha: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("target dimension must be >= 1".into()));
        }
        Ok(Self { name: name.into(), d, alpha, norm_scale: 1.0, f: Arc::new(f) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Factor the raw catalog profile was divided by.
    pub fn norm_scale(&self) -> f64 {
        self.norm_scale
    }

    /// `h(x)`, rejecting points outside the radius-√7 ball or non-finite values.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, target expects {}",
                x.len(),
                self.d
            )));
        }
        let r = norm(x);
        if r > TARGET_RADIUS * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("target evaluated at radius {r} > sqrt(7)")));
        }
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::Domain(format!("target is not finite at {x:?}")));
        }
        Ok(v)
    }

    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn rescaled(mut self, scale: f64) -> Self {
        let f = self.f.clone();
        self.norm_scale = scale;
        self.f = Arc::new(move |x| f(x) / scale);
        self
    }
}

/// Names accepted by [`catalog_target`].
pub const CATALOG: [&str; 4] = ["holder_profile", "abs", "gauss_bump", "random_shallow"];

fn grid_points(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => (0..=200).map(|i| vec![-1.0 + i as f64 / 100.0]).collect(),
        _ => {
            let mut rng = seeds::rng(0x5eed);
            (0..400).map(|_| uniform_ball(&mut rng, d)).collect()
        }
    }
}

/// Grid proxy for the `H^α` norm: `max(sup|f|, sup |f(x) − f(y)|/|x − y|^β)`
/// with `β = min(α, 1)`.
pub fn estimate_norm_scale(d: usize, alpha: f64, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let pts = grid_points(d);
    let vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let beta = alpha.clamp(1e-3, 1.0);
    let mut best = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..pts.len() {
        for j in 0..i {
            let dist = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist > 1e-12 {
                best = best.max((vals[i] - vals[j]).abs() / dist.powf(beta));
            }
        }
    }
    best.max(f64::MIN_POSITIVE)
}

/// Builds a catalog target.
///
/// * `holder_profile`: `x ↦ max(0, w·x)^α` with `w = (1, …, 1)/√d`.
/// * `abs`: `x ↦ ‖x‖` (α = 1).
/// * `gauss_bump`: `x ↦ exp(−‖x‖²)` (α = ∞).
/// * `random_shallow`: four seeded ReLU^k ridge units with `Σ|a_i| = 1`,
///   an element of the unit variation ball. Not rescaled.
///
/// The first three are divided by [`estimate_norm_scale`].
pub fn catalog_target(name: &str, d: usize, alpha: f64, k: u32, seed: u64) -> Result<TargetFunction> {
    if d == 0 {
        return Err(Error::InvalidArgument("target dimension must be >= 1".into()));
    }
    let raw = match name {
        "holder_profile" => {
            if !(alpha > 0.0) {
                return Err(Error::InvalidArgument(format!("holder_profile needs alpha > 0, got {alpha}")));
            }
            let w = 1.0 / (d as f64).sqrt();
            TargetFunction::new(name, d, alpha, move |x| {
                let t = w * x.iter().sum::<f64>();
                if t > 0.0 {
                    t.powf(alpha)
                } else {
                    0.0
                }
            })?
        }
        "abs" => TargetFunction::new(name, d, 1.0, norm)?,
        "gauss_bump" => TargetFunction::new(name, d, f64::INFINITY, |x| {
            (-x.iter().map(|v| v * v).sum::<f64>()).exp()
        })?,
        "random_shallow" => return Ok(random_shallow(d, k, 4, seed)),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown target '{other}', expected one of {CATALOG:?}"
            )))
        }
    };
    let f = raw.f.clone();
    let scale = estimate_norm_scale(d, raw.alpha, &*f);
    Ok(raw.rescaled(scale))
}

fn random_shallow(d: usize, k: u32, units: usize, seed: u64) -> TargetFunction {
    let mut rng = seeds::rng(seed);
    let dirs: Vec<Vec<f64>> = (0..units).map(|_| uniform_sphere(&mut rng, d + 1)).collect();
    let raw: Vec<f64> = (0..units).map(|_| rng.random_range(-1.0..1.0)).collect();
    let total: f64 = raw.iter().map(|a| a.abs()).sum();
    let weights: Vec<f64> = raw.iter().map(|a| a / total).collect();
    let f = move |x: &[f64]| {
        dirs.iter()
            .zip(&weights)
            .map(|(v, a)| {
                let t = x.iter().zip(v).map(|(p, q)| p * q).sum::<f64>() + v[d];
                if t > 0.0 {
                    a * t.powi(k as i32)
                } else {
                    0.0
                }
            })
            .sum()
    };
    TargetFunction { name: "random_shallow".into(), d, alpha: 1.0, norm_scale: 1.0, f: Arc::new(f) }
}

/// Symmetry of a sphere function under `u ↦ −u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
    None,
}

impl Parity {
    /// Odd lift for even `k`, even lift for odd `k`.
    pub fn for_activation(k: u32) -> Self {
        if k % 2 == 0 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            _ => 1.0,
        }
    }
}

/// A function on `S^d ⊂ R^{d+1}` with a declared parity.
#[derive(Clone)]
pub struct SphereFunction {
    d: usize,
    parity: Parity,
    f: Eval,
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereFunction").field("d", &self.d).field("parity", &self.parity).finish()
    }
}

impl SphereFunction {
    pub fn new(d: usize, parity: Parity, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { d, parity, f: Arc::new(f) }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Value at a point `u` with `d + 1` coordinates on the sphere.
    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.f)(u)
    }

    /// Checks the declared parity at `samples` random points.
    pub fn check_parity(&self, samples: usize, seed: u64, tol: f64) -> Result<()> {
        if self.parity == Parity::None {
            return Ok(());
        }
        let s = self.parity.sign();
        let mut rng = seeds::rng(seed);
        for _ in 0..samples {
            let u = uniform_sphere(&mut rng, self.d + 1);
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let (a, b) = (self.eval(&u), self.eval(&neg));
            if (b - s * a).abs() > tol * (1.0 + a.abs()) {
                return Err(Error::Contract(format!(
                    "declared {:?} parity fails at {u:?}: f(u) = {a}, f(-u) = {b}",
                    self.parity
                )));
            }
        }
        Ok(())
    }
}

/// Lifts `h` to the parity-extended sphere function `h̃` for `σ_k`.
pub fn lift_to_sphere(h: &TargetFunction, k: u32, parity: Parity) -> Result<SphereFunction> {
    if parity != Parity::for_activation(k) {
        return Err(Error::Contract(format!(
            "k = {k} requires a {:?} lift, got {parity:?}",
            Parity::for_activation(k)
        )));
    }
    // Probe the region the transition band reaches so domain problems
    // surface here rather than as NaNs downstream.
    let d = h.d();
    let mut rng = seeds::rng(0x11f7);
    for i in 0..64 {
        let dir = uniform_sphere(&mut rng, d);
        let r = TARGET_RADIUS * i as f64 / 63.0;
        let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
        h.eval(&x)?;
    }
    let chi = BumpProfile::default();
    let sign = parity.sign();
    let hf = h.f.clone();
    let f = move |u: &[f64]| {
        let last = u[d];
        if last == 0.0 {
            return 0.0;
        }
        let (t, s) = if last > 0.0 { (last, 1.0) } else { (-last, sign) };
        let c = chi.eval(t);
        if c == 0.0 {
            return 0.0;
        }
        // For u_{d+1} < 0 the value is ±h̃(−u), whose ball point is −u'/|u_{d+1}|.
        let dir = last.signum();
        let x: Vec<f64> = u[..d].iter().map(|v| dir * v / t).collect();
        s * c * t.powi(k as i32) * hf(&x)
    };
    Ok(SphereFunction::new(d, parity, f))
}

/// The point `(x, 1)/√(‖x‖² + 1)` on the upper cap and the factor `(‖x‖² + 1)^{k/2}`.
pub fn lowering_point(x: &[f64], k: u32) -> (Vec<f64>, f64) {
    let r2 = x.iter().map(|v| v * v).sum::<f64>() + 1.0;
    let inv = 1.0 / r2.sqrt();
    let mut u: Vec<f64> = x.iter().map(|v| v * inv).collect();
    u.push(inv);
    (u, r2.powf(k as f64 / 2.0))
}

/// `S_k g(x)` for `‖x‖ ≤ 1`.
pub fn apply_lowering(g: &SphereFunction, k: u32, x: &[f64]) -> Result<f64> {
    if x.len() != g.d() {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, sphere function expects {}",
            x.len(),
            g.d()
        )));
    }
    if norm(x) > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("lowering needs ||x|| <= 1, got {}", norm(x))));
    }
    let (u, scale) = lowering_point(x, k);
    Ok(scale * g.eval(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bump_plateaus() {
        let chi = BumpProfile::default();
        assert_eq!(chi.eval(0.0), 0.0);
        assert_eq!(chi.eval(chi.lower), 0.0);
        assert_eq!(chi.eval(chi.upper), 1.0);
        assert_eq!(chi.eval(0.9), 1.0);
        let mid = 0.5 * (chi.lower + chi.upper);
        assert!((chi.eval(mid) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = chi.eval(i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v) && v >= prev);
            prev = v;
        }
    }

    #[test]
    fn lift_examples() {
        let zero = TargetFunction::new("zero", 2, 1.0, |_| 0.0).unwrap();
        let lz = lift_to_sphere(&zero, 1, Parity::Even).unwrap();
        assert_eq!(lz.eval(&[0.3, 0.4, (1.0f64 - 0.25).sqrt()]), 0.0);

        let one = TargetFunction::new("one", 3, 1.0, |_| 1.0).unwrap();
        let l1 = lift_to_sphere(&one, 1, Parity::Even).unwrap();
        assert_eq!(l1.eval(&[0.0, 0.0, 0.0, 1.0]), 1.0);

        let x1 = TargetFunction::new("x1", 1, 1.0, |x| x[0]).unwrap();
        let lx = lift_to_sphere(&x1, 1, Parity::Even).unwrap();
        for th in [-0.7f64, -0.2, 0.0, 0.5, 0.78] {
            let got = lx.eval(&[th.sin(), th.cos()]);
            assert!((got - th.sin()).abs() < 1e-15, "theta={th}");
        }
    }

    #[test]
    fn wrong_parity_is_rejected() {
        let h = TargetFunction::new("x1", 1, 1.0, |x| x[0]).unwrap();
        assert!(matches!(lift_to_sphere(&h, 1, Parity::Odd), Err(Error::Contract(_))));
        assert!(matches!(lift_to_sphere(&h, 2, Parity::None), Err(Error::Contract(_))));
    }

    #[test]
    fn undefined_target_is_a_domain_error() {
        let h = TargetFunction::new("log", 1, 1.0, |x| (2.0 - x[0].abs()).ln()).unwrap();
        assert!(matches!(lift_to_sphere(&h, 1, Parity::Even), Err(Error::Domain(_))));
    }

    #[test]
    fn lift_vanishes_near_equator_and_has_parity() {
        for k in 0..3 {
            for d in 1..=2 {
                let h = catalog_target("gauss_bump", d, 2.0, k, 0).unwrap();
                let lifted = lift_to_sphere(&h, k, Parity::for_activation(k)).unwrap();
                lifted.check_parity(1000, 17, 1e-12).unwrap();
                let mut rng = seeds::rng(9);
                for _ in 0..500 {
                    let mut u = uniform_sphere(&mut rng, d + 1);
                    let t = rng.random_range(-1.0..1.0) * BumpProfile::default().lower;
                    let scale = ((1.0 - t * t) / u[..d].iter().map(|v| v * v).sum::<f64>()).sqrt();
                    for v in u[..d].iter_mut() {
                        *v *= scale;
                    }
                    u[d] = t;
                    assert_eq!(lifted.eval(&u), 0.0);
                }
            }
        }
    }

    #[test]
    fn lowering_examples() {
        let c = SphereFunction::new(2, Parity::None, |_| 2.5);
        assert_eq!(apply_lowering(&c, 0, &[0.3, -0.2]).unwrap(), 2.5);
        let last = SphereFunction::new(2, Parity::None, |u| u[2]);
        assert!((apply_lowering(&last, 1, &[0.6, -0.7]).unwrap() - 1.0).abs() < 1e-15);
        assert!(apply_lowering(&last, 1, &[0.9, 0.9]).is_err());
    }

    #[test]
    fn catalog_scales() {
        let a = catalog_target("abs", 1, 1.0, 1, 0).unwrap();
        assert!((a.norm_scale() - 1.0).abs() < 1e-12);
        assert!((a.eval(&[-0.3]).unwrap() - 0.3).abs() < 1e-15);
        assert!(a.eval(&[3.0]).is_err());
        let hp = catalog_target("holder_profile", 2, 0.5, 1, 0).unwrap();
        assert!(hp.norm_scale() > 0.9 && hp.norm_scale() <= 1.0 + 1e-12);
        assert!(catalog_target("nope", 1, 1.0, 1, 0).is_err());
        let r1 = catalog_target("random_shallow", 2, 1.0, 1, 4).unwrap();
        let r2 = catalog_target("random_shallow", 2, 1.0, 1, 4).unwrap();
        assert_eq!(r1.eval(&[0.1, 0.2]).unwrap(), r2.eval(&[0.1, 0.2]).unwrap());
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(k in 0u32..3, seed in 0u64..1000, which in 0usize..3) {
            for d in 1..=2 {
                let name = ["holder_profile", "abs", "gauss_bump"][which];
                let h = catalog_target(name, d, 1.5, k, 0).unwrap();
                let lifted = lift_to_sphere(&h, k, Parity::for_activation(k)).unwrap();
                let mut rng = seeds::rng(seed);
                let x = uniform_ball(&mut rng, d);
                let back = apply_lowering(&lifted, k, &x).unwrap();
                prop_assert!((back - h.eval(&x).unwrap()).abs() <= 1e-12);
            }
        }
    }
}
