use super::{fill_gegenbauer, ln_gamma, JacobiQuadrature, SphereGeometry, DEFAULT_N_MAX};
use crate::error::{Error, Result};

/// A Gegenbauer coefficient of `σ_k`: structurally zero or a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralValue {
    Zero,
    Value(f64),
}

impl SpectralValue {
    pub fn value(self) -> f64 {
        match self {
            SpectralValue::Zero => 0.0,
            SpectralValue::Value(v) => v,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, SpectralValue::Zero)
    }
}

/// `σ̂_k(n) = 0` exactly when `n ≥ k + 1` and `n ≡ k (mod 2)`.
pub fn is_structural_zero(k: u32, n: usize) -> bool {
    let k = k as usize;
    n > k && (n - k) % 2 == 0
}

/// Closed-form coefficient `σ̂_k(n) = c_d ∫ σ_k(t) P_n(t) (1 − t²)^{(d−2)/2} dt`.
///
/// Defined for `n = 0` and for `n ≥ k + 1`; degrees `1 ≤ n ≤ k` have no
/// closed form and yield [`Error::NoClosedForm`].
pub fn sigma_hat_closed(k: u32, d: usize, n: usize) -> Result<SpectralValue> {
    let geo = SphereGeometry::new(d)?;
    let (kf, df, nf) = (k as f64, d as f64, n as f64);
    if n == 0 {
        let ln = ln_gamma(df / 2.0) + ln_gamma((kf + 1.0) / 2.0)
            - std::f64::consts::LN_2
            - ln_gamma((kf + df + 1.0) / 2.0);
        return Ok(SpectralValue::Value(geo.c_d() * ln.exp()));
    }
    if n <= k as usize {
        return Err(Error::NoClosedForm { k, n });
    }
    if is_structural_zero(k, n) {
        return Ok(SpectralValue::Zero);
    }
    let half = (n - k as usize - 1) / 2;
    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
    let ln = ln_gamma(kf + 1.0) - nf * std::f64::consts::LN_2 + ln_gamma(df / 2.0)
        + ln_gamma(nf - kf)
        - ln_gamma((nf - kf + 1.0) / 2.0)
        - ln_gamma((nf + df + kf + 1.0) / 2.0);
    Ok(SpectralValue::Value(sign * geo.c_d() * ln.exp()))
}

fn sigma_k(k: u32, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t.powi(k as i32)
    }
}

fn check_quad(k: u32, d: usize, n_top: usize, quad: &JacobiQuadrature) -> Result<()> {
    if quad.d() != d {
        return Err(Error::InvalidArgument(format!(
            "quadrature built for d={} but d={d} requested",
            quad.d()
        )));
    }
    let need = n_top + k as usize + 8;
    if quad.count() < need {
        return Err(Error::InsufficientNodes { have: quad.count(), need });
    }
    Ok(())
}

/// Quadrature value of `σ̂_k(n)`.
///
/// `σ_k` vanishes on `t < 0`, so the integral reduces to the `[0, 1]` piece,
/// where the integrand is a polynomial times the weight. Requires at least
/// `n + k + 8` nodes.
pub fn sigma_hat_quad(k: u32, d: usize, n: usize, quad: &JacobiQuadrature) -> Result<f64> {
    Ok(sigma_hat_quad_all(k, d, n, quad)?[n])
}

/// Quadrature values `σ̂_k(0), …, σ̂_k(n_max)` in one pass over the nodes.
pub fn sigma_hat_quad_all(
    k: u32,
    d: usize,
    n_max: usize,
    quad: &JacobiQuadrature,
) -> Result<Vec<f64>> {
    check_quad(k, d, n_max, quad)?;
    let lambda = (d as f64 - 1.0) / 2.0;
    let mut out = vec![0.0; n_max + 1];
    let mut p = vec![0.0; n_max + 1];
    for (&t, &w) in quad.half_nodes().iter().zip(quad.half_weights()) {
        fill_gegenbauer(lambda, t, &mut p);
        let f = w * sigma_k(k, t);
        for (o, pn) in out.iter_mut().zip(&p) {
            *o += f * pn;
        }
    }
    for o in out.iter_mut() {
        *o *= quad.c_d();
    }
    Ok(out)
}

/// Table of `σ̂_k(n)`, `n ≤ n_max`, with the structural zero mask.
///
/// Closed forms are used wherever they exist; `1 ≤ n ≤ k` comes from
/// quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSpectrum {
    k: u32,
    d: usize,
    coeffs: Vec<f64>,
    zero_mask: Vec<bool>,
}

impl ActivationSpectrum {
    pub fn new(k: u32, d: usize) -> Result<Self> {
        Self::with_n_max(k, d, DEFAULT_N_MAX)
    }

    pub fn with_n_max(k: u32, d: usize, n_max: usize) -> Result<Self> {
        let low = if k >= 1 {
            let quad = JacobiQuadrature::new(d, 2 * k as usize + 16)?;
            sigma_hat_quad_all(k, d, k as usize, &quad)?
        } else {
            Vec::new()
        };
        let mut coeffs = Vec::with_capacity(n_max + 1);
        let mut zero_mask = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let v = if n >= 1 && n <= k as usize {
                SpectralValue::Value(low[n])
            } else {
                sigma_hat_closed(k, d, n)?
            };
            if let SpectralValue::Value(x) = v {
                if !x.is_finite() {
                    return Err(Error::Numerical(format!("non-finite sigma_hat({n})")));
                }
            }
            zero_mask.push(v.is_zero());
            coeffs.push(v.value());
        }
        Ok(Self { k, d, coeffs, zero_mask })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient at degree `n` (0 at masked degrees).
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs[n]
    }

    pub fn is_zero(&self, n: usize) -> bool {
        self.zero_mask[n]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_examples() {
        assert_eq!(sigma_hat_closed(1, 3, 3).unwrap(), SpectralValue::Zero);
        let v = sigma_hat_closed(1, 1, 0).unwrap().value();
        assert!((v - 1.0 / PI).abs() < 1e-15);
        let v = sigma_hat_closed(0, 1, 0).unwrap().value();
        assert!((v - 0.5).abs() < 1e-15);
        let v = sigma_hat_closed(1, 1, 2).unwrap().value();
        assert!((v - 1.0 / (3.0 * PI)).abs() < 1e-15);
        assert!(matches!(sigma_hat_closed(2, 1, 1), Err(Error::NoClosedForm { .. })));
        assert!(matches!(sigma_hat_closed(2, 1, 2), Err(Error::NoClosedForm { .. })));
    }

    #[test]
    fn quadrature_examples() {
        let q = JacobiQuadrature::new(1, 32).unwrap();
        assert!((sigma_hat_quad(1, 1, 1, &q).unwrap() - 0.25).abs() < 1e-13);
        assert!((sigma_hat_quad(0, 1, 0, &q).unwrap() - 0.5).abs() < 1e-13);
        let q2 = JacobiQuadrature::new(2, 32).unwrap();
        assert!(sigma_hat_quad(1, 2, 3, &q2).unwrap().abs() < 1e-12);
        assert!(matches!(
            sigma_hat_quad(1, 1, 30, &q),
            Err(Error::InsufficientNodes { have: 32, need: 39 })
        ));
        assert!(sigma_hat_quad(1, 2, 3, &q).is_err());
    }

    #[test]
    fn spectrum_table() {
        let s = ActivationSpectrum::new(2, 2).unwrap();
        assert_eq!(s.n_max(), DEFAULT_N_MAX);
        for n in 0..=DEFAULT_N_MAX {
            assert_eq!(s.is_zero(n), is_structural_zero(2, n));
            assert!(s.coeff(n).is_finite());
            if !s.is_zero(n) {
                assert!(s.coeff(n) != 0.0);
            }
        }
        let q = JacobiQuadrature::new(2, 40).unwrap();
        for n in 1..=2 {
            let want = sigma_hat_quad(2, 2, n, &q).unwrap();
            assert!((s.coeff(n) - want).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn closed_matches_quadrature(k in 0u32..3, d in 1usize..4, n in 0usize..61) {
            let q = JacobiQuadrature::new(d, 96).unwrap();
            if let Ok(c) = sigma_hat_closed(k, d, n) {
                let got = sigma_hat_quad(k, d, n, &q).unwrap();
                prop_assert!((c.value() - got).abs() <= 1e-9, "closed={:?} quad={}", c, got);
            }
        }
    }
}
