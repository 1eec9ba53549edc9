//! Special functions on the sphere `S^d ⊂ R^{d+1}`.
//!
//! Surface areas, spherical-harmonic space dimensions `N(d, n)`, Gegenbauer
//! polynomials normalized by `P_n(1) = 1`, Gauss–Jacobi quadrature for the
//! weight `(1 − t²)^{(d−2)/2}`, and the Gegenbauer coefficients of the
//! ReLU^k activation.

mod quadrature;
mod spectrum;

pub use quadrature::{gauss_jacobi, JacobiQuadrature};
pub use spectrum::{
    is_structural_zero, sigma_hat_closed, sigma_hat_quad, sigma_hat_quad_all, ActivationSpectrum,
    SpectralValue,
};

use crate::error::{Error, Result};

/// Default maximal degree for tables.
pub const DEFAULT_N_MAX: usize = 256;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma(x)
}

/// Surface area `ω_j = 2π^{(j+1)/2} / Γ((j+1)/2)` of the unit sphere `S^j`.
pub fn surface_area(j: usize) -> f64 {
    let h = (j as f64 + 1.0) / 2.0;
    (std::f64::consts::LN_2 + h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// Surface areas `ω_0..ω_d` and the normalization `c_d = ω_{d−1}/ω_d` of the
/// probability law `ϱ` with density `c_d (1 − t²)^{(d−2)/2}` on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGeometry {
    d: usize,
    omega: Vec<f64>,
    c_d: f64,
}

impl SphereGeometry {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("sphere dimension d must be >= 1".into()));
        }
        let omega: Vec<f64> = (0..=d).map(surface_area).collect();
        let c_d = omega[d - 1] / omega[d];
        Ok(Self { d, omega, c_d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.omega[j]
    }

    pub fn c_d(&self) -> f64 {
        self.c_d
    }

    /// Exponent `(d − 2)/2` of the Gegenbauer weight.
    pub fn weight_exponent(&self) -> f64 {
        (self.d as f64 - 2.0) / 2.0
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Dimension `N(d, n)` of the degree-`n` spherical harmonics on `S^d`.
///
/// Exact integer arithmetic; returns [`Error::DegreeTooLarge`] on overflow.
pub fn harmonic_dim(d: usize, n: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    if n == 0 {
        return Ok(1);
    }
    let overflow = || Error::DegreeTooLarge { d, n };
    let (d128, n128) = (d as u128, n as u128);
    let b = binomial(n128 + d128 - 2, d128 - 1).ok_or_else(overflow)?;
    let num = (2 * n128 + d128 - 1).checked_mul(b).ok_or_else(overflow)?;
    u64::try_from(num / n128).map_err(|_| overflow())
}

/// Normalized Gegenbauer polynomials `P_n` on `S^d`, `P_n(1) = 1`.
///
/// For `d ≥ 2` this runs the ultraspherical recurrence with index
/// `λ = (d − 1)/2`, rescaled so each step already carries the `P_n(1) = 1`
/// normalization:
/// `(n + 2λ) P_{n+1} = 2(n + λ) t P_n − n P_{n−1}`.
/// For `d = 1` the polynomials are Chebyshev, `P_n(cos θ) = cos(nθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GegenbauerTable {
    d: usize,
    n_max: usize,
    lambda: f64,
}

impl GegenbauerTable {
    pub fn new(d: usize, n_max: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be >= 1".into()));
        }
        Ok(Self { d, n_max, lambda: (d as f64 - 1.0) / 2.0 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `P_n(t)` for `|t| ≤ 1` and `n ≤ n_max`.
    pub fn eval(&self, n: usize, t: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("Gegenbauer argument {t} outside [-1, 1]")));
        }
        if n > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "degree {n} exceeds table maximum {}",
                self.n_max
            )));
        }
        if self.d == 1 {
            return Ok((n as f64 * t.acos()).cos());
        }
        let mut buf = vec![0.0; n + 1];
        self.fill(t, &mut buf);
        Ok(buf[n])
    }

    /// Writes `P_0(t), …, P_{len−1}(t)` into `out` without argument checks.
    pub fn fill(&self, t: f64, out: &mut [f64]) {
        fill_gegenbauer(self.lambda, t, out);
    }
}

/// Writes `P_0(t), …, P_{len−1}(t)` for Gegenbauer index `λ = (d − 1)/2`.
pub(crate) fn fill_gegenbauer(lambda: f64, t: f64, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    out[0] = 1.0;
    if len == 1 {
        return;
    }
    out[1] = t;
    if lambda == 0.0 {
        for n in 1..len - 1 {
            out[n + 1] = 2.0 * t * out[n] - out[n - 1];
        }
    } else {
        for n in 1..len - 1 {
            let nf = n as f64;
            out[n + 1] = (2.0 * (nf + lambda) * t * out[n] - nf * out[n - 1]) / (nf + 2.0 * lambda);
        }
    }
}

/// `Σ_n coeffs[n] · P_n(t)` on `S^d`, accumulated in one recurrence pass.
pub fn zonal_sum(d: usize, coeffs: &[f64], t: f64) -> f64 {
    let lambda = (d as f64 - 1.0) / 2.0;
    let len = coeffs.len();
    if len == 0 {
        return 0.0;
    }
    let mut prev = 1.0;
    let mut acc = coeffs[0];
    if len == 1 {
        return acc;
    }
    let mut cur = t;
    acc += coeffs[1] * cur;
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = if lambda == 0.0 {
            2.0 * t * cur - prev
        } else {
            (2.0 * (nf + lambda) * t * cur - nf * prev) / (nf + 2.0 * lambda)
        };
        acc += coeffs[n + 1] * next;
        prev = cur;
        cur = next;
    }
    acc
}
