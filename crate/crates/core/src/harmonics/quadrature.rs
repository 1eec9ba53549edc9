use nalgebra::{DMatrix, SymmetricEigen};

use super::{ln_gamma, SphereGeometry};
use crate::error::{Error, Result};

/// Three-term recurrence coefficients `(a_j, b_j)` of the monic Jacobi
/// polynomials for weight `(1 − x)^α (1 + x)^β`; `b_0` is unused.
fn jacobi_recurrence(alpha: f64, beta: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut a = vec![0.0; count];
    let mut b = vec![0.0; count];
    for j in 0..count {
        let jf = j as f64;
        a[j] = if j == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * jf + ab) * (2.0 * jf + ab + 2.0))
        };
        if j == 1 {
            b[j] = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab));
        } else if j >= 2 {
            let t = 2.0 * jf + ab;
            b[j] = 4.0 * jf * (jf + alpha) * (jf + beta) * (jf + ab)
                / (t * t * (t + 1.0) * (t - 1.0));
        }
    }
    (a, b)
}

/// Orthonormal recurrence at `x`: returns `(Σ_j p̂_j(x)², p̂_count(x), p̂'_count(x))`.
fn orthonormal_eval(a: &[f64], sb: &[f64], mu0: f64, sb_last: f64, x: f64) -> (f64, f64, f64) {
    let count = a.len();
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / mu0.sqrt();
    let mut dp = 0.0;
    let mut sum_sq = 0.0;
    for j in 0..count {
        sum_sq += p * p;
        let s_next = if j + 1 < count { sb[j + 1] } else { sb_last };
        let s_cur = sb[j];
        let p_next = ((x - a[j]) * p - s_cur * p_prev) / s_next;
        let dp_next = (p + (x - a[j]) * dp - s_cur * dp_prev) / s_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (sum_sq, p, dp)
}

/// Gauss–Jacobi nodes and weights for `∫_{−1}^{1} f(x)(1 − x)^α(1 + x)^β dx`.
///
/// Golub–Welsch eigenvalues seed a Newton polish on the orthonormal
/// recurrence; weights are the Christoffel numbers `1/Σ_j p̂_j(x_i)²`, which
/// keep full relative accuracy near the endpoints.
pub fn gauss_jacobi(alpha: f64, beta: f64, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if count == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi exponents must exceed -1, got ({alpha}, {beta})"
        )));
    }
    let (a, b) = jacobi_recurrence(alpha, beta, count + 1);
    let sb: Vec<f64> = b.iter().map(|x| x.sqrt()).collect();
    let mut jm = DMatrix::<f64>::zeros(count, count);
    for j in 0..count {
        jm[(j, j)] = a[j];
        if j + 1 < count {
            jm[(j, j + 1)] = sb[j + 1];
            jm[(j + 1, j)] = sb[j + 1];
        }
    }
    let eig = SymmetricEigen::try_new(jm, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("tridiagonal eigen-solver did not converge".into()))?;
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.total_cmp(y));

    let mu0 = ((alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)
        + ln_gamma(beta + 1.0)
        - ln_gamma(alpha + beta + 2.0))
    .exp();
    let a_n = &a[..count];
    let sb_n = &sb[..count];
    let sb_last = sb[count];
    let mut weights = Vec::with_capacity(count);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (_, p, dp) = orthonormal_eval(a_n, sb_n, mu0, sb_last, *x);
            if dp == 0.0 || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (sum_sq, _, _) = orthonormal_eval(a_n, sb_n, mu0, sb_last, *x);
        weights.push(1.0 / sum_sq);
    }
    if nodes.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite Gauss-Jacobi node or weight".into()));
    }
    Ok((nodes, weights))
}

/// Gauss rule for the weight `(1 − t²)^{(d−2)/2}` on `[−1, 1]`, plus a
/// companion rule on `[0, 1]` for integrands that vanish on `t < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiQuadrature {
    d: usize,
    c_d: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half_nodes: Vec<f64>,
    half_weights: Vec<f64>,
}

impl JacobiQuadrature {
    pub fn new(d: usize, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument("jacobi_nodes needs count >= 2".into()));
        }
        let geo = SphereGeometry::new(d)?;
        let e = geo.weight_exponent();
        let (nodes, weights) = gauss_jacobi(e, e, count)?;

        // On [0, 1] the weight is (1 − t)^e (1 + t)^e. With t = (1 + s)/2 the
        // (1 − s)^e endpoint factor goes into a Jacobi rule and the remaining
        // ((3 + s)/2)^e is smooth on [−1, 1].
        let (s_nodes, s_weights) = gauss_jacobi(e, 0.0, count)?;
        let scale = 2f64.powf(-e) / 2.0;
        let (half_nodes, half_weights) = s_nodes
            .iter()
            .zip(&s_weights)
            .map(|(&s, &w)| ((1.0 + s) / 2.0, w * scale * ((3.0 + s) / 2.0).powf(e)))
            .unzip();
        Ok(Self { d, c_d: geo.c_d(), nodes, weights, half_nodes, half_weights })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn c_d(&self) -> f64 {
        self.c_d
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `(1 − t²)^{(d−2)/2} dt`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the probability law `ϱ`, i.e. `c_d · weights`.
    pub fn rho_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w * self.c_d).collect()
    }

    /// `∫ f dϱ` over `[−1, 1]`.
    pub fn integrate_rho(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.c_d * self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum::<f64>()
    }

    /// Nodes of the `[0, 1]` rule.
    pub fn half_nodes(&self) -> &[f64] {
        &self.half_nodes
    }

    /// Weights of the `[0, 1]` rule for `(1 − t²)^{(d−2)/2} dt`.
    pub fn half_weights(&self) -> &[f64] {
        &self.half_weights
    }

    /// `∫_0^1 f dϱ`.
    pub fn integrate_rho_positive(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.c_d
            * self.half_nodes.iter().zip(&self.half_weights).map(|(&t, &w)| w * f(t)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::GegenbauerTable;

    #[test]
    fn two_point_legendre() {
        let q = JacobiQuadrature::new(2, 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((q.nodes()[0] + r).abs() < 1e-15);
        assert!((q.nodes()[1] - r).abs() < 1e-15);
        for w in q.rho_weights() {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rho_is_a_probability_measure() {
        for d in 1..=6 {
            for count in [2, 5, 16, 64, 200] {
                let q = JacobiQuadrature::new(d, count).unwrap();
                let total: f64 = q.rho_weights().iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "d={d} count={count} total={total}");
                assert!(q.weights().iter().all(|&w| w > 0.0));
                assert!(q.nodes().iter().all(|&t| t > -1.0 && t < 1.0));
            }
        }
    }

    #[test]
    fn chebyshev_second_moment() {
        let q = JacobiQuadrature::new(1, 16).unwrap();
        assert!((q.integrate_rho(|t| t * t) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exactness_degree() {
        // ∫ t^{2j} dϱ on S^2 is 1/(2j + 1).
        let q = JacobiQuadrature::new(2, 10).unwrap();
        for j in 0..10 {
            let got = q.integrate_rho(|t| t.powi(2 * j as i32));
            assert!((got - 1.0 / (2.0 * j as f64 + 1.0)).abs() < 1e-13, "j={j}");
        }
    }

    #[test]
    fn half_rule_moments() {
        for d in 1..=4 {
            let q = JacobiQuadrature::new(d, 40).unwrap();
            assert!((q.integrate_rho_positive(|_| 1.0) - 0.5).abs() < 1e-13, "d={d}");
            let full = q.integrate_rho(|t| t.abs().powi(3));
            let half = q.integrate_rho_positive(|t| t.powi(3));
            assert!((2.0 * half - full).abs() < 1e-6, "d={d}");
        }
        // d = 1: ∫_0^1 t (1 − t²)^{−1/2} dt / π = 1/π
        let q = JacobiQuadrature::new(1, 30).unwrap();
        let got = q.integrate_rho_positive(|t| t);
        assert!((got - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_orthogonality() {
        for d in 1..=4 {
            let q = JacobiQuadrature::new(d, 24).unwrap();
            let tab = GegenbauerTable::new(d, 20).unwrap();
            let mut vals = vec![vec![0.0; 21]; q.count()];
            for (i, &t) in q.nodes().iter().enumerate() {
                tab.fill(t, &mut vals[i]);
            }
            let rho = q.rho_weights();
            for n in 0..=20 {
                for m in 0..=20 {
                    let ip: f64 = (0..q.count()).map(|i| rho[i] * vals[i][n] * vals[i][m]).sum();
                    if n == m {
                        assert!(ip > 0.0);
                    } else {
                        assert!(ip.abs() < 1e-11, "d={d} n={n} m={m} ip={ip}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_tiny_rules() {
        assert!(JacobiQuadrature::new(2, 1).is_err());
        assert!(gauss_jacobi(-1.0, 0.0, 4).is_err());
    }
}
