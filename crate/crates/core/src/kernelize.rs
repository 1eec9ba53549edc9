//! Smoothed projection `g_m = h̃ ∗ L_m` and the ridge density `φ` with
//! `φ ∗ σ_k = g_m`.
//!
//! Both are finite zonal expansions
//! `g_m = Σ_{n<2m} η(n/m) P_n h̃` and `φ = Σ_{n<2m} η(n/m)/σ̂_k(n) P_n h̃`,
//! where `P_n h̃` is the degree-`n` harmonic component of the lifted target.
//! Components are computed by a sphere quadrature that is exact for the
//! products of degree `< 4m` polynomials that occur: uniform angles on the
//! circle and a Gauss–Legendre × uniform-azimuth product rule on `S^2`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::{fill_gegenbauer, gauss_jacobi, harmonic_dim, zonal_sum, ActivationSpectrum};
use crate::lift::{lowering_point, smooth_step, Parity, SphereFunction};
use crate::sampling::{dot, norm};

/// Cutoff `η`: 1 on `[0, 1]`, 0 on `[2, ∞)`, smooth in between.
pub fn eta_cutoff(t: f64) -> f64 {
    1.0 - smooth_step(t, 1.0, 2.0)
}

/// Sphere quadrature grid for [`build_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridSpec {
    /// `d = 1`: `max(4m + 1, 8192)` angles. `d = 2`: `max(2m + 1, 24)` polar
    /// by `max(4m + 1, 48)` azimuthal nodes.
    #[default]
    Auto,
    Circle { points: usize },
    Product { polar: usize, azimuth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationEstimate {
    pub gamma_l2: f64,
    pub gamma_l1: f64,
}

/// Everything needed to evaluate `φ`, `g_m` and `L_m` for one `(h̃, k, m)`.
#[derive(Debug, Clone)]
pub struct RidgeDensity {
    d: usize,
    k: u32,
    m: usize,
    h_tilde: SphereFunction,
    /// Quadrature nodes, stride `d + 1`.
    nodes: Vec<f64>,
    rho: Vec<f64>,
    h_vals: Vec<f64>,
    eta: Vec<f64>,
    sigma: Vec<f64>,
    zero_mask: Vec<bool>,
    dims: Vec<f64>,
    /// `‖P_n h̃‖²` in `L²(τ_d)`.
    proj_norm2: Vec<f64>,
    /// `φ` at the quadrature nodes.
    phi_nodes: Vec<f64>,
    /// `d = 1` only: cosine and sine coefficients `A_n`, `B_n` of `h̃(θ)`
    /// with `u = (sin θ, cos θ)`.
    fourier: Option<(Vec<f64>, Vec<f64>)>,
}

fn product_grid(polar: usize, azimuth: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (ts, ws) = gauss_jacobi(0.0, 0.0, polar)?;
    let mut nodes = Vec::with_capacity(3 * polar * azimuth);
    let mut rho = Vec::with_capacity(polar * azimuth);
    for (&t, &w) in ts.iter().zip(&ws) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for j in 0..azimuth {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / azimuth as f64;
            nodes.extend_from_slice(&[s * ph.cos(), s * ph.sin(), t]);
            rho.push(w / (2.0 * azimuth as f64));
        }
    }
    Ok((nodes, rho))
}

/// Builds the ridge density of `h̃` for `σ_k` at cutoff scale `m`.
///
/// If `h̃` declares the parity required by `k` it is checked at 100 random
/// points. Otherwise the harmonic components at the structurally zero
/// degrees below `2m` must vanish numerically. Either failure is a contract
/// violation. Only `d ∈ {1, 2}` is supported.
pub fn build_density(h_tilde: &SphereFunction, k: u32, m: usize, grid: GridSpec) -> Result<RidgeDensity> {
    let d = h_tilde.d();
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidArgument(format!("spectral synthesis supports d in {{1, 2}}, got {d}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("cutoff scale m must be >= 1".into()));
    }
    let parity_declared = h_tilde.parity() == Parity::for_activation(k);
    if parity_declared {
        h_tilde.check_parity(100, 0x9a71, 1e-12)?;
    }
    let top = 2 * m;
    let spectrum = ActivationSpectrum::with_n_max(k, d, top.max(k as usize + 1))?;
    let eta: Vec<f64> = (0..top).map(|n| eta_cutoff(n as f64 / m as f64)).collect();
    let sigma: Vec<f64> = (0..top).map(|n| spectrum.coeff(n)).collect();
    let zero_mask: Vec<bool> = (0..top).map(|n| spectrum.is_zero(n)).collect();
    let dims: Vec<f64> =
        (0..top).map(|n| harmonic_dim(d, n).map(|v| v as f64)).collect::<Result<_>>()?;

    let (nodes, rho) = match (d, grid) {
        (1, GridSpec::Auto) => circle_grid((4 * m + 1).max(8192)),
        (1, GridSpec::Circle { points }) => {
            if points < 4 * m + 1 {
                return Err(Error::InvalidArgument(format!(
                    "circle grid needs >= {} points, got {points}",
                    4 * m + 1
                )));
            }
            circle_grid(points)
        }
        (2, GridSpec::Auto) => product_grid((2 * m + 1).max(24), (4 * m + 1).max(48))?,
        (2, GridSpec::Product { polar, azimuth }) => {
            if polar < 2 * m + 1 || azimuth < 4 * m + 1 {
                return Err(Error::InvalidArgument(format!(
                    "product grid needs polar >= {} and azimuth >= {}, got {polar} x {azimuth}",
                    2 * m + 1,
                    4 * m + 1
                )));
            }
            product_grid(polar, azimuth)?
        }
        (_, g) => return Err(Error::InvalidArgument(format!("grid {g:?} does not fit d = {d}"))),
    };
    let total: f64 = rho.iter().sum();
    if rho.iter().any(|&w| w <= 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::Numerical(format!("sphere quadrature weights sum to {total}")));
    }
    let stride = d + 1;
    let h_vals: Vec<f64> = nodes.par_chunks(stride).map(|u| h_tilde.eval(u)).collect();

    // (P_n h̃)(v_q) for every node q and degree n < 2m.
    let (components, fourier) = if d == 1 {
        let (a, b) = circle_coefficients(&h_vals, top);
        let q = h_vals.len();
        let comps: Vec<Vec<f64>> = (0..q)
            .into_par_iter()
            .map(|i| {
                (0..top)
                    .map(|n| {
                        let j = (n * i) % q;
                        let th = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
                        if n == 0 {
                            a[0]
                        } else {
                            2.0 * (a[n] * th.cos() + b[n] * th.sin())
                        }
                    })
                    .collect()
            })
            .collect();
        (comps, Some((a, b)))
    } else {
        (sphere_components(&nodes, &rho, &h_vals, &dims, stride), None)
    };

    let mut proj_norm2 = vec![0.0; top];
    for (q, comp) in components.iter().enumerate() {
        for n in 0..top {
            proj_norm2[n] += rho[q] * comp[n] * comp[n];
        }
    }
    let scale = proj_norm2.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt();
    if !parity_declared {
        for n in (0..top).filter(|&n| zero_mask[n]) {
            if proj_norm2[n].sqrt() > 1e-9 * (1.0 + scale) {
                return Err(Error::Contract(format!(
                    "h_tilde has a degree-{n} component of norm {:e}, but sigma_hat_{k}({n}) = 0; \
                     the lift must be {:?}",
                    proj_norm2[n].sqrt(),
                    Parity::for_activation(k)
                )));
            }
        }
    }
    let phi_coef: Vec<f64> =
        (0..top).map(|n| if zero_mask[n] { 0.0 } else { eta[n] / sigma[n] }).collect();
    let phi_nodes: Vec<f64> = components
        .iter()
        .map(|comp| comp.iter().zip(&phi_coef).map(|(c, w)| c * w).sum())
        .collect();

    Ok(RidgeDensity {
        d,
        k,
        m,
        h_tilde: h_tilde.clone(),
        nodes,
        rho,
        h_vals,
        eta,
        sigma,
        zero_mask,
        dims,
        proj_norm2,
        phi_nodes,
        fourier,
    })
}

fn circle_grid(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(2 * points);
    for q in 0..points {
        let th = 2.0 * std::f64::consts::PI * q as f64 / points as f64;
        nodes.extend_from_slice(&[th.sin(), th.cos()]);
    }
    (nodes, vec![1.0 / points as f64; points])
}

/// Discrete Fourier coefficients `A_n = mean(h cos nθ)`, `B_n = mean(h sin nθ)`.
fn circle_coefficients(h_vals: &[f64], top: usize) -> (Vec<f64>, Vec<f64>) {
    let q = h_vals.len();
    let cos_tab: Vec<f64> =
        (0..q).map(|j| (2.0 * std::f64::consts::PI * j as f64 / q as f64).cos()).collect();
    let sin_tab: Vec<f64> =
        (0..q).map(|j| (2.0 * std::f64::consts::PI * j as f64 / q as f64).sin()).collect();
    (0..top)
        .into_par_iter()
        .map(|n| {
            let (mut a, mut b) = (0.0, 0.0);
            for (i, &h) in h_vals.iter().enumerate() {
                let j = (n * i) % q;
                a += h * cos_tab[j];
                b += h * sin_tab[j];
            }
            (a / q as f64, b / q as f64)
        })
        .unzip()
}

/// `(P_n h̃)(v_q) = N(d, n) Σ_{q'} ρ_{q'} h̃(v_{q'}) P_n(v_q · v_{q'})`.
fn sphere_components(nodes: &[f64], rho: &[f64], h_vals: &[f64], dims: &[f64], stride: usize) -> Vec<Vec<f64>> {
    let top = dims.len();
    let lambda = (stride as f64 - 2.0) / 2.0;
    let active: Vec<usize> = (0..rho.len()).filter(|&j| h_vals[j] != 0.0).collect();
    nodes
        .par_chunks(stride)
        .map(|u| {
            let mut acc = vec![0.0; top];
            let mut p = vec![0.0; top];
            for &j in &active {
                let t = dot(u, &nodes[j * stride..(j + 1) * stride]).clamp(-1.0, 1.0);
                fill_gegenbauer(lambda, t, &mut p);
                let w = rho[j] * h_vals[j];
                for (a, pn) in acc.iter_mut().zip(&p) {
                    *a += w * pn;
                }
            }
            acc.iter().zip(dims).map(|(a, n)| a * n).collect()
        })
        .collect()
}

impl RidgeDensity {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h_tilde(&self) -> &SphereFunction {
        &self.h_tilde
    }

    pub fn node_count(&self) -> usize {
        self.rho.len()
    }

    pub fn node(&self, q: usize) -> &[f64] {
        let s = self.d + 1;
        &self.nodes[q * s..(q + 1) * s]
    }

    pub fn weights(&self) -> &[f64] {
        &self.rho
    }

    /// `(η(n/m), σ̂_k(n), zero?)` for `n < 2m`.
    pub fn coefficient(&self, n: usize) -> (f64, f64, bool) {
        (self.eta[n], self.sigma[n], self.zero_mask[n])
    }

    /// `‖P_n h̃‖²_{L²(τ)}` for `n < 2m`.
    pub fn projection_norms(&self) -> &[f64] {
        &self.proj_norm2
    }

    /// `L_m(t) = Σ_{n<2m} η(n/m) N(d, n) P_n(t)`.
    pub fn eval_kernel_lm(&self, t: f64) -> f64 {
        let c: Vec<f64> = self.eta.iter().zip(&self.dims).map(|(e, n)| e * n).collect();
        zonal_sum(self.d, &c, t.clamp(-1.0, 1.0))
    }

    fn modal_sum(&self, u: &[f64], coef: impl Fn(usize) -> f64) -> f64 {
        let top = self.eta.len();
        if let Some((a, b)) = &self.fourier {
            let th = u[0].atan2(u[1]);
            let mut s = coef(0) * a[0];
            for n in 1..top {
                let c = coef(n);
                if c != 0.0 {
                    let nt = n as f64 * th;
                    s += c * 2.0 * (a[n] * nt.cos() + b[n] * nt.sin());
                }
            }
            s
        } else {
            let zc: Vec<f64> = (0..top).map(|n| coef(n) * self.dims[n]).collect();
            let stride = self.d + 1;
            self.nodes
                .chunks(stride)
                .zip(self.rho.iter().zip(&self.h_vals))
                .filter(|(_, (_, &h))| h != 0.0)
                .map(|(v, (&w, &h))| w * h * zonal_sum(self.d, &zc, dot(u, v).clamp(-1.0, 1.0)))
                .sum()
        }
    }

    /// `g_m(u)`.
    pub fn eval_projection(&self, u: &[f64]) -> f64 {
        self.modal_sum(u, |n| self.eta[n])
    }

    /// `φ(u)`.
    pub fn eval_density(&self, u: &[f64]) -> f64 {
        self.modal_sum(u, |n| if self.zero_mask[n] { 0.0 } else { self.eta[n] / self.sigma[n] })
    }

    /// `S_k g_m(x)` for `‖x‖ ≤ 1`.
    pub fn lowered_projection(&self, x: &[f64]) -> Result<f64> {
        if norm(x) > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("lowering needs ||x|| <= 1, got {}", norm(x))));
        }
        let (u, scale) = lowering_point(x, self.k);
        Ok(scale * self.eval_projection(&u))
    }

    /// `(φ ∗ σ_k)(u) = Σ_q ρ_q φ(v_q) σ_k(u · v_q)` by the stored quadrature.
    pub fn convolve_sigma(&self, u: &[f64]) -> f64 {
        let k = self.k as i32;
        self.nodes
            .chunks(self.d + 1)
            .zip(self.rho.iter().zip(&self.phi_nodes))
            .map(|(v, (&w, &p))| {
                let t = dot(u, v);
                if t > 0.0 {
                    w * p * t.powi(k)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `S_k(φ ∗ σ_k)(x) = Σ_q ρ_q φ(v_q) σ_k((x, 1) · v_q)`, the function a
    /// network sampled from `φ` approximates.
    pub fn lowered_convolution(&self, x: &[f64]) -> f64 {
        let (u, scale) = lowering_point(x, self.k);
        scale * self.convolve_sigma(&u)
    }

    /// `φ` at the grid nodes.
    pub fn density_on_grid(&self) -> &[f64] {
        &self.phi_nodes
    }

    /// Grid maximum of `|φ|`.
    pub fn density_sup(&self) -> f64 {
        self.phi_nodes.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Grid quadrature of `‖φ‖_{L¹(τ)}`.
    pub fn density_l1(&self) -> f64 {
        self.rho.iter().zip(&self.phi_nodes).map(|(w, p)| w * p.abs()).sum()
    }

    /// `γ_{L²} = (Σ η²/σ̂² ‖P_n h̃‖²)^{1/2}` and `γ_{L¹} = ‖φ‖_{L¹}`.
    pub fn variation_estimate(&self) -> Result<VariationEstimate> {
        let mut acc = 0.0;
        for n in 0..self.eta.len() {
            if self.zero_mask[n] {
                continue;
            }
            let mut p2 = self.proj_norm2[n];
            if p2 < 0.0 {
                log::warn!("negative quadrature variance {p2:e} at degree {n}, clamped to 0");
                p2 = 0.0;
            }
            acc += (self.eta[n] / self.sigma[n]).powi(2) * p2;
        }
        let gamma_l2 = acc.sqrt();
        let gamma_l1 = self.density_l1();
        if gamma_l1 > gamma_l2 * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::Contract(format!(
                "L1 estimate {gamma_l1:e} exceeds L2 estimate {gamma_l2:e}"
            )));
        }
        Ok(VariationEstimate { gamma_l2, gamma_l1 })
    }
}
