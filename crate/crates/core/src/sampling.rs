//! Random and low-discrepancy points on spheres and balls.

use rand::Rng;
use rand_distr::StandardNormal;

/// Uniform point on the unit sphere in `R^dim` (normalized Gaussian).
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point in the unit ball `B^d`: a uniform direction scaled by `U^{1/d}`.
pub fn uniform_ball<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    let dir = uniform_sphere(rng, d);
    let r = rng.random::<f64>().powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}

/// Radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// First `count` points of the (2, 3) Halton sequence mapped onto the unit disk
/// by the area-preserving polar map.
pub fn halton_disk(count: usize) -> Vec<[f64; 2]> {
    (1..=count as u64)
        .map(|i| {
            let r = radical_inverse(i, 2).sqrt();
            let th = 2.0 * std::f64::consts::PI * radical_inverse(i, 3);
            [r * th.cos(), r * th.sin()]
        })
        .collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_have_unit_norm() {
        let mut rng = crate::seeds::rng(3);
        for dim in 1..6 {
            for _ in 0..100 {
                assert!((norm(&uniform_sphere(&mut rng, dim)) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ball_radius_law() {
        let mut rng = crate::seeds::rng(5);
        let n = 20_000;
        let inside = (0..n).filter(|_| norm(&uniform_ball(&mut rng, 2)) <= 0.5).count();
        let frac = inside as f64 / n as f64;
        assert!((frac - 0.25).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn halton_points_lie_in_disk() {
        let pts = halton_disk(4096);
        assert_eq!(pts.len(), 4096);
        assert!(pts.iter().all(|p| p[0] * p[0] + p[1] * p[1] <= 1.0));
        assert!((radical_inverse(1, 2) - 0.5).abs() < 1e-16);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }
}
