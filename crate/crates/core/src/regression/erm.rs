//! ℓ1-constrained least squares over a random ridge dictionary.

use rayon::prelude::*;
use serde::Serialize;

use super::data::{Dataset, RegressionModel};
use crate::error::{Error, Result};
use crate::network::{eval_shallow, relu_pow, ShallowNet, Unit};
use crate::sampling::{uniform_ball, uniform_sphere};
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErmConfig {
    pub k: u32,
    pub dictionary_size: usize,
    pub budget: f64,
    pub truncation: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl ErmConfig {
    pub fn new(dictionary_size: usize, budget: f64, truncation: f64, seed: u64) -> Self {
        Self { k: 1, dictionary_size, budget, truncation, max_iter: 2000, tol: 1e-8, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dictionary_size == 0 {
            return Err(Error::InvalidArgument("dictionary size K must be >= 1".into()));
        }
        if !(self.budget > 0.0) {
            return Err(Error::InvalidArgument(format!("budget M must be > 0, got {}", self.budget)));
        }
        if !(self.truncation > 0.0) {
            return Err(Error::InvalidArgument(format!("truncation B must be > 0, got {}", self.truncation)));
        }
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("optimizer needs max_iter >= 1 and tol > 0".into()));
        }
        Ok(())
    }
}

/// `K` directions uniform on `S^d`, deterministic in `seed`.
pub fn sample_dictionary(d: usize, size: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeds::rng(seed);
    (0..size).map(|_| uniform_sphere(&mut rng, d + 1)).collect()
}

/// Euclidean projection onto `{w : Σ|w_j| ≤ radius}` by sorting.
pub fn project_l1(w: &mut [f64], radius: f64) {
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    let mut u: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - radius) / (j + 1) as f64;
        if uj > t {
            theta = t;
        } else {
            break;
        }
    }
    for v in w.iter_mut() {
        *v = v.signum() * (v.abs() - theta).max(0.0);
    }
}

/// The `n × K` matrix `Φ_ij = σ_k((x_iᵀ, 1) v_j)`, applied without
/// necessarily storing it.
pub enum FeatureOperator {
    Dense(DenseFeatures),
    Ridge1d(RidgeFeatures1d),
}

impl FeatureOperator {
    /// The sweep operator for `d = 1`, the dense one otherwise.
    pub fn new(x: &[Vec<f64>], dirs: &[Vec<f64>], k: u32) -> Self {
        if x.first().is_some_and(|p| p.len() == 1) {
            FeatureOperator::Ridge1d(RidgeFeatures1d::new(x, dirs, k))
        } else {
            FeatureOperator::Dense(DenseFeatures::new(x, dirs, k))
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            FeatureOperator::Dense(f) => f.n,
            FeatureOperator::Ridge1d(f) => f.x.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            FeatureOperator::Dense(f) => f.dirs.len(),
            FeatureOperator::Ridge1d(f) => f.a.len(),
        }
    }

    /// `out = Φ w`.
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        match self {
            FeatureOperator::Dense(f) => f.apply(w, out),
            FeatureOperator::Ridge1d(f) => f.apply(w, out),
        }
    }

    /// `out = Φᵀ r`.
    pub fn apply_transpose(&self, r: &[f64], out: &mut [f64]) {
        match self {
            FeatureOperator::Dense(f) => f.apply_transpose(r, out),
            FeatureOperator::Ridge1d(f) => f.apply_transpose(r, out),
        }
    }
}

/// Entries stored row-major when `n·K ≤ DENSE_STORE_LIMIT`, recomputed otherwise.
pub struct DenseFeatures {
    n: usize,
    k: u32,
    x: Vec<Vec<f64>>,
    dirs: Vec<Vec<f64>>,
    table: Option<Vec<f64>>,
}

pub const DENSE_STORE_LIMIT: usize = 1 << 24;

impl DenseFeatures {
    pub fn new(x: &[Vec<f64>], dirs: &[Vec<f64>], k: u32) -> Self {
        let n = x.len();
        let cols = dirs.len();
        let mut f = Self { n, k, x: x.to_vec(), dirs: dirs.to_vec(), table: None };
        if n * cols <= DENSE_STORE_LIMIT {
            let mut table = vec![0.0; n * cols];
            if cols > 0 {
                table.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
                    for (j, e) in row.iter_mut().enumerate() {
                        *e = f.entry(i, j);
                    }
                });
            }
            f.table = Some(table);
        }
        f
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        let x = &self.x[i];
        let v = &self.dirs[j];
        let d = x.len();
        relu_pow(self.k, x.iter().zip(v).map(|(p, q)| p * q).sum::<f64>() + v[d])
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let cols = self.dirs.len();
        for (i, o) in out.iter_mut().enumerate() {
            *o = match &self.table {
                Some(t) => t[i * cols..(i + 1) * cols].iter().zip(w).map(|(a, b)| a * b).sum(),
                None => (0..cols).filter(|&j| w[j] != 0.0).map(|j| self.entry(i, j) * w[j]).sum(),
            };
        }
    }

    fn apply_transpose(&self, r: &[f64], out: &mut [f64]) {
        let cols = self.dirs.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &ri) in r.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            match &self.table {
                Some(t) => {
                    for (o, e) in out.iter_mut().zip(&t[i * cols..(i + 1) * cols]) {
                        *o += e * ri;
                    }
                }
                None => {
                    for (j, o) in out.iter_mut().enumerate() {
                        *o += self.entry(i, j) * ri;
                    }
                }
            }
        }
    }
}

/// One-dimensional features in `O((n + K)(k + 1))` per product.
///
/// Unit `j` is `σ_k(a_j x + b_j)`, active on one side of its knot
/// `t_j = −b_j / a_j`. Expanding `(a x + b)^k` in powers of `x` turns both
/// products into prefix sums over knots sorted against the sorted samples.
pub struct RidgeFeatures1d {
    k: u32,
    x: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    /// `coef[j][p] = C(k, p) a_j^p b_j^{k−p}`.
    coef: Vec<Vec<f64>>,
    /// Units with `a > 0` / `a < 0`, each sorted by knot.
    rising: Vec<usize>,
    falling: Vec<usize>,
    /// Units with `a = 0, b > 0`, active everywhere.
    flat: Vec<usize>,
    /// Samples sorted ascending.
    order: Vec<usize>,
    /// For sample `i`: number of rising knots `< x_i`, and number of falling knots `≤ x_i`.
    rising_cut: Vec<usize>,
    falling_cut: Vec<usize>,
    /// For unit `j`: number of sorted samples on the inactive side of its knot.
    sample_cut: Vec<usize>,
}

impl RidgeFeatures1d {
    pub fn new(x: &[Vec<f64>], dirs: &[Vec<f64>], k: u32) -> Self {
        let xs: Vec<f64> = x.iter().map(|p| p[0]).collect();
        let a: Vec<f64> = dirs.iter().map(|v| v[0]).collect();
        let b: Vec<f64> = dirs.iter().map(|v| v[1]).collect();
        let binom = binomials(k);
        let coef = a
            .iter()
            .zip(&b)
            .map(|(&aj, &bj)| (0..=k as usize).map(|p| binom[p] * aj.powi(p as i32) * bj.powi((k as usize - p) as i32)).collect())
            .collect();
        let knot = |j: usize| -b[j] / a[j];
        let mut rising: Vec<usize> = (0..a.len()).filter(|&j| a[j] > 0.0).collect();
        let mut falling: Vec<usize> = (0..a.len()).filter(|&j| a[j] < 0.0).collect();
        let flat = (0..a.len()).filter(|&j| a[j] == 0.0 && b[j] > 0.0).collect();
        rising.sort_by(|&i, &j| knot(i).total_cmp(&knot(j)));
        falling.sort_by(|&i, &j| knot(i).total_cmp(&knot(j)));
        let rk: Vec<f64> = rising.iter().map(|&j| knot(j)).collect();
        let fk: Vec<f64> = falling.iter().map(|&j| knot(j)).collect();
        let rising_cut = xs.iter().map(|&xi| rk.partition_point(|&t| t < xi)).collect();
        let falling_cut = xs.iter().map(|&xi| fk.partition_point(|&t| t <= xi)).collect();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
        let sample_cut = (0..a.len())
            .map(|j| {
                if a[j] > 0.0 {
                    sorted.partition_point(|&v| v <= knot(j))
                } else if a[j] < 0.0 {
                    sorted.partition_point(|&v| v < knot(j))
                } else {
                    0
                }
            })
            .collect();
        Self { k, x: xs, a, b, coef, rising, falling, flat, order, rising_cut, falling_cut, sample_cut }
    }

    fn powers(&self, x: f64, out: &mut [f64]) {
        let mut p = 1.0;
        for o in out.iter_mut() {
            *o = p;
            p *= x;
        }
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let m = self.k as usize + 1;
        let prefix = |units: &[usize]| {
            let mut acc = vec![0.0; (units.len() + 1) * m];
            for (r, &j) in units.iter().enumerate() {
                for p in 0..m {
                    acc[(r + 1) * m + p] = acc[r * m + p] + w[j] * self.coef[j][p];
                }
            }
            acc
        };
        let rise = prefix(&self.rising);
        let fall = prefix(&self.falling);
        let nf = self.falling.len();
        let flat: f64 = self.flat.iter().map(|&j| w[j] * relu_pow(self.k, self.b[j])).sum();
        let mut pw = vec![0.0; m];
        for (i, o) in out.iter_mut().enumerate() {
            self.powers(self.x[i], &mut pw);
            let rc = self.rising_cut[i];
            let fc = self.falling_cut[i];
            let mut s = flat;
            for p in 0..m {
                s += pw[p] * (rise[rc * m + p] + fall[nf * m + p] - fall[fc * m + p]);
            }
            *o = s;
        }
    }

    fn apply_transpose(&self, r: &[f64], out: &mut [f64]) {
        let m = self.k as usize + 1;
        let n = self.x.len();
        let mut acc = vec![0.0; (n + 1) * m];
        let mut pw = vec![0.0; m];
        for (q, &i) in self.order.iter().enumerate() {
            self.powers(self.x[i], &mut pw);
            for p in 0..m {
                acc[(q + 1) * m + p] = acc[q * m + p] + r[i] * pw[p];
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            let c = self.sample_cut[j];
            let (lo, hi) = if self.a[j] > 0.0 {
                (c, n)
            } else if self.a[j] < 0.0 {
                (0, c)
            } else if self.b[j] > 0.0 {
                (0, n)
            } else {
                (0, 0)
            };
            *o = (0..m).map(|p| self.coef[j][p] * (acc[hi * m + p] - acc[lo * m + p])).sum();
        }
    }
}

fn binomials(k: u32) -> Vec<f64> {
    let k = k as usize;
    let mut row = vec![1.0; k + 1];
    for p in 1..k {
        row[p] = row[p - 1] * (k + 1 - p) as f64 / p as f64;
    }
    row
}

#[derive(Debug, Clone, Serialize)]
pub struct ErmFit {
    /// Units with nonzero weight only.
    pub net: ShallowNet,
    pub objective: f64,
    pub zero_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_map: f64,
}

pub fn erm_fit(data: &Dataset, cfg: &ErmConfig) -> Result<ErmFit> {
    cfg.validate()?;
    let dirs = sample_dictionary(data.d(), cfg.dictionary_size, cfg.seed);
    erm_fit_dictionary(data, cfg, &dirs)
}

/// ERM over an explicit dictionary of unit directions.
pub fn erm_fit_dictionary(data: &Dataset, cfg: &ErmConfig, dirs: &[Vec<f64>]) -> Result<ErmFit> {
    cfg.validate()?;
    let d = data.d();
    if data.len() < 2 || dirs.iter().any(|v| v.len() != d + 1) {
        return Err(Error::InvalidArgument("dataset and dictionary dimensions disagree".into()));
    }
    let op = FeatureOperator::new(&data.x, dirs, cfg.k);
    let sol = fista(&op, &data.y, cfg.budget, cfg.max_iter, cfg.tol);
    let units = sol
        .w
        .iter()
        .zip(dirs)
        .filter(|(w, _)| **w != 0.0)
        .map(|(&a, v)| Unit { a, v: v.clone() })
        .collect();
    Ok(ErmFit {
        net: ShallowNet::new(cfg.k, d, units)?.with_seed(cfg.seed),
        objective: sol.objective,
        zero_objective: sol.zero_objective,
        iterations: sol.iterations,
        converged: sol.converged,
        gradient_map: sol.gradient_map,
    })
}

struct Solution {
    w: Vec<f64>,
    objective: f64,
    zero_objective: f64,
    iterations: usize,
    converged: bool,
    gradient_map: f64,
}

fn mse(pred: &[f64], y: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / y.len() as f64
}

/// Lipschitz estimate of `∇F` by power iteration on `(2/n) ΦᵀΦ`.
fn lipschitz_estimate(op: &FeatureOperator) -> f64 {
    let (n, cols) = (op.rows(), op.cols());
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut u = vec![0.0; n];
    let mut lam = 0.0;
    for _ in 0..30 {
        op.apply(&v, &mut u);
        op.apply_transpose(&u, &mut v);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(nv > 0.0) {
            break;
        }
        lam = nv;
        v.iter_mut().for_each(|x| *x /= nv);
    }
    (2.0 * lam / n as f64).max(1e-12)
}

/// Accelerated projected gradient with backtracking and adaptive restart
/// for `min (1/n)‖Φw − y‖²` over the ℓ1 ball.
fn fista(op: &FeatureOperator, y: &[f64], radius: f64, max_iter: usize, tol: f64) -> Solution {
    let (n, cols) = (op.rows(), op.cols());
    let zero_objective = y.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let mut lip = lipschitz_estimate(op);
    let mut w = vec![0.0; cols];
    let mut pw = vec![0.0; n];
    let mut z = w.clone();
    let mut pz = pw.clone();
    let mut t: f64 = 1.0;
    let mut best = (zero_objective, w.clone());
    let mut grad = vec![0.0; cols];
    let mut resid = vec![0.0; n];
    let mut cand = vec![0.0; cols];
    let mut pc = vec![0.0; n];
    let mut gm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        for i in 0..n {
            resid[i] = pz[i] - y[i];
        }
        let fz = resid.iter().map(|r| r * r).sum::<f64>() / n as f64;
        op.apply_transpose(&resid, &mut grad);
        grad.iter_mut().for_each(|g| *g *= 2.0 / n as f64);
        let fc = loop {
            for j in 0..cols {
                cand[j] = z[j] - grad[j] / lip;
            }
            project_l1(&mut cand, radius);
            op.apply(&cand, &mut pc);
            let fc = mse(&pc, y);
            let mut lin = 0.0;
            let mut sq = 0.0;
            for j in 0..cols {
                let s = cand[j] - z[j];
                lin += grad[j] * s;
                sq += s * s;
            }
            if fc <= fz + lin + 0.5 * lip * sq + 1e-15 * fz.max(1e-300) || lip > 1e300 {
                break fc;
            }
            lip *= 2.0;
        };
        gm = lip * cand.iter().zip(&z).map(|(c, q)| (c - q).powi(2)).sum::<f64>().sqrt();
        if fc < best.0 {
            best = (fc, cand.clone());
        }
        if gm <= tol {
            converged = true;
            break;
        }
        let restart: f64 = z.iter().zip(&cand).zip(&w).map(|((q, c), o)| (q - c) * (c - o)).sum();
        let beta = if restart > 0.0 {
            t = 1.0;
            0.0
        } else {
            let tn: f64 = 0.5 * (1.0 + (1.0f64 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / tn;
            t = tn;
            beta
        };
        for j in 0..cols {
            z[j] = cand[j] + beta * (cand[j] - w[j]);
        }
        for i in 0..n {
            pz[i] = pc[i] + beta * (pc[i] - pw[i]);
        }
        std::mem::swap(&mut w, &mut cand);
        std::mem::swap(&mut pw, &mut pc);
    }
    let (objective, w) = best;
    Solution { w, objective, zero_objective, iterations, converged, gradient_map: gm }
}

/// `T_B f(x)`: the prediction clamped to `[−B, B]`.
pub fn truncate_predict(net: &ShallowNet, b: f64, x: &[f64]) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation level must be > 0, got {b}")));
    }
    Ok(eval_shallow(net, x)?.clamp(-b, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

pub const MIN_MC_SAMPLES: usize = 1000;

/// Monte-Carlo `‖T_B f − h‖²` under the uniform law on `B^d`. `B = ∞`
/// gives the untruncated risk on the same samples.
pub fn excess_risk(net: &ShallowNet, b: f64, model: &RegressionModel, n_mc: usize, seed: u64) -> Result<RiskEstimate> {
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation level must be > 0, got {b}")));
    }
    excess_risk_of(|x| net.eval(x).clamp(-b, b), model, n_mc, seed)
}

pub fn excess_risk_of(f: impl Fn(&[f64]) -> f64, model: &RegressionModel, n_mc: usize, seed: u64) -> Result<RiskEstimate> {
    if n_mc < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!("excess risk needs n_mc >= {MIN_MC_SAMPLES}, got {n_mc}")));
    }
    let mut rng = seeds::rng(seed);
    let gaps: Vec<f64> = (0..n_mc)
        .map(|_| {
            let x = uniform_ball(&mut rng, model.d());
            (f(&x) - model.h(&x)).powi(2)
        })
        .collect();
    let mean = gaps.iter().sum::<f64>() / n_mc as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n_mc - 1) as f64;
    Ok(RiskEstimate { estimate: mean, stderr: (var / n_mc as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::TargetFunction;
    use crate::regression::data::{generate_data, Truth};
    use proptest::prelude::*;

    fn dense_ref(x: &[Vec<f64>], dirs: &[Vec<f64>], k: u32) -> Vec<Vec<f64>> {
        let d = x[0].len();
        x.iter()
            .map(|p| dirs.iter().map(|v| relu_pow(k, p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() + v[d])).collect())
            .collect()
    }

    #[test]
    fn ridge_operator_matches_dense() {
        for k in 0..=2 {
            let mut rng = seeds::rng(40 + k as u64);
            let x: Vec<Vec<f64>> = (0..57).map(|_| uniform_ball(&mut rng, 1)).collect();
            let mut dirs = sample_dictionary(1, 80, 7 + k as u64);
            dirs.push(vec![0.0, 1.0]);
            dirs.push(vec![0.0, -1.0]);
            let table = dense_ref(&x, &dirs, k);
            let fast = FeatureOperator::Ridge1d(RidgeFeatures1d::new(&x, &dirs, k));
            let dense = FeatureOperator::Dense(DenseFeatures::new(&x, &dirs, k));
            let w: Vec<f64> = (0..dirs.len()).map(|j| ((j * 37 % 11) as f64 - 5.0) / 7.0).collect();
            let r: Vec<f64> = (0..x.len()).map(|i| ((i * 13 % 7) as f64 - 3.0) / 5.0).collect();
            let mut o1 = vec![0.0; x.len()];
            let mut o2 = o1.clone();
            fast.apply(&w, &mut o1);
            dense.apply(&w, &mut o2);
            for i in 0..x.len() {
                let want: f64 = table[i].iter().zip(&w).map(|(a, b)| a * b).sum();
                assert!((o1[i] - want).abs() < 1e-12 && (o2[i] - want).abs() < 1e-12, "k={k} i={i}");
            }
            let mut g1 = vec![0.0; dirs.len()];
            let mut g2 = g1.clone();
            fast.apply_transpose(&r, &mut g1);
            dense.apply_transpose(&r, &mut g2);
            for j in 0..dirs.len() {
                let want: f64 = (0..x.len()).map(|i| table[i][j] * r[i]).sum();
                assert!((g1[j] - want).abs() < 1e-12 && (g2[j] - want).abs() < 1e-12, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn unstored_dense_matches_stored() {
        let mut rng = seeds::rng(3);
        let x: Vec<Vec<f64>> = (0..20).map(|_| uniform_ball(&mut rng, 2)).collect();
        let dirs = sample_dictionary(2, 15, 4);
        let stored = DenseFeatures::new(&x, &dirs, 1);
        let lazy = DenseFeatures { table: None, ..DenseFeatures::new(&x, &dirs, 1) };
        let w: Vec<f64> = (0..15).map(|j| j as f64 - 7.0).collect();
        let (mut a, mut b) = (vec![0.0; 20], vec![0.0; 20]);
        stored.apply(&w, &mut a);
        lazy.apply(&w, &mut b);
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
        let (mut ga, mut gb) = (vec![0.0; 15], vec![0.0; 15]);
        stored.apply_transpose(&a, &mut ga);
        lazy.apply_transpose(&a, &mut gb);
        assert!(ga.iter().zip(&gb).all(|(p, q)| (p - q).abs() < 1e-9));
    }

    proptest! {
        #[test]
        fn l1_projection_is_feasible_and_optimal(w in proptest::collection::vec(-5.0f64..5.0, 1..40), r in 0.01f64..10.0) {
            let mut p = w.clone();
            project_l1(&mut p, r);
            let l1: f64 = p.iter().map(|v| v.abs()).sum();
            prop_assert!(l1 <= r * (1.0 + 1e-9));
            let w_l1: f64 = w.iter().map(|v| v.abs()).sum();
            if w_l1 <= r {
                prop_assert_eq!(&p, &w);
            } else {
                prop_assert!((l1 - r).abs() < 1e-9 * r.max(1.0));
                // Optimality: w − p lies in the normal cone, so every feasible
                // vertex ±r e_j is no closer to w.
                let dist = |q: &[f64]| q.iter().zip(&w).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                let dp = dist(&p);
                for j in 0..w.len() {
                    let mut e = vec![0.0; w.len()];
                    e[j] = r * w[j].signum();
                    prop_assert!(dp <= dist(&e) + 1e-9);
                }
            }
        }
    }

    fn model_from_net(net: ShallowNet, noise: f64) -> RegressionModel {
        RegressionModel::new(Truth::Net(net), noise).unwrap()
    }

    #[test]
    fn zero_response_gives_zero_net() {
        let t = TargetFunction::new("zero", 1, f64::INFINITY, |_| 0.0).unwrap();
        let data = generate_data(&RegressionModel::new(Truth::Target(t), 0.0).unwrap(), 50, 1).unwrap();
        let fit = erm_fit(&data, &ErmConfig::new(30, 1.0, 1.0, 2)).unwrap();
        assert!(fit.net.is_empty());
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn realizable_instances_reach_zero() {
        for d in [1, 2] {
            let dirs = sample_dictionary(d, 25, 11 + d as u64);
            let truth = ShallowNet::new(1, d, vec![Unit { a: 0.8, v: dirs[3].clone() }]).unwrap();
            let data = generate_data(&model_from_net(truth, 0.0), 300, 5).unwrap();
            let cfg = ErmConfig { max_iter: 20_000, ..ErmConfig::new(25, 1.0, 2.0, 0) };
            let fit = erm_fit_dictionary(&data, &cfg, &dirs).unwrap();
            assert!(fit.objective <= 1e-10, "d={d} objective {}", fit.objective);
        }
    }

    #[test]
    fn budget_and_zero_net_bound_hold() {
        for (d, seed) in [(1, 1u64), (2, 2), (3, 3)] {
            let truth = Truth::Target(TargetFunction::new("wave", d, f64::INFINITY, |x| (3.0 * x[0]).sin()).unwrap());
            let model = RegressionModel::new(truth, 0.5).unwrap();
            let data = generate_data(&model, 200, seed).unwrap();
            let cfg = ErmConfig::new(60, 0.7, 1.0, seed);
            let fit = erm_fit(&data, &cfg).unwrap();
            assert!(fit.net.variation() <= 0.7 * (1.0 + 1e-9));
            assert!(fit.objective <= fit.zero_objective);
        }
    }

    #[test]
    fn truncation_clamps() {
        let net = ShallowNet::new(1, 1, vec![Unit { a: 2.0, v: vec![0.0, 1.0] }]).unwrap();
        assert_eq!(truncate_predict(&net, 3.0, &[0.5]).unwrap(), 2.0);
        assert_eq!(truncate_predict(&net, 1.0, &[0.5]).unwrap(), 1.0);
        let neg = ShallowNet::new(1, 1, vec![Unit { a: -3.0, v: vec![0.0, 1.0] }]).unwrap();
        assert_eq!(truncate_predict(&neg, 1.0, &[0.0]).unwrap(), -1.0);
        assert!(truncate_predict(&net, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn excess_risk_closed_forms() {
        let c = 0.3;
        let h = TargetFunction::new("c", 2, f64::INFINITY, move |_| c).unwrap();
        let model = RegressionModel::new(Truth::Target(h), 0.0).unwrap();
        let r = excess_risk(&ShallowNet::empty(1, 2), 1.0, &model, 2000, 1).unwrap();
        assert!((r.estimate - c * c).abs() < 1e-12 && r.stderr < 1e-12, "{r:?}");

        let zero = TargetFunction::new("zero", 1, f64::INFINITY, |_| 0.0).unwrap();
        let model = RegressionModel::new(Truth::Target(zero), 0.0).unwrap();
        let r = excess_risk_of(|x| x[0], &model, 20_000, 2).unwrap();
        assert!((r.estimate - 1.0 / 3.0).abs() < 3.0 * r.stderr, "{r:?}");
        assert!(excess_risk_of(|x| x[0], &model, 999, 2).is_err());
    }
}
