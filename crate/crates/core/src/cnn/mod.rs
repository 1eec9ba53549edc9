//! Exact compilation of shallow ReLU networks into sparse deep CNNs.
//!
//! A shallow net `f(x) = Σ c_i σ(a_iᵀx + b_i) + c_0` is rewritten through
//! the stacked sequence `v` of its inner weights. Factoring
//! `v = w^{(L−1)} ∗ ⋯ ∗ w^{(0)}` into filters supported on `{0, …, s}` makes
//! the product of the Toeplitz matrices `A^{w^{(ℓ)}}` contain every `a_iᵀ`
//! as a row. Large constant biases keep the hidden pre-activations positive
//! so the ReLUs act as the identity until the last convolutional layer.

mod factor;
pub mod format;

pub use factor::{
    convolve, convolve_all, factor_filter, polynomial_roots, reconstruction_residual, Factorization,
    Filter, MAX_FACTOR_LEN,
};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::ShallowNet;
use crate::sampling::uniform_ball;
use crate::seeds;

/// `f(x) = Σ c_i σ(a_iᵀx + b_i) + c_0` with the plain ReLU `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShallowForm {
    pub d: usize,
    pub inner: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub outer: Vec<f64>,
    pub c0: f64,
}

impl ShallowForm {
    /// Splits each homogeneous direction `v_i ∈ S^d` into `a_i = v_i[..d]`,
    /// `b_i = v_i[d]`. Only ReLU (`k = 1`) nets compile.
    pub fn from_net(net: &ShallowNet) -> Result<Self> {
        if net.k() != 1 {
            return Err(Error::InvalidArgument(format!(
                "CNN compilation needs k = 1 (ReLU), got k = {}",
                net.k()
            )));
        }
        let d = net.d();
        Ok(Self {
            d,
            inner: net.units().iter().map(|u| u.v[..d].to_vec()).collect(),
            bias: net.units().iter().map(|u| u.v[d]).collect(),
            outer: net.units().iter().map(|u| u.a).collect(),
            c0: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.inner
            .iter()
            .zip(self.bias.iter().zip(&self.outer))
            .map(|(a, (b, c))| {
                let t = a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b;
                c * t.max(0.0)
            })
            .sum::<f64>()
            + self.c0
    }
}

/// The length-`Nd` sequence with `v_{(i−1)d + (d−1−j)} = a_i[j]`, i.e.
/// `(v_{Nd−1}, …, v_0) = (a_Nᵀ, …, a_1ᵀ)`.
pub fn stack_directions(form: &ShallowForm) -> Result<Vec<f64>> {
    if form.is_empty() {
        return Err(Error::InvalidArgument("cannot stack an empty network".into()));
    }
    let d = form.d;
    let mut v = vec![0.0; form.len() * d];
    for (i, a) in form.inner.iter().enumerate() {
        for j in 0..d {
            v[i * d + (d - 1 - j)] = a[j];
        }
    }
    Ok(v)
}

/// Smallest depth with `L ≥ ⌊Nd/(s − 1) + 1⌋`.
pub fn default_depth(n_units: usize, d: usize, s: usize) -> usize {
    (n_units * d) / (s - 1) + 1
}

/// Hidden-layer bias `(head_1..head_s, middle, …, middle, tail_1..tail_s)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockBias {
    pub head: Vec<f64>,
    pub middle: f64,
    pub tail: Vec<f64>,
}

impl BlockBias {
    /// Bias of the given width; when `width < 2s` the head takes
    /// precedence over the tail.
    pub fn expand(&self, width: usize) -> Vec<f64> {
        let s = self.tail.len();
        (0..width)
            .map(|i| {
                if i < self.head.len() {
                    self.head[i]
                } else if i + s >= width {
                    self.tail[i + s - width]
                } else {
                    self.middle
                }
            })
            .collect()
    }
}

/// A network in the class `CNN(s, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepCNN {
    s: usize,
    d: usize,
    filters: Vec<Filter>,
    hidden_biases: Vec<BlockBias>,
    last_bias: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
    /// `B^{(ℓ)}` for `ℓ ≤ L − 2`; empty for networks read from text.
    positivity: Vec<f64>,
}

impl DeepCNN {
    pub fn from_parts(
        s: usize,
        d: usize,
        filters: Vec<Filter>,
        hidden_biases: Vec<BlockBias>,
        last_bias: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Result<Self> {
        let l = filters.len();
        if l == 0 || d == 0 || s == 0 {
            return Err(Error::InvalidArgument("CNN needs L, d, s >= 1".into()));
        }
        if filters.iter().any(|f| f.s() != s) {
            return Err(Error::InvalidArgument(format!("every filter must have {} taps", s + 1)));
        }
        if hidden_biases.len() != l - 1
            || hidden_biases.iter().any(|b| b.head.len() != s || b.tail.len() != s)
        {
            return Err(Error::InvalidArgument(format!(
                "CNN needs {} block biases with {s}-entry head and tail",
                l - 1
            )));
        }
        let width = d + l * s;
        if last_bias.len() != width || output_weights.len() != width {
            return Err(Error::InvalidArgument(format!(
                "last bias and output weights need width {width}"
            )));
        }
        Ok(Self {
            s,
            d,
            filters,
            hidden_biases,
            last_bias,
            output_weights,
            output_bias,
            positivity: Vec::new(),
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn depth(&self) -> usize {
        self.filters.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    pub fn filters_mut(&mut self) -> &mut [Filter] {
        &mut self.filters
    }

    pub fn hidden_biases(&self) -> &[BlockBias] {
        &self.hidden_biases
    }

    pub fn last_bias(&self) -> &[f64] {
        &self.last_bias
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    pub fn positivity(&self) -> &[f64] {
        &self.positivity
    }

    /// `N_ℓ = d + ℓs` for `ℓ = 0..=L`.
    pub fn widths(&self) -> Vec<usize> {
        (0..=self.depth()).map(|l| self.d + l * self.s).collect()
    }

    /// Full bias vector of layer `ℓ`.
    pub fn bias(&self, layer: usize) -> Vec<f64> {
        let width = self.d + (layer + 1) * self.s;
        if layer + 1 < self.depth() {
            self.hidden_biases[layer].expand(width)
        } else {
            self.last_bias.clone()
        }
    }

    /// Stored free parameters: taps, `2s + 1` per block bias, the full last
    /// bias, the output weights and the output bias.
    pub fn param_count(&self) -> usize {
        self.filters.iter().map(|f| f.taps().len()).sum::<usize>()
            + self.hidden_biases.iter().map(|b| b.head.len() + 1 + b.tail.len()).sum::<usize>()
            + self.last_bias.len()
            + self.output_weights.len()
            + 1
    }

    /// Pre-activations of every layer at `x`.
    pub fn pre_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut h = x.to_vec();
        let mut out = Vec::with_capacity(self.depth());
        for (l, f) in self.filters.iter().enumerate() {
            let mut z = toeplitz_apply(f.taps(), &h);
            for (zi, bi) in z.iter_mut().zip(self.bias(l)) {
                *zi += bi;
            }
            h = z.iter().map(|t| t.max(0.0)).collect();
            out.push(z);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut h = x.to_vec();
        for (l, f) in self.filters.iter().enumerate() {
            let mut z = toeplitz_apply(f.taps(), &h);
            for (zi, bi) in z.iter_mut().zip(self.bias(l)) {
                *zi = (*zi + bi).max(0.0);
            }
            h = z;
        }
        h.iter().zip(&self.output_weights).map(|(a, b)| a * b).sum::<f64>() + self.output_bias
    }
}

/// `A^w h` with `(A^w)_{rc} = w_{r−c}`, shape `(D + s) × D`.
pub fn toeplitz_apply(w: &[f64], h: &[f64]) -> Vec<f64> {
    convolve(w, h)
}

/// Dense `A^w` of shape `(cols + s) × cols`.
pub fn toeplitz_matrix(w: &[f64], cols: usize) -> DMatrix<f64> {
    let s = w.len() - 1;
    DMatrix::from_fn(cols + s, cols, |r, c| if r >= c && r - c <= s { w[r - c] } else { 0.0 })
}

/// Builds the CNN realizing `form` from filters whose convolution is the
/// stacked inner-weight sequence.
///
/// `B^{(ℓ)} = 1 + max_i ‖row_i T^{(ℓ)}‖₂` for the cumulative products
/// `T^{(ℓ)} = A^{w^{(ℓ)}} ⋯ A^{w^{(0)}}`, so `T^{(ℓ)}x + B^{(ℓ)}·1 ≥ 1` on
/// `B^d`. Hidden biases are `B^{(ℓ)}·1 − A^{w^{(ℓ)}} B^{(ℓ−1)}·1`. Row
/// `id − 1` of the last layer carries `a_iᵀx + b_i`.
pub fn assemble_cnn(filters: Vec<Filter>, form: &ShallowForm, s: usize) -> Result<DeepCNN> {
    let l = filters.len();
    let d = form.d;
    if l == 0 {
        return Err(Error::InvalidArgument("assembly needs at least one filter".into()));
    }
    if filters.iter().any(|f| f.s() != s) {
        return Err(Error::InvalidArgument(format!("every filter must have {} taps", s + 1)));
    }
    let width = d + l * s;
    if form.len() * d > width {
        return Err(Error::InvalidArgument(format!(
            "{} units need width {} but the CNN has {width}",
            form.len(),
            form.len() * d
        )));
    }
    let mut t = DMatrix::<f64>::identity(d, d);
    let mut prev_const = 0.0;
    let mut positivity = Vec::with_capacity(l.saturating_sub(1));
    let mut hidden_biases = Vec::with_capacity(l.saturating_sub(1));
    let mut last_offset = Vec::new();
    for (li, f) in filters.iter().enumerate() {
        let cols = d + li * s;
        let a = toeplitz_matrix(f.taps(), cols);
        t = &a * &t;
        let offset: Vec<f64> = (a * DVector::from_element(cols, prev_const)).iter().copied().collect();
        if li + 1 < l {
            let big = 1.0
                + t.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
            let b: Vec<f64> = offset.iter().map(|o| big - o).collect();
            let rows = b.len();
            let tol = 1e-12 * (big + offset.iter().fold(0.0f64, |m, o| m.max(o.abs())));
            // A layer narrower than 2s + 1 only occurs first, where the
            // bias is the constant B^{(0)}.
            let block = if rows > 2 * s {
                let middle = b[s];
                if b[s..rows - s].iter().any(|x| (x - middle).abs() > tol) {
                    return Err(Error::Numerical("hidden bias lost its block form".into()));
                }
                BlockBias { head: b[..s].to_vec(), middle, tail: b[rows - s..].to_vec() }
            } else {
                if b.iter().any(|x| (x - big).abs() > tol) {
                    return Err(Error::Numerical("narrow hidden bias is not constant".into()));
                }
                BlockBias { head: vec![big; s], middle: big, tail: vec![big; s] }
            };
            hidden_biases.push(block);
            positivity.push(big);
            prev_const = big;
        } else {
            last_offset = offset;
        }
    }
    let mut last_bias: Vec<f64> = last_offset.iter().map(|o| -o).collect();
    let mut output_weights = vec![0.0; width];
    for i in 0..form.len() {
        let r = (i + 1) * d - 1;
        last_bias[r] = form.bias[i] - last_offset[r];
        output_weights[r] = form.outer[i];
    }
    let mut cnn = DeepCNN::from_parts(s, d, filters, hidden_biases, last_bias, output_weights, form.c0)?;
    cnn.positivity = positivity;
    audit_positivity(&cnn, 1000, 0xa0d17)?;
    Ok(cnn)
}

fn audit_positivity(cnn: &DeepCNN, points: usize, seed: u64) -> Result<()> {
    let mut rng = seeds::rng(seed);
    let xs: Vec<Vec<f64>> = (0..points).map(|_| uniform_ball(&mut rng, cnn.d())).collect();
    let worst = xs
        .par_iter()
        .map(|x| {
            let pre = cnn.pre_activations(x);
            pre[..pre.len() - 1].iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v))
        })
        .reduce(|| f64::INFINITY, f64::min);
    if worst < 1.0 - 1e-9 {
        return Err(Error::Numerical(format!(
            "hidden pre-activation {worst} below 1 at an audit point"
        )));
    }
    Ok(())
}

/// Result of [`compile_shallow`].
#[derive(Debug, Clone)]
pub struct Compiled {
    pub cnn: DeepCNN,
    pub form: ShallowForm,
    pub residual: f64,
}

/// Stacks, factors and assembles. `depth` defaults to [`default_depth`].
pub fn compile_shallow(net: &ShallowNet, s: usize, depth: Option<usize>) -> Result<Compiled> {
    compile_form(&ShallowForm::from_net(net)?, s, depth)
}

pub fn compile_form(form: &ShallowForm, s: usize, depth: Option<usize>) -> Result<Compiled> {
    if s < 2 {
        return Err(Error::InvalidArgument(format!("s must be >= 2, got {s}")));
    }
    let layers = depth.unwrap_or_else(|| default_depth(form.len().max(1), form.d, s));
    if form.is_empty() {
        let filters = vec![Filter::delta(s); layers];
        let cnn = assemble_cnn(filters, form, s)?;
        return Ok(Compiled { cnn, form: form.clone(), residual: 0.0 });
    }
    let v = stack_directions(form)?;
    let fac = factor_filter(&v, s, layers)?;
    let cnn = assemble_cnn(fac.filters, form, s)?;
    Ok(Compiled { cnn, form: form.clone(), residual: fac.residual })
}

/// A generic deep network: hidden layers `σ(A x + b)` then an affine output.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepNetGeneric {
    layers: Vec<(DMatrix<f64>, DVector<f64>)>,
}

impl DeepNetGeneric {
    /// The last entry is the output layer and must have one row.
    pub fn new(layers: Vec<(DMatrix<f64>, DVector<f64>)>) -> Result<Self> {
        let Some(last) = layers.last() else {
            return Err(Error::InvalidArgument("network needs an output layer".into()));
        };
        if last.0.nrows() != 1 {
            return Err(Error::InvalidArgument("output layer must have one row".into()));
        }
        for (i, (a, b)) in layers.iter().enumerate() {
            if a.nrows() != b.len() {
                return Err(Error::InvalidArgument(format!("layer {i}: bias length mismatch")));
            }
            if i > 0 && layers[i - 1].0.nrows() != a.ncols() {
                return Err(Error::InvalidArgument(format!("layer {i}: input width mismatch")));
            }
        }
        Ok(Self { layers })
    }

    /// One hidden layer with rows `(a_i, b_i)` and output `(c, c_0)`.
    pub fn from_shallow(form: &ShallowForm) -> Result<Self> {
        let n = form.len();
        let d = form.d;
        let a = DMatrix::from_fn(n, d, |i, j| form.inner[i][j]);
        let b = DVector::from_column_slice(&form.bias);
        let c = DMatrix::from_row_slice(1, n, &form.outer);
        Self::new(vec![(a, b), (c, DVector::from_element(1, form.c0))])
    }

    pub fn from_cnn(cnn: &DeepCNN) -> Result<Self> {
        let mut layers = Vec::with_capacity(cnn.depth() + 1);
        for (l, f) in cnn.filters().iter().enumerate() {
            let a = toeplitz_matrix(f.taps(), cnn.d() + l * cnn.s());
            layers.push((a, DVector::from_vec(cnn.bias(l))));
        }
        let out = DMatrix::from_row_slice(1, cnn.output_weights().len(), cnn.output_weights());
        layers.push((out, DVector::from_element(1, cnn.output_bias())));
        Self::new(layers)
    }

    pub fn layers(&self) -> &[(DMatrix<f64>, DVector<f64>)] {
        &self.layers
    }

    /// Input dimension `N_0`.
    pub fn input_dim(&self) -> usize {
        self.layers[0].0.ncols()
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Largest hidden width `W`.
    pub fn width(&self) -> usize {
        self.layers[..self.depth()].iter().map(|(a, _)| a.nrows()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut h = DVector::from_column_slice(x);
        let depth = self.depth();
        for (a, b) in &self.layers[..depth] {
            h = (a * h + b).map(|t| t.max(0.0));
        }
        let (a, b) = &self.layers[depth];
        (a * h + b)[0]
    }
}

/// Forward pass of either network type.
pub enum DeepNet<'a> {
    Cnn(&'a DeepCNN),
    Generic(&'a DeepNetGeneric),
}

pub fn eval_deep(net: DeepNet<'_>, x: &[f64]) -> f64 {
    match net {
        DeepNet::Cnn(c) => c.eval(x),
        DeepNet::Generic(g) => g.eval(x),
    }
}

/// Largest row 1-norm of `[A | b]`.
pub fn layer_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>() + b[i].abs())
        .fold(0.0, f64::max)
}

/// `κ(θ) = ‖(A^{(L)}, b^{(L)})‖ · Π_{ℓ<L} max{‖(A^{(ℓ)}, b^{(ℓ)})‖, 1}`.
pub fn kappa_norm(net: &DeepNetGeneric) -> f64 {
    let depth = net.depth();
    let hidden: f64 = net.layers[..depth].iter().map(|(a, b)| layer_norm(a, b).max(1.0)).product();
    let (a, b) = &net.layers[depth];
    layer_norm(a, b) * hidden
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n_points: usize,
    pub max_gap: f64,
    pub mean_gap: f64,
    /// `max|f_shallow|` over the points.
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Gap between the shallow source and a CNN at `n_points` uniform points of
/// `B^d`; passes when `max_gap ≤ tol · (1 + max|f_shallow|)`.
pub fn verify_equivalence(
    form: &ShallowForm,
    cnn: &DeepCNN,
    n_points: usize,
    seed: u64,
    tol: f64,
) -> Result<EquivalenceReport> {
    if form.d != cnn.d() {
        return Err(Error::InvalidArgument(format!(
            "shallow net has d = {} but the CNN has d = {}",
            form.d,
            cnn.d()
        )));
    }
    let mut rng = seeds::rng(seed);
    let xs: Vec<Vec<f64>> = (0..n_points).map(|_| uniform_ball(&mut rng, form.d)).collect();
    let pairs: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|x| {
            let f = form.eval(x);
            ((f - cnn.eval(x)).abs(), f.abs())
        })
        .collect();
    let max_gap = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let mean_gap = pairs.iter().map(|p| p.0).sum::<f64>() / n_points.max(1) as f64;
    let scale = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(EquivalenceReport {
        n_points,
        max_gap,
        mean_gap,
        scale,
        tol,
        pass: max_gap <= tol * (1.0 + scale),
    })
}
