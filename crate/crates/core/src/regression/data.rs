use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lift::TargetFunction;
use crate::network::ShallowNet;
use crate::sampling::uniform_ball;
use crate::seeds;

/// The regression function `h` of a model.
#[derive(Debug, Clone)]
pub enum Truth {
    Target(TargetFunction),
    Net(ShallowNet),
}

impl Truth {
    pub fn d(&self) -> usize {
        match self {
            Truth::Target(t) => t.d(),
            Truth::Net(n) => n.d(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Truth::Target(t) => t.eval_unchecked(x),
            Truth::Net(n) => n.eval(x),
        }
    }
}

/// `Y = h(X) + ε` with `X` uniform on `B^d` and `ε ~ N(0, V²)`.
#[derive(Debug, Clone)]
pub struct RegressionModel {
    truth: Truth,
    noise_std: f64,
}

pub const DEFAULT_NOISE: f64 = 0.5;

impl RegressionModel {
    pub fn new(truth: Truth, noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0) || !noise_std.is_finite() {
            return Err(Error::InvalidArgument(format!("noise std must be >= 0, got {noise_std}")));
        }
        Ok(Self { truth, noise_std })
    }

    pub fn truth(&self) -> &Truth {
        &self.truth
    }

    pub fn d(&self) -> usize {
        self.truth.d()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn h(&self, x: &[f64]) -> f64 {
        self.truth.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn d(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

pub fn generate_data(model: &RegressionModel, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 samples, got {n}")));
    }
    let mut rng = seeds::rng(seed);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = uniform_ball(&mut rng, model.d());
        let eps: f64 = noise.sample(&mut rng);
        y.push(model.h(&xi) + model.noise_std * eps);
        x.push(xi);
    }
    Ok(Dataset { x, y, seed })
}
