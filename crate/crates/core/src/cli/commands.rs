use std::path::PathBuf;

use rayon::prelude::*;

use super::{sibling, Artifacts, Command, Common, TargetArgs};
use crate::cnn::format::{fmt_f64, read_shallow, write_cnn, write_shallow};
use crate::cnn::{compile_shallow, verify_equivalence};
use crate::error::{Error, Result};
use crate::harmonics::{is_structural_zero, sigma_hat_closed, sigma_hat_quad_all, JacobiQuadrature};
use crate::kernelize::{build_density, GridSpec};
use crate::lift::{catalog_target, lift_to_sphere, Parity, SphereFunction, TargetFunction};
use crate::network::{ball_grid, discretize_mc, sup_error, sweep_approx, SweepPoint};
use crate::regression::{approx_rate, predict_rate, regression_sweep, Family, RegressionSpec, TargetClass};
use crate::seeds;

/// Tolerance of the CNN equivalence check, relative to `1 + max|f|`.
pub const CNN_GAP_TOL: f64 = 1e-6;

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    fn row(&mut self, cells: &[String]) {
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn extra_path(explicit: &Option<PathBuf>, common: &Common, suffix: &str) -> Option<PathBuf> {
    explicit.clone().or_else(|| common.out.as_ref().map(|o| sibling(o, suffix)))
}

pub fn dispatch(cmd: &Command, common: &Common) -> Result<Artifacts> {
    let seed = common.seed;
    let main = match cmd {
        Command::Spectrum(a) => spectrum(a.k, a.d, a.nmax, a.nodes)?,
        Command::Project(a) => project(&a.target, &a.m, seed)?,
        Command::ApproxSweep(a) => approx_sweep(&a.target, &a.m_list, a.n_list.as_deref(), a.trials, seed)?,
        Command::Discretize(a) => {
            let (csv, net) = discretize(&a.target, a.m, a.n_units, seed)?;
            let extra = extra_path(&a.net_out, common, ".net.txt").into_iter().map(|p| (p, net.clone())).collect();
            return Ok(Artifacts { main: csv, extra });
        }
        Command::CnnCompile(a) => {
            let text = std::fs::read_to_string(&a.input)?;
            let (csv, cnn) = cnn_compile(&text, a.s, a.depth, a.points, seed)?;
            let extra = extra_path(&a.cnn_out, common, ".cnn.txt").into_iter().map(|p| (p, cnn.clone())).collect();
            return Ok(Artifacts { main: csv, extra });
        }
        Command::Regress(a) => {
            let mut spec = RegressionSpec::new(a.family, a.class, a.d, a.alpha, a.n_list.clone(), a.trials);
            spec.noise = a.noise;
            spec.seed = seed;
            spec.budget = a.budget;
            spec.target = a.target.clone();
            spec.n_mc = a.n_mc;
            spec.max_iter = a.max_iter;
            regress(&spec)?
        }
        Command::PredictRates(a) => predict_rates(a.d, a.alpha)?,
        Command::Plot(a) => {
            let text = std::fs::read_to_string(&a.input)?;
            let pts = super::plot::read_columns(&text, &a.x, &a.y)?;
            super::plot::render_svg(&pts, &a.x, &a.y, a.loglog)?
        }
    };
    Ok(Artifacts { main, extra: Vec::new() })
}

pub fn spectrum(k: u32, d: usize, nmax: usize, nodes: Option<usize>) -> Result<String> {
    let count = nodes.unwrap_or((nmax + k as usize + 16).max(64));
    let quad = JacobiQuadrature::new(d, count)?;
    let quad_vals = sigma_hat_quad_all(k, d, nmax, &quad)?;
    let mut csv = Csv::new(&["n", "closed", "quad", "abs_diff", "is_zero"]);
    for (n, &q) in quad_vals.iter().enumerate() {
        let closed = match sigma_hat_closed(k, d, n) {
            Ok(v) => Some(v.value()),
            Err(Error::NoClosedForm { .. }) => None,
            Err(e) => return Err(e),
        };
        csv.row(&[
            n.to_string(),
            opt(closed),
            f(q),
            opt(closed.map(|c| (c - q).abs())),
            is_structural_zero(k, n).to_string(),
        ]);
    }
    Ok(csv.0)
}

fn load_target(t: &TargetArgs, seed: u64) -> Result<(TargetFunction, SphereFunction)> {
    let target = catalog_target(&t.target, t.d, t.alpha, t.k, seeds::derive(seed, &[0]))?;
    let lifted = lift_to_sphere(&target, t.k, Parity::for_activation(t.k))?;
    Ok((target, lifted))
}

pub fn project(t: &TargetArgs, ms: &[usize], seed: u64) -> Result<String> {
    let (target, lifted) = load_target(t, seed)?;
    let grid = ball_grid(t.d);
    let rows: Vec<[f64; 3]> = ms
        .par_iter()
        .map(|&m| {
            let dens = build_density(&lifted, t.k, m, GridSpec::Auto)?;
            let var = dens.variation_estimate()?;
            let mut sup: f64 = 0.0;
            for x in &grid {
                sup = sup.max((dens.lowered_projection(x)? - target.eval_unchecked(x)).abs());
            }
            Ok([sup, var.gamma_l2, var.gamma_l1])
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::new(&["m", "sup_error", "gamma_l2", "gamma_l1"]);
    for (m, r) in ms.iter().zip(rows) {
        csv.row(&[m.to_string(), f(r[0]), f(r[1]), f(r[2])]);
    }
    Ok(csv.0)
}

pub fn approx_sweep(t: &TargetArgs, ms: &[usize], ns: Option<&[usize]>, trials: usize, seed: u64) -> Result<String> {
    if let Some(ns) = ns {
        if ns.len() != ms.len() {
            return Err(Error::InvalidArgument(format!(
                "--n-list has {} entries but --m-list has {}",
                ns.len(),
                ms.len()
            )));
        }
    }
    let target = catalog_target(&t.target, t.d, t.alpha, t.k, seeds::derive(seed, &[0]))?;
    let schedule: Vec<SweepPoint> =
        ms.iter().enumerate().map(|(i, &m)| SweepPoint { m, n_units: ns.map(|n| n[i]) }).collect();
    let res = sweep_approx(&target, t.k, &schedule, trials, seed)?;
    let mut csv = Csv::new(&["m", "N", "M", "sup_err_mean", "sup_err_std", "slope_so_far"]);
    for r in &res.rows {
        csv.row(&[
            r.m.to_string(),
            r.n_units.to_string(),
            f(r.variation),
            f(r.sup_err_mean),
            f(r.sup_err_std),
            opt(r.slope_so_far),
        ]);
    }
    Ok(csv.0)
}

pub fn discretize(t: &TargetArgs, m: usize, n_units: usize, seed: u64) -> Result<(String, String)> {
    let (target, lifted) = load_target(t, seed)?;
    let dens = build_density(&lifted, t.k, m, GridSpec::Auto)?;
    let net = discretize_mc(&dens, n_units, seed)?;
    let dev = sup_error(|x| net.eval(x), |x| dens.lowered_convolution(x), t.d);
    let err = sup_error(|x| net.eval(x), |x| target.eval_unchecked(x), t.d);
    let mut csv = Csv::new(&["m", "N", "M", "sup_deviation", "sup_error"]);
    csv.row(&[m.to_string(), n_units.to_string(), f(net.variation()), f(dev), f(err)]);
    Ok((csv.0, write_shallow(&net)))
}

pub fn cnn_compile(text: &str, s: usize, depth: Option<usize>, points: usize, seed: u64) -> Result<(String, String)> {
    let net = read_shallow(text)?;
    let c = compile_shallow(&net, s, depth)?;
    let rep = verify_equivalence(&c.form, &c.cnn, points, seed, CNN_GAP_TOL)?;
    if !rep.pass {
        return Err(Error::Numerical(format!(
            "compiled CNN deviates by {:e} (tolerance {:e} relative to 1 + {:e})",
            rep.max_gap, rep.tol, rep.scale
        )));
    }
    let mut csv = Csv::new(&["n_points", "max_gap", "mean_gap", "residual", "param_count"]);
    csv.row(&[
        rep.n_points.to_string(),
        f(rep.max_gap),
        f(rep.mean_gap),
        f(c.residual),
        c.cnn.param_count().to_string(),
    ]);
    Ok((csv.0, write_cnn(&c.cnn)))
}

pub fn regress(spec: &RegressionSpec) -> Result<String> {
    let rep = regression_sweep(spec)?;
    if !rep.truncation_covers_truth {
        log::warn!("truncation level is below sup|h| for some n");
    }
    for r in &rep.rows {
        if r.converged < spec.trials {
            log::info!("n = {}: {} of {} fits hit the iteration cap", r.n, spec.trials - r.converged, spec.trials);
        }
    }
    let mut csv = Csv::new(&[
        "n",
        "N_or_W_or_L",
        "M",
        "B",
        "risk_mean",
        "risk_std",
        "predicted_exponent",
        "fitted_slope",
        "slope_stderr",
    ]);
    for r in &rep.rows {
        csv.row(&[
            r.n.to_string(),
            r.schedule.size.to_string(),
            f(r.schedule.budget),
            f(r.schedule.truncation),
            f(r.risk_mean),
            f(r.risk_std),
            f(rep.predicted_exponent),
            opt(r.slope_so_far.map(|s| s.slope)),
            opt(r.slope_so_far.map(|s| s.stderr)),
        ]);
    }
    Ok(csv.0)
}

pub fn predict_rates(d: usize, alpha: f64) -> Result<String> {
    let mut csv = Csv::new(&[
        "family",
        "class",
        "size_param",
        "approx_size_exponent",
        "approx_budget_exponent",
        "regression_exponent",
    ]);
    for family in Family::ALL {
        for class in TargetClass::ALL {
            let a = approx_rate(family, class, d, alpha)?;
            let size = match family {
                Family::Shallow => "N",
                Family::Overparam => "W",
                Family::Cnn => "L",
            };
            csv.row(&[
                family.to_string(),
                class.to_string(),
                size.into(),
                f(a.size),
                opt(a.budget),
                f(predict_rate(family, class, d, alpha)?),
            ]);
        }
    }
    Ok(csv.0)
}
