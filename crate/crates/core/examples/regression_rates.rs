//! Least squares over shallow ReLU networks: excess risk against n on a
//! small grid.

use ridgeline::regression::{regression_sweep, Family, RegressionSpec, TargetClass};

pub fn run_example() -> ridgeline::Result<()> {
    let mut spec = RegressionSpec::new(Family::Shallow, TargetClass::Holder, 1, 1.0, vec![64, 128, 256, 512], 4);
    spec.n_mc = 2000;
    let rep = regression_sweep(&spec)?;
    println!("predicted risk exponent: -{:.3}", rep.predicted_exponent);
    for r in &rep.rows {
        println!(
            "n = {:4}  N = {:3}  M = {:6.3}  risk = {:.4e} +- {:.1e}",
            r.n, r.schedule.size, r.schedule.budget, r.risk_mean, r.risk_std
        );
    }
    if let Some(fit) = rep.slope() {
        println!("fitted slope {:.3} +- {:.3}", fit.slope, fit.stderr);
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
