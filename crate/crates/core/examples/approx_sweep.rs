//! Network error across cutoff degrees with sizes from the balancing rule.

use ridgeline::lift::catalog_target;
use ridgeline::network::{sweep_approx, SweepPoint};

pub fn run_example() -> ridgeline::Result<()> {
    let h = catalog_target("abs", 1, 1.0, 1, 0)?;
    let schedule: Vec<SweepPoint> = [4, 8, 16].iter().map(|&m| SweepPoint { m, n_units: None }).collect();
    let res = sweep_approx(&h, 1, &schedule, 5, 0)?;
    for r in &res.rows {
        println!("m = {:3}  N = {:4}  M = {:7.3}  err = {:.4} +- {:.4}", r.m, r.n_units, r.variation, r.sup_err_mean, r.sup_err_std);
    }
    if let Some(fit) = res.slope_vs_units() {
        println!("log-log slope in N: {:.3}", fit.slope);
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
