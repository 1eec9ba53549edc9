//! Smoothed projection of |x| in d = 1: sup error and variation of the
//! ridge density as the cutoff degree grows.

use ridgeline::kernelize::{build_density, GridSpec};
use ridgeline::lift::{catalog_target, lift_to_sphere, Parity};
use ridgeline::network::ball_grid;

pub fn run_example() -> ridgeline::Result<()> {
    let k = 1;
    let h = catalog_target("abs", 1, 1.0, k, 0)?;
    let g = lift_to_sphere(&h, k, Parity::for_activation(k))?;
    let grid = ball_grid(1);
    println!("  m   sup_error   gamma_l2");
    for m in [4, 8, 16, 32] {
        let dens = build_density(&g, k, m, GridSpec::Auto)?;
        let mut err: f64 = 0.0;
        for x in &grid {
            err = err.max((dens.lowered_projection(x)? - h.eval_unchecked(x)).abs());
        }
        println!("{m:3}  {err:10.4e}  {:9.3}", dens.variation_estimate()?.gamma_l2);
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
