//! Sample finite ReLU networks from a ridge density and watch the deviation
//! from the integral shrink like N^{-1/2}.

use ridgeline::kernelize::{build_density, GridSpec};
use ridgeline::lift::{catalog_target, lift_to_sphere, Parity};
use ridgeline::network::{discretize_mc, sup_error};

pub fn run_example() -> ridgeline::Result<()> {
    let (k, d) = (1, 1);
    let h = catalog_target("gauss_bump", d, 1.0, k, 0)?;
    let g = lift_to_sphere(&h, k, Parity::for_activation(k))?;
    let dens = build_density(&g, k, 8, GridSpec::Auto)?;
    println!("||phi||_1 = {:.4}", dens.density_l1());
    for n in [16, 64, 256, 1024] {
        let net = discretize_mc(&dens, n, 3)?;
        let dev = sup_error(|x| net.eval(x), |x| dens.lowered_convolution(x), d);
        println!("N = {n:5}: sup deviation {dev:.4}, variation {:.4}", net.variation());
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
