//! Lift a target from the ball to the sphere and map it back.

use ridgeline::lift::{apply_lowering, catalog_target, lift_to_sphere, Parity};
use ridgeline::sampling::uniform_ball;
use ridgeline::seeds;

pub fn run_example() -> ridgeline::Result<()> {
    let mut rng = seeds::rng(1);
    for k in 0..=2 {
        let h = catalog_target("gauss_bump", 2, 1.0, k, 0)?;
        let g = lift_to_sphere(&h, k, Parity::for_activation(k))?;
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let x = uniform_ball(&mut rng, 2);
            worst = worst.max((apply_lowering(&g, k, &x)? - h.eval(&x)?).abs());
        }
        println!("k = {k}: max round-trip error {worst:.2e}");
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
