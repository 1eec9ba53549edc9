//! Compile a random shallow ReLU network into a deep CNN with size-2
//! filters and check that both compute the same function.

use rand::Rng;
use ridgeline::cnn::format::write_cnn;
use ridgeline::cnn::{compile_shallow, verify_equivalence};
use ridgeline::network::{ShallowNet, Unit};
use ridgeline::sampling::uniform_sphere;
use ridgeline::seeds;

pub fn run_example() -> ridgeline::Result<()> {
    let (d, n) = (2, 3);
    let mut rng = seeds::rng(5);
    let units = (0..n).map(|_| Unit { a: rng.random_range(-1.0..1.0), v: uniform_sphere(&mut rng, d + 1) }).collect();
    let net = ShallowNet::new(1, d, units)?;
    let c = compile_shallow(&net, 2, None)?;
    let rep = verify_equivalence(&c.form, &c.cnn, 500, 7, 1e-6)?;
    println!(
        "depth {}, widths {:?}, {} parameters, max gap {:.2e}",
        c.cnn.depth(),
        c.cnn.widths(),
        c.cnn.param_count(),
        rep.max_gap
    );
    print!("{}", write_cnn(&c.cnn));
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
