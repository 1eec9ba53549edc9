//! Activation spectrum of ReLU^k on S^d: closed form against quadrature,
//! with the structural zeros marked.

use ridgeline::harmonics::{is_structural_zero, sigma_hat_closed, sigma_hat_quad_all, JacobiQuadrature};

pub fn run_example() -> ridgeline::Result<()> {
    let (k, d, nmax) = (1, 2, 12);
    let quad = JacobiQuadrature::new(d, 64)?;
    let quad_vals = sigma_hat_quad_all(k, d, nmax, &quad)?;
    println!("  n  {:>14}  {:>14}  zero", "closed", "quadrature");
    for (n, q) in quad_vals.iter().enumerate() {
        let closed = match sigma_hat_closed(k, d, n) {
            Ok(v) => format!("{:14.6e}", v.value()),
            Err(_) => format!("{:>14}", "-"),
        };
        println!("{n:3}  {closed}  {q:14.6e}  {}", is_structural_zero(k, n));
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
