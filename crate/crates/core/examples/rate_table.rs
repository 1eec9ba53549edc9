//! Predicted approximation and regression exponents for every network
//! family and target class.

use ridgeline::regression::{approx_rate, predict_rate, Family, TargetClass};

pub fn run_example() -> ridgeline::Result<()> {
    let (d, alpha) = (3, 1.5);
    println!("{:10} {:10} {:>8} {:>8} {:>8}", "family", "class", "size", "budget", "risk");
    for family in Family::ALL {
        for class in TargetClass::ALL {
            let a = approx_rate(family, class, d, alpha)?;
            let budget = a.budget.map_or("-".to_string(), |b| format!("{b:.4}"));
            let p = predict_rate(family, class, d, alpha)?;
            println!("{:10} {:10} {:8.4} {budget:>8} {p:8.4}", family.to_string(), class.to_string(), a.size);
        }
    }
    Ok(())
}

fn main() -> ridgeline::Result<()> {
    run_example()
}
