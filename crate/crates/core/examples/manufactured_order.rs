// Measures the spatial order of the solver against a manufactured solution.

use mhd_blowup::exact_fields::ModelParams;
use mhd_blowup::linsolver::{manufactured_convergence, Manufactured};

pub fn run_example() -> mhd_blowup::Result<()> {
    let p = ModelParams::new(0.25, 0.0, 0.0, 1.0, 1.0, 1.0);
    let r = manufactured_convergence(&p, &Manufactured::default(), &[6, 10], 0.005, 0.2)?;
    for (h, e) in &r.errors {
        println!("h = {h:.4}  relative error = {e:.3e}");
    }
    println!("observed order {:.2}", r.observed_order);
    Ok(())
}

fn main() {
    run_example().expect("manufactured solution example");
}
