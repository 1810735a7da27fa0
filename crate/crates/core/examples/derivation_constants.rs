// Solves the one-monomial ansatz for the exponents and the swirl constant.

use mhd_blowup::timepoly::certify::RationalParams;
use mhd_blowup::timepoly::derivation::verify_derivation_constants;
use mhd_blowup::timepoly::{q, qi};

pub fn run_example() -> mhd_blowup::Result<()> {
    let rp = RationalParams::new(q(1, 4), q(1, 2), q(1, 2), qi(10), qi(10), qi(1))?;
    let r = verify_derivation_constants(&rp);
    println!("alpha = {}, beta = {}, p = {}, q = {}, k_bar = {}", r.alpha, r.beta, r.p, r.q, r.k_bar);
    println!("constraint {} holds: {}", r.constraint, r.constraint_holds);
    println!("matches expected constants: {}", r.matches_expected);
    println!("ansatz consistent with its z^0 source: {}", r.ansatz_consistent);
    Ok(())
}

fn main() {
    run_example().expect("derivation example");
}
