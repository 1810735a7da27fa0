// Maps physical points into similarity variables and converts decay rates.

use mhd_blowup::selfsim::{decay_rate_convert, phys_to_selfsim, selfsim_to_phys};

pub fn run_example() -> mhd_blowup::Result<()> {
    let t_bar_star = 2.0;
    for t in [0.0, 1.0, 1.9, 1.999] {
        let side = (t_bar_star - t as f64).sqrt();
        let x = [0.25 * side, 0.5 * side, side];
        let p = phys_to_selfsim(t_bar_star, t, x)?;
        let (t_back, x_back) = selfsim_to_phys(t_bar_star, p);
        println!("t = {t:<6} tau = {:.6} y = {:?} round trip error {:.1e}", p.tau, p.y, (t_back - t).abs() + (x_back[2] - x[2]).abs());
    }
    let g = decay_rate_convert(3.0, t_bar_star);
    println!("e^(-3 tau) = {:.4} (T - t)^{}", g.normalization, g.exponent);
    Ok(())
}

fn main() {
    run_example().expect("similarity coordinates example");
}
