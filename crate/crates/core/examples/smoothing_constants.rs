// Measures the constants of the smoothing inequalities on random fields.

use mhd_blowup::linsolver::Grid;
use mhd_blowup::nash_moser::smoothing_sweep;

pub fn run_example() -> mhd_blowup::Result<()> {
    let r = smoothing_sweep(Grid::new(16)?, &[2.0, 4.0, 8.0], &[0, 1, 2], 5, 7)?;
    for (row, exact) in r.rows.iter().zip(&r.exact_rows) {
        println!(
            "{:?} k1={} k2={}: random-field variation {:.2}, operator variation {:.2}",
            row.inequality, row.k1, row.k2, row.variation, exact.variation
        );
    }
    println!("idempotence error {:.1e}, low-pass identity error {:.1e}", r.idempotence_error, r.lowpass_identity_error);
    Ok(())
}

fn main() {
    run_example().expect("smoothing example");
}
