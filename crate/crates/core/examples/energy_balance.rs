// Checks that the discrete energy balance mismatch is first order in the step.

use mhd_blowup::energy_monitor::energy_balance_check;
use mhd_blowup::exact_fields::ModelParams;
use mhd_blowup::linsolver::{random_divergence_free, run, BackgroundSource, ForcingSource, Grid, SolverConfig};

pub fn run_example() -> mhd_blowup::Result<()> {
    let grid = Grid::new(8)?;
    let params = ModelParams::new(0.25, 0.5, 0.5, 1.0, 1.0, 1.0);
    let init = random_divergence_free(grid, 42, 2, 1.0);
    let mut last: Option<f64> = None;
    for dtau in [2e-3, 1e-3, 5e-4] {
        let cfg = SolverConfig::new(params, grid, dtau, 0.05);
        let out = run(&cfg, &init, BackgroundSource::Zero, ForcingSource::Zero)?;
        let mismatch = energy_balance_check(&out.balance).ln_max_mismatch.exp();
        match last {
            Some(prev) => println!("dtau {dtau:.1e}: max mismatch {mismatch:.4e}, ratio {:.3}", mismatch / prev),
            None => println!("dtau {dtau:.1e}: max mismatch {mismatch:.4e}"),
        }
        last = Some(mismatch);
    }
    Ok(())
}

fn main() {
    run_example().expect("energy balance example");
}
