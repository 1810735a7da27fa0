// Integrates the linearized system from random data and fits the decay rate.

use mhd_blowup::energy_monitor::{fit_decay, is_monotone_nonincreasing};
use mhd_blowup::exact_fields::ModelParams;
use mhd_blowup::linsolver::{random_divergence_free, run, BackgroundSource, ForcingSource, Grid, SolverConfig};

pub fn run_example() -> mhd_blowup::Result<()> {
    let grid = Grid::new(10)?;
    let mut cfg = SolverConfig::new(ModelParams::stability_default(), grid, 2e-3, 0.5);
    cfg.output_every = 5;
    let init = random_divergence_free(grid, 42, 2, 1.0);
    let out = run(&cfg, &init, BackgroundSource::Zero, ForcingSource::Zero)?;
    for prefix in ["l2", "h1", "h2", "dtau"] {
        let series = out.series.total(prefix)?;
        let fit = fit_decay(&series, [0.1, 0.5])?;
        println!(
            "{prefix:>4}: rate {:.2} goodness {:.5} monotone {}",
            fit.rate,
            fit.goodness,
            is_monotone_nonincreasing(&series, 0.1)
        );
    }
    println!("largest relative divergence {:.2e}", out.max_divergence);
    Ok(())
}

fn main() {
    run_example().expect("linear decay example");
}
