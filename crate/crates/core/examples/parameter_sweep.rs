// Sweeps viscosities through the harness and prints the decay table.

use mhd_blowup::cli::{sweep, FitConfig, SimulateConfig, SweepConfig};
use mhd_blowup::exact_fields::ModelParams;

pub fn run_example() -> mhd_blowup::Result<()> {
    let sim = SimulateConfig { n: 8, dtau: 2e-3, tau_end: 0.3, output_every: 5, ..SimulateConfig::default() };
    let sw = SweepConfig { nu: vec![2.0, 5.0], a: vec![0.25], mu_follows_nu: true };
    let report = sweep(&ModelParams::stability_default(), &sw, &sim, &FitConfig::default(), 11);
    print!("{}", report.to_csv_string());
    println!("nondecreasing in nu: {}", report.monotone_in_nu);
    Ok(())
}

fn main() {
    run_example().expect("sweep example");
}
