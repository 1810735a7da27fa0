// Writes binary snapshots during a run and reads one back.

use mhd_blowup::exact_fields::ModelParams;
use mhd_blowup::linsolver::{random_divergence_free, run, BackgroundSource, ForcingSource, Grid, Snapshot, SolverConfig};

pub fn run_example() -> mhd_blowup::Result<()> {
    let grid = Grid::new(6)?;
    let mut cfg = SolverConfig::new(ModelParams::stability_default(), grid, 5e-3, 0.05);
    cfg.snapshot_every = Some(5);
    let out = run(&cfg, &random_divergence_free(grid, 1, 2, 1.0), BackgroundSource::Zero, ForcingSource::Zero)?;
    let last = out.snapshots.last().expect("snapshots were requested");
    let bytes = last.to_bytes();
    let back = Snapshot::read(&bytes[..])?;
    println!("{} snapshots, last at tau = {}, {} bytes", out.snapshots.len(), back.tau, bytes.len());
    println!("round trip exact: {}", back == *last);
    Ok(())
}

fn main() {
    run_example().expect("snapshot example");
}
