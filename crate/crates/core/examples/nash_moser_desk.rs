// Runs a short Nash–Moser iteration on a coarse grid.

use mhd_blowup::linsolver::Grid;
use mhd_blowup::nash_moser::{iterate, IterationConfig};

pub fn run_example() -> mhd_blowup::Result<()> {
    let mut cfg = IterationConfig::desk_default(3);
    cfg.grid = Grid::new(8)?;
    cfg.tau_end = 0.2;
    cfg.schedule.m_max = 3;
    let trace = iterate(&cfg)?;
    for s in &trace.steps {
        println!("m={} N={:<3} |h|={:.3e} |q|={:.3e} E1={:.3e} E2={:.3e}", s.m, s.n_m, s.h_norm, s.q_norm, s.e1, s.e2);
    }
    println!("reached floor {}, superlinear until {:?}, passed {}", trace.reached_floor, trace.superlinear_until, trace.passed);
    Ok(())
}

fn main() {
    run_example().expect("Nash-Moser example");
}
