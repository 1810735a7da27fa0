use mhd_blowup::energy_monitor::fit_decay;
use mhd_blowup::exact_fields::ModelParams;
use mhd_blowup::linsolver::{random_divergence_free, run, BackgroundSource, ForcingSource, Grid, SolverConfig};
use mhd_blowup::selfsim::{decay_rate_convert, t_of_tau};
use nalgebra::{DMatrix, DVector};

// Least-squares slope of ln norm against ln(T̄* - t), computed from the
// physical times of the samples rather than from τ.
fn gap_slope(t_bar_star: f64, samples: &[(f64, f64)]) -> f64 {
    let rows = samples.len();
    let mut a = DMatrix::zeros(rows, 2);
    let mut b = DVector::zeros(rows);
    for (i, &(t, ln)) in samples.iter().enumerate() {
        a[(i, 0)] = (t_bar_star - t).ln();
        a[(i, 1)] = 1.0;
        b[i] = ln;
    }
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("least squares");
    sol[0]
}

#[test]
fn tau_rate_matches_power_law_slope_in_the_time_gap() {
    let mut params = ModelParams::new(0.25, 0.5, 0.5, 4.0, 6.0, 1.0);
    params.t_bar_star = 1.7;
    let grid = Grid::new(8).unwrap();
    let mut cfg = SolverConfig::new(params, grid, 2e-3, 0.6);
    cfg.output_every = 5;
    let out = run(&cfg, &random_divergence_free(grid, 42, 2, 1.0), BackgroundSource::Zero, ForcingSource::Zero).unwrap();
    let series = out.series.total("l2").unwrap();
    let window = [0.1, 0.6];
    let fit = fit_decay(&series, window).unwrap();
    assert!(fit.rate > 0.0);

    let in_t: Vec<(f64, f64)> = series
        .iter()
        .filter(|(tau, _)| *tau >= window[0] && *tau <= window[1])
        .map(|&(tau, ln)| (t_of_tau(params.t_bar_star, tau), ln))
        .collect();
    let slope = gap_slope(params.t_bar_star, &in_t);
    let predicted = decay_rate_convert(fit.rate, params.t_bar_star).exponent;
    let rel = (slope - predicted).abs() / predicted;
    assert!(rel < 0.02, "tau fit {predicted}, gap fit {slope}, relative gap {rel}");
}
