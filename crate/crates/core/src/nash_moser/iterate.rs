//! The iteration `w^(m) = w^(m-1) + h^(m)`, `b^(m) = b^(m-1) + q^(m)` and its trace.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::residual::{linearized_solve_step, residual, tame_estimate_check, trajectory_norm, Window};
use crate::error::{Error, Result};
use crate::exact_fields::ModelParams;
use crate::linsolver::grid::{FieldPair, Grid};
use crate::linsolver::init::random_divergence_free;
use crate::linsolver::solver::{run, BackgroundSource, ForcingSource, SolverConfig};

/// Cutoffs `N_m = N0^m` and exponents `k_m = k̄ + (k - k̄)/2^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default = "default_n0")]
    pub n0: f64,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_k_bar")]
    pub k_bar: f64,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
}

fn default_n0() -> f64 {
    2.0
}
fn default_m_max() -> usize {
    5
}
fn default_k_bar() -> f64 {
    1.5
}
fn default_k() -> f64 {
    2.0
}
fn default_epsilon() -> f64 {
    1e-2
}
fn default_epsilon0() -> f64 {
    1e-3
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            n0: default_n0(),
            m_max: default_m_max(),
            k_bar: default_k_bar(),
            k: default_k(),
            epsilon: default_epsilon(),
            epsilon0: default_epsilon0(),
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.n0 > 1.0) {
            errs.push(format!("n0 must exceed 1, got {}", self.n0));
        }
        if !(1.0 < self.k_bar && self.k_bar < self.k) {
            errs.push(format!("need 1 < k_bar < k, got k_bar = {}, k = {}", self.k_bar, self.k));
        }
        if !(0.0 < 2.0 * self.epsilon0 && 2.0 * self.epsilon0 < self.epsilon && self.epsilon < 1.0) {
            errs.push(format!("need 0 < 2 epsilon0 < epsilon < 1, got {} and {}", self.epsilon0, self.epsilon));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    pub fn cutoff(&self, m: usize) -> f64 {
        self.n0.powi(m as i32)
    }

    pub fn exponent(&self, m: usize) -> f64 {
        self.k_bar + (self.k - self.k_bar) / 2f64.powi(m as i32)
    }
}

/// Everything the iteration needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub dtau: f64,
    pub tau_end: f64,
    #[serde(default)]
    pub schedule: Schedule,
    /// Residual level below which superlinearity is no longer demanded.
    #[serde(default = "default_floor")]
    pub floor: f64,
    /// Exponent in `‖E^(m+1)‖ ≤ ‖E^(m)‖^p`.
    #[serde(default = "default_power")]
    pub power: f64,
    /// Consecutive superlinear steps required when the floor is not reached.
    #[serde(default = "default_consecutive")]
    pub consecutive: usize,
    /// Largest allowed `max/min` of the per-step increment ratios.
    #[serde(default = "default_spread")]
    pub spread_limit: f64,
    pub seed: u64,
}

fn default_floor() -> f64 {
    1e-8
}
fn default_power() -> f64 {
    1.5
}
fn default_consecutive() -> usize {
    3
}
fn default_spread() -> f64 {
    10.0
}

impl IterationConfig {
    /// Desk-scale defaults: `12³` grid, `ν = μ = 10`, `a = 1/4`, `k = ā = 1/2`, `τ ∈ [0, 0.5]`.
    pub fn desk_default(seed: u64) -> Self {
        IterationConfig {
            params: ModelParams::stability_default(),
            grid: Grid { n: 12 },
            dtau: 0.01,
            tau_end: 0.5,
            schedule: Schedule::default(),
            floor: default_floor(),
            power: default_power(),
            consecutive: default_consecutive(),
            spread_limit: default_spread(),
            seed,
        }
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.params, Grid::new(self.grid.n)?, self.dtau, self.tau_end)
    }
}

/// The initial guess: the zero-background linear evolution of a seeded
/// curl-of-potential field with `‖(h, q)‖ = ε₀`.
pub fn initial_guess(win: &Window, epsilon0: f64, seed: u64) -> Result<Vec<FieldPair>> {
    let init = random_divergence_free(win.grid, seed, 2, epsilon0 / 2f64.sqrt());
    let mut cfg = SolverConfig::new(win.params, win.grid, win.dtau, win.steps as f64 * win.dtau);
    cfg.keep_trajectory = true;
    cfg.renormalize = false;
    cfg.output_every = win.steps;
    Ok(run(&cfg, &init, BackgroundSource::Zero, ForcingSource::Zero)?.trajectory)
}

/// One row of the trace. For `m = 0` the increment is the initial guess itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub m: usize,
    pub n_m: f64,
    pub k_m: f64,
    pub h_norm: f64,
    pub q_norm: f64,
    /// `‖E₁^(m)‖`, the residual of the `m`-th problem after the increment.
    pub e1: f64,
    pub e2: f64,
    /// `‖E₁‖` of the `m`-th problem before the increment, the forcing it solves with.
    pub drive_e1: f64,
    pub drive_e2: f64,
    /// `(‖h‖ + ‖q‖) / (‖drive E₁‖ + ‖drive E₂‖)`.
    pub increment_ratio: Option<f64>,
    /// Tame-estimate constant of this increment.
    pub tame_constant: f64,
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// The full trace and its verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<StepRecord>,
    pub floor: f64,
    /// Last `m` up to which the superlinear chain holds (or the floor was reached).
    pub superlinear_until: Option<usize>,
    pub reached_floor: bool,
    pub superlinear: bool,
    /// `C` in `‖h‖ + ‖q‖ ≤ C (‖E₁‖ + ‖E₂‖)`, the largest per-step ratio above the floor.
    pub increment_constant: Option<f64>,
    pub increment_spread: Option<f64>,
    pub increment_bound: bool,
    pub passed: bool,
}

impl IterationTrace {
    /// `‖E₁^(m)‖ + ‖E₂^(m)‖` per step.
    pub fn errors(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.e1 + s.e2).collect()
    }
}

/// Floor-aware superlinearity of the residual sequence.
///
/// Returns `(holds, until, reached_floor)`.
pub fn superlinear_check(errors: &[f64], floor: f64, power: f64, consecutive: usize) -> (bool, Option<usize>, bool) {
    let mut until = None;
    let mut run = 0usize;
    for m in 0..errors.len() {
        if errors[m] <= floor {
            return (true, Some(m), true);
        }
        if m + 1 == errors.len() || errors[m + 1] > errors[m].powf(power) {
            break;
        }
        run += 1;
        until = Some(m + 1);
    }
    (run >= consecutive, until, false)
}

/// Runs the iteration from [`initial_guess`].
pub fn iterate(config: &IterationConfig) -> Result<IterationTrace> {
    let win = config.window()?;
    let guess = initial_guess(&win, config.schedule.epsilon0, config.seed)?;
    iterate_from(config, guess)
}

/// Runs the iteration from a given trajectory.
pub fn iterate_from(config: &IterationConfig, guess: Vec<FieldPair>) -> Result<IterationTrace> {
    config.schedule.validate()?;
    let win = config.window()?;
    let sched = &config.schedule;
    let mut steps = Vec::with_capacity(sched.m_max + 1);

    let start = Instant::now();
    let k0 = sched.exponent(0);
    let n0 = sched.cutoff(0);
    let e0 = residual(&win, &guess, n0)?;
    let (h0, q0) = trajectory_norm(&guess, win.dtau, k0);
    let (e1, e2) = trajectory_norm(&e0, win.dtau, k0 - 2.0);
    steps.push(StepRecord {
        m: 0,
        n_m: n0,
        k_m: k0,
        h_norm: h0,
        q_norm: q0,
        e1,
        e2,
        drive_e1: e1,
        drive_e2: e2,
        increment_ratio: None,
        tame_constant: 0.0,
        wall_time_s: start.elapsed().as_secs_f64(),
    });

    let mut w = guess;
    for m in 1..=sched.m_max {
        let start = Instant::now();
        let n_m = sched.cutoff(m);
        let k_m = sched.exponent(m);
        let drive = residual(&win, &w, n_m)?;
        let (d1, d2) = trajectory_norm(&drive, win.dtau, k_m - 2.0);
        let h = linearized_solve_step(&win, &w, &drive, n_m)?;
        let (hn, qn) = trajectory_norm(&h, win.dtau, k_m);
        let tame = tame_estimate_check(&win, &h, n_m, k_m)?;
        for (a, b) in w.iter_mut().zip(&h) {
            a.axpy(1.0, b);
        }
        let after = residual(&win, &w, n_m)?;
        let (e1, e2) = trajectory_norm(&after, win.dtau, k_m - 2.0);
        let increment_ratio = (d1 + d2 > 0.0).then(|| (hn + qn) / (d1 + d2));
        steps.push(StepRecord {
            m,
            n_m,
            k_m,
            h_norm: hn,
            q_norm: qn,
            e1,
            e2,
            drive_e1: d1,
            drive_e2: d2,
            increment_ratio,
            tame_constant: tame.constant,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }

    let errors: Vec<f64> = steps.iter().map(|s| s.e1 + s.e2).collect();
    let (superlinear, superlinear_until, reached_floor) =
        superlinear_check(&errors, config.floor, config.power, config.consecutive);
    let ratios: Vec<f64> = steps
        .iter()
        .filter(|s| s.drive_e1 + s.drive_e2 > config.floor)
        .filter_map(|s| s.increment_ratio)
        .collect();
    let increment_constant = ratios.iter().copied().reduce(f64::max);
    let increment_spread = increment_constant.map(|hi| hi / ratios.iter().copied().fold(f64::INFINITY, f64::min));
    let increment_bound = increment_spread.is_some_and(|s| s <= config.spread_limit);
    Ok(IterationTrace {
        steps,
        floor: config.floor,
        superlinear_until,
        reached_floor,
        superlinear,
        increment_constant,
        increment_spread,
        increment_bound,
        passed: superlinear && increment_bound,
    })
}
