//! IMEX time stepping: backward Euler for `νΔ`, `μΔ`, forward Euler for the
//! rest, and the discrete Leray projection after every step.

use serde::{Deserialize, Serialize};

use super::grid::{FieldPair, Grid, LinState};
use super::ops::{diff, divergence};
use super::rhs::{coupling, diffusion, explicit_linear, Coefficients, PressureMode};
use super::snapshot::Snapshot;
use super::spectral::{helmholtz_solve, leray_project};
use crate::energy_monitor::{BalanceRecord, NormRecord, NormSeries};
use crate::error::{Error, Result};
use crate::exact_fields::ModelParams;

/// A run is aborted once its `L²` norm exceeds this multiple of the initial norm.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Courant number bounding `dτ · speed / h` for the explicit part.
pub const COURANT_LIMIT: f64 = 1.0;

/// Exponent of the power of two used when renormalizing an unforced run.
const RESCALE_EXP: i32 = 400;

/// Time-stepping parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub dtau: f64,
    pub tau_end: f64,
    /// Post-step bound on `h·‖div‖∞ / ‖u‖∞`.
    #[serde(default = "default_proj_tol")]
    pub proj_tol: f64,
    /// Norms are recorded every `output_every` steps and at the final time.
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    #[serde(default)]
    pub pressure: PressureMode,
    /// Rescale unforced runs by powers of two so long decays stay in range.
    #[serde(default = "default_true")]
    pub renormalize: bool,
    /// Record a snapshot every this many steps.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    /// Keep every state of the run (needed when the run is itself a background).
    #[serde(default)]
    pub keep_trajectory: bool,
}

fn default_proj_tol() -> f64 {
    1e-8
}
fn default_output_every() -> usize {
    1
}
fn default_true() -> bool {
    true
}

impl SolverConfig {
    pub fn new(params: ModelParams, grid: Grid, dtau: f64, tau_end: f64) -> Self {
        SolverConfig {
            params,
            grid,
            dtau,
            tau_end,
            proj_tol: default_proj_tol(),
            output_every: default_output_every(),
            pressure: PressureMode::FBar,
            renormalize: true,
            snapshot_every: None,
            keep_trajectory: false,
        }
    }

    /// Number of steps, `round(tau_end / dtau)`.
    pub fn steps(&self) -> usize {
        (self.tau_end / self.dtau).round() as usize
    }

    /// Upper bound on the transport speed of the explicit terms over the run.
    pub fn max_speed(&self, background_size: f64) -> f64 {
        let p = &self.params;
        let drift = 2.0 * (0.5 - p.a).abs() + (0.5 + 2.0 * p.a).abs();
        let rot = |tau: f64| Coefficients::at(p, tau).c_rot.abs();
        let bg = |tau: f64| Coefficients::at(p, tau).c_bg;
        drift + 2.0 * rot(0.0).max(rot(self.tau_end)) + 3.0 * background_size * bg(0.0).max(bg(self.tau_end))
    }

    /// Checks step sizes, grid and the advective stability bound.
    pub fn validate(&self, background_size: f64) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.dtau > 0.0 && self.dtau.is_finite()) {
            errs.push(format!("dtau must be positive, got {}", self.dtau));
        }
        if !(self.tau_end >= 0.0 && self.tau_end.is_finite()) {
            errs.push(format!("tau_end must be non-negative, got {}", self.tau_end));
        }
        if self.grid.n < 4 {
            errs.push(format!("grid needs n >= 4, got {}", self.grid.n));
        }
        if self.output_every == 0 {
            errs.push("output_every must be at least 1".into());
        }
        if !(self.params.nu >= 0.0 && self.params.mu >= 0.0) {
            errs.push("viscosities must be non-negative".into());
        }
        if !(self.params.t_bar_star > 0.0) {
            errs.push("t_bar_star must be positive".into());
        }
        if errs.is_empty() {
            let bound = COURANT_LIMIT * self.grid.h() / self.max_speed(background_size);
            if self.dtau > bound {
                errs.push(format!("dtau {} exceeds the advective bound {bound:.3e}", self.dtau));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }
}

/// Max-norm of a background and of its first differences, the discrete
/// surrogate for membership in the ball of radius `R`.
pub fn background_size(w: &FieldPair) -> f64 {
    let mut m = w.max_abs();
    for c in w.components() {
        for axis in 0..3 {
            m = m.max(diff(c, axis).max_abs());
        }
    }
    m
}

/// A frozen background `(w, b)` inside the surrogate ball of radius `R`.
#[derive(Debug, Clone)]
pub struct Background {
    pub fields: FieldPair,
    pub radius: f64,
}

impl Background {
    pub fn new(fields: FieldPair, radius: f64) -> Result<Self> {
        let size = background_size(&fields);
        if !(size <= radius) {
            return Err(Error::InvalidArgument(format!("background size {size:.3e} exceeds radius {radius:.3e}")));
        }
        Ok(Background { fields, radius })
    }
}

/// Background coefficients seen by each step.
#[derive(Debug, Clone, Copy)]
pub enum BackgroundSource<'a> {
    Zero,
    Frozen(&'a Background),
    /// Entry `n` is used on the step from `τ_n` to `τ_{n+1}`.
    Trajectory(&'a [FieldPair]),
}

impl<'a> BackgroundSource<'a> {
    fn at(&self, n: usize) -> Result<Option<&'a FieldPair>> {
        match self {
            BackgroundSource::Zero => Ok(None),
            BackgroundSource::Frozen(b) => Ok(Some(&b.fields)),
            BackgroundSource::Trajectory(t) => t
                .get(n)
                .map(Some)
                .ok_or_else(|| Error::InvalidArgument(format!("background trajectory has no entry for step {n}"))),
        }
    }

    fn size(&self) -> f64 {
        match self {
            BackgroundSource::Zero => 0.0,
            BackgroundSource::Frozen(b) => background_size(&b.fields),
            BackgroundSource::Trajectory(t) => t.iter().map(background_size).fold(0.0, f64::max),
        }
    }
}

/// Forcing `(f, g)`; the step multiplies it by `T̄* e^{-τ}`.
#[derive(Clone, Copy)]
pub enum ForcingSource<'a> {
    Zero,
    Frozen(&'a FieldPair),
    /// Entry `n` is used on the step from `τ_n` to `τ_{n+1}`.
    Trajectory(&'a [FieldPair]),
    Function(&'a (dyn Fn(f64) -> FieldPair + Sync)),
}

impl<'a> ForcingSource<'a> {
    fn is_zero(&self) -> bool {
        matches!(self, ForcingSource::Zero)
    }

    fn at(&self, n: usize, tau: f64) -> Result<Option<std::borrow::Cow<'a, FieldPair>>> {
        use std::borrow::Cow;
        match *self {
            ForcingSource::Zero => Ok(None),
            ForcingSource::Frozen(f) => Ok(Some(Cow::Borrowed(f))),
            ForcingSource::Trajectory(t) => t
                .get(n)
                .map(|f| Some(Cow::Borrowed(f)))
                .ok_or_else(|| Error::InvalidArgument(format!("forcing trajectory has no entry for step {n}"))),
            ForcingSource::Function(f) => Ok(Some(Cow::Owned(f(tau)))),
        }
    }
}

/// `P (I - dτνΔ)⁻¹ ⊕ P (I - dτμΔ)⁻¹` applied to `v`.
pub fn implicit_project(v: &FieldPair, c: &Coefficients, dtau: f64) -> FieldPair {
    let h = v.h.map(|f| helmholtz_solve(f, dtau * c.nu));
    let q = v.q.map(|f| helmholtz_solve(f, dtau * c.mu));
    FieldPair::new(leray_project(&h), leray_project(&q))
}

/// `h·max(‖div h‖∞, ‖div q‖∞) / ‖u‖∞`, zero for the zero field.
pub fn relative_divergence(u: &FieldPair) -> f64 {
    let m = u.max_abs();
    if m == 0.0 {
        return 0.0;
    }
    let d = divergence(&u.h).max_abs().max(divergence(&u.q).max_abs());
    d * u.grid().h() / m
}

/// Everything one step produces.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: LinState,
    /// `⟨u_n, F(u_n)⟩` with the full right-hand side at `τ_n`.
    pub inner: f64,
    pub divergence: f64,
}

fn explicit_terms(
    u: &FieldPair,
    c: &Coefficients,
    mode: PressureMode,
    background: Option<&FieldPair>,
    forcing: Option<&FieldPair>,
) -> Result<FieldPair> {
    let mut e = explicit_linear(u, c, mode)?;
    if let Some(w) = background {
        e.axpy(1.0, &coupling(w, u, c, mode)?);
    }
    if let Some(f) = forcing {
        e.axpy(c.c_f, f);
    }
    Ok(e)
}

/// One IMEX step from `state` with the given background and forcing values.
pub fn step_with(
    state: &LinState,
    config: &SolverConfig,
    background: Option<&FieldPair>,
    forcing: Option<&FieldPair>,
) -> Result<StepOutcome> {
    let c = Coefficients::at(&config.params, state.tau);
    let u = &state.fields;
    let e = explicit_terms(u, &c, config.pressure, background, forcing)?;
    let inner = u.dot(&e) + u.dot(&diffusion(u, &c));
    let mut v = u.clone();
    v.axpy(config.dtau, &e);
    let next = implicit_project(&v, &c, config.dtau);
    if !next.is_finite() {
        return Err(Error::Diverged { tau: state.tau + config.dtau, norm: f64::INFINITY, limit: f64::NAN });
    }
    let divergence = relative_divergence(&next);
    if divergence > config.proj_tol {
        return Err(Error::NoConvergence {
            iterations: 1,
            what: format!("Leray projection left relative divergence {divergence:.3e} at tau {}", state.tau),
        });
    }
    Ok(StepOutcome { next: LinState::new(next, state.tau + config.dtau), inner, divergence })
}

/// One step using step index `0` of the sources.
pub fn step(state: &LinState, config: &SolverConfig, background: BackgroundSource, forcing: ForcingSource) -> Result<LinState> {
    let f = forcing.at(0, state.tau)?;
    Ok(step_with(state, config, background.at(0)?, f.as_deref())?.next)
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: NormSeries,
    pub balance: Vec<BalanceRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Final state, to be multiplied by `e^{ln_scale}`.
    pub final_state: LinState,
    pub ln_scale: f64,
    pub max_divergence: f64,
    /// Every state `u_0 … u_N` when requested; never renormalized.
    pub trajectory: Vec<FieldPair>,
    pub steps: usize,
}

/// Integrates from `init` at `τ = 0` to `tau_end`.
pub fn run(config: &SolverConfig, init: &FieldPair, background: BackgroundSource, forcing: ForcingSource) -> Result<RunOutput> {
    config.validate(background.size())?;
    if init.grid() != config.grid {
        return Err(Error::InvalidArgument("initial data lives on a different grid".into()));
    }
    if !init.is_finite() {
        return Err(Error::InvalidArgument("initial data is not finite".into()));
    }
    let steps = config.steps();
    let renormalize = config.renormalize && forcing.is_zero() && !config.keep_trajectory;
    let ln_limit = DIVERGENCE_FACTOR.ln() + init.norm_l2().ln();

    let mut state = LinState::new(init.clone(), 0.0);
    let mut ln_scale = 0.0;
    let mut records = Vec::new();
    let mut balance = Vec::with_capacity(steps);
    let mut snapshots = Vec::new();
    let mut trajectory = Vec::new();
    let mut max_div = relative_divergence(init);
    let mut last_du = FieldPair::zeros(config.grid);
    if config.keep_trajectory {
        trajectory.push(init.clone());
    }

    for n in 0..steps {
        if let Some(every) = config.snapshot_every {
            if every > 0 && n % every == 0 {
                snapshots.push(Snapshot::new(state.tau, ln_scale, state.fields.clone()));
            }
        }
        let tau = n as f64 * config.dtau;
        state.tau = tau;
        let f = forcing.at(n, tau)?;
        let out = step_with(&state, config, background.at(n)?, f.as_deref())?;
        max_div = max_div.max(out.divergence);
        let next = out.next.fields;

        let mut du = next.clone();
        du.axpy(-1.0, &state.fields);
        let du = du.scale(1.0 / config.dtau);
        balance.push(BalanceRecord::new(tau, config.dtau, state.fields.energy(), next.energy(), out.inner, ln_scale));
        if n % config.output_every == 0 {
            records.push(NormRecord::measure(tau, &state.fields, &du, ln_scale)?);
        }

        let ln_norm = next.norm_l2().ln() + ln_scale;
        if ln_norm > ln_limit {
            return Err(Error::Diverged { tau: tau + config.dtau, norm: ln_norm.exp(), limit: ln_limit.exp() });
        }
        if config.keep_trajectory {
            trajectory.push(next.clone());
        }
        state = LinState::new(next, tau + config.dtau);
        last_du = du;

        if renormalize {
            let m = state.fields.max_abs();
            let shift = if m > 0.0 && m < 2f64.powi(-RESCALE_EXP) {
                RESCALE_EXP
            } else if m > 2f64.powi(RESCALE_EXP) {
                -RESCALE_EXP
            } else {
                0
            };
            if shift != 0 {
                let s = 2f64.powi(shift);
                state.fields = state.fields.scale(s);
                last_du = last_du.scale(s);
                ln_scale -= shift as f64 * std::f64::consts::LN_2;
            }
        }
    }
    state.tau = steps as f64 * config.dtau;
    records.push(NormRecord::measure(state.tau, &state.fields, &last_du, ln_scale)?);
    if let Some(every) = config.snapshot_every {
        if every > 0 && steps % every == 0 {
            snapshots.push(Snapshot::new(state.tau, ln_scale, state.fields.clone()));
        }
    }
    let series = NormSeries { records };
    series.validate()?;
    Ok(RunOutput { series, balance, snapshots, final_state: state, ln_scale, max_divergence: max_div, trajectory, steps })
}

/// Runs `f` on a single-threaded pool when `serial` is set.
pub fn with_parallelism<R: Send>(serial: bool, f: impl FnOnce() -> R + Send) -> Result<R> {
    if serial {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build a serial pool: {e}")))?;
        Ok(pool.install(f))
    } else {
        Ok(f())
    }
}
