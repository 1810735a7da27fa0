//! Residual operators of the nonlinear perturbation problem on a `τ`-window,
//! their linearization, and the quadratic remainder.
//!
//! The unknown is a trajectory `U = (U_0, …, U_N)` with `U_n = (w, b)` at
//! `τ_n = n dτ`. With `A(τ)` the explicit linear part of the linearized
//! system, `C(τ; W, U)` its background coupling and `Q(U) = ½ C(U; U)`, the
//! `m`-th approximate problem advances by
//!
//! ```text
//! Φ_m(U_n) = P M⁻¹ (U_n + dτ (A U_n + Π_{N_m} Q(U_n))),   M = I - dτ (νΔ ⊕ μΔ)
//! ```
//!
//! and its residual is `E_n = M (U_n - Φ_m(U_{n-1})) / dτ` for `n ≥ 1`; the
//! `h`-block of `E` is `E₁` and the `q`-block is `E₂`. The Newton step uses the
//! exact derivative `Π ½(C(U; H) + C(H; U))` of `Π Q`, so that the residual
//! after an increment is exactly `-M P M⁻¹ Π Q(H_{n-1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_fields::ModelParams;
use crate::linsolver::grid::{FieldPair, Grid};
use crate::linsolver::rhs::{coupling, diffusion, explicit_linear, Coefficients, PressureMode};
use crate::linsolver::solver::{implicit_project, relative_divergence};
use crate::linsolver::spectral::{lowpass_vector, spectral_hs_norm_vector};

/// The discretized window on which the iteration is posed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub params: ModelParams,
    pub grid: Grid,
    pub dtau: f64,
    pub steps: usize,
    /// Bound on the relative divergence of every increment.
    pub proj_tol: f64,
}

impl Window {
    pub fn new(params: ModelParams, grid: Grid, dtau: f64, tau_end: f64) -> Result<Self> {
        if !(dtau > 0.0 && tau_end > 0.0) {
            return Err(Error::InvalidArgument(format!("window needs positive dtau and tau_end, got {dtau}, {tau_end}")));
        }
        let steps = (tau_end / dtau).round() as usize;
        Ok(Window { params, grid, dtau, steps: steps.max(1), proj_tol: 1e-8 })
    }

    fn coefficients(&self, n: usize) -> Coefficients {
        Coefficients::at(&self.params, n as f64 * self.dtau)
    }

    fn check_len(&self, traj: &[FieldPair]) -> Result<()> {
        if traj.len() != self.steps + 1 {
            return Err(Error::InvalidArgument(format!(
                "trajectory has {} states, window needs {}",
                traj.len(),
                self.steps + 1
            )));
        }
        Ok(())
    }
}

fn smooth(u: &FieldPair, cutoff: f64) -> FieldPair {
    u.map(|v| lowpass_vector(v, cutoff))
}

/// `Q(U) = ½ C(U; U)`.
pub fn quadratic(u: &FieldPair, c: &Coefficients) -> Result<FieldPair> {
    Ok(coupling(u, u, c, PressureMode::FBar)?.scale(0.5))
}

/// `M x = x - dτ (νΔ ⊕ μΔ) x`.
pub fn apply_m(x: &FieldPair, c: &Coefficients, dtau: f64) -> FieldPair {
    let mut out = x.clone();
    out.axpy(-dtau, &diffusion(x, c));
    out
}

/// `Φ_m(U_n)`, advancing from `τ_n`.
pub fn step_map(win: &Window, u: &FieldPair, n: usize, cutoff: f64) -> Result<FieldPair> {
    let c = win.coefficients(n);
    let mut e = explicit_linear(u, &c, PressureMode::FBar)?;
    e.axpy(1.0, &smooth(&quadratic(u, &c)?, cutoff));
    let mut v = u.clone();
    v.axpy(win.dtau, &e);
    Ok(implicit_project(&v, &c, win.dtau))
}

/// `E_n` for `n = 1 … N` (entry `n - 1`).
pub fn residual(win: &Window, traj: &[FieldPair], cutoff: f64) -> Result<Vec<FieldPair>> {
    win.check_len(traj)?;
    (1..=win.steps)
        .map(|n| {
            let mut d = traj[n].clone();
            d.axpy(-1.0, &step_map(win, &traj[n - 1], n - 1, cutoff)?);
            Ok(apply_m(&d, &win.coefficients(n - 1), win.dtau).scale(1.0 / win.dtau))
        })
        .collect()
}

/// `(E₁, E₂)` of a trajectory, each as one vector field per step.
pub fn residual_operators(win: &Window, traj: &[FieldPair], cutoff: f64) -> Result<ResidualPair> {
    let e = residual(win, traj, cutoff)?;
    Ok(ResidualPair { e })
}

/// The residual sequence with accessors for its two blocks.
#[derive(Debug, Clone)]
pub struct ResidualPair {
    pub e: Vec<FieldPair>,
}

impl ResidualPair {
    pub fn e1(&self) -> impl Iterator<Item = &crate::linsolver::grid::VectorGridField> {
        self.e.iter().map(|p| &p.h)
    }

    pub fn e2(&self) -> impl Iterator<Item = &crate::linsolver::grid::VectorGridField> {
        self.e.iter().map(|p| &p.q)
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(FieldPair::is_zero)
    }
}

/// Solves the linearized problem about `background` with forcing `-E` and
/// zero initial data; returns `H_0 = 0, H_1, …, H_N`.
pub fn linearized_solve_step(win: &Window, background: &[FieldPair], e: &[FieldPair], cutoff: f64) -> Result<Vec<FieldPair>> {
    win.check_len(background)?;
    if e.len() != win.steps {
        return Err(Error::InvalidArgument(format!("residual has {} entries, window needs {}", e.len(), win.steps)));
    }
    let mut out = Vec::with_capacity(win.steps + 1);
    out.push(FieldPair::zeros(win.grid));
    for n in 1..=win.steps {
        let c = win.coefficients(n - 1);
        let h = &out[n - 1];
        let u = &background[n - 1];
        let mut sym = coupling(u, h, &c, PressureMode::FBar)?;
        sym.axpy(1.0, &coupling(h, u, &c, PressureMode::FBar)?);
        let mut rhs = explicit_linear(h, &c, PressureMode::FBar)?;
        rhs.axpy(0.5, &smooth(&sym, cutoff));
        rhs.axpy(-1.0, &e[n - 1]);
        let mut v = h.clone();
        v.axpy(win.dtau, &rhs);
        let next = implicit_project(&v, &c, win.dtau);
        let div = relative_divergence(&next);
        if div > win.proj_tol {
            return Err(Error::NoConvergence {
                iterations: n,
                what: format!("increment divergence {div:.3e} exceeds tolerance"),
            });
        }
        if !next.is_finite() {
            return Err(Error::Diverged { tau: n as f64 * win.dtau, norm: f64::INFINITY, limit: f64::NAN });
        }
        out.push(next);
    }
    Ok(out)
}

/// `𝓡_n(H) = -M P M⁻¹ Π Q(H_{n-1})` for `n = 1 … N`.
pub fn quadratic_remainder(win: &Window, increment: &[FieldPair], cutoff: f64) -> Result<Vec<FieldPair>> {
    win.check_len(increment)?;
    (1..=win.steps)
        .map(|n| {
            let c = win.coefficients(n - 1);
            let q = smooth(&quadratic(&increment[n - 1], &c)?, cutoff);
            let v = implicit_project(&q, &c, win.dtau);
            Ok(apply_m(&v, &c, win.dtau).scale(-1.0))
        })
        .collect()
}

/// Surrogate `𝒞₁^s` norm of a sequence: `max_n ‖X_n‖_s + max_n ‖(X_n - X_{n-1})/dτ‖_{s-2}`,
/// for the `h`- and `q`-blocks separately.
pub fn trajectory_norm(seq: &[FieldPair], dtau: f64, s: f64) -> (f64, f64) {
    let mut out = [0.0f64; 2];
    let mut dt = [0.0f64; 2];
    for (i, x) in seq.iter().enumerate() {
        out[0] = out[0].max(spectral_hs_norm_vector(&x.h, s));
        out[1] = out[1].max(spectral_hs_norm_vector(&x.q, s));
        if i > 0 {
            let mut d = x.clone();
            d.axpy(-1.0, &seq[i - 1]);
            let d = d.scale(1.0 / dtau);
            dt[0] = dt[0].max(spectral_hs_norm_vector(&d.h, s - 2.0));
            dt[1] = dt[1].max(spectral_hs_norm_vector(&d.q, s - 2.0));
        }
    }
    (out[0] + dt[0], out[1] + dt[1])
}

/// `‖𝓡‖` against `N_m² (‖h‖² + ‖q‖²)`, and the quadratic scaling at `α = ½`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TameEstimate {
    pub n_m: f64,
    pub remainder_r1: f64,
    pub remainder_r2: f64,
    pub increment_h: f64,
    pub increment_q: f64,
    /// `(‖𝓡₁‖ + ‖𝓡₂‖) / (N_m² (‖h‖² + ‖q‖²))`, zero for a zero increment.
    pub constant: f64,
    /// `‖𝓡(½H)‖ / ‖𝓡(H)‖`.
    pub half_ratio: f64,
}

/// Measures the tame estimate for an increment, with increments in the
/// `k`-norm and remainders in the `k - 2` norm.
pub fn tame_estimate_check(win: &Window, increment: &[FieldPair], n_m: f64, k: f64) -> Result<TameEstimate> {
    let r = quadratic_remainder(win, increment, n_m)?;
    let (r1, r2) = trajectory_norm(&r[..], win.dtau, k - 2.0);
    let (hn, qn) = trajectory_norm(increment, win.dtau, k);
    let half: Vec<FieldPair> = increment.iter().map(|x| x.scale(0.5)).collect();
    let rh = quadratic_remainder(win, &half, n_m)?;
    let (h1, h2) = trajectory_norm(&rh[..], win.dtau, k - 2.0);
    let denom = n_m * n_m * (hn * hn + qn * qn);
    let constant = if denom == 0.0 { 0.0 } else { (r1 + r2) / denom };
    let half_ratio = if r1 + r2 == 0.0 { 0.0 } else { (h1 + h2) / (r1 + r2) };
    Ok(TameEstimate { n_m, remainder_r1: r1, remainder_r2: r2, increment_h: hn, increment_q: qn, constant, half_ratio })
}
