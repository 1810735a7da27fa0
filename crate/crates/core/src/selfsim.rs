//! Similarity variables `τ = ln(T̄*/(T̄* - t))`, `y = x/√(T̄* - t)`.
//!
//! The map sends the shrinking cube `[0, √(T̄* - t)]³` onto the fixed unit cube
//! and the blowup time `T̄*` to `τ = +∞`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_fields::Vec3;

/// Slack allowed when checking that `y` lies in the closed unit cube.
pub const CUBE_TOL: f64 = 1e-12;

/// A point `(τ, y)` of the fixed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimPoint {
    pub tau: f64,
    pub y: Vec3,
}

/// `τ(t) = ln(T̄*/(T̄* - t))`.
pub fn tau_of_t(t_bar_star: f64, t: f64) -> Result<f64> {
    check_time(t_bar_star, t)?;
    Ok(-(-t / t_bar_star).ln_1p())
}

/// `t(τ) = T̄*(1 - e^{-τ})`.
pub fn t_of_tau(t_bar_star: f64, tau: f64) -> f64 {
    -t_bar_star * (-tau).exp_m1()
}

fn check_time(t_bar_star: f64, t: f64) -> Result<()> {
    if !(t_bar_star > 0.0) || !t_bar_star.is_finite() {
        return Err(Error::InvalidArgument(format!("t_bar_star must be positive, got {t_bar_star}")));
    }
    if t >= t_bar_star {
        return Err(Error::PastBlowup { t, t_star: t_bar_star });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

fn in_cube(y: &Vec3) -> bool {
    y.iter().all(|&v| (-CUBE_TOL..=1.0 + CUBE_TOL).contains(&v))
}

/// Maps `(t, x)` with `x ∈ Ω_t` to similarity variables.
pub fn phys_to_selfsim(t_bar_star: f64, t: f64, x: Vec3) -> Result<SelfSimPoint> {
    let tau = tau_of_t(t_bar_star, t)?;
    let side = (t_bar_star - t).sqrt();
    let y = [x[0] / side, x[1] / side, x[2] / side];
    if !in_cube(&y) {
        return Err(Error::OutsideDomain { t, x0: x[0], x1: x[1], x2: x[2] });
    }
    Ok(SelfSimPoint { tau, y: y.map(|v| v.clamp(0.0, 1.0)) })
}

/// Inverse of [`phys_to_selfsim`].
pub fn selfsim_to_phys(t_bar_star: f64, sp: SelfSimPoint) -> (f64, Vec3) {
    let t = t_of_tau(t_bar_star, sp.tau);
    let side = t_bar_star.sqrt() * (-0.5 * sp.tau).exp();
    (t, sp.y.map(|v| v * side))
}

/// An exponential rate in `τ` restated as a power of the time gap.
///
/// `e^{-Cτ} = normalization · (T̄* - t)^{C}` with `normalization = T̄*^{-C}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapExponent {
    pub exponent: f64,
    pub normalization: f64,
}

impl GapExponent {
    /// `normalization · (T̄* - t)^{exponent}`.
    pub fn eval(&self, t_bar_star: f64, t: f64) -> f64 {
        self.normalization * (t_bar_star - t).powf(self.exponent)
    }
}

/// Converts a decay rate in `τ` into the exponent of `(T̄* - t)`.
pub fn decay_rate_convert(rate_tau: f64, t_bar_star: f64) -> GapExponent {
    GapExponent { exponent: rate_tau, normalization: t_bar_star.powf(-rate_tau) }
}

/// `ln(T̄* - t)` for each `τ`, ready for a power-law fit in the time gap.
pub fn log_time_gap(t_bar_star: f64, taus: &[f64]) -> Vec<f64> {
    taus.iter().map(|tau| t_bar_star.ln() - tau).collect()
}
