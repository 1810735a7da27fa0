//! Closed-form evaluation of the explicit self-similar blowup solution of the
//! incompressible MHD system, in binary64 arithmetic.
//!
//! With `s = T* - t` the velocity, magnetic field and pressure read
//!
//! ```text
//! v = (a x1/s + k x2 s^{2a},  a x2/s - k x1 s^{2a},  -2a x3/s)
//! H = (ā x1 + k̄ x2 x3 s^{2a+1},  ā x2 - k̄ x1 x3 s^{2a+1},  -2ā x3)
//! P = r²/2 (k² s^{4a} - a(a+1)/s²) + x3² a(1-2a)/s² - (3/2) k̄² r² x3² s^{2(2a+1)}
//! ```
//!
//! where `k̄` is the magnetic swirl coefficient selected by [`Family`]. The
//! published family uses `k̄ = 2āk/(4a+1)`; the swirl-free family uses `k̄ = 0`.
//! Exact (rational) statements about these fields live in [`crate::timepoly`].

use serde::{Deserialize, Serialize};

use crate::energy_monitor::coefficient_conditions;
use crate::error::{Error, Result};

/// A real 3-vector.
pub type Vec3 = [f64; 3];

/// A real 3×3 matrix, stored row-major. Jacobians use `m[i][j] = ∂u_i/∂x_j`.
pub type Mat3 = [[f64; 3]; 3];

/// Constants of the explicit solution and of the perturbation problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub k: f64,
    pub a_bar: f64,
    pub nu: f64,
    pub mu: f64,
    pub t_star: f64,
    pub t_bar_star: f64,
}

impl ModelParams {
    /// Parameters with the perturbed blowup time equal to `t_star`.
    pub fn new(a: f64, k: f64, a_bar: f64, nu: f64, mu: f64, t_star: f64) -> Self {
        ModelParams {
            a,
            k,
            a_bar,
            nu,
            mu,
            t_star,
            t_bar_star: t_star,
        }
    }

    /// Stability-suite defaults: `ν = μ = 10`, `a = 1/4`, `k = ā = 1/2`, `T* = 1`.
    pub fn stability_default() -> Self {
        ModelParams::new(0.25, 0.5, 0.5, 10.0, 10.0, 1.0)
    }

    /// The published magnetic swirl coefficient `2āk/(4a+1)`.
    pub fn published_swirl(&self) -> f64 {
        2.0 * self.a_bar * self.k / (4.0 * self.a + 1.0)
    }
}

/// Which admissibility gate [`validate_params`] applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationMode {
    /// Constraints under which the explicit family is stated.
    Existence,
    /// Constraints of the stability result; `s` and `c_r` feed the
    /// coefficient-positivity conditions.
    Stability { s: f64, c_r: f64 },
}

/// Parameters that passed [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams {
    params: ModelParams,
}

impl ValidatedParams {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

impl std::ops::Deref for ValidatedParams {
    type Target = ModelParams;
    fn deref(&self) -> &ModelParams {
        &self.params
    }
}

/// Checks the admissibility constraints and lists every violated one.
pub fn validate_params(p: &ModelParams, mode: ValidationMode) -> Result<ValidatedParams> {
    let mut violations = Vec::new();
    let values = [
        ("a", p.a),
        ("k", p.k),
        ("a_bar", p.a_bar),
        ("nu", p.nu),
        ("mu", p.mu),
        ("t_star", p.t_star),
        ("t_bar_star", p.t_bar_star),
    ];
    for (name, v) in values {
        if !v.is_finite() {
            violations.push(format!("{name} is not finite"));
        }
    }
    if p.a == 0.0 || p.a == -0.25 {
        violations.push("a ∈ excluded set {0, -1/4}".to_string());
    }
    if p.k == 0.0 {
        violations.push("k must be nonzero".to_string());
    }
    if p.a_bar == 0.0 {
        violations.push("a_bar must be nonzero".to_string());
    }
    if !(p.t_star > 0.0) {
        violations.push("t_star must be positive".to_string());
    }
    if !(p.t_bar_star > 0.0) {
        violations.push("t_bar_star must be positive".to_string());
    }
    if p.nu < 0.0 {
        violations.push("nu must be non-negative".to_string());
    }
    if p.mu < 0.0 {
        violations.push("mu must be non-negative".to_string());
    }
    if let ValidationMode::Stability { s, c_r } = mode {
        if !(p.a > 0.0 && p.a <= 0.5) {
            violations.push("a ∉ (0,1/2]".to_string());
        }
        if !(p.a_bar > 0.0 && p.a_bar <= 1.0) {
            violations.push("a_bar ∉ (0,1]".to_string());
        }
        if !(p.k > 0.0 && p.k <= 1.0) {
            violations.push("k ∉ (0,1]".to_string());
        }
        let report = coefficient_conditions(p, s, c_r);
        for c in report.conditions.iter().filter(|c| !c.holds) {
            violations.push(format!("coefficient condition {} fails ({:.6})", c.name, c.value));
        }
    }
    if violations.is_empty() {
        Ok(ValidatedParams { params: *p })
    } else {
        Err(Error::InvalidParams(violations))
    }
}

/// Selects the magnetic swirl coefficient `k̄` of the explicit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `k̄ = 2āk/(4a+1)`, the family as published.
    #[default]
    Published,
    /// `k̄ = 0`, the member of the ansatz that solves the system exactly.
    SwirlFree,
}

impl Family {
    pub fn swirl(self, p: &ModelParams) -> f64 {
        match self {
            Family::Published => p.published_swirl(),
            Family::SwirlFree => 0.0,
        }
    }
}

/// Time gap `T* - t`, rejecting times at or past the blowup time.
fn gap(t_star: f64, t: f64) -> Result<f64> {
    let s = t_star - t;
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::PastBlowup { t, t_star })
    }
}

/// `s^e` for `s > 0`, computed as `exp(e ln s)`.
fn spow(s: f64, e: f64) -> f64 {
    (e * s.ln()).exp()
}

/// The explicit solution for a parameter set and a swirl coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupSolution {
    pub params: ModelParams,
    /// Magnetic swirl coefficient `k̄`.
    pub swirl: f64,
}

impl BlowupSolution {
    pub fn new(params: &ModelParams, family: Family) -> Self {
        BlowupSolution {
            params: *params,
            swirl: family.swirl(params),
        }
    }

    pub fn velocity(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let rot = p.k * spow(s, 2.0 * p.a);
        Ok([
            p.a * x[0] / s + rot * x[1],
            p.a * x[1] / s - rot * x[0],
            -2.0 * p.a * x[2] / s,
        ])
    }

    pub fn magnetic(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let sw = self.swirl * spow(s, 2.0 * p.a + 1.0);
        Ok([
            p.a_bar * x[0] + sw * x[1] * x[2],
            p.a_bar * x[1] - sw * x[0] * x[2],
            -2.0 * p.a_bar * x[2],
        ])
    }

    pub fn pressure(&self, t: f64, x: Vec3) -> Result<f64> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let r2 = x[0] * x[0] + x[1] * x[1];
        let z2 = x[2] * x[2];
        let radial = p.k * p.k * spow(s, 4.0 * p.a) - p.a * (p.a + 1.0) / (s * s);
        let axial = p.a * (1.0 - 2.0 * p.a) / (s * s);
        let sw2 = self.swirl * self.swirl * spow(s, 2.0 * (2.0 * p.a + 1.0));
        Ok(0.5 * r2 * radial + z2 * axial - 1.5 * sw2 * r2 * z2)
    }

    pub fn pressure_gradient(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let r2 = x[0] * x[0] + x[1] * x[1];
        let z2 = x[2] * x[2];
        let radial = p.k * p.k * spow(s, 4.0 * p.a) - p.a * (p.a + 1.0) / (s * s);
        let axial = p.a * (1.0 - 2.0 * p.a) / (s * s);
        let sw2 = self.swirl * self.swirl * spow(s, 2.0 * (2.0 * p.a + 1.0));
        Ok([
            x[0] * radial - 3.0 * sw2 * x[0] * z2,
            x[1] * radial - 3.0 * sw2 * x[1] * z2,
            2.0 * x[2] * axial - 3.0 * sw2 * r2 * x[2],
        ])
    }

    /// Jacobian of the velocity; independent of `x`.
    pub fn grad_velocity(&self, t: f64) -> Result<Mat3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let rot = p.k * spow(s, 2.0 * p.a);
        let d = p.a / s;
        Ok([[d, rot, 0.0], [-rot, d, 0.0], [0.0, 0.0, -2.0 * d]])
    }

    /// Jacobian of the magnetic field; affine in `x`.
    pub fn grad_magnetic(&self, t: f64, x: Vec3) -> Result<Mat3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let sw = self.swirl * spow(s, 2.0 * p.a + 1.0);
        let ab = p.a_bar;
        Ok([
            [ab, sw * x[2], sw * x[1]],
            [-sw * x[2], ab, -sw * x[0]],
            [0.0, 0.0, -2.0 * ab],
        ])
    }

    /// Time derivative of the velocity.
    pub fn velocity_dt(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let rot_dt = -2.0 * p.a * p.k * spow(s, 2.0 * p.a - 1.0);
        Ok([
            p.a * x[0] / (s * s) + rot_dt * x[1],
            p.a * x[1] / (s * s) - rot_dt * x[0],
            -2.0 * p.a * x[2] / (s * s),
        ])
    }

    /// Time derivative of the magnetic field.
    pub fn magnetic_dt(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let p = &self.params;
        let s = gap(p.t_star, t)?;
        let sw_dt = -(2.0 * p.a + 1.0) * self.swirl * spow(s, 2.0 * p.a);
        Ok([sw_dt * x[1] * x[2], -sw_dt * x[0] * x[2], 0.0])
    }

    /// Cartesian curl of the velocity, `(0, 0, -2k s^{2a})`.
    pub fn vorticity(&self, t: f64) -> Result<Vec3> {
        let j = self.grad_velocity(t)?;
        Ok(curl_from_jacobian(&j))
    }

    /// Momentum residual `v_t + v·∇v + ∇P - νΔv - (∇×H)×H` at a point.
    ///
    /// Both fields are multilinear in `x`, so their Laplacians vanish.
    pub fn momentum_residual(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let v = self.velocity(t, x)?;
        let h = self.magnetic(t, x)?;
        let vt = self.velocity_dt(t, x)?;
        let jv = self.grad_velocity(t)?;
        let jh = self.grad_magnetic(t, x)?;
        let gp = self.pressure_gradient(t, x)?;
        let adv = mat_vec(&jv, v);
        let lorentz = cross(curl_from_jacobian(&jh), h);
        Ok(std::array::from_fn(|i| vt[i] + adv[i] + gp[i] - lorentz[i]))
    }

    /// Induction residual `H_t - μΔH - ∇×(v×H)` at a point.
    pub fn induction_residual(&self, t: f64, x: Vec3) -> Result<Vec3> {
        let v = self.velocity(t, x)?;
        let h = self.magnetic(t, x)?;
        let ht = self.magnetic_dt(t, x)?;
        let jv = self.grad_velocity(t)?;
        let jh = self.grad_magnetic(t, x)?;
        let stretch = mat_vec(&jv, h);
        let adv = mat_vec(&jh, v);
        Ok(std::array::from_fn(|i| ht[i] - (stretch[i] - adv[i])))
    }
}

fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Curl from a Jacobian with `m[i][j] = ∂u_i/∂x_j`.
pub fn curl_from_jacobian(m: &Mat3) -> Vec3 {
    [m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]]
}

/// Velocity of the published family.
pub fn eval_velocity(p: &ValidatedParams, t: f64, x: Vec3) -> Result<Vec3> {
    BlowupSolution::new(p, Family::Published).velocity(t, x)
}

/// Magnetic field of the published family.
pub fn eval_magnetic(p: &ValidatedParams, t: f64, x: Vec3) -> Result<Vec3> {
    BlowupSolution::new(p, Family::Published).magnetic(t, x)
}

/// Pressure of the published family.
pub fn eval_pressure(p: &ValidatedParams, t: f64, x: Vec3) -> Result<f64> {
    BlowupSolution::new(p, Family::Published).pressure(t, x)
}

/// Velocity Jacobian of the published family.
pub fn grad_velocity(p: &ValidatedParams, t: f64) -> Result<Mat3> {
    BlowupSolution::new(p, Family::Published).grad_velocity(t)
}

/// Magnetic Jacobian of the published family.
pub fn grad_magnetic(p: &ValidatedParams, t: f64, x: Vec3) -> Result<Mat3> {
    BlowupSolution::new(p, Family::Published).grad_magnetic(t, x)
}

/// Cartesian vorticity `∇×v = (0, 0, -2k s^{2a})`.
pub fn vorticity(p: &ValidatedParams, t: f64) -> Result<Vec3> {
    BlowupSolution::new(p, Family::Published).vorticity(t)
}

/// Vorticity in the swirl sign convention, `(0, 0, 2k s^{2a})`.
///
/// The published value is the swirl component measured against the
/// left-handed angular vector `e_θ = (x2, -x1, 0)/r`; it is the negative of the
/// Cartesian curl returned by [`vorticity`].
pub fn vorticity_swirl_convention(p: &ValidatedParams, t: f64) -> Result<Vec3> {
    let w = vorticity(p, t)?;
    Ok([w[0], w[1], -w[2]])
}

/// Initial velocity and magnetic field at `t = 0`.
pub fn initial_data(p: &ValidatedParams, x: Vec3) -> Result<(Vec3, Vec3)> {
    Ok((eval_velocity(p, 0.0, x)?, eval_magnetic(p, 0.0, x)?))
}

/// Components along the cylindrical frame `e_r`, `e_θ`, `e_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylTriple {
    pub c_r: f64,
    pub c_theta: f64,
    pub c_z: f64,
}

/// The frame `e_r = (x1, x2, 0)/r`, `e_θ = (x2, -x1, 0)/r`, `e_z` at `x`.
fn cyl_frame(x: Vec3) -> Result<(Vec3, Vec3)> {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return Err(Error::OnAxis);
    }
    Ok(([x[0] / r, x[1] / r, 0.0], [x[1] / r, -x[0] / r, 0.0]))
}

/// Cartesian vector `c_r e_r + c_θ e_θ + c_z e_z` at the point `x`.
pub fn cyl_to_cartesian(x: Vec3, c: CylTriple) -> Result<Vec3> {
    let (er, et) = cyl_frame(x)?;
    Ok([
        c.c_r * er[0] + c.c_theta * et[0],
        c.c_r * er[1] + c.c_theta * et[1],
        c.c_z,
    ])
}

/// Cylindrical components of the Cartesian vector `v` at the point `x`.
pub fn cartesian_to_cyl(x: Vec3, v: Vec3) -> Result<CylTriple> {
    let (er, et) = cyl_frame(x)?;
    Ok(CylTriple {
        c_r: v[0] * er[0] + v[1] * er[1],
        c_theta: v[0] * et[0] + v[1] * et[1],
        c_z: v[2],
    })
}

/// The axisymmetric form `(v^r, v^θ, v^z)`, `(H^r, H^θ, H^z)` of the solution.
pub fn cylindrical_solution(
    sol: &BlowupSolution,
    t: f64,
    r: f64,
    z: f64,
) -> Result<(CylTriple, CylTriple)> {
    let p = &sol.params;
    let s = gap(p.t_star, t)?;
    let v = CylTriple {
        c_r: p.a * r / s,
        c_theta: p.k * r * spow(s, 2.0 * p.a),
        c_z: -2.0 * p.a * z / s,
    };
    let h = CylTriple {
        c_r: p.a_bar * r,
        c_theta: sol.swirl * r * z * spow(s, 2.0 * p.a + 1.0),
        c_z: -2.0 * p.a_bar * z,
    };
    Ok((v, h))
}

/// Whether `x` lies in the shrinking cube `[0, √(T̄* - t)]³`.
pub fn in_domain(t_bar_star: f64, t: f64, x: Vec3) -> Result<bool> {
    let s = gap(t_bar_star, t)?;
    let side = s.sqrt();
    Ok(x.iter().all(|&xi| (0.0..=side).contains(&xi)))
}
