//! Exact residual certificates for the explicit family.
//!
//! Fields are assembled in the ring of [`super::TimePolyScalar`] from rational
//! parameters, the MHD operators are applied exactly, and each residual is
//! checked structurally for zero.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use super::derivation::{verify_derivation_constants, DerivationReport};
use super::{fmt_q, lorentz_force, q, qi, TimePolyScalar, TimePolyVec3, Q};
use crate::error::{Error, Result};
use crate::exact_fields::{Family, ModelParams};

/// Exact counterparts of [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct RationalParams {
    pub a: Q,
    pub k: Q,
    pub a_bar: Q,
    pub nu: Q,
    pub mu: Q,
    pub t_star: Q,
}

impl RationalParams {
    /// Validated construction under the existence constraints.
    pub fn new(a: Q, k: Q, a_bar: Q, nu: Q, mu: Q, t_star: Q) -> Result<Self> {
        let mut violations = Vec::new();
        if a.is_zero() || a == q(-1, 4) {
            violations.push("a ∈ excluded set {0, -1/4}".to_string());
        }
        if k.is_zero() {
            violations.push("k must be nonzero".to_string());
        }
        if a_bar.is_zero() {
            violations.push("a_bar must be nonzero".to_string());
        }
        if !t_star.is_positive() {
            violations.push("t_star must be positive".to_string());
        }
        if nu.is_negative() || mu.is_negative() {
            violations.push("nu and mu must be non-negative".to_string());
        }
        if violations.is_empty() {
            Ok(RationalParams { a, k, a_bar, nu, mu, t_star })
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    /// Best rational approximation of floating-point parameters
    /// (denominators up to `10^6`).
    pub fn from_model(p: &ModelParams) -> Result<Self> {
        let conv = |v: f64, name: &str| -> Result<Q> {
            let r = Q::from_float(v).ok_or_else(|| Error::InvalidArgument(format!("{name} is not finite")))?;
            Ok(limit_denominator(&r, 1_000_000))
        };
        RationalParams::new(
            conv(p.a, "a")?,
            conv(p.k, "k")?,
            conv(p.a_bar, "a_bar")?,
            conv(p.nu, "nu")?,
            conv(p.mu, "mu")?,
            conv(p.t_star, "t_star")?,
        )
    }

    pub fn to_model(&self) -> ModelParams {
        let f = |v: &Q| v.to_f64().unwrap_or(f64::NAN);
        ModelParams::new(f(&self.a), f(&self.k), f(&self.a_bar), f(&self.nu), f(&self.mu), f(&self.t_star))
    }

    /// `k̄ = 2āk/(4a+1)`.
    pub fn published_swirl(&self) -> Q {
        qi(2) * &self.a_bar * &self.k / (qi(4) * &self.a + qi(1))
    }

    pub fn swirl(&self, family: Family) -> Q {
        match family {
            Family::Published => self.published_swirl(),
            Family::SwirlFree => Q::zero(),
        }
    }

    /// A random admissible set; `a` takes both signs.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let nonzero = |rng: &mut R, max_num: i64| -> Q {
            let n = rng.gen_range(1..=max_num);
            let d = rng.gen_range(1..=6);
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            q(sign * n, d)
        };
        loop {
            let a = nonzero(rng, 7);
            if a == q(-1, 4) {
                continue;
            }
            let k = nonzero(rng, 5);
            let a_bar = nonzero(rng, 5);
            let nu = q(rng.gen_range(0..=9), rng.gen_range(1..=4));
            let mu = q(rng.gen_range(0..=9), rng.gen_range(1..=4));
            let t_star = q(rng.gen_range(1..=9), rng.gen_range(1..=4));
            if let Ok(p) = RationalParams::new(a, k, a_bar, nu, mu, t_star) {
                return p;
            }
        }
    }
}

/// Rational with denominator at most `max_den` closest to `r` (continued fractions).
fn limit_denominator(r: &Q, max_den: i64) -> Q {
    let max_den = num_bigint::BigInt::from(max_den);
    if r.denom() <= &max_den {
        return r.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        num_bigint::BigInt::zero(),
        num_bigint::BigInt::one(),
        num_bigint::BigInt::one(),
        num_bigint::BigInt::zero(),
    );
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    loop {
        let a = num_integer::Integer::div_floor(&n, &d);
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let rem = &n - &a * &d;
        if rem.is_zero() {
            break;
        }
        n = std::mem::replace(&mut d, rem);
    }
    Q::new(p1, q1)
}

/// The coefficients that define a member of the explicit ansatz.
///
/// The certified fields depend on exactly these numbers, so single-coefficient
/// mutations are expressed by editing one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    /// `k̄` in the magnetic swirl term.
    pub magnetic_swirl: Q,
    /// `k̄` in the pressure.
    pub pressure_swirl: Q,
    /// The coefficient `a(a+1)` of `r²/(2 s²)` in the pressure.
    pub pressure_radial: Q,
    /// The coefficient `-2a` of `x3/s` in the third velocity component.
    pub axial_velocity: Q,
}

impl FieldSpec {
    pub fn for_family(rp: &RationalParams, family: Family) -> Self {
        let swirl = rp.swirl(family);
        FieldSpec {
            magnetic_swirl: swirl.clone(),
            pressure_swirl: swirl,
            pressure_radial: &rp.a * (&rp.a + qi(1)),
            axial_velocity: qi(-2) * &rp.a,
        }
    }

    /// The field description with one coefficient edited, or `None` when the edited
    /// coefficient is undefined (`4a + 2 = 0` for the swirl denominator).
    pub fn mutated(&self, rp: &RationalParams, m: Mutation) -> Option<Self> {
        let mut out = self.clone();
        match m {
            Mutation::PressureCoefficient => out.pressure_radial = &self.pressure_radial + qi(1),
            Mutation::SwirlDenominator => {
                let den = qi(4) * &rp.a + qi(2);
                if den.is_zero() {
                    return None;
                }
                out.magnetic_swirl = qi(2) * &rp.a_bar * &rp.k / den;
            }
            Mutation::AxialVelocity => out.axial_velocity = -rp.a.clone(),
        }
        Some(out)
    }
}

/// Single-coefficient mutations used to show the certifier is not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    /// `a(a+1) → a(a+1) + 1` in the pressure.
    PressureCoefficient,
    /// `2āk/(4a+1) → 2āk/(4a+2)` in the magnetic swirl.
    SwirlDenominator,
    /// `-2a → -a` in the third velocity component.
    AxialVelocity,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [
        Mutation::PressureCoefficient,
        Mutation::SwirlDenominator,
        Mutation::AxialVelocity,
    ];
}

/// Velocity, magnetic field and pressure in the exact ring.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFields {
    pub v: TimePolyVec3,
    pub h: TimePolyVec3,
    pub p: TimePolyScalar,
}

/// Builds the fields of a [`FieldSpec`].
pub fn build_fields(rp: &RationalParams, spec: &FieldSpec) -> ExactFields {
    let a = &rp.a;
    let t = TimePolyScalar::term;
    let two_a = qi(2) * a;
    let m1 = -qi(1);
    let v = TimePolyVec3::new([
        &t(a.clone(), m1.clone(), [1, 0, 0]) + &t(rp.k.clone(), two_a.clone(), [0, 1, 0]),
        &t(a.clone(), m1.clone(), [0, 1, 0]) + &t(-rp.k.clone(), two_a.clone(), [1, 0, 0]),
        t(spec.axial_velocity.clone(), m1, [0, 0, 1]),
    ]);
    let sw_exp = &two_a + qi(1);
    let h = TimePolyVec3::new([
        &t(rp.a_bar.clone(), Q::zero(), [1, 0, 0]) + &t(spec.magnetic_swirl.clone(), sw_exp.clone(), [0, 1, 1]),
        &t(rp.a_bar.clone(), Q::zero(), [0, 1, 0]) + &t(-spec.magnetic_swirl.clone(), sw_exp.clone(), [1, 0, 1]),
        t(qi(-2) * &rp.a_bar, Q::zero(), [0, 0, 1]),
    ]);
    let r2 = &t(qi(1), Q::zero(), [2, 0, 0]) + &t(qi(1), Q::zero(), [0, 2, 0]);
    let z2 = t(qi(1), Q::zero(), [0, 0, 2]);
    let ks2 = &spec.pressure_swirl * &spec.pressure_swirl;
    let swirl_sq_exp = qi(2) * &sw_exp;
    let radial_bracket = &(&t(&rp.k * &rp.k, qi(4) * a, [0; 3]) + &t(-spec.pressure_radial.clone(), qi(-2), [0; 3]))
        + &t(qi(-2) * &ks2, swirl_sq_exp.clone(), [0, 0, 2]);
    let axial_bracket = &t(a * (qi(1) - qi(2) * a), qi(-2), [0; 3]) + &(&r2 * &t(-(&ks2 / qi(2)), swirl_sq_exp, [0; 3]));
    let p = &(&r2 * &radial_bracket).scale(&q(1, 2)) + &(&z2 * &axial_bracket);
    ExactFields { v, h, p }
}

/// Fields of a family.
pub fn family_fields(rp: &RationalParams, family: Family) -> ExactFields {
    build_fields(rp, &FieldSpec::for_family(rp, family))
}

/// `∂_t v + v·∇v + ∇P - νΔv - (∇×H)×H`.
pub fn momentum_residual_of(rp: &RationalParams, f: &ExactFields) -> TimePolyVec3 {
    let lhs = &(&f.v.ddt() + &f.v.advect(&f.v)) + &f.p.grad();
    let rhs = &f.v.laplacian().scale(&rp.nu) + &lorentz_force(&f.h);
    &lhs - &rhs
}

/// `∂_t H - μΔH - ∇×(v×H)`, reading the induction field `B` as `H`.
pub fn induction_residual_of(rp: &RationalParams, f: &ExactFields) -> TimePolyVec3 {
    &(&f.h.ddt() - &f.h.laplacian().scale(&rp.mu)) - &f.v.cross(&f.h).curl()
}

/// `(∇·v, ∇·H)`.
pub fn divergence_residuals_of(f: &ExactFields) -> (TimePolyScalar, TimePolyScalar) {
    (f.v.div(), f.h.div())
}

/// Momentum residual of the published family.
pub fn momentum_residual(rp: &RationalParams) -> TimePolyVec3 {
    momentum_residual_of(rp, &family_fields(rp, Family::Published))
}

/// Induction residual of the published family.
pub fn induction_residual(rp: &RationalParams) -> TimePolyVec3 {
    induction_residual_of(rp, &family_fields(rp, Family::Published))
}

/// Divergence residuals of the published family.
pub fn divergence_residuals(rp: &RationalParams) -> (TimePolyScalar, TimePolyScalar) {
    divergence_residuals_of(&family_fields(rp, Family::Published))
}

/// Status of one residual in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualStatus {
    pub zero: bool,
    pub residual: String,
}

impl ResidualStatus {
    fn vec(r: &TimePolyVec3) -> Self {
        ResidualStatus { zero: r.is_zero(), residual: r.to_string() }
    }

    fn scalar(r: &TimePolyScalar) -> Self {
        ResidualStatus { zero: r.is_zero(), residual: r.to_string() }
    }
}

/// Result of checking the modified-pressure gradient identities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureGradientReport {
    /// `x1 ∂1 P̄ + x2 ∂2 P̄ = r²·(ā² + k² s^{4a} - a(1+a)/s² - k̄² x3² s^{2(2a+1)})`.
    pub radial: ResidualStatus,
    /// `∂3 P̄ = 2 x3 (2ā² + a(1-2a)/s²)`.
    pub axial: ResidualStatus,
    /// `|H|² = ā² r² + k̄² r² x3² s^{2(2a+1)} + 4ā² x3²`.
    pub magnetic_energy: ResidualStatus,
    /// Both sides of every identity vanish at the origin.
    pub origin_zero: bool,
    pub passed: bool,
}

/// Checks the gradient identities of `P̄ = P + |H|²/2` exactly.
///
/// With `k̄ = 2āk/(4a+1)` the coefficient `k̄²` equals `4ā²k²/(4a+1)²`, so the
/// brackets coincide with the published ones.
pub fn verify_pressure_gradients(rp: &RationalParams, family: Family) -> PressureGradientReport {
    let f = family_fields(rp, family);
    let t = TimePolyScalar::term;
    let ks2 = {
        let k = rp.swirl(family);
        &k * &k
    };
    let sq_exp = qi(2) * (qi(2) * &rp.a + qi(1));
    let a2 = &rp.a_bar * &rp.a_bar;
    let energy = f.h.dot(&f.h);
    let pbar = &f.p + &energy.scale(&q(1, 2));
    let r2 = &t(qi(1), Q::zero(), [2, 0, 0]) + &t(qi(1), Q::zero(), [0, 2, 0]);

    let radial_lhs = &(&TimePolyScalar::coord(0) * &pbar.ddx(0)) + &(&TimePolyScalar::coord(1) * &pbar.ddx(1));
    let bracket = &(&(&t(a2.clone(), Q::zero(), [0; 3]) + &t(&rp.k * &rp.k, qi(4) * &rp.a, [0; 3]))
        + &t(-(&rp.a * (qi(1) + &rp.a)), qi(-2), [0; 3]))
        + &t(-ks2.clone(), sq_exp.clone(), [0, 0, 2]);
    let radial_rhs = &r2 * &bracket;

    let axial_lhs = pbar.ddx(2);
    let axial_rhs = &t(qi(2), Q::zero(), [0, 0, 1])
        * &(&t(qi(2) * &a2, Q::zero(), [0; 3]) + &t(&rp.a * (qi(1) - qi(2) * &rp.a), qi(-2), [0; 3]));

    let energy_rhs = &(&(&r2 * &t(a2.clone(), Q::zero(), [0; 3])) + &(&r2 * &t(ks2, sq_exp, [0, 0, 2])))
        + &t(qi(4) * &a2, Q::zero(), [0, 0, 2]);

    let polys = [&radial_lhs, &radial_rhs, &axial_lhs, &axial_rhs, &energy, &energy_rhs];
    let origin_zero = polys.iter().all(|p| p.eval_gap(1.0, [0.0; 3]) == 0.0 && !p.terms().any(|(m, _)| *m == [0; 3]));
    let radial = ResidualStatus::scalar(&(&radial_lhs - &radial_rhs));
    let axial = ResidualStatus::scalar(&(&axial_lhs - &axial_rhs));
    let magnetic_energy = ResidualStatus::scalar(&(&energy - &energy_rhs));
    let passed = radial.zero && axial.zero && magnetic_energy.zero && origin_zero;
    PressureGradientReport { radial, axial, magnetic_energy, origin_zero, passed }
}

/// Outcome of the scaling check for one `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub lambda: String,
    pub momentum: ResidualStatus,
    pub induction: ResidualStatus,
    pub divergence_velocity: ResidualStatus,
    pub divergence_magnetic: ResidualStatus,
    /// Residuals of the scaled fields equal the rescaled residuals of the
    /// original fields (weight 3 for the evolution equations, 2 for divergences).
    pub covariant: bool,
    pub zero_residuals: bool,
}

/// Scales `(v, H, P) ↦ (λ v(λ²t, λx), λ H(λ²t, λx), λ² P(λ²t, λx))` exactly and
/// recomputes the residuals.
pub fn verify_scaling_invariance(rp: &RationalParams, lambda: &Q, family: Family) -> Result<ScalingReport> {
    if !lambda.is_positive() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", fmt_q(lambda))));
    }
    let f = family_fields(rp, family);
    let scaled = ExactFields {
        v: f.v.rescale(lambda, 1)?,
        h: f.h.rescale(lambda, 1)?,
        p: f.p.rescale(lambda, 2)?,
    };
    let mom = momentum_residual_of(rp, &scaled);
    let ind = induction_residual_of(rp, &scaled);
    let (dv, dh) = divergence_residuals_of(&scaled);
    let (dv0, dh0) = divergence_residuals_of(&f);
    let covariant = mom == momentum_residual_of(rp, &f).rescale(lambda, 3)?
        && ind == induction_residual_of(rp, &f).rescale(lambda, 3)?
        && dv == dv0.rescale(lambda, 2)?
        && dh == dh0.rescale(lambda, 2)?;
    let zero_residuals = mom.is_zero() && ind.is_zero() && dv.is_zero() && dh.is_zero();
    Ok(ScalingReport {
        lambda: fmt_q(lambda),
        momentum: ResidualStatus::vec(&mom),
        induction: ResidualStatus::vec(&ind),
        divergence_velocity: ResidualStatus::scalar(&dv),
        divergence_magnetic: ResidualStatus::scalar(&dh),
        covariant,
        zero_residuals,
    })
}

/// Outcome of one mutation test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationOutcome {
    pub mutation: Mutation,
    pub family: Family,
    /// Which residual the mutation targets.
    pub residual: &'static str,
    pub baseline_zero: bool,
    pub mutated_nonzero: bool,
    pub differs_from_baseline: bool,
    /// For the axial-velocity mutation: the divergence equals `a/(T*-t)` exactly.
    pub exact_value_matches: Option<bool>,
}

/// Runs every mutation on `family`; mutations undefined at `rp` are omitted.
pub fn run_mutations(rp: &RationalParams, family: Family) -> Vec<MutationOutcome> {
    let base_spec = FieldSpec::for_family(rp, family);
    let base = build_fields(rp, &base_spec);
    Mutation::ALL
        .iter()
        .filter_map(|&m| Some((m, base_spec.mutated(rp, m)?)))
        .map(|(m, spec)| {
            let mutated = build_fields(rp, &spec);
            let (name, b, r, exact) = match m {
                Mutation::PressureCoefficient => (
                    "momentum",
                    momentum_residual_of(rp, &base),
                    momentum_residual_of(rp, &mutated),
                    None,
                ),
                Mutation::SwirlDenominator => (
                    "induction",
                    induction_residual_of(rp, &base),
                    induction_residual_of(rp, &mutated),
                    None,
                ),
                Mutation::AxialVelocity => {
                    let (d0, _) = divergence_residuals_of(&base);
                    let (d1, _) = divergence_residuals_of(&mutated);
                    let expected = TimePolyScalar::term(rp.a.clone(), qi(-1), [0; 3]);
                    let exact = d1 == expected;
                    let wrap = |s: TimePolyScalar| {
                        TimePolyVec3::new([s, TimePolyScalar::zero(), TimePolyScalar::zero()])
                    };
                    ("divergence", wrap(d0), wrap(d1), Some(exact))
                }
            };
            MutationOutcome {
                mutation: m,
                family,
                residual: name,
                baseline_zero: b.is_zero(),
                mutated_nonzero: !r.is_zero(),
                differs_from_baseline: r != b,
                exact_value_matches: exact,
            }
        })
        .collect()
}

/// Machine-readable certificate for one parameter set and family.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub family: Family,
    pub params: CertificateParams,
    pub induction_reading: &'static str,
    pub momentum: ResidualStatus,
    pub induction: ResidualStatus,
    pub divergence_velocity: ResidualStatus,
    pub divergence_magnetic: ResidualStatus,
    pub pressure_gradients: PressureGradientReport,
    pub derivation: DerivationReport,
    pub scaling: Vec<ScalingReport>,
    pub mutations: Vec<MutationOutcome>,
    /// Momentum, induction and both divergence residuals vanish.
    pub all_residuals_zero: bool,
    /// Every check in the certificate passed.
    pub passed: bool,
}

/// Rational parameters rendered as strings.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateParams {
    pub a: String,
    pub k: String,
    pub a_bar: String,
    pub nu: String,
    pub mu: String,
    pub t_star: String,
}

/// Runs every certifier for `rp` on `family`. Scaling factors whose powers
/// leave the rationals are skipped.
pub fn certify(rp: &RationalParams, family: Family, lambdas: &[Q]) -> Certificate {
    let f = family_fields(rp, family);
    let momentum = ResidualStatus::vec(&momentum_residual_of(rp, &f));
    let induction = ResidualStatus::vec(&induction_residual_of(rp, &f));
    let (dv, dh) = divergence_residuals_of(&f);
    let divergence_velocity = ResidualStatus::scalar(&dv);
    let divergence_magnetic = ResidualStatus::scalar(&dh);
    let pressure_gradients = verify_pressure_gradients(rp, family);
    let derivation = verify_derivation_constants(rp);
    let scaling: Vec<ScalingReport> = lambdas
        .iter()
        .filter_map(|l| verify_scaling_invariance(rp, l, family).ok())
        .collect();
    let mutations = run_mutations(rp, family);
    let all_residuals_zero =
        momentum.zero && induction.zero && divergence_velocity.zero && divergence_magnetic.zero;
    let passed = all_residuals_zero
        && pressure_gradients.passed
        && scaling.iter().all(|s| s.zero_residuals && s.covariant)
        && mutations.iter().all(|m| m.mutated_nonzero && m.differs_from_baseline);
    Certificate {
        family,
        params: CertificateParams {
            a: fmt_q(&rp.a),
            k: fmt_q(&rp.k),
            a_bar: fmt_q(&rp.a_bar),
            nu: fmt_q(&rp.nu),
            mu: fmt_q(&rp.mu),
            t_star: fmt_q(&rp.t_star),
        },
        induction_reading: "B ≡ H",
        momentum,
        induction,
        divergence_velocity,
        divergence_magnetic,
        pressure_gradients,
        derivation,
        scaling,
        mutations,
        all_residuals_zero,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_fields::BlowupSolution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rp(a: Q, k: Q, a_bar: Q) -> RationalParams {
        RationalParams::new(a, k, a_bar, q(3, 2), q(2, 3), q(5, 4)).unwrap()
    }

    #[test]
    fn rejects_excluded_parameters() {
        assert!(RationalParams::new(Q::zero(), qi(1), qi(1), qi(1), qi(1), qi(1)).is_err());
        assert!(RationalParams::new(q(-1, 4), qi(1), qi(1), qi(1), qi(1), qi(1)).is_err());
        assert!(RationalParams::new(qi(1), qi(1), qi(1), qi(1), qi(1), qi(0)).is_err());
    }

    #[test]
    fn undefined_mutation_is_omitted() {
        let p = rp(q(-1, 2), qi(1), qi(2));
        let spec = FieldSpec::for_family(&p, Family::SwirlFree);
        assert!(spec.mutated(&p, Mutation::SwirlDenominator).is_none());
        let ms: Vec<Mutation> = run_mutations(&p, Family::SwirlFree).iter().map(|m| m.mutation).collect();
        assert_eq!(ms, vec![Mutation::PressureCoefficient, Mutation::AxialVelocity]);
        assert!(certify(&p, Family::SwirlFree, &[qi(2)]).passed);
    }

    #[test]
    fn swirl_free_family_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let p = RationalParams::random(&mut rng);
            let f = family_fields(&p, Family::SwirlFree);
            assert!(momentum_residual_of(&p, &f).is_zero());
            assert!(induction_residual_of(&p, &f).is_zero());
            let (dv, dh) = divergence_residuals_of(&f);
            assert!(dv.is_zero() && dh.is_zero());
            assert!(verify_pressure_gradients(&p, Family::SwirlFree).passed);
        }
    }

    #[test]
    fn published_family_leaves_swirl_residuals() {
        let p = rp(qi(1), qi(1), qi(1));
        let (dv, dh) = divergence_residuals(&p);
        assert!(dv.is_zero() && dh.is_zero());
        assert!(!induction_residual(&p).is_zero());
        assert!(!momentum_residual(&p).is_zero());
        let pg = verify_pressure_gradients(&p, Family::Published);
        assert!(pg.magnetic_energy.zero);
        assert!(!pg.radial.zero && !pg.axial.zero);
    }

    #[test]
    fn residuals_do_not_depend_on_viscosity() {
        let p = rp(q(1, 3), qi(2), q(-1, 2));
        let mut p2 = p.clone();
        p2.nu = &p.nu + qi(7);
        p2.mu = &p.mu + qi(3);
        assert_eq!(momentum_residual(&p), momentum_residual(&p2));
        assert_eq!(induction_residual(&p), induction_residual(&p2));
    }

    #[test]
    fn exact_residuals_match_floating_point_evaluation() {
        let p = rp(q(1, 3), q(3, 4), q(1, 2));
        let m = p.to_model();
        for family in [Family::Published, Family::SwirlFree] {
            let f = family_fields(&p, family);
            let mom = momentum_residual_of(&p, &f);
            let ind = induction_residual_of(&p, &f);
            let sol = BlowupSolution::new(&m, family);
            for (t, x) in [(0.1, [0.2, 0.3, 0.4]), (0.7, [0.1, 0.05, 0.2])] {
                let fm = sol.momentum_residual(t, x).unwrap();
                let fi = sol.induction_residual(t, x).unwrap();
                let em = mom.eval(m.t_star, t, x);
                let ei = ind.eval(m.t_star, t, x);
                for i in 0..3 {
                    assert!((fm[i] - em[i]).abs() <= 1e-9 * (1.0 + em[i].abs()), "{family:?} momentum {i}");
                    assert!((fi[i] - ei[i]).abs() <= 1e-9 * (1.0 + ei[i].abs()), "{family:?} induction {i}");
                }
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let half = rp(q(1, 2), qi(1), qi(1));
        let r = verify_scaling_invariance(&half, &qi(2), Family::SwirlFree).unwrap();
        assert!(r.zero_residuals && r.covariant);
        let one = rp(qi(1), qi(1), qi(1));
        let r = verify_scaling_invariance(&one, &qi(3), Family::SwirlFree).unwrap();
        assert!(r.zero_residuals && r.covariant);
        let r = verify_scaling_invariance(&one, &qi(3), Family::Published).unwrap();
        assert!(r.covariant && !r.zero_residuals);
        let r = verify_scaling_invariance(&rp(q(2, 7), qi(1), qi(1)), &qi(1), Family::SwirlFree).unwrap();
        assert!(r.zero_residuals);
        assert!(verify_scaling_invariance(&one, &Q::zero(), Family::SwirlFree).is_err());
        assert!(verify_scaling_invariance(&one, &qi(-2), Family::SwirlFree).is_err());
    }

    #[test]
    fn mutations_are_detected() {
        let p = rp(q(1, 3), qi(1), qi(2));
        for family in [Family::Published, Family::SwirlFree] {
            for m in run_mutations(&p, family) {
                assert!(m.mutated_nonzero && m.differs_from_baseline, "{m:?}");
                if m.mutation == Mutation::AxialVelocity {
                    assert_eq!(m.exact_value_matches, Some(true));
                }
            }
        }
        assert!(run_mutations(&p, Family::SwirlFree).iter().all(|m| m.baseline_zero));
    }

    #[test]
    fn model_conversion_round_trips() {
        let p = rp(q(1, 3), q(3, 4), q(1, 2));
        assert_eq!(RationalParams::from_model(&p.to_model()).unwrap(), p);
    }

    #[test]
    fn certificate_serializes() {
        let p = rp(q(1, 2), qi(1), qi(1));
        let c = certify(&p, Family::SwirlFree, &[qi(1), qi(2)]);
        assert!(c.passed, "{}", serde_json::to_string_pretty(&c).unwrap());
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["induction_reading"], "B ≡ H");
        assert_eq!(json["family"], "swirl_free");
        let c = certify(&p, Family::Published, &[qi(2)]);
        assert!(!c.passed && !c.all_residuals_zero);
    }
}
