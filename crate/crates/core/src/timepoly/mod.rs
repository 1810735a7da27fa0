//! Exact polynomial algebra in `(x1, x2, x3)` whose coefficients are finite
//! sums `Σ c·(T* - t)^p` with rational `c` and `p`.
//!
//! Every field of the explicit family lives in this ring, and so does every
//! residual obtained by applying the differential operators of the MHD system,
//! which makes the certificates in [`certify`] structural zero checks.

pub mod certify;
pub mod derivation;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational numbers.
pub type Q = BigRational;

/// The rational `num/den`.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// The integer `n` as a rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `base^exp` when the result is rational, `None` otherwise.
///
/// `base` must be positive. The exponent `n/d` is handled by extracting an
/// exact `d`-th root of numerator and denominator.
pub fn rational_pow(base: &Q, exp: &Q) -> Option<Q> {
    if !base.is_positive() {
        return None;
    }
    let d = exp.denom().to_u32()?;
    let n = exp.numer().to_i32()?;
    let root = |v: &BigInt| -> Option<BigInt> {
        let r = v.nth_root(d);
        (num_traits::pow(r.clone(), d as usize) == *v).then_some(r)
    };
    let r = Q::new(root(base.numer())?, root(base.denom())?);
    let p = num_traits::pow(r, n.unsigned_abs() as usize);
    Some(if n < 0 { p.recip() } else { p })
}

pub fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// A finite sum `Σ c_p (T* - t)^p`, keyed by the exponent `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeCoeff {
    terms: BTreeMap<Q, Q>,
}

impl TimeCoeff {
    pub fn zero() -> Self {
        TimeCoeff::default()
    }

    /// `c·(T* - t)^p`.
    pub fn term(c: Q, p: Q) -> Self {
        let mut out = TimeCoeff::zero();
        out.add_term(p, c);
        out
    }

    /// The constant `c`.
    pub fn constant(c: Q) -> Self {
        TimeCoeff::term(c, Q::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(exponent, coefficient)` pairs in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Q, &Q)> {
        self.terms.iter()
    }

    fn add_term(&mut self, p: Q, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(p.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return TimeCoeff::zero();
        }
        TimeCoeff {
            terms: self.terms.iter().map(|(p, v)| (p.clone(), v * c)).collect(),
        }
    }

    /// `d/dt` using `d/dt (T* - t)^p = -p (T* - t)^{p-1}`.
    pub fn ddt(&self) -> Self {
        let mut out = TimeCoeff::zero();
        for (p, c) in &self.terms {
            out.add_term(p - Q::one(), -(c * p));
        }
        out
    }

    /// Value at the time gap `s = T* - t > 0`.
    pub fn eval(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, c)| c.to_f64().unwrap_or(f64::NAN) * (p.to_f64().unwrap_or(f64::NAN) * s.ln()).exp())
            .sum()
    }
}

impl Add for &TimeCoeff {
    type Output = TimeCoeff;
    fn add(self, rhs: &TimeCoeff) -> TimeCoeff {
        let mut out = self.clone();
        for (p, c) in &rhs.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }
}

impl Neg for &TimeCoeff {
    type Output = TimeCoeff;
    fn neg(self) -> TimeCoeff {
        TimeCoeff {
            terms: self.terms.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }
}

impl Sub for &TimeCoeff {
    type Output = TimeCoeff;
    fn sub(self, rhs: &TimeCoeff) -> TimeCoeff {
        self + &(-rhs)
    }
}

impl Mul for &TimeCoeff {
    type Output = TimeCoeff;
    fn mul(self, rhs: &TimeCoeff) -> TimeCoeff {
        let mut out = TimeCoeff::zero();
        for (p1, c1) in &self.terms {
            for (p2, c2) in &rhs.terms {
                out.add_term(p1 + p2, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for TimeCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, c)| {
                if p.is_zero() {
                    fmt_q(c)
                } else {
                    format!("{}*s^({})", fmt_q(c), fmt_q(p))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Exponent multi-index `(i, j, l)` of the monomial `x1^i x2^j x3^l`.
pub type Monomial = [u32; 3];

/// A polynomial in `x` with [`TimeCoeff`] coefficients, kept canonical.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimePolyScalar {
    terms: BTreeMap<Monomial, TimeCoeff>,
}

impl TimePolyScalar {
    pub fn zero() -> Self {
        TimePolyScalar::default()
    }

    /// `coeff · x^m`.
    pub fn monomial(m: Monomial, coeff: TimeCoeff) -> Self {
        let mut out = TimePolyScalar::zero();
        out.add_term(m, coeff);
        out
    }

    /// `c (T* - t)^p x^m`.
    pub fn term(c: Q, p: Q, m: Monomial) -> Self {
        TimePolyScalar::monomial(m, TimeCoeff::term(c, p))
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn coord(axis: usize) -> Self {
        let mut m = [0; 3];
        m[axis] = 1;
        TimePolyScalar::term(Q::one(), Q::zero(), m)
    }

    /// A constant (in `x`) coefficient.
    pub fn constant(coeff: TimeCoeff) -> Self {
        TimePolyScalar::monomial([0; 3], coeff)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(monomial, coefficient)` pairs in lexicographic monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &TimeCoeff)> {
        self.terms.iter()
    }

    fn add_term(&mut self, m: Monomial, c: TimeCoeff) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&m) {
            Some(prev) => prev + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = TimePolyScalar::zero();
        for (m, tc) in &self.terms {
            out.add_term(*m, tc.scale(c));
        }
        out
    }

    /// Multiplication by an `x`-independent coefficient.
    pub fn mul_coeff(&self, c: &TimeCoeff) -> Self {
        let mut out = TimePolyScalar::zero();
        for (m, tc) in &self.terms {
            out.add_term(*m, tc * c);
        }
        out
    }

    /// Exact time derivative.
    pub fn ddt(&self) -> Self {
        let mut out = TimePolyScalar::zero();
        for (m, tc) in &self.terms {
            out.add_term(*m, tc.ddt());
        }
        out
    }

    /// Exact partial derivative along `axis`.
    pub fn ddx(&self, axis: usize) -> Self {
        let mut out = TimePolyScalar::zero();
        for (m, tc) in &self.terms {
            if m[axis] == 0 {
                continue;
            }
            let mut dm = *m;
            dm[axis] -= 1;
            out.add_term(dm, tc.scale(&qi(m[axis] as i64)));
        }
        out
    }

    /// Sum of second derivatives.
    pub fn laplacian(&self) -> Self {
        (0..3).fold(TimePolyScalar::zero(), |acc, i| &acc + &self.ddx(i).ddx(i))
    }

    /// Gradient as a vector polynomial.
    pub fn grad(&self) -> TimePolyVec3 {
        TimePolyVec3::new(std::array::from_fn(|i| self.ddx(i)))
    }

    /// Value at time gap `s = T* - t` and position `x`.
    pub fn eval_gap(&self, s: f64, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(m, tc)| {
                tc.eval(s) * x[0].powi(m[0] as i32) * x[1].powi(m[1] as i32) * x[2].powi(m[2] as i32)
            })
            .sum()
    }

    /// Value at `(t, x)` for the blowup time `t_star`.
    pub fn eval(&self, t_star: f64, t: f64, x: [f64; 3]) -> f64 {
        self.eval_gap(t_star - t, x)
    }

    /// Maps `c s^p x^m` to `c λ^{w + 2p + |m|} s^p x^m`.
    ///
    /// This is the representation of `λ^w f(λ² t, λ x)` in the ring based at
    /// the rescaled blowup time `T*/λ²`. Fails when some `λ^{2p}` is irrational.
    pub fn rescale(&self, lambda: &Q, weight: i64) -> crate::error::Result<Self> {
        let mut out = TimePolyScalar::zero();
        for (m, tc) in &self.terms {
            let deg = (m[0] + m[1] + m[2]) as i64;
            let mut scaled = TimeCoeff::zero();
            for (p, c) in tc.terms() {
                let e = qi(weight + deg) + p * qi(2);
                let f = rational_pow(lambda, &e).ok_or_else(|| {
                    crate::error::Error::NotExact(format!(
                        "{}^({}) is irrational",
                        fmt_q(lambda),
                        fmt_q(&e)
                    ))
                })?;
                scaled.add_term(p.clone(), c * f);
            }
            out.add_term(*m, scaled);
        }
        Ok(out)
    }
}

impl Add for &TimePolyScalar {
    type Output = TimePolyScalar;
    fn add(self, rhs: &TimePolyScalar) -> TimePolyScalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Neg for &TimePolyScalar {
    type Output = TimePolyScalar;
    fn neg(self) -> TimePolyScalar {
        TimePolyScalar {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Sub for &TimePolyScalar {
    type Output = TimePolyScalar;
    fn sub(self, rhs: &TimePolyScalar) -> TimePolyScalar {
        self + &(-rhs)
    }
}

impl Mul for &TimePolyScalar {
    type Output = TimePolyScalar;
    fn mul(self, rhs: &TimePolyScalar) -> TimePolyScalar {
        let mut out = TimePolyScalar::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term([m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]], c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for TimePolyScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: Vec<String> = m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
                    .collect();
                if mono.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Three [`TimePolyScalar`] components.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimePolyVec3 {
    pub c: [TimePolyScalar; 3],
}

impl TimePolyVec3 {
    pub fn new(c: [TimePolyScalar; 3]) -> Self {
        TimePolyVec3 { c }
    }

    pub fn zero() -> Self {
        TimePolyVec3::default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(TimePolyScalar::is_zero)
    }

    pub fn scale(&self, k: &Q) -> Self {
        TimePolyVec3::new(std::array::from_fn(|i| self.c[i].scale(k)))
    }

    pub fn ddt(&self) -> Self {
        TimePolyVec3::new(std::array::from_fn(|i| self.c[i].ddt()))
    }

    /// Divergence `Σ ∂_i u_i`.
    pub fn div(&self) -> TimePolyScalar {
        (0..3).fold(TimePolyScalar::zero(), |acc, i| &acc + &self.c[i].ddx(i))
    }

    /// Curl `∇ × u`.
    pub fn curl(&self) -> Self {
        let u = &self.c;
        TimePolyVec3::new([
            &u[2].ddx(1) - &u[1].ddx(2),
            &u[0].ddx(2) - &u[2].ddx(0),
            &u[1].ddx(0) - &u[0].ddx(1),
        ])
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> Self {
        TimePolyVec3::new(std::array::from_fn(|i| self.c[i].laplacian()))
    }

    /// `(self · ∇) v`.
    pub fn advect(&self, v: &TimePolyVec3) -> Self {
        TimePolyVec3::new(std::array::from_fn(|j| {
            (0..3).fold(TimePolyScalar::zero(), |acc, i| &acc + &(&self.c[i] * &v.c[j].ddx(i)))
        }))
    }

    pub fn dot(&self, v: &TimePolyVec3) -> TimePolyScalar {
        (0..3).fold(TimePolyScalar::zero(), |acc, i| &acc + &(&self.c[i] * &v.c[i]))
    }

    pub fn cross(&self, v: &TimePolyVec3) -> Self {
        let (a, b) = (&self.c, &v.c);
        TimePolyVec3::new([
            &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
            &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
            &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
        ])
    }

    pub fn eval(&self, t_star: f64, t: f64, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.c[i].eval(t_star, t, x))
    }

    pub fn rescale(&self, lambda: &Q, weight: i64) -> crate::error::Result<Self> {
        Ok(TimePolyVec3::new([
            self.c[0].rescale(lambda, weight)?,
            self.c[1].rescale(lambda, weight)?,
            self.c[2].rescale(lambda, weight)?,
        ]))
    }
}

impl Add for &TimePolyVec3 {
    type Output = TimePolyVec3;
    fn add(self, rhs: &TimePolyVec3) -> TimePolyVec3 {
        TimePolyVec3::new(std::array::from_fn(|i| &self.c[i] + &rhs.c[i]))
    }
}

impl Sub for &TimePolyVec3 {
    type Output = TimePolyVec3;
    fn sub(self, rhs: &TimePolyVec3) -> TimePolyVec3 {
        TimePolyVec3::new(std::array::from_fn(|i| &self.c[i] - &rhs.c[i]))
    }
}

impl Neg for &TimePolyVec3 {
    type Output = TimePolyVec3;
    fn neg(self) -> TimePolyVec3 {
        TimePolyVec3::new(std::array::from_fn(|i| -&self.c[i]))
    }
}

impl fmt::Display for TimePolyVec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.c[0], self.c[1], self.c[2])
    }
}

/// The Lorentz force `(∇×H)×H`, computed directly.
pub fn lorentz_force(h: &TimePolyVec3) -> TimePolyVec3 {
    h.curl().cross(h)
}

/// Whether `(∇×H)×H = H·∇H - ∇(|H|²/2)` holds exactly for `h`.
pub fn lorentz_identity_holds(h: &TimePolyVec3) -> bool {
    let other = &h.advect(h) - &h.dot(h).scale(&q(1, 2)).grad();
    lorentz_force(h) == other
}
