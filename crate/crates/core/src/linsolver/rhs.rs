//! Right-hand side of the linearized six-field system in similarity variables.
//!
//! With `u = (h, q)` and background `W = (w, b)` the system reads
//! `∂_τ u = νΔh ⊕ μΔq + L(τ) u + C(τ; W, u) + T̄* e^{-τ} (f, g)`, where `L`
//! collects the drift, zeroth-order, rotation, `ā` and bilinear-in-`y` terms
//! together with the background-free part of `f̄`, and `C` is the bilinear
//! background coupling including the background part of `f̄`. Every term is
//! implemented as written, including its sign and coefficient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{FieldPair, ScalarGridField, VectorGridField};
use super::ops::{diff, gradient, jacobian, laplacian};
use super::spectral::poisson_solve_dirichlet;
use crate::error::Result;
use crate::exact_fields::ModelParams;

/// The `τ`-dependent coefficients of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub nu: f64,
    pub mu: f64,
    pub a: f64,
    pub a_bar: f64,
    pub k: f64,
    /// `(T̄*)^{1/2}`, multiplying `∇f̄`.
    pub sqrt_tb: f64,
    /// `k (T̄*)^{2a+1} e^{-(2a+1)τ}`.
    pub c_rot: f64,
    /// `(T̄*)^{1/2} e^{-τ/2}`.
    pub c_bg: f64,
    /// `(2āk/(4a+1)) (T̄*)^{2a+1/2} e^{-(2a+1/2)τ}`.
    pub c_bil: f64,
    /// `T̄* e^{-τ}`.
    pub c_f: f64,
    /// `k (T̄*)^{2a} e^{-2aτ}`, inside `f̄`.
    pub c_k: f64,
    /// `(2āk/(4a+1)) (T̄*)^{2a+1} e^{-(2a+1)τ}`, inside `f̄`.
    pub c_swirl: f64,
}

impl Coefficients {
    pub fn at(p: &ModelParams, tau: f64) -> Self {
        let tb = p.t_bar_star;
        let a = p.a;
        let kbar = p.published_swirl();
        let damp = |e: f64| tb.powf(e) * (-e * tau).exp();
        Coefficients {
            nu: p.nu,
            mu: p.mu,
            a,
            a_bar: p.a_bar,
            k: p.k,
            sqrt_tb: tb.sqrt(),
            c_rot: p.k * damp(2.0 * a + 1.0),
            c_bg: damp(0.5),
            c_bil: kbar * damp(2.0 * a + 0.5),
            c_f: damp(1.0),
            c_k: p.k * damp(2.0 * a),
            c_swirl: kbar * damp(2.0 * a + 1.0),
        }
    }
}

/// How the pressure-like scalar `f̄` enters the explicit part of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMode {
    /// Assemble `f̄` and add `(T̄*)^{1/2} ∇f̄`.
    #[default]
    FBar,
    /// Drop `∇f̄` and rely on the Leray projection applied after each step.
    Projected,
}

/// `νΔh ⊕ μΔq`.
pub fn diffusion(u: &FieldPair, c: &Coefficients) -> FieldPair {
    FieldPair::new(u.h.map(|f| laplacian(f).scale(c.nu)), u.q.map(|f| laplacian(f).scale(c.mu)))
}

type Jac = [[ScalarGridField; 3]; 3];

fn build_pair(
    u: &FieldPair,
    f: impl Fn(usize, [f64; 3]) -> [f64; 6] + Sync,
) -> FieldPair {
    let g = u.grid();
    let vals: Vec<[f64; 6]> = (0..g.len()).into_par_iter().map(|p| f(p, g.point(p))).collect();
    let comp = |i: usize| ScalarGridField { grid: g, data: vals.iter().map(|v| v[i]).collect() };
    FieldPair::new(
        VectorGridField::new([comp(0), comp(1), comp(2)]),
        VectorGridField::new([comp(3), comp(4), comp(5)]),
    )
}

/// The background-free part of `f̄`.
pub fn f_bar_linear(u: &FieldPair, c: &Coefficients) -> Result<ScalarGridField> {
    let g = u.grid();
    let jh = jacobian(&u.h);
    let jq = jacobian(&u.q);
    let q = &u.q;
    let bracket = ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let y = g.point(p);
        let d = |m: &Jac, a: usize, b: usize| m[a][b].data[p];
        c.c_k * (d(&jh, 1, 0) - d(&jh, 0, 1))
            - c.c_swirl * (y[2] * (d(&jq, 1, 0) - d(&jq, 0, 1)) + y[1] * d(&jq, 2, 0) - y[0] * d(&jq, 2, 1))
            - c.a_bar * c.c_bg * (d(&jq, 0, 0) + d(&jq, 1, 1) - 2.0 * d(&jq, 2, 2))
    });
    let inv = poisson_solve_dirichlet(&bracket)?;
    Ok(ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let y = g.point(p);
        let qv = |m: usize| q.c[m].data[p];
        -2.0 * inv.data[p]
            - c.a_bar * c.c_bg * (y[0] * qv(0) + y[1] * qv(1) - 2.0 * y[2] * qv(2))
            - c.c_swirl * (y[1] * y[2] * qv(0) - y[0] * y[2] * qv(1))
    }))
}

/// The background part of `f̄`, bilinear in `(W, u)`.
pub fn f_bar_coupling(w: &FieldPair, u: &FieldPair, c: &Coefficients) -> Result<ScalarGridField> {
    let g = u.grid();
    let jw = jacobian(&w.h);
    let jb = jacobian(&w.q);
    let jh = jacobian(&u.h);
    let jq = jacobian(&u.q);
    let bracket = ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let d = |m: &Jac, a: usize, b: usize| m[a][b].data[p];
        let mut acc = 0.0;
        for a in 0..3 {
            // ∂_a w_a ∂_a h_a and -∂_a b_a ∂_a q_a
            acc += d(&jw, a, a) * d(&jh, a, a) - d(&jb, a, a) * d(&jq, a, a);
            for b in 0..3 {
                if a != b {
                    // ∂_a h_b ∂_b w_a and -∂_a q_b ∂_b b_a
                    acc += d(&jh, b, a) * d(&jw, a, b) - d(&jq, b, a) * d(&jb, a, b);
                }
            }
        }
        acc
    });
    let inv = poisson_solve_dirichlet(&bracket)?;
    Ok(ScalarGridField::from_index_fn(g, |i, j, k| {
        let p = g.idx(i, j, k);
        let bq: f64 = (0..3).map(|m| w.q.c[m].data[p] * u.q.c[m].data[p]).sum();
        -2.0 * inv.data[p] - 0.5 * c.c_f * bq
    }))
}

/// `f̄` for state `u` and optional background `W`.
pub fn assemble_f_bar(u: &FieldPair, background: Option<&FieldPair>, p: &ModelParams, tau: f64) -> Result<ScalarGridField> {
    let c = Coefficients::at(p, tau);
    let lin = f_bar_linear(u, &c)?;
    match background {
        Some(w) => Ok(&lin + &f_bar_coupling(w, u, &c)?),
        None => Ok(lin),
    }
}

/// `L(τ) u` without diffusion: every background-free term of the six equations.
pub fn explicit_linear(u: &FieldPair, c: &Coefficients, mode: PressureMode) -> Result<FieldPair> {
    let jh = jacobian(&u.h);
    let jq = jacobian(&u.q);
    let grad_f = pressure_gradient(mode, || f_bar_linear(u, c), u)?;
    let (a, ab) = (c.a, c.a_bar);
    let drift = [0.5 - a, 0.5 - a, 0.5 + 2.0 * a];
    Ok(build_pair(u, |p, y| {
        let h = |m: usize| u.h.c[m].data[p];
        let q = |m: usize| u.q.c[m].data[p];
        let dh = |m: usize, ax: usize| jh[m][ax].data[p];
        let dq = |m: usize, ax: usize| jq[m][ax].data[p];
        let dr_h = |m: usize| (0..3).map(|ax| drift[ax] * y[ax] * dh(m, ax)).sum::<f64>();
        let dr_q = |m: usize| (0..3).map(|ax| drift[ax] * y[ax] * dq(m, ax)).sum::<f64>();
        let gf = |ax: usize| c.sqrt_tb * grad_f.c[ax].data[p];
        let (y1, y2, y3) = (y[0], y[1], y[2]);
        let ah = |ax: usize| ab * (y1 * dh(0, ax) + y2 * dh(1, ax) - 2.0 * y3 * dh(2, ax));
        [
            dr_h(0) - a * h(0) - c.c_rot * (h(1) + y2 * dh(0, 0) + y1 * dh(0, 1)) + gf(0),
            dr_h(1) - a * h(1) + c.c_rot * (h(0) - y2 * dh(1, 0) + y1 * dh(1, 1)) + gf(1),
            dr_h(2) + 2.0 * a * h(2) - c.c_rot * (y2 * dh(2, 0) - y1 * dh(2, 1)) + gf(2),
            dr_q(0) + a * q(0) - ab * c.c_f * h(0) + ah(0) - c.c_rot * (-h(1) + y2 * dq(0, 0) + y1 * dq(0, 1))
                - c.c_bil * (y1 * y3 * dh(1, 0) - y2 * y3 * dh(0, 0) - c.c_f * y3 * h(1)),
            dr_q(1) + a * q(1) - ab * c.c_f * h(1) + ah(1) + c.c_rot * (-h(0) - y2 * dq(1, 0) + y1 * dq(1, 1))
                - c.c_bil * (y1 * y3 * dh(1, 1) - y2 * y3 * dh(0, 1) + c.c_f * y3 * h(0)),
            dr_q(2) - 2.0 * a * q(2) + 2.0 * ab * c.c_f * h(2) + ah(2) - c.c_rot * (y2 * dq(2, 0) - y1 * dq(2, 1))
                - c.c_bil * (y1 * y3 * dh(1, 2) - y2 * y3 * dh(0, 2) + c.c_f * (y2 * h(0) - y1 * h(1))),
        ]
    }))
}

fn pressure_gradient(
    mode: PressureMode,
    f_bar: impl FnOnce() -> Result<ScalarGridField>,
    u: &FieldPair,
) -> Result<VectorGridField> {
    match mode {
        PressureMode::FBar => Ok(gradient(&f_bar()?)),
        PressureMode::Projected => Ok(VectorGridField::zeros(u.grid())),
    }
}

/// The background coupling `C(τ; W, u)`, linear in each argument.
pub fn coupling(w: &FieldPair, u: &FieldPair, c: &Coefficients, mode: PressureMode) -> Result<FieldPair> {
    let jw = jacobian(&w.h);
    let jb = jacobian(&w.q);
    let jh = jacobian(&u.h);
    let jq = jacobian(&u.q);
    let grad_f = pressure_gradient(mode, || f_bar_coupling(w, u, c), u)?;
    Ok(build_pair(u, |p, _| {
        let v = |f: &VectorGridField, m: usize| f.c[m].data[p];
        let d = |m: &Jac, i: usize, ax: usize| m[i][ax].data[p];
        let mut out = [0.0; 6];
        for i in 0..3 {
            let mut adv_h = 0.0;
            let mut mag = 0.0;
            let mut adv_q = 0.0;
            for j in 0..3 {
                adv_h += v(&u.h, j) * d(&jw, i, j) + v(&w.h, j) * d(&jh, i, j);
                mag += v(&u.h, j) * d(&jb, j, i) - v(&w.q, j) * d(&jh, j, i);
                adv_q += v(&u.h, j) * d(&jw, i, j) - v(&w.h, j) * d(&jq, i, j);
            }
            out[i] = -c.c_bg * adv_h + c.sqrt_tb * grad_f.c[i].data[p];
            out[3 + i] = -c.c_bg * mag + c.c_bg * adv_q;
        }
        out
    }))
}

/// `∂_τ u` with every term of the six equations.
pub fn assemble_rhs(
    u: &FieldPair,
    background: Option<&FieldPair>,
    forcing: Option<&FieldPair>,
    p: &ModelParams,
    tau: f64,
) -> Result<FieldPair> {
    let c = Coefficients::at(p, tau);
    let mut out = explicit_linear(u, &c, PressureMode::FBar)?;
    out.axpy(1.0, &diffusion(u, &c));
    if let Some(w) = background {
        out.axpy(1.0, &coupling(w, u, &c, PressureMode::FBar)?);
    }
    if let Some(f) = forcing {
        out.axpy(c.c_f, f);
    }
    Ok(out)
}

/// `∂_{axis}` of each component, exposed for oracles and norms.
pub fn component_diff(v: &VectorGridField, axis: usize) -> VectorGridField {
    v.map(|f| diff(f, axis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolver::grid::Grid;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Kronecker-product assembly of the same equations, written
    /// independently of the pointwise kernels above.
    struct Dense {
        d: [DMatrix<f64>; 3],
        y: [DVector<f64>; 3],
        lap: DMatrix<f64>,
        lap_inv: DMatrix<f64>,
    }

    fn kron3(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
        a.kronecker(b).kronecker(c)
    }

    impl Dense {
        fn new(g: Grid) -> Self {
            let n = g.n;
            let h = g.h();
            let id = DMatrix::<f64>::identity(n, n);
            let mut d1 = DMatrix::<f64>::zeros(n, n);
            let mut l1 = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                l1[(i, i)] = -2.0 / (h * h);
                if i + 1 < n {
                    d1[(i, i + 1)] = 0.5 / h;
                    d1[(i + 1, i)] = -0.5 / h;
                    l1[(i, i + 1)] = 1.0 / (h * h);
                    l1[(i + 1, i)] = 1.0 / (h * h);
                }
            }
            let d = [kron3(&d1, &id, &id), kron3(&id, &d1, &id), kron3(&id, &id, &d1)];
            let lap = kron3(&l1, &id, &id) + kron3(&id, &l1, &id) + kron3(&id, &id, &l1);
            let lap_inv = lap.clone().try_inverse().unwrap();
            let y = [0, 1, 2].map(|a| DVector::from_fn(g.len(), |p, _| g.point(p)[a]));
            Dense { d, y, lap, lap_inv }
        }
    }

    fn vecs(v: &VectorGridField) -> [DVector<f64>; 3] {
        [0, 1, 2].map(|m| DVector::from_vec(v.c[m].data.clone()))
    }

    fn random_pair(g: Grid, rng: &mut ChaCha8Rng) -> FieldPair {
        let mut f = || ScalarGridField { grid: g, data: (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let h = VectorGridField::new([f(), f(), f()]);
        let q = VectorGridField::new([f(), f(), f()]);
        FieldPair::new(h, q)
    }

    fn oracle(m: &Dense, c: &Coefficients, u: &FieldPair, w: &FieldPair, f: &FieldPair) -> [DVector<f64>; 6] {
        let [h1, h2, h3] = vecs(&u.h);
        let [q1, q2, q3] = vecs(&u.q);
        let wv = vecs(&w.h);
        let bv = vecs(&w.q);
        let hv = [h1.clone(), h2.clone(), h3.clone()];
        let qv = [q1.clone(), q2.clone(), q3.clone()];
        let [d1, d2, d3] = &m.d;
        let [y1, y2, y3] = &m.y;
        let dd = [d1, d2, d3];
        let mul = |a: &DVector<f64>, b: &DVector<f64>| a.component_mul(b);
        let (a, ab) = (c.a, c.a_bar);
        let drift = |v: &DVector<f64>| {
            (0.5 - a) * mul(y1, &(d1 * v)) + (0.5 - a) * mul(y2, &(d2 * v)) + (0.5 + 2.0 * a) * mul(y3, &(d3 * v))
        };

        let mut bracket = c.c_k * (d1 * &h2 - d2 * &h1)
            - c.c_swirl * (mul(y3, &(d1 * &q2 - d2 * &q1)) + mul(y2, &(d1 * &q3)) - mul(y1, &(d2 * &q3)))
            - ab * c.c_bg * (d1 * &q1 + d2 * &q2 - 2.0 * (d3 * &q3));
        for i in 0..3 {
            bracket += mul(&(dd[i] * &wv[i]), &(dd[i] * &hv[i])) - mul(&(dd[i] * &bv[i]), &(dd[i] * &qv[i]));
            for j in 0..3 {
                if i != j {
                    bracket += mul(&(dd[i] * &hv[j]), &(dd[j] * &wv[i])) - mul(&(dd[i] * &qv[j]), &(dd[j] * &bv[i]));
                }
            }
        }
        let bq = mul(&bv[0], &q1) + mul(&bv[1], &q2) + mul(&bv[2], &q3);
        let fbar = -2.0 * (&m.lap_inv * bracket)
            - 0.5 * c.c_f * bq
            - ab * c.c_bg * (mul(y1, &q1) + mul(y2, &q2) - 2.0 * mul(y3, &q3))
            - c.c_swirl * (mul(&mul(y2, y3), &q1) - mul(&mul(y1, y3), &q2));

        let adv_h = |i: usize| (0..3).fold(DVector::zeros(h1.len()), |acc, j| acc + mul(&hv[j], &(dd[j] * &wv[i])) + mul(&wv[j], &(dd[j] * &hv[i])));
        let mag = |i: usize| (0..3).fold(DVector::zeros(h1.len()), |acc, j| acc + mul(&hv[j], &(dd[i] * &bv[j])) - mul(&bv[j], &(dd[i] * &hv[j])));
        let adv_q = |i: usize| (0..3).fold(DVector::zeros(h1.len()), |acc, j| acc + mul(&hv[j], &(dd[j] * &wv[i])) - mul(&wv[j], &(dd[j] * &qv[i])));
        let ah = |i: usize| ab * (mul(y1, &(dd[i] * &h1)) + mul(y2, &(dd[i] * &h2)) - 2.0 * mul(y3, &(dd[i] * &h3)));
        let [f1, f2, f3] = vecs(&f.h);
        let [g1, g2, g3] = vecs(&f.q);
        let yy = |p: &DVector<f64>, q: &DVector<f64>, v: &DVector<f64>| mul(&mul(p, q), v);

        let r_h1 = c.nu * (&m.lap * &h1) + drift(&h1) - a * &h1
            - c.c_rot * (&h2 + mul(y2, &(d1 * &h1)) + mul(y1, &(d2 * &h1)))
            - c.c_bg * adv_h(0) + c.sqrt_tb * (d1 * &fbar) + c.c_f * f1;
        let r_h2 = c.nu * (&m.lap * &h2) + drift(&h2) - a * &h2
            + c.c_rot * (&h1 - mul(y2, &(d1 * &h2)) + mul(y1, &(d2 * &h2)))
            - c.c_bg * adv_h(1) + c.sqrt_tb * (d2 * &fbar) + c.c_f * f2;
        let r_h3 = c.nu * (&m.lap * &h3) + drift(&h3) + 2.0 * a * &h3
            - c.c_rot * (mul(y2, &(d1 * &h3)) - mul(y1, &(d2 * &h3)))
            - c.c_bg * adv_h(2) + c.sqrt_tb * (d3 * &fbar) + c.c_f * f3;
        let r_q1 = c.mu * (&m.lap * &q1) + drift(&q1) + a * &q1 - ab * c.c_f * &h1 - c.c_bg * mag(0) + ah(0)
            - c.c_rot * (-&h2 + mul(y2, &(d1 * &q1)) + mul(y1, &(d2 * &q1)))
            + c.c_bg * adv_q(0)
            - c.c_bil * (yy(y1, y3, &(d1 * &h2)) - yy(y2, y3, &(d1 * &h1)) - c.c_f * mul(y3, &h2))
            + c.c_f * g1;
        let r_q2 = c.mu * (&m.lap * &q2) + drift(&q2) + a * &q2 - ab * c.c_f * &h2 - c.c_bg * mag(1) + ah(1)
            + c.c_rot * (-&h1 - mul(y2, &(d1 * &q2)) + mul(y1, &(d2 * &q2)))
            + c.c_bg * adv_q(1)
            - c.c_bil * (yy(y1, y3, &(d2 * &h2)) - yy(y2, y3, &(d2 * &h1)) + c.c_f * mul(y3, &h1))
            + c.c_f * g2;
        let r_q3 = c.mu * (&m.lap * &q3) + drift(&q3) - 2.0 * a * &q3 + 2.0 * ab * c.c_f * &h3 - c.c_bg * mag(2) + ah(2)
            - c.c_rot * (mul(y2, &(d1 * &q3)) - mul(y1, &(d2 * &q3)))
            + c.c_bg * adv_q(2)
            - c.c_bil * (yy(y1, y3, &(d3 * &h2)) - yy(y2, y3, &(d3 * &h1)) + c.c_f * (mul(y2, &h1) - mul(y1, &h2)))
            + c.c_f * g3;
        [r_h1, r_h2, r_h3, r_q1, r_q2, r_q3]
    }

    #[test]
    fn matches_dense_assembly() {
        let g = Grid::new(6).unwrap();
        let dense = Dense::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = ModelParams::new(0.3, 1.7, 0.8, 0.6, 0.9, 1.3);
        for tau in [0.0, 0.7] {
            let u = random_pair(g, &mut rng);
            let w = random_pair(g, &mut rng);
            let f = random_pair(g, &mut rng);
            let got = assemble_rhs(&u, Some(&w), Some(&f), &p, tau).unwrap();
            let want = oracle(&dense, &Coefficients::at(&p, tau), &u, &w, &f);
            let comps: Vec<&ScalarGridField> = got.components().collect();
            for (m, (a, b)) in comps.iter().zip(want.iter()).enumerate() {
                let scale = b.amax().max(1.0);
                let err = a.data.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(err < 1e-10 * scale, "component {m} at tau {tau}: err {err}, scale {scale}");
            }
        }
    }

    #[test]
    fn coupling_is_bilinear() {
        let g = Grid::new(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = Coefficients::at(&ModelParams::new(0.25, 1.0, 0.5, 1.0, 1.0, 1.0), 0.2);
        let (w, u, v) = (random_pair(g, &mut rng), random_pair(g, &mut rng), random_pair(g, &mut rng));
        let mut uv = u.clone();
        uv.axpy(2.5, &v);
        let lhs = coupling(&w, &uv, &c, PressureMode::FBar).unwrap();
        let mut rhs = coupling(&w, &u, &c, PressureMode::FBar).unwrap();
        rhs.axpy(2.5, &coupling(&w, &v, &c, PressureMode::FBar).unwrap());
        assert!((&lhs - &rhs).max_abs() < 1e-10 * rhs.max_abs());
        let z = coupling(&FieldPair::zeros(g), &u, &c, PressureMode::FBar).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn coefficients_at_tau_zero() {
        let p = ModelParams::new(0.25, 2.0, 1.0, 1.0, 1.0, 1.0);
        let c = Coefficients::at(&p, 0.0);
        let tb = p.t_bar_star;
        assert!((c.c_f - tb).abs() < 1e-15);
        assert!((c.c_rot - 2.0 * tb.powf(1.5)).abs() < 1e-14);
        assert!((c.c_bil - p.published_swirl() * tb).abs() < 1e-14);
        let later = Coefficients::at(&p, 1.0);
        assert!((later.c_f / c.c_f - (-1.0f64).exp()).abs() < 1e-14);
    }
}
