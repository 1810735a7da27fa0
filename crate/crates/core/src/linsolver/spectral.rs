//! Transform-based solves on the interior grid.
//!
//! The seven-point Dirichlet Laplacian is diagonal in the orthonormal sine
//! basis `S_{jm} = √(2/(n+1)) sin(πjm/(n+1))` with 1D eigenvalues
//! `-(4/h²) sin²(πm/(2(n+1)))`, which gives direct Poisson and implicit
//! diffusion solves. The discrete Leray projector `P = I - G (DG)⁺ D` uses the
//! centered divergence `D` and gradient `G = -Dᵀ`; `DG` is a Kronecker sum of
//! the 1D matrix `D₁²`, diagonalized once per grid size.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::grid::{Grid, ScalarGridField, VectorGridField};
use super::ops::{divergence, gradient, laplacian};
use crate::error::{Error, Result};

/// Per-grid-size transform data.
#[derive(Debug)]
pub struct SpectralOps {
    pub n: usize,
    /// Sine matrix, row-major; symmetric and orthogonal.
    sine: Vec<f64>,
    /// 1D eigenvalues of the second difference in mode order `m = 1..=n`.
    lap_eig: Vec<f64>,
    /// Eigenvectors of `D₁²` (row-major `V[j][m]`) and their transpose.
    d2_vecs: Vec<f64>,
    d2_vecs_t: Vec<f64>,
    d2_eig: Vec<f64>,
}

impl SpectralOps {
    fn build(n: usize) -> Self {
        let np1 = n as f64 + 1.0;
        let h = 1.0 / np1;
        let norm = (2.0 / np1).sqrt();
        let mut sine = vec![0.0; n * n];
        for j in 0..n {
            for m in 0..n {
                sine[j * n + m] = norm * (PI * ((j + 1) * (m + 1)) as f64 / np1).sin();
            }
        }
        let lap_eig = (1..=n)
            .map(|m| -(4.0 / (h * h)) * (PI * m as f64 / (2.0 * np1)).sin().powi(2))
            .collect();

        // D₁ has ±1/(2h) on the off-diagonals; D₁² is symmetric.
        let d1 = DMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                0.5 / h
            } else if i == j + 1 {
                -0.5 / h
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(&d1 * &d1);
        let mut d2_vecs = vec![0.0; n * n];
        let mut d2_vecs_t = vec![0.0; n * n];
        for j in 0..n {
            for m in 0..n {
                d2_vecs[j * n + m] = eig.eigenvectors[(j, m)];
                d2_vecs_t[m * n + j] = eig.eigenvectors[(j, m)];
            }
        }
        SpectralOps { n, sine, lap_eig, d2_vecs, d2_vecs_t, d2_eig: eig.eigenvalues.iter().copied().collect() }
    }

    /// Eigenvalue of the 3D seven-point Laplacian for 0-based modes `(i, j, k)`.
    pub fn laplacian_eigenvalue(&self, i: usize, j: usize, k: usize) -> f64 {
        self.lap_eig[i] + self.lap_eig[j] + self.lap_eig[k]
    }

    /// Sine coefficients of `f` (orthonormal transform, so `Σ|f̂|² = Σ|f|²`).
    pub fn forward(&self, data: &[f64]) -> Vec<f64> {
        transform3(data, self.n, &self.sine)
    }

    /// Inverse of [`SpectralOps::forward`] (the transform is an involution).
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        transform3(coeffs, self.n, &self.sine)
    }
}

static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SpectralOps>>>> = OnceLock::new();

/// Shared transform data for grids with `n` interior points per axis.
pub fn spectral_ops(n: usize) -> Arc<SpectralOps> {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n).or_insert_with(|| Arc::new(SpectralOps::build(n))).clone()
}

/// Applies the 1D matrix `mat` (row-major `n×n`) along `axis`.
fn apply_axis(data: &[f64], n: usize, mat: &[f64], axis: usize) -> Vec<f64> {
    let plane = n * n;
    let mut out = vec![0.0; data.len()];
    out.par_chunks_mut(plane).enumerate().for_each(|(i, o)| match axis {
        0 => {
            for m in 0..n {
                let c = mat[i * n + m];
                let src = &data[m * plane..(m + 1) * plane];
                for (a, b) in o.iter_mut().zip(src) {
                    *a += c * b;
                }
            }
        }
        1 => {
            let src = &data[i * plane..(i + 1) * plane];
            for j in 0..n {
                for m in 0..n {
                    let c = mat[j * n + m];
                    for k in 0..n {
                        o[j * n + k] += c * src[m * n + k];
                    }
                }
            }
        }
        _ => {
            let src = &data[i * plane..(i + 1) * plane];
            for j in 0..n {
                let row = &src[j * n..(j + 1) * n];
                for k in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += mat[k * n + m] * row[m];
                    }
                    o[j * n + k] = acc;
                }
            }
        }
    });
    out
}

fn transform3(data: &[f64], n: usize, mat: &[f64]) -> Vec<f64> {
    let a = apply_axis(data, n, mat, 0);
    let b = apply_axis(&a, n, mat, 1);
    apply_axis(&b, n, mat, 2)
}

/// Divides sine coefficients by `f(i, j, k)`; entries where `f` returns `None` become zero.
fn diagonal_solve(
    ops: &SpectralOps,
    data: &[f64],
    to: &[f64],
    from: &[f64],
    f: impl Fn(usize, usize, usize) -> Option<f64> + Sync,
) -> Vec<f64> {
    let n = ops.n;
    let mut c = transform3(data, n, to);
    c.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
        for j in 0..n {
            for k in 0..n {
                let v = &mut plane[j * n + k];
                *v = f(i, j, k).map_or(0.0, |d| *v / d);
            }
        }
    });
    transform3(&c, n, from)
}

/// Solves `Δ_h u = rhs` with `u = 0` on the boundary.
pub fn poisson_solve_dirichlet(rhs: &ScalarGridField) -> Result<ScalarGridField> {
    if !rhs.is_finite() {
        return Err(Error::InvalidArgument("Poisson right-hand side is not finite".into()));
    }
    let ops = spectral_ops(rhs.grid.n);
    let data = diagonal_solve(&ops, &rhs.data, &ops.sine, &ops.sine, |i, j, k| Some(ops.laplacian_eigenvalue(i, j, k)));
    ScalarGridField::from_vec(rhs.grid, data)
}

/// Solves `(I - c Δ_h) u = rhs` with `c ≥ 0`.
pub fn helmholtz_solve(rhs: &ScalarGridField, c: f64) -> ScalarGridField {
    if c == 0.0 {
        return rhs.clone();
    }
    let ops = spectral_ops(rhs.grid.n);
    let data = diagonal_solve(&ops, &rhs.data, &ops.sine, &ops.sine, |i, j, k| {
        Some(1.0 - c * ops.laplacian_eigenvalue(i, j, k))
    });
    ScalarGridField { grid: rhs.grid, data }
}

/// Solves `(DG) φ = r` in the least-squares sense (pseudo-inverse).
fn solve_dg(r: &ScalarGridField) -> ScalarGridField {
    let ops = spectral_ops(r.grid.n);
    let scale = ops.d2_eig.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 3.0;
    let data = diagonal_solve(&ops, &r.data, &ops.d2_vecs_t, &ops.d2_vecs, |i, j, k| {
        let s = ops.d2_eig[i] + ops.d2_eig[j] + ops.d2_eig[k];
        (s.abs() > 1e-12 * scale).then_some(s)
    });
    ScalarGridField { grid: r.grid, data }
}

/// Discrete Leray projection `u - G (DG)⁺ D u`.
///
/// The result satisfies `D(Pu) = 0` up to rounding, `P` is idempotent and
/// orthogonal in the discrete `L²` product, and `P G ψ = 0` for every `ψ`.
pub fn leray_project(u: &VectorGridField) -> VectorGridField {
    let phi = solve_dg(&divergence(u));
    u - &gradient(&phi)
}

/// Applies `g(|mode|)` to the sine coefficients. Modes are 1-based.
fn spectral_filter(f: &ScalarGridField, g: impl Fn([usize; 3]) -> f64 + Sync) -> ScalarGridField {
    let ops = spectral_ops(f.grid.n);
    let data = diagonal_solve(&ops, &f.data, &ops.sine, &ops.sine, |i, j, k| {
        let w = g([i + 1, j + 1, k + 1]);
        (w != 0.0).then(|| 1.0 / w)
    });
    ScalarGridField { grid: f.grid, data }
}

/// Sharp cutoff `Π_θ`: sine modes with `max(ξ₁, ξ₂, ξ₃) > θ` are zeroed.
pub fn lowpass(f: &ScalarGridField, theta: f64) -> ScalarGridField {
    if theta >= f.grid.n as f64 {
        return f.clone();
    }
    spectral_filter(f, |m| if m.iter().all(|&x| x as f64 <= theta) { 1.0 } else { 0.0 })
}

pub fn lowpass_vector(v: &VectorGridField, theta: f64) -> VectorGridField {
    v.map(|c| lowpass(c, theta))
}

/// Sine coefficients together with 1-based mode indices.
pub fn sine_coefficients(f: &ScalarGridField) -> Vec<([usize; 3], f64)> {
    let ops = spectral_ops(f.grid.n);
    let g = f.grid;
    ops.forward(&f.data)
        .into_iter()
        .enumerate()
        .map(|(p, c)| (g.ijk(p).map(|i| i + 1), c))
        .collect()
}

/// Field with the given sine coefficients (1-based modes).
pub fn from_sine_coefficients(grid: Grid, coeffs: &[([usize; 3], f64)]) -> ScalarGridField {
    let ops = spectral_ops(grid.n);
    let mut c = vec![0.0; grid.len()];
    for &(m, v) in coeffs {
        c[grid.idx(m[0] - 1, m[1] - 1, m[2] - 1)] += v;
    }
    ScalarGridField { grid, data: ops.inverse(&c) }
}

/// Spectral Sobolev norm `(h³ Σ_ξ (1 + π²|ξ|²)^s |f̂_ξ|²)^{1/2}`; `s` may be fractional.
pub fn spectral_hs_norm(f: &ScalarGridField, s: f64) -> f64 {
    let vol = f.grid.cell_volume();
    let sum: f64 = sine_coefficients(f)
        .iter()
        .map(|(m, c)| {
            let xi2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
            (1.0 + PI * PI * xi2).powf(s) * c * c
        })
        .sum();
    (sum * vol).sqrt()
}

pub fn spectral_hs_norm_vector(v: &VectorGridField, s: f64) -> f64 {
    v.c.iter().map(|c| spectral_hs_norm(c, s).powi(2)).sum::<f64>().sqrt()
}

/// Relative residual `‖Δ_h u - rhs‖∞ / ‖rhs‖∞` of a Poisson solve.
pub fn poisson_residual(u: &ScalarGridField, rhs: &ScalarGridField) -> f64 {
    let r = (&laplacian(u) - rhs).max_abs();
    let s = rhs.max_abs();
    if s == 0.0 {
        r
    } else {
        r / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(g: Grid, seed: u64) -> ScalarGridField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarGridField { grid: g, data: (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect() }
    }

    fn random_vector(g: Grid, seed: u64) -> VectorGridField {
        VectorGridField::new(std::array::from_fn(|i| random_field(g, seed + i as u64)))
    }

    #[test]
    fn sine_matrix_is_orthogonal() {
        let ops = spectral_ops(7);
        let n = 7;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|m| ops.sine[a * n + m] * ops.sine[b * n + m]).sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn poisson_eigenfunction() {
        let g = Grid::new(32).unwrap();
        let s = ScalarGridField::from_fn(g, |y| (PI * y[0]).sin() * (PI * y[1]).sin() * (PI * y[2]).sin());
        let u = poisson_solve_dirichlet(&s.scale(-3.0 * PI * PI)).unwrap();
        assert!((&u - &s).max_abs() < 5.0 * g.h() * g.h());
    }

    #[test]
    fn poisson_zero_and_residual() {
        let g = Grid::new(12).unwrap();
        assert!(poisson_solve_dirichlet(&ScalarGridField::zeros(g)).unwrap().data.iter().all(|&v| v == 0.0));
        let f = random_field(g, 3);
        let u = poisson_solve_dirichlet(&f).unwrap();
        assert!(poisson_residual(&u, &f) < 1e-10);
    }

    #[test]
    fn helmholtz_inverts_operator() {
        let g = Grid::new(10).unwrap();
        let u = random_field(g, 9);
        let rhs = &u - &laplacian(&u).scale(0.3);
        assert!((&helmholtz_solve(&rhs, 0.3) - &u).max_abs() < 1e-11);
    }

    #[test]
    fn leray_contracts() {
        for n in [9, 12] {
            let g = Grid::new(n).unwrap();
            let u = random_vector(g, 11);
            let p = leray_project(&u);
            assert!(divergence(&p).max_abs() < 1e-8, "div {}", divergence(&p).max_abs());
            assert!((&leray_project(&p) - &p).max_abs() < 1e-10);
            // Orthogonal projection: ‖Pu‖ ≤ ‖u‖ and ⟨Pu, u - Pu⟩ = 0.
            assert!(p.norm_l2() <= u.norm_l2());
            assert!(p.dot(&(&u - &p)).abs() < 1e-10 * u.dot(&u));
        }
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_solenoidal() {
        let g = Grid::new(10).unwrap();
        let psi = ScalarGridField::from_fn(g, |y| (y[0] * (1.0 - y[0]) * y[1] * (1.0 - y[1])).powi(1) * y[2] * (1.0 - y[2]));
        assert!(leray_project(&gradient(&psi)).max_abs() < 1e-12);
        let a = random_vector(g, 2);
        let c = super::super::ops::curl(&a);
        assert!((&leray_project(&c) - &c).max_abs() < 1e-10);
    }

    #[test]
    fn lowpass_is_projection() {
        let g = Grid::new(8).unwrap();
        let f = random_field(g, 5);
        let p = lowpass(&f, 3.0);
        assert!((&lowpass(&p, 3.0) - &p).max_abs() < 1e-13);
        assert!(p.norm_l2() <= f.norm_l2());
        assert_eq!(lowpass(&f, 8.0), f);
        let m111 = ScalarGridField::from_fn(g, |y| (PI * y[0]).sin() * (PI * y[1]).sin() * (PI * y[2]).sin());
        assert!((&lowpass(&m111, 2.0) - &m111).max_abs() < 1e-13);
    }

    #[test]
    fn sobolev_norm_of_single_mode() {
        let g = Grid::new(16).unwrap();
        let f = from_sine_coefficients(g, &[([2, 1, 1], 1.0)]);
        let l2 = f.norm_l2();
        let h1 = spectral_hs_norm(&f, 1.0);
        assert!((h1 / l2 - (1.0 + 6.0 * PI * PI).sqrt()).abs() < 1e-12);
    }
}
