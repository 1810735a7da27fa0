//! Seeded divergence-free initial data and background fields.
//!
//! A field is built as the curl of a potential `A = β(y) R(y)`, where
//! `β = Π_j sin²(π y_j)` vanishes to second order on the boundary and `R` is a
//! random low-mode sine series. The discrete curl is discretely
//! divergence-free; the Leray projection removes the remaining rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{FieldPair, Grid, ScalarGridField, VectorGridField};
use super::ops::curl;
use super::spectral::leray_project;

fn random_potential(grid: Grid, rng: &mut ChaCha8Rng, max_mode: usize) -> VectorGridField {
    use std::f64::consts::PI;
    let m = max_mode.max(1);
    let mut comp = || {
        let mut coeffs = Vec::new();
        for a in 1..=m {
            for b in 1..=m {
                for c in 1..=m {
                    let w = 1.0 / ((a * a + b * b + c * c) as f64);
                    coeffs.push(([a, b, c], w * rng.gen_range(-1.0..1.0)));
                }
            }
        }
        ScalarGridField::from_fn(grid, move |y| {
            let bump: f64 = y.iter().map(|v| (PI * v).sin().powi(2)).product();
            let series: f64 = coeffs
                .iter()
                .map(|(md, c)| c * (0..3).map(|j| (md[j] as f64 * PI * y[j]).sin()).product::<f64>())
                .sum();
            bump * series
        })
    };
    VectorGridField::new([comp(), comp(), comp()])
}

/// A random divergence-free vector field with `‖v‖ = 1`.
pub fn random_solenoidal(grid: Grid, rng: &mut ChaCha8Rng, max_mode: usize) -> VectorGridField {
    let v = leray_project(&curl(&random_potential(grid, rng, max_mode)));
    let n = v.norm_l2();
    v.scale(1.0 / n)
}

/// Seeded divergence-free `(h, q)` with `‖h‖ = ‖q‖ = amplitude`.
pub fn random_divergence_free(grid: Grid, seed: u64, max_mode: usize, amplitude: f64) -> FieldPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_solenoidal(grid, &mut rng, max_mode).scale(amplitude);
    let q = random_solenoidal(grid, &mut rng, max_mode).scale(amplitude);
    FieldPair::new(h, q)
}

/// A seeded background `(w, b)` scaled so that its max-norm surrogate equals `radius`.
pub fn random_background(grid: Grid, seed: u64, radius: f64) -> FieldPair {
    let raw = random_divergence_free(grid, seed, 2, 1.0);
    let size = super::solver::background_size(&raw);
    // Shrink by a few ulps so rounding in the rescale cannot push it past the radius.
    raw.scale(radius / size * (1.0 - 4.0 * f64::EPSILON))
}
