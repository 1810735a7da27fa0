//! Smoothing operators `Π_θ` and a measurement of their three inequalities.
//!
//! `Π_θ` is the sharp cutoff in the discrete sine basis. The inequalities are
//!
//! ```text
//! ‖Π_θ w‖_{k1}          ≤ C θ^{(k1-k2)+}  ‖w‖_{k2}
//! ‖(I - Π_θ) w‖_{k1}    ≤ C θ^{k1-k2}     ‖w‖_{k2}      (k1 ≤ k2)
//! ‖d/dθ Π_θ w‖_{k1}     ≤ C θ^{k1-k2-1}   ‖w‖_{k2}
//! ```
//!
//! The sharp cutoff is piecewise constant in `θ`, so `d/dθ Π_θ` is realized by
//! the dyadic quotient `(Π_{2θ} - Π_θ)/θ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsolver::grid::{FieldPair, Grid, ScalarGridField};
use crate::linsolver::spectral::{from_sine_coefficients, lowpass, lowpass_vector, spectral_hs_norm};

/// The cutoff `Π_θ` with `θ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingOp {
    theta: f64,
}

impl SmoothingOp {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta >= 1.0) {
            return Err(Error::InvalidArgument(format!("smoothing level must be at least 1, got {theta}")));
        }
        Ok(SmoothingOp { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn apply(&self, f: &ScalarGridField) -> ScalarGridField {
        lowpass(f, self.theta)
    }

    pub fn apply_pair(&self, u: &FieldPair) -> FieldPair {
        u.map(|v| lowpass_vector(v, self.theta))
    }
}

/// `Π_θ` applied to a scalar field.
pub fn smooth(f: &ScalarGridField, theta: f64) -> Result<ScalarGridField> {
    Ok(SmoothingOp::new(theta)?.apply(f))
}

/// Which of the three inequalities a constant belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    LowPass,
    HighPass,
    Derivative,
}

impl Inequality {
    pub const ALL: [Inequality; 3] = [Inequality::LowPass, Inequality::HighPass, Inequality::Derivative];

    fn applies(self, k1: u32, k2: u32) -> bool {
        !matches!(self, Inequality::HighPass) || k1 <= k2
    }

    fn theta_power(self, k1: u32, k2: u32) -> f64 {
        let d = k1 as f64 - k2 as f64;
        match self {
            Inequality::LowPass => d.max(0.0),
            Inequality::HighPass => d,
            Inequality::Derivative => d - 1.0,
        }
    }
}

/// Measured constants of one inequality and one `(k1, k2)` across `θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantRow {
    pub inequality: Inequality,
    pub k1: u32,
    pub k2: u32,
    /// `(θ, max over fields of LHS / (θ^power ‖w‖_{k2}))`.
    pub constants: Vec<(f64, f64)>,
    /// `max C / min C` over `θ`.
    pub variation: f64,
}

/// Outcome of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingReport {
    pub grid_n: usize,
    pub fields: usize,
    pub thetas: Vec<f64>,
    pub rows: Vec<ConstantRow>,
    pub max_variation: f64,
    /// Exact operator constants over all grid modes, from [`operator_constants`].
    pub exact_rows: Vec<ConstantRow>,
    pub exact_max_variation: f64,
    /// Largest `‖Π_θ w - w‖ / ‖w‖` for fields already band-limited at `θ`.
    pub lowpass_identity_error: f64,
    /// Largest `‖Π_θ Π_θ w - Π_θ w‖ / ‖w‖`.
    pub idempotence_error: f64,
    /// `Π_θ` with `θ ≥ n` returned its input bit for bit.
    pub full_band_identity: bool,
}

impl SmoothingReport {
    /// Constants vary by at most `limit` and the identities hold to `tol`.
    pub fn passes(&self, limit: f64, tol: f64) -> bool {
        self.max_variation <= limit && self.lowpass_identity_error <= tol && self.idempotence_error <= tol && self.full_band_identity
    }
}

fn shell_of(m: [usize; 3]) -> u32 {
    let top = *m.iter().max().expect("three entries");
    usize::BITS - (top - 1).leading_zeros()
}

fn row_from(inequality: Inequality, k1: u32, k2: u32, constants: Vec<(f64, f64)>) -> ConstantRow {
    let hi = constants.iter().map(|c| c.1).fold(0.0, f64::max);
    let lo = constants.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    ConstantRow { inequality, k1, k2, constants, variation: hi / lo }
}

/// Exact constants of the three inequalities on `grid`.
///
/// Every operator involved is diagonal in the sine basis, so the best constant
/// is the largest multiplier `m(ξ) (1 + π²|ξ|²)^{(k1-k2)/2} / θ^power` over the
/// grid modes. Random-field constants can never exceed these.
pub fn operator_constants(grid: Grid, thetas: &[f64], ks: &[u32]) -> Vec<ConstantRow> {
    use std::f64::consts::PI;
    let n = grid.n;
    let mut rows = Vec::new();
    for &k2 in ks {
        for ineq in Inequality::ALL {
            for &k1 in ks {
                if !ineq.applies(k1, k2) {
                    continue;
                }
                let d = k1 as f64 - k2 as f64;
                let constants = thetas
                    .iter()
                    .map(|&theta| {
                        let mut best = 0.0f64;
                        for a in 1..=n {
                            for b in 1..=n {
                                for c in 1..=n {
                                    let top = a.max(b).max(c) as f64;
                                    let mult = match ineq {
                                        Inequality::LowPass => (top <= theta) as u8 as f64,
                                        Inequality::HighPass => (top > theta) as u8 as f64,
                                        Inequality::Derivative => (top > theta && top <= 2.0 * theta) as u8 as f64 / theta,
                                    };
                                    if mult > 0.0 {
                                        let xi2 = (a * a + b * b + c * c) as f64;
                                        best = best.max(mult * (1.0 + PI * PI * xi2).powf(d / 2.0));
                                    }
                                }
                            }
                        }
                        (theta, best / theta.powf(ineq.theta_power(k1, k2)))
                    })
                    .collect();
                rows.push(row_from(ineq, k1, k2, constants));
            }
        }
    }
    rows
}

/// A random field band-limited at `band` whose `H^{k2}` energy is spread
/// evenly over the dyadic shells `max ξ ∈ (2^{j-1}, 2^j]`.
pub fn shell_balanced_field(grid: Grid, band: usize, k2: u32, rng: &mut ChaCha8Rng) -> ScalarGridField {
    use std::f64::consts::PI;
    let band = band.min(grid.n);
    let mut counts = vec![0usize; 16];
    for a in 1..=band {
        for b in 1..=band {
            for c in 1..=band {
                counts[shell_of([a, b, c]) as usize] += 1;
            }
        }
    }
    let mut coeffs = Vec::with_capacity(band * band * band);
    for a in 1..=band {
        for b in 1..=band {
            for c in 1..=band {
                let m = [a, b, c];
                let xi2 = (a * a + b * b + c * c) as f64;
                let w = (1.0 + PI * PI * xi2).powf(-(k2 as f64) / 2.0);
                let per_shell = 1.0 / (counts[shell_of(m) as usize] as f64).sqrt();
                let g: f64 = rng.gen_range(-1.0..1.0);
                coeffs.push((m, w * per_shell * g));
            }
        }
    }
    from_sine_coefficients(grid, &coeffs)
}

/// Measures the constants of the three inequalities over `thetas` and
/// `k1, k2 ∈ ks`, with `fields` random fields band-limited at `2θ`.
pub fn smoothing_sweep(grid: Grid, thetas: &[f64], ks: &[u32], fields: usize, seed: u64) -> Result<SmoothingReport> {
    if fields == 0 || thetas.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one field and one theta".into()));
    }
    for &t in thetas {
        SmoothingOp::new(t)?;
        if 2.0 * t > grid.n as f64 {
            return Err(Error::InvalidArgument(format!("theta {t} needs a grid with n >= {}", 2.0 * t)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut lowpass_identity_error = 0.0f64;
    let mut idempotence_error = 0.0f64;
    let mut full_band_identity = true;

    for &k2 in ks {
        // constants[ineq][k1][theta]
        let mut best = vec![vec![vec![0.0f64; thetas.len()]; ks.len()]; 3];
        for (ti, &theta) in thetas.iter().enumerate() {
            let band = (2.0 * theta) as usize;
            for _ in 0..fields {
                let w = shell_balanced_field(grid, band, k2, &mut rng);
                let nw = spectral_hs_norm(&w, k2 as f64);
                let low = lowpass(&w, theta);
                let high = &w - &low;
                let deriv = (&lowpass(&w, 2.0 * theta) - &low).scale(1.0 / theta);
                for (ki, &k1) in ks.iter().enumerate() {
                    let s = k1 as f64;
                    let lhs = [spectral_hs_norm(&low, s), spectral_hs_norm(&high, s), spectral_hs_norm(&deriv, s)];
                    for (ii, ineq) in Inequality::ALL.iter().enumerate() {
                        if ineq.applies(k1, k2) {
                            let c = lhs[ii] / (theta.powf(ineq.theta_power(k1, k2)) * nw);
                            best[ii][ki][ti] = best[ii][ki][ti].max(c);
                        }
                    }
                }
                let n0 = w.norm_l2();
                let banded = lowpass(&w, theta);
                let again = lowpass(&banded, theta);
                idempotence_error = idempotence_error.max((&again - &banded).norm_l2() / n0);
                let low_field = shell_balanced_field(grid, theta as usize, k2, &mut rng);
                let err = (&lowpass(&low_field, theta) - &low_field).norm_l2() / low_field.norm_l2();
                lowpass_identity_error = lowpass_identity_error.max(err);
                full_band_identity &= lowpass(&w, grid.n as f64).data == w.data;
            }
        }
        for (ii, ineq) in Inequality::ALL.iter().enumerate() {
            for (ki, &k1) in ks.iter().enumerate() {
                if !ineq.applies(k1, k2) {
                    continue;
                }
                let constants: Vec<(f64, f64)> = thetas.iter().copied().zip(best[ii][ki].iter().copied()).collect();
                rows.push(row_from(*ineq, k1, k2, constants));
            }
        }
    }
    let max_variation = rows.iter().map(|r| r.variation).fold(0.0, f64::max);
    let exact_rows = operator_constants(grid, thetas, ks);
    let exact_max_variation = exact_rows.iter().map(|r| r.variation).fold(0.0, f64::max);
    Ok(SmoothingReport {
        grid_n: grid.n,
        fields,
        thetas: thetas.to_vec(),
        rows,
        max_variation,
        exact_rows,
        exact_max_variation,
        lowpass_identity_error,
        idempotence_error,
        full_band_identity,
    })
}
