//! Manufactured-solution verification of the discretization.
//!
//! A steady field `U = curl A`, with a trigonometric potential vanishing to
//! second order on the boundary, is inserted into the equations with `k = ā = 0`
//! and zero background. The compensating forcing `-RHS(U)` is computed from
//! exact derivatives, so the discrete solution converges to `U` at the
//! spatial order of the stencils. A second check refines `dτ` at fixed grid.

use std::f64::consts::PI;

use serde::Serialize;

use super::grid::{FieldPair, Grid, ScalarGridField, VectorGridField};
use super::init::random_divergence_free;
use super::rhs::Coefficients;
use super::solver::{run, BackgroundSource, ForcingSource, SolverConfig};
use crate::error::{Error, Result};
use crate::exact_fields::ModelParams;

/// `Σ c cos(mπy)` or `Σ c sin(mπy)` terms of one variable.
#[derive(Debug, Clone, PartialEq)]
struct Trig {
    /// `(is_sin, m, coefficient)`.
    terms: Vec<(bool, f64, f64)>,
}

impl Trig {
    fn eval(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(s, m, c)| c * if s { (m * PI * y).sin() } else { (m * PI * y).cos() })
            .sum()
    }

    fn deriv(&self) -> Trig {
        Trig {
            terms: self
                .terms
                .iter()
                .map(|&(s, m, c)| if s { (false, m, c * m * PI) } else { (true, m, -c * m * PI) })
                .collect(),
        }
    }

    /// `sin²(πy) = (1 - cos 2πy)/2`.
    fn sin_squared() -> Trig {
        Trig { terms: vec![(false, 0.0, 0.5), (false, 2.0, -0.5)] }
    }

    /// `sin²(πy) cos(πy) = (cos πy - cos 3πy)/4`.
    fn sin_squared_cos() -> Trig {
        Trig { terms: vec![(false, 1.0, 0.25), (false, 3.0, -0.25)] }
    }
}

/// A sum of products `c · f₁(y₁) f₂(y₂) f₃(y₃)`.
#[derive(Debug, Clone, PartialEq, Default)]
struct Separable {
    terms: Vec<(f64, [Trig; 3])>,
}

impl Separable {
    fn eval(&self, y: [f64; 3]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f[0].eval(y[0]) * f[1].eval(y[1]) * f[2].eval(y[2])).sum()
    }

    fn deriv(&self, axis: usize) -> Separable {
        Separable {
            terms: self
                .terms
                .iter()
                .map(|(c, f)| {
                    let mut g = f.clone();
                    g[axis] = f[axis].deriv();
                    (*c, g)
                })
                .collect(),
        }
    }

    fn plus(mut self, o: &Separable, s: f64) -> Separable {
        self.terms.extend(o.terms.iter().map(|(c, f)| (s * c, f.clone())));
        self
    }

    fn laplacian(&self) -> Separable {
        (0..3).fold(Separable::default(), |acc, a| acc.plus(&self.deriv(a).deriv(a), 1.0))
    }
}

/// `curl A` for `A_i = α_i Φ_i`.
fn curl_of(potential: &[Separable; 3]) -> [Separable; 3] {
    let d = |i: usize, a: usize| potential[i].deriv(a);
    [
        d(2, 1).plus(&d(1, 2), -1.0),
        d(0, 2).plus(&d(2, 0), -1.0),
        d(1, 0).plus(&d(0, 1), -1.0),
    ]
}

fn potential(alpha: [f64; 3], variant: usize) -> [Separable; 3] {
    let s = Trig::sin_squared();
    let c = Trig::sin_squared_cos();
    let pick = |i: usize| -> [Trig; 3] {
        let mut f = [s.clone(), s.clone(), s.clone()];
        f[(i + variant) % 3] = c.clone();
        f
    };
    [0, 1, 2].map(|i| Separable { terms: vec![(alpha[i], pick(i))] })
}

/// The manufactured steady fields `h = curl A`, `q = curl B`.
#[derive(Debug, Clone)]
pub struct Manufactured {
    h: [Separable; 3],
    q: [Separable; 3],
}

impl Default for Manufactured {
    fn default() -> Self {
        Manufactured { h: curl_of(&potential([1.0, -0.7, 0.4], 0)), q: curl_of(&potential([0.5, 0.9, -1.1], 1)) }
    }
}

impl Manufactured {
    /// The identically zero solution.
    pub fn zero() -> Self {
        let z = || [Separable::default(), Separable::default(), Separable::default()];
        Manufactured { h: z(), q: z() }
    }

    fn sample(grid: Grid, f: &[Separable; 3]) -> VectorGridField {
        VectorGridField::new([0, 1, 2].map(|i| ScalarGridField::from_fn(grid, |y| f[i].eval(y))))
    }

    pub fn fields(&self, grid: Grid) -> FieldPair {
        FieldPair::new(Self::sample(grid, &self.h), Self::sample(grid, &self.q))
    }

    /// `RHS(U)` with exact derivatives for `k = ā = 0` and zero background.
    pub fn continuous_rhs(&self, grid: Grid, p: &ModelParams) -> FieldPair {
        let a = p.a;
        let drift = [0.5 - a, 0.5 - a, 0.5 + 2.0 * a];
        let zero_order = [-a, -a, 2.0 * a, a, a, -2.0 * a];
        let comp = |f: &Separable, visc: f64, z: f64| {
            let lap = f.laplacian();
            let grads = [f.deriv(0), f.deriv(1), f.deriv(2)];
            ScalarGridField::from_fn(grid, |y| {
                visc * lap.eval(y) + (0..3).map(|j| drift[j] * y[j] * grads[j].eval(y)).sum::<f64>() + z * f.eval(y)
            })
        };
        let h = VectorGridField::new([0, 1, 2].map(|i| comp(&self.h[i], p.nu, zero_order[i])));
        let q = VectorGridField::new([0, 1, 2].map(|i| comp(&self.q[i], p.mu, zero_order[3 + i])));
        FieldPair::new(h, q)
    }
}

/// Errors and observed orders of a refinement study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// `(resolution parameter, relative error)`; the parameter is `h` or `dτ`.
    pub errors: Vec<(f64, f64)>,
    /// Order between consecutive refinements.
    pub pairwise_orders: Vec<f64>,
    /// Order of the finest pair.
    pub observed_order: f64,
}

fn orders(errors: &[(f64, f64)]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect()
}

/// Spatial refinement over grids `ns` with the manufactured steady solution.
///
/// `params.k` and `params.a_bar` must be zero so that `f̄` vanishes and the
/// forcing is exact.
pub fn manufactured_convergence(
    params: &ModelParams,
    solution: &Manufactured,
    ns: &[usize],
    dtau: f64,
    tau_end: f64,
) -> Result<ConvergenceReport> {
    if params.k != 0.0 || params.a_bar != 0.0 {
        return Err(Error::InvalidArgument("manufactured forcing needs k = a_bar = 0".into()));
    }
    if ns.len() < 2 {
        return Err(Error::InvalidArgument("need at least two grids".into()));
    }
    let mut errors = Vec::new();
    for &n in ns {
        let grid = Grid::new(n)?;
        let exact = solution.fields(grid);
        let rhs = solution.continuous_rhs(grid, params);
        let p = *params;
        let force = move |tau: f64| rhs.scale(-1.0 / Coefficients::at(&p, tau).c_f);
        let mut config = SolverConfig::new(*params, grid, dtau, tau_end);
        config.output_every = config.steps().max(1);
        let out = run(&config, &exact, BackgroundSource::Zero, ForcingSource::Function(&force))?;
        let diff = &out.final_state.fields - &exact;
        let scale = exact.norm_l2();
        let err = if scale == 0.0 { diff.norm_l2() } else { diff.norm_l2() / scale };
        errors.push((grid.h(), err));
    }
    let pairwise_orders = if errors.iter().all(|e| e.1 == 0.0) { vec![] } else { orders(&errors) };
    let observed_order = pairwise_orders.last().copied().unwrap_or(f64::NAN);
    Ok(ConvergenceReport { errors, pairwise_orders, observed_order })
}

/// Temporal refinement at fixed grid: differences of successive `dτ` halvings.
pub fn temporal_convergence(
    params: &ModelParams,
    n: usize,
    dtaus: &[f64],
    tau_end: f64,
    seed: u64,
) -> Result<ConvergenceReport> {
    if dtaus.len() < 3 {
        return Err(Error::InvalidArgument("need at least three step sizes".into()));
    }
    let grid = Grid::new(n)?;
    let init = random_divergence_free(grid, seed, 2, 1.0);
    let mut finals = Vec::new();
    for &dt in dtaus {
        let mut config = SolverConfig::new(*params, grid, dt, tau_end);
        config.renormalize = false;
        config.output_every = config.steps().max(1);
        finals.push(run(&config, &init, BackgroundSource::Zero, ForcingSource::Zero)?.final_state.fields);
    }
    let scale = finals[0].norm_l2().max(f64::MIN_POSITIVE);
    let errors: Vec<(f64, f64)> = (0..finals.len() - 1)
        .map(|i| (dtaus[i], (&finals[i] - &finals[i + 1]).norm_l2() / scale))
        .collect();
    let pairwise_orders = orders(&errors);
    let observed_order = pairwise_orders.last().copied().unwrap_or(f64::NAN);
    Ok(ConvergenceReport { errors, pairwise_orders, observed_order })
}
