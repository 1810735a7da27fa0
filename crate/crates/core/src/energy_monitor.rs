//! Norms, decay fits, energy bookkeeping, the discrete Poincaré constant and
//! the coefficient-positivity conditions.
//!
//! Solver output spans hundreds of orders of magnitude in `τ`, so norm series
//! store natural logarithms. A vanished norm is `ln = -∞`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_fields::ModelParams;
use crate::linsolver::grid::{FieldPair, Grid, ScalarGridField, VectorGridField};
use crate::linsolver::ops::{diff, forward_gradient_energy};
use crate::linsolver::spectral::poisson_solve_dirichlet;

/// Norm columns of a [`NormRecord`], in CSV order after `tau`.
pub const NORM_COLUMNS: [&str; 8] = ["l2_h", "l2_q", "h1_h", "h1_q", "h2_h", "h2_q", "dtau_h", "dtau_q"];

/// Discrete `L²` norm of a vector field.
pub fn l2_norm(v: &VectorGridField) -> f64 {
    v.norm_l2()
}

/// Discrete `Hˢ` norm for `s ∈ {0, 1, 2}` from centered differences.
pub fn hs_norm(v: &VectorGridField, s: u32) -> Result<f64> {
    if s > 2 {
        return Err(Error::InvalidArgument(format!("hs_norm supports s <= 2, got {s}")));
    }
    let mut acc = v.dot(v);
    for c in &v.c {
        if s >= 1 {
            let d: Vec<ScalarGridField> = (0..3).map(|a| diff(c, a)).collect();
            for da in &d {
                acc += da.dot(da);
                if s >= 2 {
                    for b in 0..3 {
                        let dab = diff(da, b);
                        acc += dab.dot(&dab);
                    }
                }
            }
        }
    }
    Ok(acc.sqrt())
}

/// `Hˢ` norms of `h` and `q`.
pub fn hs_norm_pair(u: &FieldPair, s: u32) -> Result<(f64, f64)> {
    Ok((hs_norm(&u.h, s)?, hs_norm(&u.q, s)?))
}

/// Norms of one recorded state, as natural logarithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub tau: f64,
    /// `ln` of each entry of [`NORM_COLUMNS`].
    pub ln: [f64; 8],
}

impl NormRecord {
    /// Measures `u` and the difference quotient `du`; every norm is multiplied
    /// by `e^{ln_scale}` (the solver's renormalization factor).
    pub fn measure(tau: f64, u: &FieldPair, du: &FieldPair, ln_scale: f64) -> Result<Self> {
        let (h0, q0) = hs_norm_pair(u, 0)?;
        let (h1, q1) = hs_norm_pair(u, 1)?;
        let (h2, q2) = hs_norm_pair(u, 2)?;
        let (dh, dq) = (du.h.norm_l2(), du.q.norm_l2());
        Ok(NormRecord { tau, ln: [h0, q0, h1, q1, h2, q2, dh, dq].map(|v| v.ln() + ln_scale) })
    }

    pub fn ln_of(&self, column: &str) -> Option<f64> {
        NORM_COLUMNS.iter().position(|c| *c == column).map(|i| self.ln[i])
    }

    /// `ln(‖h‖ + ‖q‖)`.
    pub fn ln_l2_total(&self) -> f64 {
        log_add(self.ln[0], self.ln[1])
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Norms over a run, ascending in `τ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormSeries {
    pub records: Vec<NormRecord>,
}

impl NormSeries {
    pub fn taus(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tau).collect()
    }

    /// `(τ, ln norm)` pairs of one column.
    pub fn column(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let i = NORM_COLUMNS
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown norm column {name:?}")))?;
        Ok(self.records.iter().map(|r| (r.tau, r.ln[i])).collect())
    }

    /// `(τ, ln(‖h‖ + ‖q‖))` in `L²`.
    pub fn total_l2(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.tau, r.ln_l2_total())).collect()
    }

    /// `(τ, ln(‖h‖ + ‖q‖))` for the norm family `prefix` (`l2`, `h1`, `h2` or `dtau`).
    pub fn total(&self, prefix: &str) -> Result<Vec<(f64, f64)>> {
        let h = self.column(&format!("{prefix}_h"))?;
        let q = self.column(&format!("{prefix}_q"))?;
        Ok(h.iter().zip(&q).map(|(a, b)| (a.0, log_add(a.1, b.1))).collect())
    }

    /// Checks the ascending-`τ` invariant.
    pub fn validate(&self) -> Result<()> {
        if self.records.windows(2).any(|w| !(w[1].tau > w[0].tau)) {
            return Err(Error::Format("taus are not strictly increasing".into()));
        }
        Ok(())
    }

    /// Writes the CSV `tau,l2_h,…,dtau_q` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau,{}", NORM_COLUMNS.join(","))?;
        for r in &self.records {
            let mut line = format_sig17(r.tau);
            for &l in &r.ln {
                line.push(',');
                line.push_str(&format_from_ln(l));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Reads a CSV produced by [`NormSeries::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
        let expected = format!("tau,{}", NORM_COLUMNS.join(","));
        if header.trim() != expected {
            return Err(Error::Format(format!("unexpected header {header:?}")));
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(Error::Format(format!("line {}: expected 9 fields", lineno + 2)));
            }
            let tau = fields[0]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?;
            let mut ln = [0.0; 8];
            for (i, f) in fields[1..].iter().enumerate() {
                ln[i] = parse_to_ln(f).map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?;
            }
            records.push(NormRecord { tau, ln });
        }
        let s = NormSeries { records };
        s.validate()?;
        Ok(s)
    }
}

/// `{:.16e}`, the shortest fixed-width form that round-trips binary64.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Formats `e^{ln}` with 17 significant digits, using a decimal exponent
/// outside the binary64 range when needed.
pub fn format_from_ln(ln: f64) -> String {
    if ln == f64::NEG_INFINITY {
        return "0".to_string();
    }
    if ln.is_nan() || ln == f64::INFINITY {
        return format!("{}", ln.exp());
    }
    let v = ln.exp();
    if v.is_finite() && v >= f64::MIN_POSITIVE {
        return format_sig17(v);
    }
    let l10 = ln / std::f64::consts::LN_10;
    let mut e = l10.floor();
    let mut m = 10f64.powf(l10 - e);
    if m >= 10.0 {
        m /= 10.0;
        e += 1.0;
    }
    let mut s = String::new();
    write!(s, "{m:.16}e{}", e as i64).expect("formatting into a String");
    s
}

/// Parses a number written by [`format_from_ln`] into its natural logarithm.
pub fn parse_to_ln(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() && v >= f64::MIN_POSITIVE {
            return Ok(v.ln());
        }
    }
    let (m, e) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e),
        None => (s, "0"),
    };
    let m: f64 = m.parse().map_err(|_| format!("bad mantissa in {s:?}"))?;
    let e: i64 = e.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
    if m == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if !(m > 0.0) {
        return Err(format!("norms must be non-negative, got {s:?}"));
    }
    Ok(m.ln() + e as f64 * std::f64::consts::LN_10)
}

/// Whether the `ln` values of `series` never increase for `τ ≥ from`.
pub fn is_monotone_nonincreasing(series: &[(f64, f64)], from: f64) -> bool {
    let tail: Vec<f64> = series.iter().filter(|(t, _)| *t >= from).map(|p| p.1).collect();
    tail.windows(2).all(|w| w[1] <= w[0])
}

/// Least-squares fit `ln norm ≈ intercept - rate·τ` over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub window: [f64; 2],
    /// Coefficient of determination of the fit, in `[0, 1]`.
    pub goodness: f64,
    pub samples: usize,
    /// Set when a norm in the window is exactly zero; `rate` is then `+∞`.
    pub vanished: bool,
}

/// Fits an exponential rate to `(τ, ln norm)` samples with `τ ∈ [τ₀, τ₁]`.
pub fn fit_decay(series: &[(f64, f64)], window: [f64; 2]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window[0] && *t <= window[1])
        .collect();
    if pts.len() < 5 {
        return Err(Error::DegenerateFit(format!(
            "{} samples in [{}, {}], need at least 5",
            pts.len(),
            window[0],
            window[1]
        )));
    }
    if pts.iter().any(|(_, l)| *l == f64::NEG_INFINITY) {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            intercept: f64::NEG_INFINITY,
            window,
            goodness: 0.0,
            samples: pts.len(),
            vanished: true,
        });
    }
    if pts.iter().any(|(t, l)| !t.is_finite() || !l.is_finite()) {
        return Err(Error::DegenerateFit("non-finite samples in window".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::DegenerateFit("all samples share one tau".into()));
    }
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let slope = stl / stt;
    let intercept = ml - slope * mt;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - ml).powi(2)).sum();
    let goodness = if ss_tot <= f64::EPSILON * f64::EPSILON * n * (1.0 + ml * ml) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(DecayFit { rate: -slope, intercept, window, goodness, samples: pts.len(), vanished: false })
}

/// Per-step energy record: `E_n = ½‖u_n‖²`, `E_{n+1}` and `⟨u_n, F(u_n)⟩`,
/// all as natural logs of magnitudes with explicit signs for the rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub tau: f64,
    pub dtau: f64,
    /// `ln |(E_{n+1} - E_n)/dτ - ⟨u_n, F(u_n)⟩|`.
    pub ln_mismatch: f64,
    /// `ln E_n`.
    pub ln_energy: f64,
}

impl BalanceRecord {
    /// Builds a record from values at a common scale `e^{ln_scale}` of `u`.
    pub fn new(tau: f64, dtau: f64, e_now: f64, e_next: f64, inner: f64, ln_scale: f64) -> Self {
        let mismatch = ((e_next - e_now) / dtau - inner).abs();
        BalanceRecord {
            tau,
            dtau,
            ln_mismatch: mismatch.ln() + 2.0 * ln_scale,
            ln_energy: e_now.ln() + 2.0 * ln_scale,
        }
    }
}

/// Summary of an energy-balance series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceSummary {
    /// `ln` of the largest mismatch.
    pub ln_max_mismatch: f64,
    pub tau_of_max: f64,
    /// `ln` of the initial energy.
    pub ln_initial_energy: f64,
    /// `ln(max mismatch / E₀)`.
    pub ln_relative_mismatch: f64,
    pub mismatches: Vec<(f64, f64)>,
}

/// Mismatch series and its maximum.
pub fn energy_balance_check(records: &[BalanceRecord]) -> BalanceSummary {
    let mut ln_max = f64::NEG_INFINITY;
    let mut tau_of_max = records.first().map_or(0.0, |r| r.tau);
    for r in records {
        if r.ln_mismatch > ln_max {
            ln_max = r.ln_mismatch;
            tau_of_max = r.tau;
        }
    }
    let ln_e0 = records.first().map_or(f64::NEG_INFINITY, |r| r.ln_energy);
    let ln_relative_mismatch = if ln_max == f64::NEG_INFINITY { ln_max } else { ln_max - ln_e0 };
    BalanceSummary {
        ln_max_mismatch: ln_max,
        tau_of_max,
        ln_initial_energy: ln_e0,
        ln_relative_mismatch,
        mismatches: records.iter().map(|r| (r.tau, r.ln_mismatch)).collect(),
    }
}

/// Smallest eigenvalue of `-Δ_h` and the matching eigenvector.
#[derive(Debug, Clone)]
pub struct PoincareEstimate {
    pub lambda1: f64,
    /// `1/λ₁`.
    pub constant: f64,
    pub eigenvector: ScalarGridField,
    pub iterations: usize,
}

/// Inverse iteration for `λ₁` of the discrete Dirichlet Laplacian.
pub fn poincare_constant(grid: Grid) -> Result<PoincareEstimate> {
    const MAX_ITER: usize = 500;
    let mut v = ScalarGridField::from_fn(grid, |_| 1.0);
    v = v.scale(1.0 / v.norm_l2());
    let mut lambda = f64::NAN;
    for it in 1..=MAX_ITER {
        let w = poisson_solve_dirichlet(&v)?.scale(-1.0);
        let nw = w.norm_l2();
        let next = v.dot(&v) / v.dot(&w);
        v = w.scale(1.0 / nw);
        if (next - lambda).abs() <= 1e-14 * next.abs() {
            let lambda1 = forward_gradient_energy(&v) / v.dot(&v);
            return Ok(PoincareEstimate { lambda1, constant: 1.0 / lambda1, eigenvector: v, iterations: it });
        }
        lambda = next;
    }
    Err(Error::NoConvergence { iterations: MAX_ITER, what: "inverse iteration for λ₁".into() })
}

/// `λ₁ = 3·(4/h²) sin²(πh/2)`, the closed form for the seven-point stencil.
pub fn discrete_lambda1(grid: Grid) -> f64 {
    let h = grid.h();
    3.0 * 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2)
}

/// `Σ_i ‖∂h_i‖² - λ₁ Σ_i ‖h_i‖²` over all six components, with forward
/// differences, relative to the gradient energy. Non-negative up to rounding.
pub fn poincare_gap(u: &FieldPair, lambda1: f64) -> f64 {
    let grad: f64 = u.components().map(forward_gradient_energy).sum();
    let mass: f64 = u.components().map(|c| c.dot(c)).sum();
    if grad == 0.0 {
        return 0.0;
    }
    (grad - lambda1 * mass) / grad
}

/// One strict inequality of the coefficient conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub holds: bool,
}

/// The eight positivity conditions and the two admissibility gates on `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub s: f64,
    pub c_r: f64,
    pub conditions: Vec<Condition>,
    /// `a ∈ (0, min{ν, μ})`, required for the `L²` decay estimate.
    pub gate_decay: bool,
    /// `a ∈ (0, 1/2]`, required for the stability statement.
    pub gate_stability: bool,
    pub all_hold: bool,
}

/// Evaluates the `L²`-level and `Hˢ`-level coefficient conditions, each a
/// strict inequality `value > 0`.
pub fn coefficient_conditions(p: &ModelParams, s: f64, c_r: f64) -> CoefficientReport {
    let (nu, mu, a) = (p.nu, p.mu, p.a);
    let t = (a - 0.5) * s + 0.75;
    let raw = [
        ("3nu+a-7/4-C", 3.0 * nu + a - 1.75 - c_r),
        ("3nu-2a-1/2-C", 3.0 * nu - 2.0 * a - 0.5 - c_r),
        ("3mu-5/4-a-C", 3.0 * mu - 1.25 - a - c_r),
        ("3mu-5/4+2a-C", 3.0 * mu - 1.25 + 2.0 * a - c_r),
        ("3nu+a/2+(a-1/2)s+3/4-C", 3.0 * nu + a / 2.0 + t - c_r),
        ("3nu-5a/2+(a-1/2)s+3/4-C", 3.0 * nu - 2.5 * a + t - c_r),
        ("3mu-3a/2+(a-1/2)s+3/4-C", 3.0 * mu - 1.5 * a + t - c_r),
        ("3mu+3a/2+(a-1/2)s+3/4-C", 3.0 * mu + 1.5 * a + t - c_r),
    ];
    let conditions: Vec<Condition> = raw
        .iter()
        .map(|(name, value)| Condition { name: name.to_string(), value: *value, holds: *value > 0.0 })
        .collect();
    let all_hold = conditions.iter().all(|c| c.holds);
    CoefficientReport {
        s,
        c_r,
        gate_decay: a > 0.0 && a < nu.min(mu),
        gate_stability: a > 0.0 && a <= 0.5,
        conditions,
        all_hold,
    }
}

/// Whether all eight conditions hold for each trial value of `C_R`.
pub fn coefficient_sensitivity(p: &ModelParams, s: f64, c_values: &[f64]) -> Vec<(f64, bool)> {
    c_values.iter().map(|&c| (c, coefficient_conditions(p, s, c).all_hold)).collect()
}
