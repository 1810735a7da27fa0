//! Command-line harness: JSON configuration, subcommand dispatch and reports.
//!
//! Every subcommand reads one [`RunConfig`], writes its artifacts into the
//! output directory and reports an [`Outcome`]. [`main_with_args`] maps the
//! outcome to the exit-code contract: `0` when every check passed, `1` when
//! a certificate or criterion failed, `2` on a runtime or configuration error.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy_monitor::{
    coefficient_conditions, energy_balance_check, fit_decay, format_sig17, is_monotone_nonincreasing, CoefficientReport,
    DecayFit, NormSeries,
};
use crate::error::{Error, Result};
use crate::exact_fields::{validate_params, Family, ModelParams, ValidationMode};
use crate::linsolver::init::random_background;
use crate::linsolver::{
    random_divergence_free, run, with_parallelism, Background, BackgroundSource, ForcingSource, Grid, PressureMode,
    RunOutput, SolverConfig,
};
use crate::nash_moser::{iterate, IterationConfig, IterationTrace, Schedule};
use crate::timepoly::certify::{certify, Certificate, RationalParams};
use crate::timepoly::Q;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Seed used when neither the configuration nor `--seed` supplies one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "mhd-blowup", version, about = "Certify and stress-test explicit MHD blowup solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file; every key is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving reports, CSV series and snapshots.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run on a single thread.
    #[arg(long, global = true)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact residual certificates of the explicit family.
    VerifyExact,
    /// Integrate the linearized system and write the norm series.
    SimulateLinear,
    /// Fit exponential decay rates to a simulated or stored series.
    FitDecay,
    /// Desk-scale Nash–Moser iteration.
    NashMoser,
    /// Decay rates over a grid of viscosities and exponents.
    Sweep,
}

/// Model constants as they appear in a configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub a: f64,
    pub k: f64,
    pub a_bar: f64,
    pub nu: f64,
    pub mu: f64,
    pub t_star: f64,
    /// Perturbed blowup time; defaults to `t_star`.
    pub t_bar_star: Option<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let p = ModelParams::stability_default();
        ParamsConfig { a: p.a, k: p.k, a_bar: p.a_bar, nu: p.nu, mu: p.mu, t_star: p.t_star, t_bar_star: None }
    }
}

impl ParamsConfig {
    pub fn to_model(&self) -> ModelParams {
        let mut p = ModelParams::new(self.a, self.k, self.a_bar, self.nu, self.mu, self.t_star);
        p.t_bar_star = self.t_bar_star.unwrap_or(self.t_star);
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyExactConfig {
    pub family: Family,
    /// Random rational parameter sets certified besides `params`.
    pub random_sets: usize,
    /// Scaling factors, as rationals such as `"2"` or `"3/2"`.
    pub lambdas: Vec<String>,
}

impl Default for VerifyExactConfig {
    fn default() -> Self {
        VerifyExactConfig { family: Family::Published, random_sets: 20, lambdas: vec!["1".into(), "2".into(), "3".into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub n: usize,
    pub dtau: f64,
    pub tau_end: f64,
    /// Highest sine mode of the random initial potential.
    pub max_mode: usize,
    pub output_every: usize,
    pub snapshot_every: Option<usize>,
    pub pressure: PressureMode,
    /// Size of a frozen random background; `0` integrates without one.
    pub background_radius: f64,
    pub proj_tol: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n: 16,
            dtau: 2e-3,
            tau_end: 1.0,
            max_mode: 3,
            output_every: 5,
            snapshot_every: None,
            pressure: PressureMode::FBar,
            background_radius: 0.0,
            proj_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Fit window; defaults to the last five sixths of the series.
    pub window: Option<[f64; 2]>,
    /// Norm family whose `h + q` total is reported: `l2`, `h1`, `h2` or `dtau`.
    pub column: String,
    pub min_goodness: f64,
    /// Sobolev index and constant fed to the coefficient conditions.
    pub s: f64,
    pub c_r: f64,
    /// Fit a stored CSV series instead of simulating.
    pub series: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { window: None, column: "l2".into(), min_goodness: 0.95, s: 2.0, c_r: 0.0, series: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NashMoserConfig {
    pub n: usize,
    pub dtau: f64,
    pub tau_end: f64,
    pub schedule: Schedule,
    pub floor: f64,
    pub power: f64,
    pub consecutive: usize,
    pub spread_limit: f64,
}

impl Default for NashMoserConfig {
    fn default() -> Self {
        let d = IterationConfig::desk_default(DEFAULT_SEED);
        NashMoserConfig {
            n: d.grid.n,
            dtau: d.dtau,
            tau_end: d.tau_end,
            schedule: d.schedule,
            floor: d.floor,
            power: d.power,
            consecutive: d.consecutive,
            spread_limit: d.spread_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub nu: Vec<f64>,
    pub a: Vec<f64>,
    /// Set `μ = ν` at every point; otherwise `μ` comes from `params`.
    pub mu_follows_nu: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { nu: vec![2.0, 5.0, 10.0], a: vec![0.25], mu_follows_nu: true }
    }
}

/// Full configuration. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub params: ParamsConfig,
    pub verify_exact: VerifyExactConfig,
    pub simulate: SimulateConfig,
    pub fit: FitConfig,
    pub nash_moser: NashMoserConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Lists every violated constraint of the configuration.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(Error::InvalidParams(v)) = validate_params(&self.params.to_model(), ValidationMode::Existence) {
            errs.extend(v.into_iter().map(|m| format!("params: {m}")));
        }
        if let Err(e) = self.lambdas() {
            errs.push(e.to_string());
        }
        let s = &self.simulate;
        if s.n < 4 {
            errs.push(format!("simulate.n: grid needs n >= 4, got {}", s.n));
        }
        if !(s.dtau > 0.0) || !(s.tau_end > 0.0) {
            errs.push("simulate: dtau and tau_end must be positive".into());
        }
        if s.output_every == 0 {
            errs.push("simulate.output_every must be at least 1".into());
        }
        if !(s.background_radius >= 0.0) {
            errs.push("simulate.background_radius must be non-negative".into());
        }
        if let Some(w) = self.fit.window {
            if !(w[0] < w[1]) {
                errs.push(format!("fit.window: start {} is not below end {}", w[0], w[1]));
            }
        }
        if !(0.0..=1.0).contains(&self.fit.min_goodness) {
            errs.push("fit.min_goodness must lie in [0, 1]".into());
        }
        if !["l2", "h1", "h2", "dtau"].contains(&self.fit.column.as_str()) {
            errs.push(format!("fit.column: unknown norm family {:?}", self.fit.column));
        }
        let nm = &self.nash_moser;
        if nm.n < 4 || !(nm.dtau > 0.0) || !(nm.tau_end > 0.0) {
            errs.push("nash_moser: needs n >= 4 and positive dtau, tau_end".into());
        }
        if let Err(e) = nm.schedule.validate() {
            errs.push(format!("nash_moser.schedule: {e}"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }

    fn lambdas(&self) -> Result<Vec<Q>> {
        self.verify_exact
            .lambdas
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse::<Q>()
                    .map_err(|e| Error::Config(format!("verify_exact.lambdas[{i}]: cannot parse {s:?} as a rational: {e}")))
            })
            .collect()
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json_str(&text)
}

/// Result of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
}

/// Report of `verify-exact`.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub family: Family,
    pub seed: u64,
    pub status: &'static str,
    pub all_residuals_zero: bool,
    pub passed: bool,
    pub certificates: Vec<Certificate>,
}

/// Summary written next to the CSV series by `simulate-linear`.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub seed: u64,
    pub params: ModelParams,
    pub config: SimulateConfig,
    pub steps: usize,
    pub max_divergence: f64,
    pub ln_scale: f64,
    pub ln_max_balance_mismatch: f64,
    pub ln_relative_balance_mismatch: f64,
    pub snapshots: Vec<String>,
}

/// Fit of one norm family.
#[derive(Debug, Clone, Serialize)]
pub struct NamedFit {
    pub column: String,
    pub fit: Option<DecayFit>,
    pub error: Option<String>,
}

/// Report of `fit-decay`.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub seed: u64,
    pub column: String,
    pub rate: f64,
    pub window: [f64; 2],
    pub goodness: f64,
    pub monotone: bool,
    pub conditions: CoefficientReport,
    pub fits: Vec<NamedFit>,
    pub passed: bool,
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub nu: f64,
    pub mu: f64,
    pub a: f64,
    pub rate: Option<f64>,
    pub goodness: Option<f64>,
    pub error: Option<String>,
}

/// Report of `sweep`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    /// For every `a`, rates are nondecreasing in `ν`.
    pub monotone_in_nu: bool,
    pub failures: usize,
    pub passed: bool,
}

impl SweepReport {
    pub fn to_csv_string(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_sig17).unwrap_or_default();
        let mut s = String::from("nu,mu,a,rate,goodness,error\n");
        for r in &self.rows {
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], " ");
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_sig17(r.nu),
                format_sig17(r.mu),
                format_sig17(r.a),
                opt(r.rate),
                opt(r.goodness),
                err
            ));
        }
        s
    }
}

/// Integrates the linearized system from seeded random data.
pub fn simulate(params: &ModelParams, sim: &SimulateConfig, seed: u64) -> Result<RunOutput> {
    let grid = Grid::new(sim.n)?;
    let mut cfg = SolverConfig::new(*params, grid, sim.dtau, sim.tau_end);
    cfg.proj_tol = sim.proj_tol;
    cfg.output_every = sim.output_every;
    cfg.pressure = sim.pressure;
    cfg.snapshot_every = sim.snapshot_every;
    let init = random_divergence_free(grid, seed, sim.max_mode, 1.0);
    if sim.background_radius > 0.0 {
        let fields = random_background(grid, seed.wrapping_add(1), sim.background_radius);
        let bg = Background::new(fields, sim.background_radius)?;
        run(&cfg, &init, BackgroundSource::Frozen(&bg), ForcingSource::Zero)
    } else {
        run(&cfg, &init, BackgroundSource::Zero, ForcingSource::Zero)
    }
}

fn default_window(series: &NormSeries) -> Result<[f64; 2]> {
    let taus = series.taus();
    match (taus.first(), taus.last()) {
        (Some(&t0), Some(&t1)) if t1 > t0 => Ok([t0 + (t1 - t0) / 6.0, t1]),
        _ => Err(Error::DegenerateFit("series has fewer than two distinct taus".into())),
    }
}

/// Fits every norm family of `series` and evaluates the coefficient conditions.
pub fn fit_report(series: &NormSeries, params: &ModelParams, fit: &FitConfig, seed: u64) -> Result<FitReport> {
    let window = match fit.window {
        Some(w) => w,
        None => default_window(series)?,
    };
    let fits: Vec<NamedFit> = ["l2", "h1", "h2", "dtau"]
        .iter()
        .map(|c| match series.total(c).and_then(|s| fit_decay(&s, window)) {
            Ok(f) => NamedFit { column: c.to_string(), fit: Some(f), error: None },
            Err(e) => NamedFit { column: c.to_string(), fit: None, error: Some(e.to_string()) },
        })
        .collect();
    let main = series.total(&fit.column)?;
    let chosen = fit_decay(&main, window)?;
    let monotone = is_monotone_nonincreasing(&main, window[0]);
    let passed = chosen.rate > 0.0 && chosen.goodness >= fit.min_goodness && monotone;
    Ok(FitReport {
        seed,
        column: fit.column.clone(),
        rate: chosen.rate,
        window,
        goodness: chosen.goodness,
        monotone,
        conditions: coefficient_conditions(params, fit.s, fit.c_r),
        fits,
        passed,
    })
}

/// Runs one simulation per `(ν, a)` point, `ν` outermost, and fits each.
pub fn sweep(base: &ModelParams, sw: &SweepConfig, sim: &SimulateConfig, fit: &FitConfig, seed: u64) -> SweepReport {
    let points: Vec<(f64, f64)> = sw.nu.iter().flat_map(|&nu| sw.a.iter().map(move |&a| (nu, a))).collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(nu, a)| {
            let mut p = *base;
            p.nu = nu;
            p.a = a;
            if sw.mu_follows_nu {
                p.mu = nu;
            }
            let result = validate_params(&p, ValidationMode::Existence)
                .and_then(|_| simulate(&p, sim, seed))
                .and_then(|out| fit_report(&out.series, &p, fit, seed));
            match result {
                Ok(r) => SweepRow { nu, mu: p.mu, a, rate: Some(r.rate), goodness: Some(r.goodness), error: None },
                Err(e) => SweepRow { nu, mu: p.mu, a, rate: None, goodness: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let monotone_in_nu = sw.a.iter().all(|&a| {
        let mut slice: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.a == a).filter_map(|r| r.rate.map(|rate| (r.nu, rate))).collect();
        slice.sort_by(|x, y| x.0.total_cmp(&y.0));
        slice.windows(2).all(|w| w[1].1 >= w[0].1)
    });
    SweepReport { seed, rows, monotone_in_nu, failures, passed: failures == 0 && monotone_in_nu }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Runs one subcommand and writes its artifacts into `out`.
pub fn dispatch(command: Command, config: &RunConfig, out: &Path, seed: u64) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let params = config.params.to_model();
    let mut artifacts = Vec::new();
    let passed = match command {
        Command::VerifyExact => {
            let ve = &config.verify_exact;
            let lambdas = config.lambdas()?;
            let mut sets = vec![RationalParams::from_model(&params)?];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sets.extend((0..ve.random_sets).map(|_| RationalParams::random(&mut rng)));
            let certificates: Vec<Certificate> = sets.par_iter().map(|rp| certify(rp, ve.family, &lambdas)).collect();
            let all_zero = certificates.iter().all(|c| c.all_residuals_zero);
            let passed = certificates.iter().all(|c| c.passed);
            let report = VerifyReport {
                family: ve.family,
                seed,
                status: if all_zero { "all residuals zero" } else { "nonzero residuals" },
                all_residuals_zero: all_zero,
                passed,
                certificates,
            };
            let path = out.join("certificate.json");
            write_json(&path, &report)?;
            artifacts.push(path);
            passed
        }
        Command::SimulateLinear => {
            let sim = &config.simulate;
            let result = simulate(&params, sim, seed)?;
            let csv = out.join("series.csv");
            fs::write(&csv, result.series.to_csv_string())?;
            artifacts.push(csv);
            let mut names = Vec::new();
            if !result.snapshots.is_empty() {
                let dir = out.join("snapshots");
                fs::create_dir_all(&dir)?;
                for (i, snap) in result.snapshots.iter().enumerate() {
                    let name = format!("snap_{i:06}.bin");
                    let path = dir.join(&name);
                    fs::write(&path, snap.to_bytes())?;
                    names.push(format!("snapshots/{name}"));
                    artifacts.push(path);
                }
            }
            let balance = energy_balance_check(&result.balance);
            let report = SimulateReport {
                seed,
                params,
                config: sim.clone(),
                steps: result.steps,
                max_divergence: result.max_divergence,
                ln_scale: result.ln_scale,
                ln_max_balance_mismatch: balance.ln_max_mismatch,
                ln_relative_balance_mismatch: balance.ln_relative_mismatch,
                snapshots: names,
            };
            let path = out.join("simulate.json");
            write_json(&path, &report)?;
            artifacts.push(path);
            true
        }
        Command::FitDecay => {
            let series = match &config.fit.series {
                Some(p) => {
                    let f = fs::File::open(p).map_err(|e| Error::Config(format!("fit.series: cannot open {}: {e}", p.display())))?;
                    NormSeries::read_csv(BufReader::new(f))?
                }
                None => simulate(&params, &config.simulate, seed)?.series,
            };
            let report = fit_report(&series, &params, &config.fit, seed)?;
            let path = out.join("fit.json");
            write_json(&path, &report)?;
            artifacts.push(path);
            report.passed
        }
        Command::NashMoser => {
            let nm = &config.nash_moser;
            let cfg = IterationConfig {
                params,
                grid: Grid::new(nm.n)?,
                dtau: nm.dtau,
                tau_end: nm.tau_end,
                schedule: nm.schedule,
                floor: nm.floor,
                power: nm.power,
                consecutive: nm.consecutive,
                spread_limit: nm.spread_limit,
                seed,
            };
            let trace: IterationTrace = iterate(&cfg)?;
            let path = out.join("nash_moser.json");
            write_json(&path, &trace)?;
            artifacts.push(path);
            trace.passed
        }
        Command::Sweep => {
            let report = sweep(&params, &config.sweep, &config.simulate, &config.fit, seed);
            let csv = out.join("sweep.csv");
            fs::write(&csv, report.to_csv_string())?;
            let path = out.join("sweep.json");
            write_json(&path, &report)?;
            artifacts.push(csv);
            artifacts.push(path);
            report.passed
        }
    };
    Ok(Outcome { passed, artifacts })
}

/// Loads the configuration named on the command line and dispatches.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let config = match &cli.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED);
    with_parallelism(cli.serial, || dispatch(cli.command, &config, &cli.out, seed))?
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            for a in &o.artifacts {
                println!("{}", a.display());
            }
            if o.passed {
                EXIT_PASS
            } else {
                eprintln!("{}: a check failed; see the report", subcommand_name(cli.command));
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn subcommand_name(c: Command) -> &'static str {
    match c {
        Command::VerifyExact => "verify-exact",
        Command::SimulateLinear => "simulate-linear",
        Command::FitDecay => "fit-decay",
        Command::NashMoser => "nash-moser",
        Command::Sweep => "sweep",
    }
}
