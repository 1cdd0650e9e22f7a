//! Experiment runner behind the `fkmg` binary.
//!
//! `fkmg table` runs a convergence sweep over grid sizes and writes
//! `M,error,rate,iter,cpu_s` rows. `fkmg theory` evaluates the convergence
//! constants and bound checks for one system. `fkmg coeffs` dumps the
//! quadrature weights.
//!
//! Grid sizes `M` are interval counts (powers of two): a run with `M` has
//! `M - 1` interior points per direction and `N = M` time steps.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_contraction_bounds, check_smoother_bounds, coarsening_oracle_discrepancy, m0_tridiag, render_table,
    BoundReport, FK_1D_M0, FK_2D_M0,
};
use crate::coarsen::CoarseningStrategy;
use crate::error::{Error, Result};
use crate::feynman_kac::{
    run_1d, run_2d, Coarsening, Problem1D, Problem2D, RunConfig, SolverChoice, PRESET_1D, PRESET_2D,
};
use crate::fsd::{generate_l, FsdCoefficients};
use crate::operator::LevelOperator;
use crate::scalar::format_sci;
use crate::stencil::SymmetricToeplitzStencil;
use crate::vcycle::{build_hierarchy, SmootherConfig};

/// Preset name for the bare `tridiag(-1, 2, -1)` system in `theory`.
pub const PRESET_LAPLACIAN: &str = "laplacian";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_BOUND_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fkmg", version, about = "Multigrid experiments for the fractional Feynman-Kac equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error/rate/iteration table over a list of grid sizes.
    Table(TableArgs),
    /// Convergence constants and bound checks.
    Theory(TheoryArgs),
    /// Write the quadrature weight table as CSV.
    Coeffs(CoeffsArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nu: Option<usize>,
    /// Interval counts, comma separated (e.g. 32,64,128).
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// galerkin or geometric.
    #[arg(long)]
    pub coarsen: Option<Coarsening>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write 0 in the cpu_s column so repeated runs give identical files.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// example-6.1, example-6.2 or laplacian.
    #[arg(long, default_value = PRESET_1D)]
    pub preset: String,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long)]
    pub nu: Option<usize>,
    /// Interval count of the finest grid.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Smoother weight; defaults to 1/2 in 1D and 1/4 in 2D.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, default_value = "galerkin")]
    pub coarsen: Coarsening,
    #[arg(long, default_value_t = 4)]
    pub trials: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Also write the reports as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub nu: usize,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub rho_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho_im: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Table sweep configuration; the JSON config file has exactly these fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: String,
    pub alpha: f64,
    pub nu: usize,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    /// Galerkin in 1D and geometric in 2D when absent.
    pub coarsen: Option<Coarsening>,
    /// Relative residual tolerance; 1e-11 in 1D and 1e-7 in 2D when absent.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub smoother: SmootherConfig,
    pub out: Option<PathBuf>,
    pub timing: bool,
    /// Kept for reproducible property runs; the table sweep itself draws no
    /// random numbers.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: PRESET_1D.into(),
            alpha: 0.3,
            nu: 4,
            m: vec![32, 64, 128, 256],
            coarsen: None,
            tol: None,
            max_iter: 200,
            smoother: SmootherConfig::default(),
            out: None,
            timing: true,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn is_2d(&self) -> bool {
        self.preset == PRESET_2D
    }

    pub fn coarsening(&self) -> Coarsening {
        self.coarsen.unwrap_or(if self.is_2d() { Coarsening::Geometric } else { Coarsening::Galerkin })
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(if self.is_2d() { 1e-7 } else { 1e-11 })
    }

    pub fn validate(&self) -> Result<()> {
        if self.preset != PRESET_1D && self.preset != PRESET_2D {
            return Err(Error::InvalidParameter(format!(
                "unknown preset {:?}; use {PRESET_1D} or {PRESET_2D}",
                self.preset
            )));
        }
        generate_l(self.alpha, self.nu, 0)?;
        if self.m.is_empty() {
            return Err(Error::InvalidParameter("M list is empty".into()));
        }
        for &m in &self.m {
            if m < 2 || !m.is_power_of_two() {
                return Err(Error::InvalidParameter(format!("M = {m} must be a power of two >= 2")));
            }
        }
        if !(self.tolerance() > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance())));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        self.smoother.validate()
    }

    fn run_config(&self) -> RunConfig {
        RunConfig {
            nu: self.nu,
            solver: SolverChoice::Multigrid { coarsening: self.coarsening() },
            tol: self.tolerance(),
            max_iter: self.max_iter,
            smoother: self.smoother,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub error: f64,
    pub rate: Option<f64>,
    /// Average multigrid iterations per time step.
    pub iter: f64,
    pub cpu_s: f64,
}

/// Runs one row per grid size, in the order given.
pub fn run_table(cfg: &ExperimentConfig) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    let run = cfg.run_config();
    let mut rows: Vec<TableRow> = Vec::with_capacity(cfg.m.len());
    for &m in &cfg.m {
        let start = Instant::now();
        let outcome = if cfg.is_2d() {
            run_2d(&Problem2D::preset(&cfg.preset, cfg.alpha, m - 1, m)?, &run)?
        } else {
            run_1d(&Problem1D::preset(&cfg.preset, cfg.alpha, m - 1, m)?, &run)?
        };
        let cpu_s = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
        let error = outcome.max_error.expect("presets carry an exact solution");
        let rate = rows.last().map(|prev| (prev.error / error).log2());
        rows.push(TableRow { m, error, rate, iter: outcome.average_iterations(), cpu_s });
    }
    Ok(rows)
}

/// Scientific notation with 5 significant digits and a two-digit exponent,
/// e.g. `4.2225e-07`.
pub fn sci(x: f64) -> String {
    format_sci(x, 4)
}

pub fn write_table_csv<W: Write>(rows: &[TableRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["M", "error", "rate", "iter", "cpu_s"])?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            sci(r.error),
            r.rate.map(|x| format!("{x:.4}")).unwrap_or_default(),
            format!("{:.2}", r.iter),
            sci(r.cpu_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_rows(cfg: &ExperimentConfig, rows: &[TableRow]) -> String {
    let mut s = format!(
        "{} alpha={} nu={} coarsening={} tol={:e}\n{:>6} {:>12} {:>8} {:>7} {:>12}\n",
        cfg.preset,
        cfg.alpha,
        cfg.nu,
        match cfg.coarsening() {
            Coarsening::Galerkin => "galerkin",
            Coarsening::Geometric => "geometric",
        },
        cfg.tolerance(),
        "M",
        "error",
        "rate",
        "iter",
        "cpu_s"
    );
    for r in rows {
        let rate = r.rate.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        s.push_str(&format!("{:>6} {:>12} {:>8} {:>7.2} {:>12}\n", r.m, sci(r.error), rate, r.iter, sci(r.cpu_s)));
    }
    s
}

/// Reports of `fkmg theory`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryBundle {
    pub preset: String,
    pub m0: f64,
    pub reports: Vec<BoundReport>,
}

impl TheoryBundle {
    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| r.violated()).count()
    }

    pub fn out_of_range(&self) -> usize {
        self.reports.iter().filter(|r| !r.in_theory_range).count()
    }
}

pub fn run_theory(args: &TheoryArgs) -> Result<TheoryBundle> {
    let m = args.m.unwrap_or(if args.preset == PRESET_2D { 32 } else { 64 });
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("M = {m} must be a power of two >= 2")));
    }
    let interior = m - 1;
    let (fine, rule, m0, omega_default) = match args.preset.as_str() {
        PRESET_1D => {
            let p = Problem1D::example_6_1(args.alpha, interior, m);
            let l0 = generate_l(args.alpha, args.nu.unwrap_or(4), 0)?[0];
            (LevelOperator::Line(p.system(l0)), Some(p.rediscretization(l0)), FK_1D_M0, 0.5)
        }
        PRESET_2D => {
            let p = Problem2D::example_6_2(args.alpha, interior, m);
            let l0 = generate_l(args.alpha, args.nu.unwrap_or(2), 0)?[0];
            (LevelOperator::Plane(p.system(l0)), Some(p.rediscretization(l0)), FK_2D_M0, 0.25)
        }
        PRESET_LAPLACIAN => {
            let m0 = m0_tridiag(2.0, -1.0)?.case_value;
            (LevelOperator::Line(SymmetricToeplitzStencil::laplacian()), None, m0, 0.5)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown preset {other:?}; use {PRESET_1D}, {PRESET_2D} or {PRESET_LAPLACIAN}"
            )))
        }
    };
    let strategy = match (args.coarsen, rule) {
        (Coarsening::Galerkin, _) => CoarseningStrategy::Galerkin,
        (Coarsening::Geometric, Some(rule)) => CoarseningStrategy::Geometric(rule),
        (Coarsening::Geometric, None) => {
            return Err(Error::InvalidParameter("geometric coarsening needs a Feynman-Kac preset".into()))
        }
    };
    let omega = args.omega.unwrap_or(omega_default);
    let h = build_hierarchy(fine.clone(), interior, strategy, SmootherConfig::with_weight(omega))?;

    let mut reports = Vec::new();
    let ctx = format!("{}, M={interior}", args.preset);
    let tridiag_factors: Vec<SymmetricToeplitzStencil> = match &fine {
        LevelOperator::Line(s) => vec![s.clone()],
        LevelOperator::Plane(t) => t.as_model().map(|(_, _, a, b)| vec![a.clone(), b.clone()]).unwrap_or_default(),
    };
    for s in tridiag_factors.iter().filter(|s| s.is_tridiagonal() && s.band(1) != 0.0) {
        let (a0, a1) = (s.band(0), s.band(1));
        let v = m0_tridiag(a0, a1)?;
        let label = format!("{ctx}, stencil ({}, {})", format_sci(a0, 6), format_sci(a1, 6));
        reports.push(BoundReport::upper("m0 sup over k vs case value", v.case_value, v.sup_over_k, label.clone()));
        let disc = coarsening_oracle_discrepancy(a0, a1, 6)?;
        reports.push(BoundReport::upper("coarsening oracle discrepancy", 1e-12, disc, label));
    }
    reports.extend(check_smoother_bounds(&h)?);
    reports.push(check_contraction_bounds(&h, 1, omega, m0, args.trials, args.seed)?);
    Ok(TheoryBundle { preset: args.preset.clone(), m0, reports })
}

pub fn dump_coefficients(args: &CoeffsArgs) -> Result<FsdCoefficients> {
    let c = FsdCoefficients::new(args.alpha, args.nu, Complex64::new(args.rho_re, args.rho_im), args.tau, args.n)?;
    match &args.out {
        Some(path) => c.dump(path)?,
        None => c.write_csv(std::io::stdout().lock())?,
    }
    Ok(c)
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence(_) => EXIT_NON_CONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

fn merge_table_args(args: &TableArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &args.preset {
        cfg.preset = p.clone();
        if args.config.is_none() && cfg.is_2d() {
            cfg.nu = 2;
            cfg.m = vec![16, 32, 64];
        }
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(n) = args.nu {
        cfg.nu = n;
    }
    if let Some(m) = &args.m {
        cfg.m = m.clone();
    }
    if args.coarsen.is_some() {
        cfg.coarsen = args.coarsen;
    }
    if args.tol.is_some() {
        cfg.tol = args.tol;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.no_timing {
        cfg.timing = false;
    }
    Ok(cfg)
}

/// Runs a parsed command line, printing to `out` and diagnostics to stderr.
/// Returns the process exit code.
pub fn run<W: Write>(cli: Cli, out: &mut W) -> i32 {
    let result = match cli.command {
        Command::Table(args) => table_command(&args, out),
        Command::Theory(args) => theory_command(&args, out),
        Command::Coeffs(args) => dump_coefficients(&args).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn table_command<W: Write>(args: &TableArgs, out: &mut W) -> Result<i32> {
    let cfg = merge_table_args(args)?;
    let rows = run_table(&cfg)?;
    match &cfg.out {
        Some(path) => {
            write_table_csv(&rows, std::fs::File::create(path)?)?;
            write!(out, "{}", render_rows(&cfg, &rows))?;
        }
        None => write_table_csv(&rows, &mut *out)?,
    }
    Ok(EXIT_OK)
}

fn theory_command<W: Write>(args: &TheoryArgs, out: &mut W) -> Result<i32> {
    let bundle = run_theory(args)?;
    writeln!(out, "preset {}: m0 = {}", bundle.preset, bundle.m0)?;
    write!(out, "{}", render_table(&bundle.reports))?;
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&bundle)?)?;
    }
    if bundle.out_of_range() > 0 {
        eprintln!("warning: {} check(s) ran outside the theory's parameter range", bundle.out_of_range());
    }
    if bundle.violations() > 0 {
        eprintln!("{} bound violation(s)", bundle.violations());
        return Ok(EXIT_BOUND_VIOLATION);
    }
    Ok(EXIT_OK)
}
