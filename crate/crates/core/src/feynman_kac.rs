//! Time stepping for the backward fractional Feynman-Kac equation
//!
//! ```text
//! D_t^{alpha, rho} G = kappa Laplace(G) + f
//! ```
//!
//! on `(0, b)` or `(0, b)^2`, where `D_t^{alpha, rho}` is the substantial
//! fractional derivative with the tempering `exp(-rho t)`.
//!
//! In 1D the space discretization is the fourth-order compact scheme
//! `(l_0 H + mu L) G^n = ...` with `H = tridiag(1, 10, 1)/12`, `L =
//! tridiag(-1, 2, -1)` and `mu = kappa tau^alpha / h^2`. In 2D it is the
//! second-order centered scheme with `I (x) I` in place of `H` and zero
//! boundary values. Unknowns are complex, operators are real.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coarsen::{CoarseningStrategy, ProblemFamily, RediscretizationRule};
use crate::error::{check_len, Error, Result};
use crate::fsd::FsdCoefficients;
use crate::operator::LevelOperator;
use crate::scalar::norm_inf;
use crate::stencil::{level_count, SymmetricToeplitzStencil};
use crate::tensor::TensorOperator2D;
use crate::vcycle::{build_hierarchy, solve, MgHierarchy, SmootherConfig};

pub type Field1D = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;
pub type Field2D = Arc<dyn Fn(f64, f64, f64) -> Complex64 + Send + Sync>;
pub type Trace = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Scalar parameters shared by the 1D and 2D problems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Domain length `b`.
    pub length: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub rho: Complex64,
    pub t_final: f64,
    /// Interior points per direction.
    pub m: usize,
    /// Time steps.
    pub n_steps: usize,
}

impl ProblemParams {
    pub fn spacing(&self) -> f64 {
        self.length / (self.m + 1) as f64
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    /// `kappa tau^alpha / h^2`.
    pub fn mu(&self) -> f64 {
        let h = self.spacing();
        self.kappa * self.tau().powf(self.alpha) / (h * h)
    }

    /// Grid coordinate of interior index `i` (0-based), boundaries at `-1` and `m`.
    pub fn x(&self, i: isize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("length", self.length), ("kappa", self.kappa), ("t_final", self.t_final)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.m == 0 || self.n_steps == 0 {
            return Err(Error::InvalidParameter("grid and step counts must be positive".into()));
        }
        Ok(())
    }
}

/// 1D problem with Dirichlet traces at `x = 0` and `x = b`.
#[derive(Clone)]
pub struct Problem1D {
    pub params: ProblemParams,
    /// `f(x, t)`.
    pub forcing: Field1D,
    /// `G(x, 0)`.
    pub initial: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub left: Trace,
    pub right: Trace,
    pub exact: Option<Field1D>,
}

impl std::fmt::Debug for Problem1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem1D").field("params", &self.params).finish_non_exhaustive()
    }
}

/// 2D problem on the square with zero boundary values.
#[derive(Clone)]
pub struct Problem2D {
    pub params: ProblemParams,
    /// `f(x, y, t)`.
    pub forcing: Field2D,
    /// `G(x, y, 0)`.
    pub initial: Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>,
    pub exact: Option<Field2D>,
}

impl std::fmt::Debug for Problem2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem2D").field("params", &self.params).finish_non_exhaustive()
    }
}

/// `Gamma(5 + alpha) / Gamma(5)`, the factor produced by the fractional
/// derivative of `t^{4 + alpha}`.
fn gamma_ratio(alpha: f64) -> f64 {
    libm::tgamma(5.0 + alpha) / 24.0
}

/// Preset names accepted by [`Problem1D::preset`] and [`Problem2D::preset`].
pub const PRESET_1D: &str = "example-6.1";
pub const PRESET_2D: &str = "example-6.2";

impl Problem1D {
    /// Manufactured solution `exp(-rho t) (t^{4+alpha} + 1) (sin(pi x) + 1)`
    /// on `(0, 1)` with `kappa = 1`, `rho = 1 + i`, `T = 1`.
    pub fn example_6_1(alpha: f64, m: usize, n_steps: usize) -> Self {
        let params =
            ProblemParams { length: 1.0, kappa: 1.0, alpha, rho: Complex64::new(1.0, 1.0), t_final: 1.0, m, n_steps };
        let (rho, kappa) = (params.rho, params.kappa);
        let pi = std::f64::consts::PI;
        let g = gamma_ratio(alpha);
        let time = move |t: f64| (-rho * t).exp() * (t.powf(4.0 + alpha) + 1.0);
        let exact: Field1D = Arc::new(move |x, t| time(t) * ((pi * x).sin() + 1.0));
        let forcing: Field1D = Arc::new(move |x, t| {
            let e = (-rho * t).exp();
            e * (g * t.powi(4) * ((pi * x).sin() + 1.0)
                + kappa * pi * pi * (t.powf(4.0 + alpha) + 1.0) * (pi * x).sin())
        });
        Self {
            params,
            forcing,
            initial: Arc::new(move |x| Complex64::new((pi * x).sin() + 1.0, 0.0)),
            left: Arc::new(time),
            right: Arc::new(time),
            exact: Some(exact),
        }
    }

    pub fn preset(name: &str, alpha: f64, m: usize, n_steps: usize) -> Result<Self> {
        match name {
            PRESET_1D => Ok(Self::example_6_1(alpha, m, n_steps)),
            _ => Err(Error::InvalidParameter(format!("unknown 1D preset {name:?}; known: {PRESET_1D}"))),
        }
    }

    /// System operator `l_0 H + mu L`.
    pub fn system(&self, l0: f64) -> SymmetricToeplitzStencil {
        SymmetricToeplitzStencil::combine(
            l0,
            &SymmetricToeplitzStencil::compact_mass(),
            self.params.mu(),
            &SymmetricToeplitzStencil::laplacian(),
        )
    }

    pub fn rediscretization(&self, l0: f64) -> RediscretizationRule {
        let p = &self.params;
        RediscretizationRule {
            family: ProblemFamily::Compact1D,
            mass: l0,
            diffusion: p.kappa * p.tau().powf(p.alpha),
            fine_spacing: p.spacing(),
        }
    }
}

impl Problem2D {
    /// Manufactured solution `exp(-rho t) t^{4+alpha} sin(pi x) sin(pi y)` on
    /// the unit square with `kappa = 1`, `rho = 1`, `T = 1`.
    pub fn example_6_2(alpha: f64, m: usize, n_steps: usize) -> Self {
        let params =
            ProblemParams { length: 1.0, kappa: 1.0, alpha, rho: Complex64::new(1.0, 0.0), t_final: 1.0, m, n_steps };
        let (rho, kappa) = (params.rho, params.kappa);
        let pi = std::f64::consts::PI;
        let g = gamma_ratio(alpha);
        let exact: Field2D =
            Arc::new(move |x, y, t| (-rho * t).exp() * t.powf(4.0 + alpha) * (pi * x).sin() * (pi * y).sin());
        let forcing: Field2D = Arc::new(move |x, y, t| {
            let s = (pi * x).sin() * (pi * y).sin();
            (-rho * t).exp() * (g * t.powi(4) + 2.0 * pi * pi * kappa * t.powf(4.0 + alpha)) * s
        });
        Self { params, forcing, initial: Arc::new(|_, _| Complex64::new(0.0, 0.0)), exact: Some(exact) }
    }

    pub fn preset(name: &str, alpha: f64, m: usize, n_steps: usize) -> Result<Self> {
        match name {
            PRESET_2D => Ok(Self::example_6_2(alpha, m, n_steps)),
            _ => Err(Error::InvalidParameter(format!("unknown 2D preset {name:?}; known: {PRESET_2D}"))),
        }
    }

    /// `l_0 I (x) I + mu (I (x) L + L (x) I)`.
    pub fn system(&self, l0: f64) -> TensorOperator2D {
        TensorOperator2D::laplacian_model(l0, self.params.mu())
    }

    pub fn rediscretization(&self, l0: f64) -> RediscretizationRule {
        let p = &self.params;
        RediscretizationRule {
            family: ProblemFamily::Centered2D,
            mass: l0,
            diffusion: p.kappa * p.tau().powf(p.alpha),
            fine_spacing: p.spacing(),
        }
    }
}

/// Time levels `G^0, ..., G^n` at interior points. In 1D the boundary values
/// of each level and the weighted levels `H G^k` (boundary included) are kept
/// alongside.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub history: Vec<Vec<Complex64>>,
    pub boundary: Vec<(Complex64, Complex64)>,
    weighted: Vec<Vec<Complex64>>,
}

/// `(v_{i-1} + 10 v_i + v_{i+1}) / 12` with the given boundary values as
/// outer neighbours.
fn compact_weight(v: &[Complex64], left: Complex64, right: Complex64) -> Vec<Complex64> {
    let m = v.len();
    (0..m)
        .map(|i| {
            let l = if i == 0 { left } else { v[i - 1] };
            let r = if i + 1 == m { right } else { v[i + 1] };
            (l + v[i] * 10.0 + r) / 12.0
        })
        .collect()
}

impl EvolutionState {
    pub fn new_1d(problem: &Problem1D) -> Self {
        let p = &problem.params;
        let g0: Vec<Complex64> = (0..p.m as isize).map(|i| (problem.initial)(p.x(i))).collect();
        let bnd = ((problem.initial)(0.0), (problem.initial)(p.length));
        let mut s = Self::default();
        s.push_1d(g0, bnd);
        s
    }

    pub fn new_2d(problem: &Problem2D) -> Self {
        let p = &problem.params;
        let mut g0 = Vec::with_capacity(p.m * p.m);
        for i in 0..p.m as isize {
            for j in 0..p.m as isize {
                g0.push((problem.initial)(p.x(i), p.x(j)));
            }
        }
        Self { history: vec![g0], ..Self::default() }
    }

    /// Current step index `n` (number of completed steps).
    pub fn step(&self) -> usize {
        self.history.len() - 1
    }

    pub fn current(&self) -> &[Complex64] {
        self.history.last().expect("state holds the initial level")
    }

    fn push_1d(&mut self, g: Vec<Complex64>, bnd: (Complex64, Complex64)) {
        self.weighted.push(compact_weight(&g, bnd.0, bnd.1));
        self.history.push(g);
        self.boundary.push(bnd);
    }

    /// Writes `index,re,im` rows for the current level.
    pub fn write_snapshot<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["index", "re", "im"])?;
        for (i, z) in self.current().iter().enumerate() {
            w.write_record([i.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_step(state: &EvolutionState, coeffs: &FsdCoefficients, n: usize) -> Result<()> {
    if n == 0 || n > coeffs.n_steps {
        return Err(Error::InvalidParameter(format!("step {n} outside 1..={}", coeffs.n_steps)));
    }
    if state.history.len() != n {
        return Err(Error::InvalidParameter(format!(
            "step {n} needs levels 0..={} in the history, found {}",
            n - 1,
            state.history.len()
        )));
    }
    Ok(())
}

/// `sum_{k=0}^{n-1} l_k`.
fn initial_weight(coeffs: &FsdCoefficients, n: usize) -> Complex64 {
    coeffs.decay(n) * coeffs.l[..n].iter().sum::<f64>()
}

/// Right-hand side of step `n` of the compact scheme,
/// `-sum_{k=1}^{n-1} d_k H G^{n-k} + exp(-rho n tau) (sum_{k<n} l_k) H G^0 + tau^alpha H F^n`,
/// plus the Dirichlet contributions of `l_0 H + mu L` at the two end rows.
pub fn assemble_rhs_1d(
    state: &EvolutionState,
    coeffs: &FsdCoefficients,
    problem: &Problem1D,
    n: usize,
) -> Result<Vec<Complex64>> {
    check_step(state, coeffs, n)?;
    if state.weighted.len() != n {
        return Err(Error::InvalidParameter("1D step needs a state built by EvolutionState::new_1d".into()));
    }
    let p = &problem.params;
    let m = p.m;
    let t = n as f64 * p.tau();
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    for k in 1..n {
        let dk = coeffs.d[k];
        for (r, g) in rhs.iter_mut().zip(&state.weighted[n - k]) {
            *r -= dk * g;
        }
    }
    let c0 = initial_weight(coeffs, n);
    for (r, g) in rhs.iter_mut().zip(&state.weighted[0]) {
        *r += c0 * g;
    }
    let f: Vec<Complex64> = (0..m as isize).map(|i| (problem.forcing)(p.x(i), t)).collect();
    let hf = compact_weight(&f, (problem.forcing)(0.0, t), (problem.forcing)(p.length, t));
    let ta = p.tau().powf(p.alpha);
    for (r, x) in rhs.iter_mut().zip(&hf) {
        *r += x * ta;
    }
    // end rows: move (l_0 / 12 - mu) G_boundary to the right
    let off = coeffs.l0() / 12.0 - p.mu();
    rhs[0] -= (problem.left)(t) * off;
    rhs[m - 1] -= (problem.right)(t) * off;
    Ok(rhs)
}

/// `-sum_{k=1}^{n-1} d_k G^{n-k} + exp(-rho n tau) (sum_{k<n} l_k) G^0 + tau^alpha f^n`.
pub fn assemble_rhs_2d(
    state: &EvolutionState,
    coeffs: &FsdCoefficients,
    problem: &Problem2D,
    n: usize,
) -> Result<Vec<Complex64>> {
    check_step(state, coeffs, n)?;
    let p = &problem.params;
    let m = p.m;
    let t = n as f64 * p.tau();
    let mut rhs = vec![Complex64::new(0.0, 0.0); m * m];
    for k in 1..n {
        let dk = coeffs.d[k];
        for (r, g) in rhs.iter_mut().zip(&state.history[n - k]) {
            *r -= dk * g;
        }
    }
    let c0 = initial_weight(coeffs, n);
    for (r, g) in rhs.iter_mut().zip(&state.history[0]) {
        *r += c0 * g;
    }
    let ta = p.tau().powf(p.alpha);
    for i in 0..m {
        let x = p.x(i as isize);
        for j in 0..m {
            rhs[i * m + j] += (problem.forcing)(x, p.x(j as isize), t) * ta;
        }
    }
    Ok(rhs)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coarsening {
    #[default]
    Galerkin,
    Geometric,
}

impl std::str::FromStr for Coarsening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin" => Ok(Self::Galerkin),
            "geometric" => Ok(Self::Geometric),
            _ => Err(Error::InvalidParameter(format!("coarsening must be galerkin or geometric, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolverChoice {
    Multigrid {
        coarsening: Coarsening,
    },
    /// Thomas elimination in 1D, dense LU in 2D.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub nu: usize,
    pub solver: SolverChoice,
    pub tol: f64,
    pub max_iter: usize,
    pub smoother: SmootherConfig,
}

impl RunConfig {
    /// Multigrid defaults with relative residual tolerance `tol`.
    pub fn multigrid(nu: usize, coarsening: Coarsening, tol: f64) -> Self {
        Self {
            nu,
            solver: SolverChoice::Multigrid { coarsening },
            tol,
            max_iter: 200,
            smoother: SmootherConfig::default(),
        }
    }

    pub fn direct(nu: usize) -> Self {
        Self { nu, solver: SolverChoice::Direct, tol: 0.0, max_iter: 0, smoother: SmootherConfig::default() }
    }
}

/// Linear solver for the (fixed) system matrix of a run.
pub enum StepSolver {
    Multigrid { hierarchy: Box<MgHierarchy>, tol: f64, max_iter: usize },
    Tridiagonal(SymmetricToeplitzStencil),
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl StepSolver {
    fn build(fine: LevelOperator, m: usize, rule: RediscretizationRule, cfg: &RunConfig) -> Result<Self> {
        if !fine.is_spd_eligible() {
            return Err(Error::NotSpd {
                level: level_count(m).unwrap_or(0),
                size: m,
                detail: format!("system operator {fine:?}"),
            });
        }
        Ok(match cfg.solver {
            SolverChoice::Multigrid { coarsening } => {
                let strategy = match coarsening {
                    Coarsening::Galerkin => CoarseningStrategy::Galerkin,
                    Coarsening::Geometric => CoarseningStrategy::Geometric(rule),
                };
                let hierarchy = build_hierarchy(fine, m, strategy, cfg.smoother)?;
                Self::Multigrid { hierarchy: Box::new(hierarchy), tol: cfg.tol, max_iter: cfg.max_iter }
            }
            SolverChoice::Direct => match fine {
                LevelOperator::Line(s) if s.is_tridiagonal() => Self::Tridiagonal(s),
                op => Self::Dense(op.to_dense(m).lu()),
            },
        })
    }

    /// Solves `A x = rhs` from the initial guess `guess`; returns the
    /// solution and the multigrid iteration count (0 for direct solves).
    pub fn solve(&self, rhs: &[Complex64], guess: &[Complex64]) -> Result<(Vec<Complex64>, usize)> {
        match self {
            Self::Multigrid { hierarchy, tol, max_iter } => {
                let (x, report) = solve(hierarchy, rhs, guess, *tol, *max_iter)?;
                Ok((x, report.iterations))
            }
            Self::Tridiagonal(s) => Ok((thomas(s.band(0), s.band(1), rhs), 0)),
            Self::Dense(lu) => {
                let re = DVector::from_iterator(rhs.len(), rhs.iter().map(|z| z.re));
                let im = DVector::from_iterator(rhs.len(), rhs.iter().map(|z| z.im));
                let singular = || Error::Domain("singular system matrix".into());
                let xr = lu.solve(&re).ok_or_else(singular)?;
                let xi = lu.solve(&im).ok_or_else(singular)?;
                Ok((xr.iter().zip(xi.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect(), 0))
            }
        }
    }
}

/// Thomas elimination for `tridiag(a1, a0, a1) x = rhs`.
pub fn thomas(a0: f64, a1: f64, rhs: &[Complex64]) -> Vec<Complex64> {
    let m = rhs.len();
    let mut c = vec![0.0; m];
    let mut d = vec![Complex64::new(0.0, 0.0); m];
    let mut denom = a0;
    c[0] = a1 / denom;
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = a0 - a1 * c[i - 1];
        c[i] = a1 / denom;
        d[i] = (rhs[i] - d[i - 1] * a1) / denom;
    }
    for i in (0..m.saturating_sub(1)).rev() {
        let next = d[i + 1];
        d[i] -= next * c[i];
    }
    d
}

/// Solves step `n` with the assembled `rhs`, warm-started from `G^{n-1}`,
/// and appends `G^n`. Returns the multigrid iteration count.
pub fn step_1d(
    state: &mut EvolutionState,
    problem: &Problem1D,
    solver: &StepSolver,
    rhs: &[Complex64],
) -> Result<usize> {
    check_len(problem.params.m, rhs.len())?;
    let n = state.history.len();
    let t = n as f64 * problem.params.tau();
    let (g, iters) = solver.solve(rhs, state.current())?;
    state.push_1d(g, ((problem.left)(t), (problem.right)(t)));
    Ok(iters)
}

pub fn step_2d(
    state: &mut EvolutionState,
    problem: &Problem2D,
    solver: &StepSolver,
    rhs: &[Complex64],
) -> Result<usize> {
    let m = problem.params.m;
    check_len(m * m, rhs.len())?;
    let (g, iters) = solver.solve(rhs, state.current())?;
    state.history.push(g);
    Ok(iters)
}

/// Final state and per-step iteration counts of a run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: EvolutionState,
    pub iterations: Vec<usize>,
    pub max_error: Option<f64>,
}

impl RunOutcome {
    pub fn average_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
    }
}

pub fn run_1d(problem: &Problem1D, cfg: &RunConfig) -> Result<RunOutcome> {
    let p = &problem.params;
    p.validate()?;
    let coeffs = FsdCoefficients::new(p.alpha, cfg.nu, p.rho, p.tau(), p.n_steps)?;
    let solver = StepSolver::build(
        LevelOperator::Line(problem.system(coeffs.l0())),
        p.m,
        problem.rediscretization(coeffs.l0()),
        cfg,
    )?;
    let mut state = EvolutionState::new_1d(problem);
    let mut iterations = Vec::with_capacity(p.n_steps);
    for n in 1..=p.n_steps {
        let rhs = assemble_rhs_1d(&state, &coeffs, problem, n)?;
        iterations.push(step_1d(&mut state, problem, &solver, &rhs)?);
    }
    let max_error = problem.exact.as_ref().map(|ex| error_report_1d(&state, p, ex.as_ref()));
    Ok(RunOutcome { state, iterations, max_error })
}

pub fn run_2d(problem: &Problem2D, cfg: &RunConfig) -> Result<RunOutcome> {
    let p = &problem.params;
    p.validate()?;
    let coeffs = FsdCoefficients::new(p.alpha, cfg.nu, p.rho, p.tau(), p.n_steps)?;
    let solver = StepSolver::build(
        LevelOperator::Plane(problem.system(coeffs.l0())),
        p.m,
        problem.rediscretization(coeffs.l0()),
        cfg,
    )?;
    let mut state = EvolutionState::new_2d(problem);
    let mut iterations = Vec::with_capacity(p.n_steps);
    for n in 1..=p.n_steps {
        let rhs = assemble_rhs_2d(&state, &coeffs, problem, n)?;
        iterations.push(step_2d(&mut state, problem, &solver, &rhs)?);
    }
    let max_error = problem.exact.as_ref().map(|ex| error_report_2d(&state, p, ex.as_ref()));
    Ok(RunOutcome { state, iterations, max_error })
}

/// Maximum modulus error at the last time level over interior points.
pub fn error_report_1d(
    state: &EvolutionState,
    p: &ProblemParams,
    exact: &(dyn Fn(f64, f64) -> Complex64 + Send + Sync),
) -> f64 {
    let t = state.step() as f64 * p.tau();
    let diff: Vec<Complex64> = state.current().iter().enumerate().map(|(i, g)| g - exact(p.x(i as isize), t)).collect();
    norm_inf(&diff)
}

pub fn error_report_2d(
    state: &EvolutionState,
    p: &ProblemParams,
    exact: &(dyn Fn(f64, f64, f64) -> Complex64 + Send + Sync),
) -> f64 {
    let t = state.step() as f64 * p.tau();
    let m = p.m;
    let diff: Vec<Complex64> = state
        .current()
        .iter()
        .enumerate()
        .map(|(idx, g)| g - exact(p.x((idx / m) as isize), p.x((idx % m) as isize), t))
        .collect();
    norm_inf(&diff)
}

/// `log2(e_{i-1} / e_i)` for successive refinements; `None` for the first entry.
pub fn convergence_rates(errors: &[f64]) -> Vec<Option<f64>> {
    std::iter::once(None).chain(errors.windows(2).map(|w| Some((w[0] / w[1]).log2()))).take(errors.len()).collect()
}
