//! Convergence constants of the V-cycle theory and checks of measured
//! quantities against them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coarsen::{c_k, closed_form_tridiag, galerkin_step, ClosedFormConstants, CoarseningStrategy};
use crate::error::{Error, Result};
use crate::operator::LevelOperator;
use crate::scalar::format_sci;
use crate::stencil::{SymmetricToeplitzStencil, EIGEN_DEFAULT_TOL};
use crate::transfer::{dense_prolongation, dense_restriction};
use crate::vcycle::{measure_contraction, MgHierarchy, PostSmoothing, SmootherConfig};

/// Slack applied to every `measured <= bound` comparison.
pub const BOUND_SLACK: f64 = 1e-10;
/// Largest level index of the supremum over `k` in [`m0_tridiag`].
pub const M0_SWEEP_LEVELS: u32 = 64;
/// `m_0` for the 1D compact Feynman-Kac system.
pub const FK_1D_M0: f64 = 16.0;
/// `m_0` for the 2D centered Feynman-Kac system.
pub const FK_2D_M0: f64 = 1536.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub quantity: String,
    pub bound: f64,
    /// Lower bound, for two-sided checks.
    pub lower: Option<f64>,
    pub measured: f64,
    pub satisfied: bool,
    /// Whether the parameters meet the hypotheses of the bound.
    pub in_theory_range: bool,
    pub context: String,
}

impl BoundReport {
    pub fn upper(quantity: &str, bound: f64, measured: f64, context: String) -> Self {
        Self {
            quantity: quantity.into(),
            bound,
            lower: None,
            measured,
            satisfied: measured <= bound + BOUND_SLACK,
            in_theory_range: true,
            context,
        }
    }

    pub fn two_sided(quantity: &str, lower: f64, bound: f64, measured: f64, context: String) -> Self {
        let mut r = Self::upper(quantity, bound, measured, context);
        r.lower = Some(lower);
        r.satisfied &= measured >= lower - BOUND_SLACK;
        r
    }

    /// A violation that counts: the bound fails although its hypotheses hold.
    pub fn violated(&self) -> bool {
        !self.satisfied && self.in_theory_range
    }
}

/// Both evaluations of `m_0` for `tridiag(a1, a0, a1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct M0Value {
    /// `(1 + sup_k m~_0(k))^2` over `k = 1..=64`.
    pub sup_over_k: f64,
    /// Closed case value: 1, 16 or `max(25, 4 a0^2 / (a0 - 2 a1)^2)`.
    pub case_value: f64,
}

impl M0Value {
    /// The supremum never exceeds the case value; they coincide for `a1 <= 0`.
    pub fn consistent(&self) -> bool {
        self.sup_over_k <= self.case_value * (1.0 + 1e-12)
    }
}

/// `m~_0(k) = (6 C_k + 2^{k-1}) s / ((2 C_k + 2^{k-1}) s - 2^{k+1} a1)` with `s = a0 + 2 a1`.
pub fn m0_tilde(a0: f64, a1: f64, k: u32) -> f64 {
    let s = a0 + 2.0 * a1;
    let c = c_k(k);
    let h = 2f64.powi(k as i32 - 1);
    (6.0 * c + h) * s / ((2.0 * c + h) * s - 4.0 * h * a1)
}

pub fn m0_tridiag(a0: f64, a1: f64) -> Result<M0Value> {
    if !SymmetricToeplitzStencil::tridiagonal(a0, a1).is_spd_eligible() {
        return Err(Error::Domain(format!("tridiag({a1}, {a0}, {a1}) is not SPD-eligible")));
    }
    if a1 > 0.0 && (a0 - 2.0 * a1).abs() <= 1e-12 * a0 {
        return Err(Error::DegenerateSymbol { a0, a1 });
    }
    let sup = (1..=M0_SWEEP_LEVELS).map(|k| m0_tilde(a0, a1, k)).fold(f64::NEG_INFINITY, f64::max);
    let s = a0 + 2.0 * a1;
    let case_value = if s.abs() <= 1e-14 * a0.abs() {
        1.0
    } else if a1 <= 0.0 {
        16.0
    } else {
        (4.0 * a0 * a0 / ((a0 - 2.0 * a1) * (a0 - 2.0 * a1))).max(25.0)
    };
    Ok(M0Value { sup_over_k: (1.0 + sup).powi(2), case_value })
}

/// `A^{(k)} = mu1 tridiag(-1, 2, -1) + mu2 tridiag(1, 2, 1)`.
pub fn mu_decomposition(a0: f64, a1: f64, k: u32) -> (f64, f64) {
    let c = c_k(k);
    let h = 2f64.powi(k as i32 - 1);
    let scale = 4.0 * 8f64.powi(k as i32 - 1);
    let mu1 = (2.0 * c * (a0 + 2.0 * a1) + h * (a0 - 2.0 * a1)) / scale;
    let mu2 = (6.0 * c + h) * (a0 + 2.0 * a1) / scale;
    (mu1, mu2)
}

/// Contraction bound `m0 / (2 l omega + m0)`.
pub fn contraction_bound(m0: f64, l: usize, omega: f64) -> f64 {
    m0 / (2.0 * l as f64 * omega + m0)
}

/// `(eta1, eta2)` for the Galerkin iterate `k` (`k = 1` fine) of
/// `c1 I (x) I + c2 (I (x) L + L (x) I)`.
pub fn eta_constants(c1: f64, c2: f64, k: u32) -> (f64, f64) {
    let t = ClosedFormConstants::new(k);
    let a = 3.0 * t.theta1 - 2.0 * t.theta2;
    let b = 2.0 * t.theta1 - t.theta2;
    (c1 * a * a + 8.0 * c2 * a * t.theta2, c1 * b * b + 4.0 * c2 * b * t.theta2)
}

fn model_coefficients(op: &LevelOperator) -> Option<(f64, f64)> {
    let LevelOperator::Plane(t) = op else { return None };
    let (c1, c2, mass, stiff) = t.as_model()?;
    (mass == &SymmetricToeplitzStencil::identity() && stiff == &SymmetricToeplitzStencil::laplacian())
        .then_some((c1, c2))
}

/// `lambda_max(D^{-1} A)` per level against `[1, 2)` (1D) or `[1, 4)` (2D),
/// and against `eta1 / eta2` on 2D model hierarchies.
pub fn check_smoother_bounds(h: &MgHierarchy) -> Result<Vec<BoundReport>> {
    let depth = h.depth();
    let fine_model = model_coefficients(&h.finest().operator);
    let mut out = Vec::new();
    for level in h.levels() {
        let est = level.operator.jacobi_lambda_max(level.size, EIGEN_DEFAULT_TOL)?;
        let dim = level.operator.dimension();
        let ctx = format!("level k={} (M={})", level.k, level.size);
        let bound = if dim == 1 { 2.0 } else { 4.0 };
        out.push(BoundReport::two_sided("lambda_max(D^-1 A)", 1.0, bound, est.lambda_max, ctx.clone()));
        if dim == 2 {
            let eta = match h.strategy() {
                CoarseningStrategy::Galerkin => {
                    fine_model.map(|(c1, c2)| eta_constants(c1, c2, (depth - level.k + 1) as u32))
                }
                CoarseningStrategy::Geometric(_) => {
                    model_coefficients(&level.operator).map(|(c1, c2)| eta_constants(c1, c2, 1))
                }
            };
            if let Some((e1, e2)) = eta {
                out.push(BoundReport::upper("lambda_max(D^-1 A) vs eta1/eta2", e1 / e2, est.lambda_max, ctx.clone()));
                out.push(BoundReport::upper("eta1/eta2", 4.0, e1 / e2, ctx.clone()));
                out.push(BoundReport::upper("|D - eta2| / eta2", 1e-12, (level.diagonal - e2).abs() / e2, ctx));
            }
        }
    }
    Ok(out)
}

/// Measured energy-norm contraction with `l` pre- and post-smoothing sweeps
/// of weight `omega`, against `m0 / (2 l omega + m0)`.
pub fn check_contraction_bounds(
    h: &MgHierarchy,
    l: usize,
    omega: f64,
    m0: f64,
    trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    if l == 0 {
        return Err(Error::InvalidParameter("l must be at least 1".into()));
    }
    let cfg = SmootherConfig {
        m1: l,
        m2: l + 1,
        omega_pre: omega,
        omega_post: omega,
        post_smoothing: PostSmoothing::Literal,
    };
    let hs = h.with_smoother(cfg)?;
    let measured = measure_contraction(&hs, trials, seed)?;
    let bound = contraction_bound(m0, l, omega);
    let max_omega = if h.dimension() == 1 { 0.5 } else { 0.25 };
    let mut r = BoundReport::upper(
        "||I - BA||_A",
        bound,
        measured.factor,
        format!("{}D, M={}, m0={m0}, l={l}, omega={omega}", h.dimension(), h.finest().size),
    );
    r.in_theory_range = omega > 0.0 && omega <= max_omega;
    if !measured.energy_monotone() {
        r.satisfied = false;
        r.context.push_str(", energy norm increased");
    }
    Ok(r)
}

/// Largest relative discrepancy among the `(k-1)`-fold recursion, the closed
/// form and the dense product `R A P`, for levels `2..=k_max` of
/// `tridiag(a1, a0, a1)`.
pub fn coarsening_oracle_discrepancy(a0: f64, a1: f64, k_max: u32) -> Result<f64> {
    let mut s = SymmetricToeplitzStencil::tridiagonal(a0, a1);
    let mut worst: f64 = 0.0;
    for k in 2..=k_max {
        s = galerkin_step(&s);
        let closed = closed_form_tridiag(a0, a1, k);
        // dense product on the smallest fine grid that shows all bands
        let mf = 7;
        let fine = closed_form_tridiag(a0, a1, k - 1).to_dense(mf);
        let rap = dense_restriction(mf)? * fine * dense_prolongation((mf - 1) / 2)?;
        let scale = s.band(0).abs().max(s.band(1).abs());
        for j in 0..2 {
            worst = worst.max((s.band(j) - closed.band(j)).abs() / scale);
            worst = worst.max((rap[(j, 0)] - closed.band(j)).abs() / scale);
            worst = worst.max((rap[(1 + j, 1)] - s.band(j)).abs() / scale);
        }
        worst = worst.max(rap[(2, 0)].abs() / scale);
    }
    Ok(worst)
}

/// Fixed-width text rendering of reports.
pub fn render_table(reports: &[BoundReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<34} {:>14} {:>14} {:>4}  context", "quantity", "measured", "bound", "ok");
    for r in reports {
        let ok = match (r.satisfied, r.in_theory_range) {
            (true, _) => "yes",
            (false, true) => "NO",
            (false, false) => "n/a",
        };
        let range = if r.in_theory_range { "" } else { " [out of theory range]" };
        let _ = writeln!(
            s,
            "{:<34} {:>14} {:>14} {:>4}  {}{}",
            r.quantity,
            format_sci(r.measured, 6),
            format_sci(r.bound, 6),
            ok,
            r.context,
            range
        );
    }
    s
}
