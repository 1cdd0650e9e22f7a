//! V-cycle multigrid with damped Jacobi smoothing.
//!
//! Levels are stored finest first. Level `k` (1-based, `k = 1` coarsest) has
//! `2^k - 1` points per direction; the coarsest level is a single unknown
//! and is solved by one division.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coarsen::{check_galerkin_input, galerkin_step, galerkin_step_2d, CoarseningStrategy};
use crate::error::{check_len, Error, Result};
use crate::operator::LevelOperator;
use crate::scalar::{norm2, Scalar};
use crate::stencil::level_count;
use crate::transfer::{prolong_2d_add, prolong_line_add, restrict_2d_into, restrict_line};

/// How many post-smoothing sweeps follow the coarse-grid correction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostSmoothing {
    /// Sweeps `l = m1 + 2, ..., m1 + m2`, i.e. `m2 - 1` of them.
    #[default]
    Literal,
    /// `m2` sweeps.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmootherConfig {
    pub m1: usize,
    pub m2: usize,
    pub omega_pre: f64,
    pub omega_post: f64,
    #[serde(default)]
    pub post_smoothing: PostSmoothing,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self { m1: 1, m2: 2, omega_pre: 1.0, omega_post: 0.5, post_smoothing: PostSmoothing::Literal }
    }
}

impl SmootherConfig {
    /// Default counts with one weight for both smoothers.
    pub fn with_weight(omega: f64) -> Self {
        Self { omega_pre: omega, omega_post: omega, ..Self::default() }
    }

    pub fn post_steps(&self) -> usize {
        match self.post_smoothing {
            PostSmoothing::Literal => self.m2.saturating_sub(1),
            PostSmoothing::Full => self.m2,
        }
    }

    /// Smaller of the pre- and post-smoothing counts.
    pub fn effective_l(&self) -> usize {
        self.m1.min(self.post_steps())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("omega_pre", self.omega_pre), ("omega_post", self.omega_post)] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {w}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Level index, 1 for the coarsest grid.
    pub k: usize,
    /// Points per direction.
    pub size: usize,
    pub operator: LevelOperator,
    pub diagonal: f64,
}

impl Level {
    pub fn unknowns(&self) -> usize {
        self.operator.unknowns(self.size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgHierarchy {
    levels: Vec<Level>,
    strategy: CoarseningStrategy,
    smoother: SmootherConfig,
}

/// Builds all `K` levels below a fine operator on `m = 2^K - 1` points per
/// direction.
pub fn build_hierarchy(
    fine: LevelOperator,
    m: usize,
    strategy: CoarseningStrategy,
    smoother: SmootherConfig,
) -> Result<MgHierarchy> {
    let depth = level_count(m)?;
    smoother.validate()?;
    if let CoarseningStrategy::Geometric(rule) = &strategy {
        if rule.operator_at(1.0).dimension() != fine.dimension() {
            return Err(Error::InvalidParameter("rediscretization rule and fine operator differ in dimension".into()));
        }
        if !(rule.fine_spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("fine spacing must be positive, got {}", rule.fine_spacing)));
        }
    }
    let mut levels = Vec::with_capacity(depth);
    let mut op = fine;
    let mut size = m;
    let mut spacing = match &strategy {
        CoarseningStrategy::Geometric(rule) => rule.fine_spacing,
        CoarseningStrategy::Galerkin => f64::NAN,
    };
    for k in (1..=depth).rev() {
        if !op.is_spd_eligible() {
            return Err(Error::NotSpd { level: k, size, detail: format!("{op:?}") });
        }
        let next = if k > 1 {
            Some(match &strategy {
                CoarseningStrategy::Galerkin => match &op {
                    LevelOperator::Line(s) => {
                        check_galerkin_input(s)?;
                        LevelOperator::Line(galerkin_step(s))
                    }
                    LevelOperator::Plane(t) => {
                        for term in t.terms() {
                            check_galerkin_input(&term.outer)?;
                            check_galerkin_input(&term.inner)?;
                        }
                        LevelOperator::Plane(galerkin_step_2d(t))
                    }
                },
                CoarseningStrategy::Geometric(rule) => {
                    spacing *= 2.0;
                    rule.operator_at(spacing)
                }
            })
        } else {
            None
        };
        levels.push(Level { k, size, diagonal: op.diagonal(), operator: op });
        match next {
            Some(n) => op = n,
            None => break,
        }
        size = (size - 1) / 2;
    }
    Ok(MgHierarchy { levels, strategy, smoother })
}

/// Outcome of an iterative solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||r_i|| / ||r_0||` for `i = 0..=iterations`. When the initial
    /// guess already meets the tolerance relative to `||f||`, holds the single
    /// value `||r_0|| / ||f||`; empty when `r_0 = 0`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Energy-norm contraction factor, when measured.
    pub contraction: Option<f64>,
}

impl SolveReport {
    pub fn final_relative_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Result of [`measure_contraction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionMeasurement {
    /// Largest per-iteration energy-norm ratio after the transient.
    pub factor: f64,
    /// Largest ratio over all iterations, transient included.
    pub max_ratio: f64,
    pub trials: usize,
    pub iterations_per_trial: usize,
}

impl ContractionMeasurement {
    /// Energy norm never increased, up to `1e-12` relative slack.
    pub fn energy_monotone(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-12
    }
}

/// Iterations discarded before contraction ratios are recorded.
pub const CONTRACTION_TRANSIENT: usize = 3;
/// Iterations recorded per trial after the transient.
pub const CONTRACTION_SAMPLES: usize = 12;

struct LevelWork<T> {
    v: Vec<T>,
    f: Vec<T>,
    r: Vec<T>,
    scratch: Vec<T>,
}

impl<T: Scalar> LevelWork<T> {
    fn new(n: usize) -> Self {
        Self { v: vec![T::zero(); n], f: vec![T::zero(); n], r: vec![T::zero(); n], scratch: Vec::new() }
    }
}

impl MgHierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn finest(&self) -> &Level {
        &self.levels[0]
    }

    /// Level by index `k`, 1 being the coarsest.
    pub fn level(&self, k: usize) -> Option<&Level> {
        let depth = self.levels.len();
        (1..=depth).contains(&k).then(|| &self.levels[depth - k])
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn strategy(&self) -> &CoarseningStrategy {
        &self.strategy
    }

    pub fn smoother(&self) -> &SmootherConfig {
        &self.smoother
    }

    pub fn dimension(&self) -> usize {
        self.levels[0].operator.dimension()
    }

    /// Same levels, different smoothing.
    pub fn with_smoother(&self, smoother: SmootherConfig) -> Result<Self> {
        smoother.validate()?;
        Ok(Self { smoother, ..self.clone() })
    }

    fn workspace<T: Scalar>(&self, from: usize) -> Vec<LevelWork<T>> {
        self.levels[from..].iter().map(|l| LevelWork::new(l.unknowns())).collect()
    }

    fn index_of(&self, k: usize) -> Result<usize> {
        let depth = self.levels.len();
        if !(1..=depth).contains(&k) {
            return Err(Error::InvalidParameter(format!("level {k} outside 1..={depth}")));
        }
        Ok(depth - k)
    }

    /// `r = f - A v` on the finest level.
    pub fn residual<T: Scalar>(&self, v: &[T], f: &[T]) -> Result<Vec<T>> {
        let l = self.finest();
        check_len(l.unknowns(), v.len())?;
        check_len(l.unknowns(), f.len())?;
        let mut r = vec![T::zero(); v.len()];
        let mut scratch = Vec::new();
        residual_into(l, v, f, &mut r, &mut scratch);
        Ok(r)
    }

    /// `sqrt(<A e, e>)` on the finest level.
    pub fn energy_norm(&self, e: &[f64]) -> Result<f64> {
        let l = self.finest();
        let ae = l.operator.apply(e, l.size)?;
        Ok(ae.iter().zip(e).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }
}

fn residual_into<T: Scalar>(level: &Level, v: &[T], f: &[T], r: &mut [T], scratch: &mut Vec<T>) {
    level.operator.apply_into(v, r, level.size, scratch);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = *fi - *ri;
    }
}

fn smooth_in_place<T: Scalar>(level: &Level, v: &mut [T], f: &[T], weight: f64, steps: usize, work: &mut LevelWork<T>) {
    let s = weight / level.diagonal;
    for _ in 0..steps {
        residual_into(level, v, f, &mut work.r, &mut work.scratch);
        for (vi, ri) in v.iter_mut().zip(&work.r) {
            *vi += *ri * s;
        }
    }
}

/// `steps` damped Jacobi sweeps `v <- v + (weight / d) (f - A v)` on level `k`.
pub fn smooth<T: Scalar>(h: &MgHierarchy, k: usize, v: &[T], f: &[T], weight: f64, steps: usize) -> Result<Vec<T>> {
    let idx = h.index_of(k)?;
    let level = &h.levels[idx];
    check_len(level.unknowns(), v.len())?;
    check_len(level.unknowns(), f.len())?;
    let mut out = v.to_vec();
    let mut work = LevelWork::new(level.unknowns());
    smooth_in_place(level, &mut out, f, weight, steps, &mut work);
    Ok(out)
}

fn cycle<T: Scalar>(levels: &[Level], cfg: &SmootherConfig, v: &mut [T], f: &[T], ws: &mut [LevelWork<T>]) {
    let level = &levels[0];
    if levels.len() == 1 {
        // a single unknown: A_1 is the scalar diagonal
        debug_assert_eq!(level.unknowns(), 1);
        v[0] = f[0] / level.diagonal;
        return;
    }
    let (here, below) = ws.split_first_mut().expect("one workspace per level");
    smooth_in_place(level, v, f, cfg.omega_pre, cfg.m1, here);
    residual_into(level, v, f, &mut here.r, &mut here.scratch);

    let coarse = &mut below[0];
    let mut vc = std::mem::take(&mut coarse.v);
    let mut fc = std::mem::take(&mut coarse.f);
    let mc = levels[1].size;
    match level.operator {
        LevelOperator::Line(_) => restrict_line(&here.r, &mut fc, mc, 1, 0, 1, 0),
        LevelOperator::Plane(_) => restrict_2d_into(&here.r, &mut fc, level.size, &mut here.scratch),
    }
    vc.iter_mut().for_each(|x| *x = T::zero());
    cycle(&levels[1..], cfg, &mut vc, &fc, below);
    match level.operator {
        LevelOperator::Line(_) => prolong_line_add(&vc, v, mc, 1, 0, 1, 0),
        LevelOperator::Plane(_) => prolong_2d_add(&vc, v, mc, &mut here.scratch),
    }
    let coarse = &mut below[0];
    coarse.v = vc;
    coarse.f = fc;

    smooth_in_place(level, v, f, cfg.omega_post, cfg.post_steps(), here);
}

/// One V-cycle on level `k` starting from `v` with right-hand side `f`.
pub fn vcycle<T: Scalar>(h: &MgHierarchy, k: usize, v: &[T], f: &[T]) -> Result<Vec<T>> {
    let idx = h.index_of(k)?;
    let level = &h.levels[idx];
    check_len(level.unknowns(), v.len())?;
    check_len(level.unknowns(), f.len())?;
    let mut out = v.to_vec();
    let mut ws = h.workspace(idx);
    cycle(&h.levels[idx..], &h.smoother, &mut out, f, &mut ws);
    Ok(out)
}

/// Repeats V-cycles on the finest level until `||r_i|| / ||r_0|| < tol`.
///
/// Returns [`Error::NonConvergence`] with the report when `max_iter` cycles
/// do not suffice.
pub fn solve<T: Scalar>(
    h: &MgHierarchy,
    f: &[T],
    v0: &[T],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<T>, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let level = h.finest();
    let n = level.unknowns();
    check_len(n, f.len())?;
    check_len(n, v0.len())?;
    let mut v = v0.to_vec();
    let mut ws = h.workspace::<T>(0);
    let mut r = vec![T::zero(); n];
    let mut scratch = Vec::new();
    residual_into(level, &v, f, &mut r, &mut scratch);
    let r0 = norm2(&r);
    let fnorm = norm2(f);
    let mut report = SolveReport { iterations: 0, residual_history: Vec::new(), converged: true, contraction: None };
    if r0 == 0.0 {
        return Ok((v, report));
    }
    if r0 < tol * fnorm {
        report.residual_history.push(r0 / fnorm);
        return Ok((v, report));
    }
    report.residual_history.push(1.0);
    report.converged = false;
    while report.iterations < max_iter {
        cycle(&h.levels, &h.smoother, &mut v, f, &mut ws);
        report.iterations += 1;
        residual_into(level, &v, f, &mut r, &mut scratch);
        let rel = norm2(&r) / r0;
        report.residual_history.push(rel);
        if rel < tol {
            report.converged = true;
            break;
        }
    }
    if report.converged {
        Ok((v, report))
    } else {
        Err(Error::NonConvergence(Box::new(report)))
    }
}

/// Energy-norm contraction estimate from the error propagation `e <- (I - BA) e`
/// (a V-cycle with `f = 0`) applied to `trials` random initial errors.
pub fn measure_contraction(h: &MgHierarchy, trials: usize, seed: u64) -> Result<ContractionMeasurement> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is needed".into()));
    }
    let n = h.finest().unknowns();
    let zero = vec![0.0; n];
    let mut ws = h.workspace::<f64>(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factor: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let mut e: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let mut norm = h.energy_norm(&e)?;
        for it in 0..CONTRACTION_TRANSIENT + CONTRACTION_SAMPLES {
            e.iter_mut().for_each(|x| *x /= norm);
            cycle(&h.levels, &h.smoother, &mut e, &zero, &mut ws);
            let next = h.energy_norm(&e)?;
            // e had unit energy norm
            let ratio = next;
            max_ratio = max_ratio.max(ratio);
            if it >= CONTRACTION_TRANSIENT {
                factor = factor.max(ratio);
            }
            if next == 0.0 || !next.is_finite() {
                break;
            }
            norm = next;
        }
    }
    Ok(ContractionMeasurement {
        factor,
        max_ratio,
        trials,
        iterations_per_trial: CONTRACTION_TRANSIENT + CONTRACTION_SAMPLES,
    })
}

/// Error propagation matrix `I - B A` on the finest level, assembled column
/// by column. Intended for small grids.
pub fn dense_error_propagator(h: &MgHierarchy) -> DMatrix<f64> {
    let n = h.finest().unknowns();
    let zero = vec![0.0; n];
    let mut ws = h.workspace::<f64>(0);
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        cycle(&h.levels, &h.smoother, &mut e, &zero, &mut ws);
        out.column_mut(j).copy_from_slice(&e);
    }
    out
}

/// Exact `||I - B A||_A` from the dense propagator, via
/// `||A^{1/2} E A^{-1/2}||_2`. Refuses grids beyond `max_unknowns`.
pub fn dense_energy_contraction(h: &MgHierarchy, max_unknowns: usize) -> Result<f64> {
    let l = h.finest();
    let n = l.unknowns();
    if n > max_unknowns {
        return Err(Error::InvalidParameter(format!("{n} unknowns exceed the dense limit {max_unknowns}")));
    }
    let e = dense_error_propagator(h);
    let eig = SymmetricEigen::new(l.operator.to_dense(l.size));
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return Err(Error::NotSpd {
            level: l.k,
            size: l.size,
            detail: "dense spectrum has a non-positive eigenvalue".into(),
        });
    }
    let q = &eig.eigenvectors;
    let sqrt = q * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * q.transpose();
    let inv_sqrt = q * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt())) * q.transpose();
    let m = sqrt * e * inv_sqrt;
    Ok(m.singular_values().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::SymmetricToeplitzStencil;
    use crate::Complex64;

    fn laplace(m: usize) -> MgHierarchy {
        build_hierarchy(
            LevelOperator::Line(SymmetricToeplitzStencil::laplacian()),
            m,
            CoarseningStrategy::Galerkin,
            SmootherConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn hierarchy_levels_for_laplacian() {
        let h = laplace(7);
        let bands: Vec<Vec<f64>> = h
            .levels()
            .iter()
            .map(|l| match &l.operator {
                LevelOperator::Line(s) => s.bands().to_vec(),
                LevelOperator::Plane(_) => unreachable!(),
            })
            .collect();
        assert_eq!(bands, vec![vec![2.0, -1.0], vec![0.5, -0.25], vec![0.125, -0.0625]]);
        assert_eq!(h.levels().iter().map(|l| l.size).collect::<Vec<_>>(), vec![7, 3, 1]);
        assert_eq!(h.level(1).unwrap().size, 1);
    }

    #[test]
    fn invalid_hierarchies() {
        let op = LevelOperator::Line(SymmetricToeplitzStencil::laplacian());
        assert!(matches!(
            build_hierarchy(op, 6, CoarseningStrategy::Galerkin, SmootherConfig::default()),
            Err(Error::GridSize(6))
        ));
        let bad = LevelOperator::Line(SymmetricToeplitzStencil::tridiagonal(1.0, 1.0));
        assert!(matches!(
            build_hierarchy(bad, 7, CoarseningStrategy::Galerkin, SmootherConfig::default()),
            Err(Error::NotSpd { level: 3, .. })
        ));
    }

    #[test]
    fn smoothing_examples() {
        let h = laplace(7);
        let ones = vec![1.0; 7];
        let f = h.finest().operator.apply(&ones, 7).unwrap();
        assert_eq!(smooth(&h, 3, &ones, &f, 0.5, 0).unwrap(), ones);
        let got = smooth(&h, 3, &[0.0; 7], &f, 0.5, 1).unwrap();
        assert_eq!(got, f.iter().map(|x| x / 4.0).collect::<Vec<_>>());
        let fixed = smooth(&h, 3, &ones, &f, 0.7, 3).unwrap();
        assert!(fixed.iter().all(|x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_is_fixed_point() {
        let h = laplace(15);
        assert_eq!(vcycle(&h, 4, &[0.0; 15], &[0.0; 15]).unwrap(), vec![0.0; 15]);
    }

    #[test]
    fn converges_to_ones() {
        let h = laplace(7);
        let ones = vec![1.0; 7];
        let f = h.finest().operator.apply(&ones, 7).unwrap();
        let (v, rep) = solve(&h, &f, &[0.0; 7], 1e-11, 100).unwrap();
        assert!(rep.converged && rep.final_relative_residual() < 1e-11);
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-10));
        let (_, again) = solve(&h, &f, &v, 1e-11, 100).unwrap();
        assert_eq!(again.iterations, 0);
    }

    #[test]
    fn non_convergence_is_reported() {
        let h = laplace(63);
        let f = vec![1.0; 63];
        match solve(&h, &f, &[0.0; 63], 1e-14, 2) {
            Err(Error::NonConvergence(rep)) => {
                assert_eq!(rep.iterations, 2);
                assert!(!rep.converged);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn complex_rhs_splits() {
        let h = laplace(31);
        let f: Vec<Complex64> = (0..31).map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos())).collect();
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let im: Vec<f64> = f.iter().map(|z| z.im).collect();
        let z = vcycle(&h, 5, &vec![Complex64::default(); 31], &f).unwrap();
        let a = vcycle(&h, 5, &vec![0.0; 31], &re).unwrap();
        let b = vcycle(&h, 5, &vec![0.0; 31], &im).unwrap();
        for i in 0..31 {
            assert!((z[i].re - a[i]).abs() < 1e-12 && (z[i].im - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_contraction_is_below_half() {
        let h = laplace(31).with_smoother(SmootherConfig::with_weight(0.5)).unwrap();
        let m = measure_contraction(&h, 4, 7).unwrap();
        let dense = dense_energy_contraction(&h, 1024).unwrap();
        assert!(m.factor > 0.0 && m.factor <= dense * (1.0 + 1e-9), "{} vs {dense}", m.factor);
        assert!(dense < 0.5);
        assert!(m.energy_monotone());
    }
}
