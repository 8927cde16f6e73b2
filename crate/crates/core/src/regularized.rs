//! L1-regularised sine-series fits and the error/subnormalisation front.
//!
//! The objective is
//!
//! ```text
//! J(a; λ, η) = ‖τ − Φa‖₂ + λ (2η/π) ‖a‖₁
//! ```
//!
//! with the residual norm taken in `L²(−π/η, π/η)` on a Gauss-Legendre rule.
//! The solver works on the squared surrogate `½‖τ − Φa‖² + μ‖a‖₁` with
//! accelerated proximal gradient steps. Stationarity of `J` at `a` is the
//! same as stationarity of the surrogate with `μ = λ (2η/π) ‖τ − Φa‖`; the
//! multiplier follows the current residual, and once the support settles the
//! exact minimiser of `J` on that support is computed in closed form.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

use crate::extension::{
    l2_error, sine_basis, solve_least_squares, CoefficientSet, ExtensionError, ExtensionProblem, Provenance,
};
use crate::quadrature::{default_order, QuadratureRule};
use crate::roots::{brent, BrentOptions};

/// Per-solve cap on proximal gradient iterations.
pub const ITERATION_CAP: usize = 200_000;
/// Target stationarity of `J`, relative to the residual norm.
pub const STATIONARITY_TOL: f64 = 1e-10;
/// Smallest `λ` of the default sweep, standing in for the `λ → 0` limit.
pub const LAMBDA_PATH_END: f64 = 1e-10;
pub const DEFAULT_SCHEDULE_POINTS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularizedError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("no convergence after {iterations} iterations (stationarity {stationarity:e})")]
    NonConvergence { iterations: usize, stationarity: f64, best: Box<RegularizedSolution> },
    #[error("target error {target:e} is below the least-squares floor {floor:e}")]
    Infeasible { target: f64, floor: f64 },
    #[error("error budget {target:e} is not bracketed on λ ∈ [{lo:e}, {hi:e}]")]
    NoBracket { target: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// One `(m, η, λ)` instance of the regularised fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedProblem {
    pub m: usize,
    pub eta: f64,
    pub lambda: f64,
    pub rule: QuadratureRule,
}

impl RegularizedProblem {
    pub fn new(m: usize, eta: f64, lambda: f64) -> Result<Self, RegularizedError> {
        Self::with_quad_order(m, eta, lambda, default_order(m))
    }

    pub fn with_quad_order(m: usize, eta: f64, lambda: f64, quad_order: usize) -> Result<Self, RegularizedError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(RegularizedError::InvalidProblem(format!("lambda must be >= 0, got {lambda}")));
        }
        let ext = ExtensionProblem::with_quad_order(m, eta, quad_order)?;
        let rule = ext.rule().map_err(ExtensionError::from)?;
        Ok(RegularizedProblem { m, eta, lambda, rule })
    }

    /// `2η/π`, the factor converting `‖a‖₁` into a subnormalisation.
    pub fn alpha_factor(&self) -> f64 {
        2.0 * self.eta / PI
    }
}

/// A solve result with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSolution {
    pub coefficients: CoefficientSet,
    /// `J` at the returned coefficients.
    pub objective: f64,
    /// Residual norm `‖τ − Φa‖₂`.
    pub residual: f64,
    /// Worst subgradient violation of `J` (see [`Discretization::stationarity`]).
    pub stationarity: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Weighted design matrix and its normal system for one `(m, η)` discretisation.
///
/// Reused across `λ` values so a sweep factors nothing twice.
#[derive(Debug, Clone)]
pub struct Discretization {
    m: usize,
    eta: f64,
    phi: DMatrix<f64>,
    target: DVector<f64>,
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    lipschitz: f64,
}

impl Discretization {
    pub fn new(m: usize, eta: f64, rule: &QuadratureRule) -> Self {
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut phi = sine_basis(&rule.nodes, m);
        for (q, s) in sw.iter().enumerate() {
            phi.row_mut(q).scale_mut(*s);
        }
        let target = DVector::from_fn(rule.order(), |q, _| rule.nodes[q] * sw[q]);
        let gram = phi.transpose() * &phi;
        let rhs = phi.transpose() * &target;
        let lipschitz = gram.clone().symmetric_eigenvalues().max();
        Discretization { m, eta, phi, target, gram, rhs, lipschitz }
    }

    pub fn for_problem(problem: &RegularizedProblem) -> Self {
        Self::new(problem.m, problem.eta, &problem.rule)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn alpha_factor(&self) -> f64 {
        2.0 * self.eta / PI
    }

    fn residual(&self, a: &DVector<f64>) -> DVector<f64> {
        &self.target - &self.phi * a
    }

    pub fn residual_norm(&self, a: &[f64]) -> f64 {
        self.residual(&DVector::from_column_slice(a)).norm()
    }

    /// `‖τ‖₂`, the error of the zero series.
    pub fn target_norm(&self) -> f64 {
        self.target.norm()
    }

    pub fn objective(&self, a: &[f64], lambda: f64) -> f64 {
        self.residual_norm(a) + lambda * self.alpha_factor() * a.iter().map(|x| x.abs()).sum::<f64>()
    }

    /// Smallest `λ` for which `a = 0` minimises `J`.
    pub fn lambda_max(&self) -> f64 {
        self.rhs.amax() / (self.alpha_factor() * self.target_norm())
    }

    /// Worst violation of the subgradient condition of `J`,
    /// `Φᵀr/‖r‖ ∈ λ(2η/π) ∂‖a‖₁`.
    pub fn stationarity(&self, a: &[f64], lambda: f64) -> f64 {
        let av = DVector::from_column_slice(a);
        let r = self.residual(&av);
        let rn = r.norm();
        let scale = lambda * self.alpha_factor();
        if rn == 0.0 {
            return 0.0;
        }
        let corr = self.phi.transpose() * r / rn;
        let worst = a
            .iter()
            .zip(corr.iter())
            .map(|(&ak, &ck)| if ak != 0.0 { (ck - scale * ak.signum()).abs() } else { (ck.abs() - scale).max(0.0) })
            .fold(0.0, f64::max);
        worst
    }

    /// Accelerated proximal gradient on `½‖τ − Φa‖² + μ‖a‖₁` with adaptive
    /// restart. Stops when the gradient mapping falls to `tol` or after `cap`
    /// iterations; returns the iterate and the iterations used.
    fn fista(&self, mu: f64, a0: &DVector<f64>, tol: f64, cap: usize) -> (DVector<f64>, usize, bool) {
        let l = self.lipschitz;
        let thresh = mu / l;
        let mut a = a0.clone();
        let mut y = a.clone();
        let mut t = 1.0f64;
        let mut grad = DVector::zeros(self.m);
        for it in 1..=cap {
            grad.gemv(1.0, &self.gram, &y, 0.0);
            grad -= &self.rhs;
            let mut next = &y - &grad / l;
            next.apply(|x| *x = soft(*x, thresh));
            let step = (&next - &y).amax() * l;
            if step <= tol {
                return (next, it, true);
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            // restart when momentum points uphill
            if (&y - &next).dot(&(&next - &a)) > 0.0 {
                t = 1.0;
                y = next.clone();
            } else {
                y = &next + (&next - &a) * ((t - 1.0) / t_next);
                t = t_next;
            }
            a = next;
        }
        (a, cap, false)
    }

    /// Solutions of the support equations `Φ_Sᵀ(τ − Φ_S x) = μσ` as a line in `μ`.
    ///
    /// With `Φ_S P = QR` they read `x = x₀ − μ d`, where `x₀` is the
    /// least-squares fit on `S`, `Rᵀz = Pᵀσ` and `R d' = z`. Along this line
    /// the residual obeys `‖r‖² = ‖r₀‖² + μ²‖z‖²`, which gives the `μ` solving
    /// `μ = s‖r‖` in closed form.
    fn support_line(&self, support: Vec<usize>, sigma: DVector<f64>, s: f64) -> Option<SupportLine> {
        if support.is_empty() {
            return None;
        }
        let sub = self.phi.select_columns(&support);
        let (q, r, p) = sub.clone().col_piv_qr().unpack();
        let mut ps = sigma.clone();
        p.permute_rows(&mut ps);
        let z = r.tr_solve_upper_triangular(&ps)?;
        let mut x0 = r.solve_upper_triangular(&(q.transpose() * &self.target))?;
        p.inv_permute_rows(&mut x0);
        let mut d = r.solve_upper_triangular(&z)?;
        p.inv_permute_rows(&mut d);
        let r0 = (&self.target - &sub * &x0).norm();
        let denom = 1.0 - (s * z.norm()).powi(2);
        let mu_star = (denom > 0.0).then(|| s * r0 / denom.sqrt());
        Some(SupportLine { support, sigma, x0, d, mu_star })
    }

    fn line_of(&self, a: &DVector<f64>, s: f64) -> Option<SupportLine> {
        let support: Vec<usize> = (0..self.m).filter(|&k| a[k] != 0.0).collect();
        let sigma = DVector::from_iterator(support.len(), support.iter().map(|&k| a[k].signum()));
        self.support_line(support, sigma, s)
    }

    fn line_point(&self, line: &SupportLine, mu: f64) -> DVector<f64> {
        let xs = &line.x0 - &line.d * mu;
        let mut x = DVector::zeros(self.m);
        for (i, &k) in line.support.iter().enumerate() {
            x[k] = xs[i];
        }
        x
    }

    /// The line point at `μ` if its signs match and it satisfies the surrogate
    /// optimality conditions to `tol`.
    fn accept_on_line(&self, line: &SupportLine, mu: f64, tol: f64) -> Option<DVector<f64>> {
        let x = self.line_point(line, mu);
        let signs_ok = line.support.iter().zip(line.sigma.iter()).all(|(&k, sg)| x[k].is_finite() && x[k] * sg > 0.0);
        (signs_ok && self.surrogate_optimal(&x, mu, tol)).then_some(x)
    }

    fn surrogate_grad(&self, x: &DVector<f64>) -> DVector<f64> {
        // gradient of ½‖τ − Φx‖², from the residual to avoid cancellation
        -(self.phi.transpose() * self.residual(x))
    }

    fn surrogate_optimal(&self, x: &DVector<f64>, mu: f64, tol: f64) -> bool {
        let g = self.surrogate_grad(x);
        (0..self.m).all(|k| if x[k] != 0.0 { (g[k] + mu * x[k].signum()).abs() <= tol } else { g[k].abs() <= mu + tol })
    }

    fn surrogate_value(&self, x: &DVector<f64>, mu: f64) -> f64 {
        0.5 * self.residual(x).norm_squared() + mu * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Feature-sign search for `min ½‖τ − Φx‖² + μ‖x‖₁` from `x`.
    ///
    /// Alternates exact solves on the active set with a discrete line search
    /// over sign changes; in exact arithmetic it terminates in finitely many
    /// steps. Returns `None` if `max_steps` is exhausted.
    fn feature_sign(&self, mu: f64, start: &DVector<f64>, tol: f64, max_steps: usize) -> Option<DVector<f64>> {
        let mut x = start.clone();
        let mut signs: Vec<f64> = x.iter().map(|v| if *v == 0.0 { 0.0 } else { v.signum() }).collect();
        for _ in 0..max_steps {
            let g = self.surrogate_grad(&x);
            let active_ok = (0..self.m).filter(|&k| signs[k] != 0.0).all(|k| (g[k] + mu * signs[k]).abs() <= tol);
            if active_ok {
                // most violating inactive coordinate joins with the descent sign
                let candidate = (0..self.m)
                    .filter(|&k| signs[k] == 0.0 && g[k].abs() > mu + tol)
                    .max_by(|&i, &j| g[i].abs().total_cmp(&g[j].abs()));
                match candidate {
                    Some(k) => signs[k] = -g[k].signum(),
                    None => return Some(x),
                }
            }
            let support: Vec<usize> = (0..self.m).filter(|&k| signs[k] != 0.0).collect();
            let sigma = DVector::from_iterator(support.len(), support.iter().map(|&k| signs[k]));
            let line = self.support_line(support, sigma, 0.0)?;
            let target = self.line_point(&line, mu);
            // candidates: the full step and every zero crossing on the way
            let delta = &target - &x;
            let mut best_x = target.clone();
            let mut best_f = self.surrogate_value(&target, mu);
            for &k in &line.support {
                if x[k] != 0.0 && x[k] * target[k] < 0.0 {
                    let t = x[k] / (x[k] - target[k]);
                    let mut y = &x + &delta * t;
                    y[k] = 0.0;
                    let f = self.surrogate_value(&y, mu);
                    if f < best_f {
                        best_f = f;
                        best_x = y;
                    }
                }
            }
            x = best_x;
            for k in 0..self.m {
                signs[k] = if x[k] == 0.0 { 0.0 } else { x[k].signum() };
            }
        }
        None
    }

    /// Surrogate (LASSO) minimiser at fixed `μ`: a burst of proximal gradient
    /// from the warm start, then feature-sign search to finish exactly.
    fn lasso(&self, mu: f64, a0: &DVector<f64>, tol: f64, cap: usize) -> (DVector<f64>, usize, bool) {
        const CHUNK: usize = 200;
        let mut a = a0.clone();
        let mut used = 0;
        loop {
            if let Some(x) = self.line_of(&a, 0.0).and_then(|l| self.accept_on_line(&l, mu, tol)) {
                return (x, used, true);
            }
            if let Some(x) = self.feature_sign(mu, &a, tol, 10 * self.m + 50) {
                return (x, used, true);
            }
            if used >= cap {
                return (a, used, false);
            }
            let (next, it, done) = self.fista(mu, &a, tol, CHUNK.min(cap - used));
            used += it;
            a = next;
            if done {
                return (a, used, true);
            }
        }
    }

    /// Minimise `J` at `λ`, optionally warm-started.
    ///
    /// `J` is stationary at the surrogate solution `a(μ)` exactly when
    /// `g(μ) = μ − s‖r(a(μ))‖` vanishes, `s = λ(2η/π)`, and `g` is increasing.
    /// The root is bracketed and refined with the closed-form `μ` of the
    /// current support (a Newton step once the support is right), falling back
    /// to bisection.
    pub fn solve(&self, lambda: f64, warm_start: Option<&[f64]>) -> Result<RegularizedSolution, RegularizedError> {
        const MAX_OUTER: usize = 200;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(RegularizedError::InvalidProblem(format!("lambda must be >= 0, got {lambda}")));
        }
        if let Some(w) = warm_start {
            if w.len() != self.m {
                return Err(RegularizedError::InvalidProblem(format!(
                    "warm start has {} entries, expected {}",
                    w.len(),
                    self.m
                )));
            }
        }
        if lambda == 0.0 {
            return self.least_squares();
        }
        if lambda >= self.lambda_max() {
            return Ok(self.finish(vec![0.0; self.m], lambda, 0, true));
        }
        let s = lambda * self.alpha_factor();
        let noise = 1e-14 * (1.0 + self.rhs.amax());
        let mut a = warm_start.map_or_else(|| DVector::zeros(self.m), DVector::from_column_slice);
        let mut iterations = 0;
        let mut best: Option<(f64, DVector<f64>)> = None;
        let (mut lo, mut hi) = (0.0f64, self.rhs.amax());
        let mut previous: Option<(f64, f64)> = None;
        let mut widths: Vec<f64> = Vec::new();
        let mut mu =
            self.line_of(&a, s).and_then(|l| l.mu_star).unwrap_or_else(|| s * self.residual(&a).norm()).clamp(lo, hi);
        for _ in 0..MAX_OUTER {
            let r_guess = mu / s;
            let tol = (STATIONARITY_TOL * r_guess).max(noise);
            let (next, used, _) = self.lasso(mu, &a, tol, ITERATION_CAP - iterations);
            iterations += used;
            a = next;
            let r = self.residual(&a).norm();
            let j = r + s * a.iter().map(|x| x.abs()).sum::<f64>();
            if best.as_ref().is_none_or(|(bj, _)| j < *bj) {
                best = Some((j, a.clone()));
            }
            let line = self.line_of(&a, s);
            if let Some(l) = &line {
                if let Some(m_star) = l.mu_star {
                    let tol = (STATIONARITY_TOL * m_star / s).max(noise);
                    if let Some(x) = self.accept_on_line(l, m_star, tol) {
                        return Ok(self.finish(x.iter().copied().collect(), lambda, iterations, true));
                    }
                }
            }
            if iterations >= ITERATION_CAP {
                break;
            }
            let g = mu - s * r;
            if g < 0.0 {
                lo = mu;
            } else {
                hi = mu;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
            widths.push(hi - lo);
            let inside = |m: f64| m > lo && m < hi && m != mu;
            // secant on g(μ) = μ − s‖r(μ)‖ through the last two evaluations
            let secant = previous.and_then(|(mp, gp): (f64, f64)| {
                let m = mu - g * (mu - mp) / (g - gp);
                (g != gp && m.is_finite()).then_some(m)
            });
            previous = Some((mu, g));
            // bisect when the bracket has not halved over the last two steps
            let stalled = widths.len() >= 3 && widths[widths.len() - 1] > 0.5 * widths[widths.len() - 3];
            mu = match (line.and_then(|l| l.mu_star), secant) {
                _ if stalled => 0.5 * (lo + hi),
                (Some(m), _) if inside(m) => m,
                (_, Some(m)) if inside(m) => m,
                _ if inside(s * r) => s * r,
                _ => 0.5 * (lo + hi),
            };
            if stalled {
                widths.clear();
            }
        }
        let (_, a) = best.expect("at least one step");
        let best = self.finish(a.iter().copied().collect(), lambda, iterations, false);
        // the surrogate is solved to `noise` absolutely, which J sees divided by ‖r‖
        let floor = 1e-8f64.max(noise / best.residual);
        if best.stationarity <= floor {
            return Ok(RegularizedSolution { converged: true, ..best });
        }
        Err(RegularizedError::NonConvergence { iterations, stationarity: best.stationarity, best: Box::new(best) })
    }

    /// Unregularised least squares on this discretisation (pivoted QR).
    fn least_squares(&self) -> Result<RegularizedSolution, RegularizedError> {
        let (q, r, p) = self.phi.clone().col_piv_qr().unpack();
        let qty = q.transpose() * &self.target;
        let mut x = r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| RegularizedError::InvalidProblem("rank-deficient design matrix".into()))?;
        p.inv_permute_rows(&mut x);
        Ok(self.finish(x.iter().copied().collect(), 0.0, 0, true))
    }

    fn finish(&self, a: Vec<f64>, lambda: f64, iterations: usize, converged: bool) -> RegularizedSolution {
        let residual = self.residual_norm(&a);
        let objective = self.objective(&a, lambda);
        let stationarity = self.stationarity(&a, lambda);
        RegularizedSolution {
            coefficients: CoefficientSet::new(self.eta, a, Provenance::Regularized { lambda }),
            objective,
            residual,
            stationarity,
            iterations,
            converged,
        }
    }
}

/// Solutions of the support equations along `μ`, see
/// [`Discretization::support_line`].
struct SupportLine {
    support: Vec<usize>,
    sigma: DVector<f64>,
    x0: DVector<f64>,
    d: DVector<f64>,
    mu_star: Option<f64>,
}

fn soft(x: f64, k: f64) -> f64 {
    if x > k {
        x - k
    } else if x < -k {
        x + k
    } else {
        0.0
    }
}

/// `J(a; λ, η)` on the problem's quadrature rule.
pub fn objective(coefficients: &[f64], problem: &RegularizedProblem) -> f64 {
    assert_eq!(coefficients.len(), problem.m, "coefficient vector length must equal m");
    Discretization::for_problem(problem).objective(coefficients, problem.lambda)
}

/// Minimiser of `J`. On hitting the iteration cap the best iterate is
/// returned inside [`RegularizedError::NonConvergence`].
pub fn solve_regularized(
    problem: &RegularizedProblem,
    warm_start: Option<&[f64]>,
) -> Result<RegularizedSolution, RegularizedError> {
    Discretization::for_problem(problem).solve(problem.lambda, warm_start)
}

/// One sample of the error/subnormalisation front.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub lambda: f64,
    /// Continuous `L²` residual of the coefficients.
    pub epsilon: f64,
    /// `(2η/π) Σ|a_k|` at unit operator scale.
    pub alpha: f64,
    pub coefficients: CoefficientSet,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParetoFront {
    /// Sorted by descending `λ`.
    pub points: Vec<ParetoPoint>,
}

impl ParetoFront {
    pub fn last(&self) -> Option<&ParetoPoint> {
        self.points.last()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    /// Index pairs `(i, j)` where point `i` is dominated by point `j` beyond `tol`.
    pub fn dominated_pairs(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            for (j, q) in self.points.iter().enumerate() {
                if i != j && p.epsilon > q.epsilon + tol && p.alpha > q.alpha + tol {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Indices `i` where moving from point `i` to `i + 1` raises `ε` or lowers
    /// `α` by more than `tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> Vec<usize> {
        self.points
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1].epsilon > w[0].epsilon + tol || w[1].alpha < w[0].alpha - tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Geometric schedule from `from` down to `to` inclusive.
pub fn geometric_schedule(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        n => {
            let step = (to / from).ln() / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { to } else { from * (step * i as f64).exp() }).collect()
        }
    }
}

/// The 40-point schedule `1 → 1e-10`.
pub fn default_schedule() -> Vec<f64> {
    geometric_schedule(1.0, LAMBDA_PATH_END, DEFAULT_SCHEDULE_POINTS)
}

/// Solve along a descending schedule, warm-starting each point from the
/// previous one. Points that hit the iteration cap are kept and flagged.
pub fn pareto_sweep(m: usize, eta: f64, lambda_schedule: &[f64]) -> Result<ParetoFront, RegularizedError> {
    if lambda_schedule.iter().any(|&l| !(l > 0.0)) {
        return Err(RegularizedError::InvalidProblem("schedule entries must be positive".into()));
    }
    if lambda_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(RegularizedError::InvalidProblem("schedule must be strictly descending".into()));
    }
    let problem = RegularizedProblem::new(m, eta, lambda_schedule.first().copied().unwrap_or(1.0))?;
    let disc = Discretization::for_problem(&problem);
    let mut points = Vec::with_capacity(lambda_schedule.len());
    let mut warm: Option<Vec<f64>> = None;
    for &lambda in lambda_schedule {
        let sol = match disc.solve(lambda, warm.as_deref()) {
            Ok(s) => s,
            Err(RegularizedError::NonConvergence { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        warm = Some(sol.coefficients.coefficients.clone());
        points.push(point_from(&sol, lambda));
    }
    Ok(ParetoFront { points })
}

fn point_from(sol: &RegularizedSolution, lambda: f64) -> ParetoPoint {
    let c = &sol.coefficients;
    ParetoPoint {
        lambda,
        epsilon: l2_error(c),
        alpha: 2.0 * c.eta / PI * c.l1_norm(),
        coefficients: c.clone(),
        converged: sol.converged,
    }
}

/// Terminal point of the default warm-started path, the `λ → 0` solution.
pub fn lambda_path_limit(m: usize, eta: f64) -> Result<ParetoPoint, RegularizedError> {
    let front = pareto_sweep(m, eta, &default_schedule())?;
    Ok(front.points.last().cloned().expect("default schedule is nonempty"))
}

/// Result of [`fit_to_budget`].
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetFit {
    pub lambda: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub coefficients: CoefficientSet,
}

/// Largest `λ` whose solution has residual `epsilon_target` (to 1e-3 relative).
pub fn fit_to_budget(m: usize, eta: f64, epsilon_target: f64) -> Result<BudgetFit, RegularizedError> {
    if !(epsilon_target > 0.0) {
        return Err(RegularizedError::InvalidProblem(format!("target must be positive, got {epsilon_target}")));
    }
    let problem = RegularizedProblem::new(m, eta, 0.0)?;
    let disc = Discretization::for_problem(&problem);
    let floor = least_squares_floor(m, eta, &disc)?;
    let fit = |sol: RegularizedSolution, lambda: f64| {
        let c = sol.coefficients;
        BudgetFit { lambda, epsilon: sol.residual, alpha: 2.0 * eta / PI * c.l1_norm(), coefficients: c }
    };
    if epsilon_target < floor * (1.0 - 1e-9) {
        return Err(RegularizedError::Infeasible { target: epsilon_target, floor });
    }
    let lambda_max = disc.lambda_max();
    if epsilon_target >= disc.target_norm() {
        return Ok(fit(disc.solve(lambda_max, None)?, lambda_max));
    }
    let solve = |lambda: f64, warm: Option<&[f64]>| match disc.solve(lambda, warm) {
        Ok(s) => Ok(s),
        Err(RegularizedError::NonConvergence { best, .. }) => Ok(*best),
        Err(e) => Err(e),
    };
    let hi = lambda_max.ln();
    // walk down until the residual drops under the target
    let mut lo = hi;
    let mut warm: Option<Vec<f64>> = None;
    let mut lo_sol = None;
    for _ in 0..40 {
        lo -= 10f64.ln();
        let sol = solve(lo.exp(), warm.as_deref())?;
        warm = Some(sol.coefficients.coefficients.clone());
        if sol.residual <= epsilon_target {
            lo_sol = Some(sol);
            break;
        }
    }
    let lo_sol = lo_sol.ok_or(RegularizedError::NoBracket { target: epsilon_target, lo: lo.exp(), hi: lambda_max })?;
    if (lo_sol.residual / epsilon_target).ln().abs() <= 1e-4 {
        return Ok(fit(lo_sol, lo.exp()));
    }
    let mut last: Option<(f64, RegularizedSolution)> = None;
    let mut failure = None;
    let root = brent(
        |log_lambda| {
            let w = last.as_ref().map(|(_, s)| s.coefficients.coefficients.clone()).or_else(|| warm.clone());
            match solve(log_lambda.exp(), w.as_deref()) {
                Ok(sol) => {
                    let f = (sol.residual / epsilon_target).ln();
                    last = Some((log_lambda, sol));
                    f
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        lo,
        hi,
        BrentOptions { xtol: 1e-12, ftol: 1e-4, max_iter: 200 },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let root =
        root.map_err(|_| RegularizedError::NoBracket { target: epsilon_target, lo: lo.exp(), hi: lambda_max })?;
    let sol = match last {
        Some((x, s)) if x == root => s,
        _ => solve(root.exp(), warm.as_deref())?,
    };
    Ok(fit(sol, root.exp()))
}

/// Residual of the unregularised `m`-term fit on this discretisation.
fn least_squares_floor(m: usize, eta: f64, disc: &Discretization) -> Result<f64, RegularizedError> {
    let ls = match solve_least_squares(&ExtensionProblem::new(m, eta)?) {
        Ok(c) => c,
        Err(ExtensionError::IllConditioned { fallback, .. }) => fallback,
        Err(e) => return Err(e.into()),
    };
    let via_qr = disc.least_squares()?.residual;
    Ok(disc.residual_norm(&ls.coefficients).min(via_qr))
}

/// Optimal costs and budgeted subnormalisations across `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub m_values: Vec<usize>,
    /// `J*_m` at the fixed `λ`.
    pub optimal_costs: Vec<f64>,
    /// `J` of the zero-padded previous optimum in the next size.
    pub padded_costs: Vec<f64>,
    /// `α*_m(ε)` at the fixed budget; `None` where `m` terms cannot reach it.
    pub budget_alphas: Vec<Option<f64>>,
    /// Consecutive index pairs where `J*` increased by more than 1e-8.
    pub cost_violations: Vec<usize>,
    /// Consecutive index pairs where `α*` increased by more than 1e-8.
    pub alpha_violations: Vec<usize>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.cost_violations.is_empty() && self.alpha_violations.is_empty()
    }
}

pub const MONOTONICITY_TOL: f64 = 1e-8;

/// Check that `J*_m` and `α*_m(ε)` are non-increasing in `m`. Violations are
/// reported rather than raised; sizes whose least-squares error exceeds the
/// budget get no `α*` and are skipped in that comparison.
pub fn check_monotonicity(
    eta: f64,
    lambda: f64,
    m_values: &[usize],
    epsilon_budget: f64,
) -> Result<MonotonicityReport, RegularizedError> {
    if m_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RegularizedError::InvalidProblem("m values must be ascending".into()));
    }
    let mut optimal_costs = Vec::new();
    let mut padded_costs = Vec::new();
    let mut budget_alphas = Vec::new();
    let mut previous: Option<CoefficientSet> = None;
    for &m in m_values {
        let problem = RegularizedProblem::new(m, eta, lambda)?;
        let disc = Discretization::for_problem(&problem);
        let padded = previous.as_ref().map(|p| p.padded(m).coefficients);
        if let Some(p) = &padded {
            padded_costs.push(disc.objective(p, lambda));
        }
        let sol = match disc.solve(lambda, padded.as_deref()) {
            Ok(s) => s,
            Err(RegularizedError::NonConvergence { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        optimal_costs.push(sol.objective);
        previous = Some(sol.coefficients);
        budget_alphas.push(match fit_to_budget(m, eta, epsilon_budget) {
            Ok(fit) => Some(fit.alpha),
            Err(RegularizedError::Infeasible { .. }) => None,
            Err(e) => return Err(e),
        });
    }
    let rises = |v: &[Option<f64>]| -> Vec<usize> {
        v.windows(2)
            .enumerate()
            .filter(|(_, w)| matches!((w[0], w[1]), (Some(a), Some(b)) if b > a + MONOTONICITY_TOL))
            .map(|(i, _)| i)
            .collect()
    };
    let costs: Vec<Option<f64>> = optimal_costs.iter().copied().map(Some).collect();
    Ok(MonotonicityReport {
        m_values: m_values.to_vec(),
        cost_violations: rises(&costs),
        alpha_violations: rises(&budget_alphas),
        optimal_costs,
        padded_costs,
        budget_alphas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::eta_for_m;

    #[test]
    fn objective_cases() {
        let p = RegularizedProblem::new(3, 2.0, 0.5).unwrap();
        assert!((objective(&[0.0; 3], &p) - (PI.powi(3) / 12.0).sqrt()).abs() < 1e-13);

        let p0 = RegularizedProblem::new(4, 2.2, 0.0).unwrap();
        let ls = solve_least_squares(&ExtensionProblem::new(4, 2.2).unwrap()).unwrap();
        assert!((objective(&ls.coefficients, &p0) - l2_error(&ls)).abs() < 1e-12);

        let a = [0.3, -0.2, 0.1, 0.05];
        let p1 = RegularizedProblem::new(4, 2.2, 0.1).unwrap();
        let expected = objective(&a, &p0) + 0.1 * 2.0 * 2.2 / PI * 0.65;
        assert!((objective(&a, &p1) - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RegularizedProblem::new(3, 2.0, -1.0).is_err());
        assert!(RegularizedProblem::new(0, 2.0, 1.0).is_err());
        let p = RegularizedProblem::new(3, 2.0, 1e-3).unwrap();
        assert!(solve_regularized(&p, Some(&[1.0])).is_err());
        assert!(pareto_sweep(3, 2.0, &[1e-3, 1e-2]).is_err());
        assert!(pareto_sweep(3, 2.0, &[1e-3, 0.0]).is_err());
    }

    #[test]
    fn large_lambda_gives_zero() {
        let p = RegularizedProblem::new(5, 2.0, 10.0).unwrap();
        let sol = solve_regularized(&p, None).unwrap();
        assert!(sol.coefficients.coefficients.iter().all(|&a| a == 0.0));
        assert_eq!(sol.coefficients.provenance, Provenance::Regularized { lambda: 10.0 });
        // just below the threshold the solution is nonzero
        let disc = Discretization::for_problem(&p);
        let sol = disc.solve(0.9 * disc.lambda_max(), None).unwrap();
        assert!(sol.coefficients.l1_norm() > 0.0);
    }

    #[test]
    fn lambda_zero_is_least_squares() {
        let p = RegularizedProblem::new(5, 2.0, 0.0).unwrap();
        let sol = solve_regularized(&p, None).unwrap();
        let ls = solve_least_squares(&ExtensionProblem::new(5, 2.0).unwrap()).unwrap();
        for (x, y) in sol.coefficients.coefficients.iter().zip(&ls.coefficients) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn converged_solutions_are_stationary() {
        for &lambda in &[1e-1, 1e-2, 1e-4] {
            let p = RegularizedProblem::new(6, 2.2, lambda).unwrap();
            let sol = solve_regularized(&p, None).unwrap();
            assert!(sol.converged);
            assert!(sol.stationarity < 1e-8, "λ={lambda}: {}", sol.stationarity);
            // a perturbation never lowers J
            let disc = Discretization::for_problem(&p);
            for k in 0..6 {
                for d in [-1e-4, 1e-4] {
                    let mut a = sol.coefficients.coefficients.clone();
                    a[k] += d;
                    assert!(disc.objective(&a, lambda) >= sol.objective - 1e-14);
                }
            }
        }
    }

    #[test]
    fn warm_start_reaches_the_same_optimum() {
        let p = RegularizedProblem::new(6, 2.0, 1e-3).unwrap();
        let cold = solve_regularized(&p, None).unwrap();
        let warm = solve_regularized(&p, Some(&[1.0, -0.5, 0.2, 0.0, 0.0, 0.1])).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-10);
    }

    #[test]
    fn single_point_sweep_equals_solve() {
        let front = pareto_sweep(4, 2.0, &[1e-2]).unwrap();
        assert_eq!(front.points.len(), 1);
        let sol = solve_regularized(&RegularizedProblem::new(4, 2.0, 1e-2).unwrap(), None).unwrap();
        assert_eq!(front.points[0].coefficients, sol.coefficients);
    }

    #[test]
    fn small_front_is_consistent() {
        let front = pareto_sweep(6, eta_for_m(6), &geometric_schedule(1.0, 1e-6, 13)).unwrap();
        assert!(front.all_converged());
        assert!(front.dominated_pairs(1e-8).is_empty());
        assert!(front.monotonicity_violations(1e-8).is_empty());
        for p in &front.points {
            assert!((p.alpha - crate::extension::alpha_of(&p.coefficients, 1.0).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_shape() {
        let s = default_schedule();
        assert_eq!(s.len(), 40);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[39], 1e-10);
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(geometric_schedule(1.0, 1e-3, 1), vec![1.0]);
    }

    #[test]
    fn budget_edges() {
        let zero = fit_to_budget(4, 2.0, 10.0).unwrap();
        assert_eq!(zero.alpha, 0.0);
        assert!(matches!(fit_to_budget(4, 2.0, 1e-12), Err(RegularizedError::Infeasible { .. })));
        let fit = fit_to_budget(4, 2.0, 1e-2).unwrap();
        assert!((fit.epsilon / 1e-2 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_padding_preserves_cost() {
        let p = RegularizedProblem::new(3, 2.0, 1e-3).unwrap();
        let sol = solve_regularized(&p, None).unwrap();
        let p4 = RegularizedProblem::new(4, 2.0, 1e-3).unwrap();
        let padded = sol.coefficients.padded(4);
        assert!((objective(&padded.coefficients, &p4) - sol.objective).abs() < 1e-13);
    }
}
