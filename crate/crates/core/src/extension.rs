//! Fourier-extension sine series for the identity map.
//!
//! On `[−c, c]` with `c = π/η` the identity `f(τ) = τ` is fitted by
//! `Σ_{k=1}^{m} a_k sin(kτ)` in the continuous least-squares sense. For
//! `η > 1` the series is free to be smooth across the buffer `[c, π]`, which
//! is what makes the error decay exponentially in `m`.
//!
//! The Gram system is severely ill-conditioned (condition number ~1e23 at
//! `m = 16`), so [`solve_least_squares`] assembles the analytic Gram matrix in
//! multiprecision arithmetic, with precision growing in `m`, and factors it
//! there. The double-precision
//! quadrature system from [`build_normal_system`] is the independent route
//! used for validation and for the regularised solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::multiprecision::Real;
use crate::quadrature::{default_order, gauss_legendre, map_to_interval, QuadratureError, QuadratureRule};
use crate::roots::{brent, BrentOptions, RootError};

/// Coefficients smaller than this make `sgn(a_k)` untrustworthy.
pub const SIGN_THRESHOLD: f64 = 1e-10;
/// Search bracket for the cost-optimal extension factor.
pub const ETA_STAR_BRACKET: (f64, f64) = (1.7, 3.5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("normal equations are numerically singular (condition estimate {condition_estimate:e}); QR fallback used")]
    IllConditioned { fallback: CoefficientSet, condition_estimate: f64 },
    #[error("coefficient a_{index} = {value:e} is too close to zero for a signed derivative")]
    SignAmbiguity { index: usize, value: f64 },
    #[error("optimality condition has no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("operator scale must be positive, got {0}")]
    NonpositiveScale(f64),
    #[error("root search failed: {0}")]
    Root(RootError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Where a coefficient vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    LeastSquares,
    Regularized { lambda: f64 },
    SawtoothAnalytic,
    TableFixture,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::LeastSquares => "least_squares",
            Provenance::Regularized { .. } => "regularized",
            Provenance::SawtoothAnalytic => "sawtooth_analytic",
            Provenance::TableFixture => "table_fixture",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Provenance::Regularized { lambda } => Some(*lambda),
            _ => None,
        }
    }
}

/// Sine-series coefficients `a_1..a_m` fitted for a given `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub m: usize,
    pub eta: f64,
    pub coefficients: Vec<f64>,
    pub provenance: Provenance,
}

impl CoefficientSet {
    pub fn new(eta: f64, coefficients: Vec<f64>, provenance: Provenance) -> Self {
        CoefficientSet { m: coefficients.len(), eta, coefficients, provenance }
    }

    pub fn zeros(m: usize, eta: f64, provenance: Provenance) -> Self {
        CoefficientSet::new(eta, vec![0.0; m], provenance)
    }

    /// `Σ |a_k|`.
    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|a| a.abs()).sum()
    }

    /// Half-width `c = π/η` of the fitted interval.
    pub fn half_width(&self) -> f64 {
        PI / self.eta
    }

    /// The same series viewed as an `m'`-term set, `m' ≥ m`, padded with zeros.
    pub fn padded(&self, m: usize) -> CoefficientSet {
        assert!(m >= self.m, "cannot pad {} terms down to {m}", self.m);
        let mut coefficients = self.coefficients.clone();
        coefficients.resize(m, 0.0);
        CoefficientSet { m, eta: self.eta, coefficients, provenance: self.provenance }
    }
}

/// An `m`-term fit on `[−π/η, π/η]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionProblem {
    pub m: usize,
    pub eta: f64,
    pub quad_order: usize,
}

impl ExtensionProblem {
    /// Problem with the default quadrature order.
    ///
    /// `η = 1` is accepted: it is the sawtooth (plain Fourier series) limit.
    pub fn new(m: usize, eta: f64) -> Result<Self, ExtensionError> {
        Self::with_quad_order(m, eta, default_order(m))
    }

    pub fn with_quad_order(m: usize, eta: f64, quad_order: usize) -> Result<Self, ExtensionError> {
        if m == 0 {
            return Err(ExtensionError::InvalidProblem("m must be at least 1".into()));
        }
        if !(eta >= 1.0) || !eta.is_finite() {
            return Err(ExtensionError::InvalidProblem(format!("eta must be >= 1, got {eta}")));
        }
        if quad_order == 0 {
            return Err(QuadratureError::ZeroOrder.into());
        }
        Ok(ExtensionProblem { m, eta, quad_order })
    }

    pub fn half_width(&self) -> f64 {
        PI / self.eta
    }

    /// Thickness of the unfitted buffer, `π − π/η`.
    pub fn buffer(&self) -> f64 {
        PI - PI / self.eta
    }

    /// Gauss-Legendre rule on `[−c, c]`.
    pub fn rule(&self) -> Result<QuadratureRule, QuadratureError> {
        let c = self.half_width();
        map_to_interval(&gauss_legendre(self.quad_order)?, -c, c)
    }
}

/// Gram matrix `G_jk = ∫ sin(jτ) sin(kτ)` and right side `b_k = ∫ τ sin(kτ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSystem {
    pub gram: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// Normal system evaluated with the mapped Gauss-Legendre rule.
pub fn build_normal_system(problem: &ExtensionProblem) -> Result<NormalSystem, ExtensionError> {
    let rule = problem.rule()?;
    let m = problem.m;
    let basis = sine_basis(&rule.nodes, m);
    let mut gram = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for (q, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        for j in 0..m {
            let sj = basis[(q, j)] * w;
            rhs[j] += sj * t;
            for k in j..m {
                gram[(j, k)] += sj * basis[(q, k)];
            }
        }
    }
    for j in 0..m {
        for k in 0..j {
            gram[(j, k)] = gram[(k, j)];
        }
    }
    Ok(NormalSystem { gram, rhs })
}

/// `sin(k τ_q)` for every node `q` and `k = 1..m`.
pub(crate) fn sine_basis(nodes: &[f64], m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nodes.len(), m, |q, k| ((k + 1) as f64 * nodes[q]).sin())
}

/// The normal system from analytic antiderivatives.
pub fn closed_form_system(problem: &ExtensionProblem) -> NormalSystem {
    let m = problem.m;
    let c = problem.half_width();
    let gram = DMatrix::from_fn(m, m, |j, k| {
        let (j, k) = ((j + 1) as f64, (k + 1) as f64);
        if j == k {
            c - (2.0 * k * c).sin() / (2.0 * k)
        } else {
            ((j - k) * c).sin() / (j - k) - ((j + k) * c).sin() / (j + k)
        }
    });
    let rhs = DVector::from_fn(m, |k, _| {
        let k = (k + 1) as f64;
        2.0 * ((k * c).sin() / (k * k) - c * (k * c).cos() / k)
    });
    NormalSystem { gram, rhs }
}

/// Working precision in bits for the analytic system with `m` terms.
///
/// `cond(G)` grows by roughly 1.6 decimal digits per term near `η = 2`, so
/// the budget grows linearly with enough headroom for about 40 digits in the
/// result.
fn working_precision(m: usize) -> usize {
    128 + 8 * m
}

/// Analytic system and its `η`-derivative in multiprecision arithmetic.
struct ExtendedSystem {
    gram: Vec<Vec<Real>>,
    rhs: Vec<Real>,
    dgram: Vec<Vec<Real>>,
    drhs: Vec<Real>,
}

fn extended_system(m: usize, eta: f64, bits: usize) -> ExtendedSystem {
    let num = |x: f64| Real::from_f64(x, bits);
    let c = Real::pi(bits) / num(eta);
    // sin(n c), cos(n c) for n = 0..2m
    let trig: Vec<(Real, Real)> = (0..=2 * m).map(|n| (&c * num(n as f64)).sin_cos()).collect();
    let sin = |n: i64| -> Real {
        let s = &trig[n.unsigned_abs() as usize].0;
        if n < 0 {
            -s
        } else {
            s.clone()
        }
    };
    // dc/dη = −c/η
    let dc = -(&c / num(eta));
    let mut gram = vec![vec![Real::zero(bits); m]; m];
    let mut dgram = vec![vec![Real::zero(bits); m]; m];
    let mut rhs = vec![Real::zero(bits); m];
    let mut drhs = vec![Real::zero(bits); m];
    for j in 1..=m {
        for k in 1..=m {
            let (ji, ki) = (j as i64, k as i64);
            gram[j - 1][k - 1] = if j == k {
                &c - sin(2 * ki) / num(2.0 * k as f64)
            } else {
                sin(ji - ki) / num((ji - ki) as f64) - sin(ji + ki) / num((ji + ki) as f64)
            };
            // ∂G_jk/∂c = 2 sin(jc) sin(kc)
            dgram[j - 1][k - 1] = num(2.0) * &trig[j].0 * &trig[k].0 * &dc;
        }
        let kf = num(j as f64);
        let (s, co) = &trig[j];
        rhs[j - 1] = num(2.0) * (s / (&kf * &kf) - &c * co / &kf);
        // ∂b_k/∂c = 2c sin(kc)
        drhs[j - 1] = num(2.0) * &c * s * &dc;
    }
    ExtendedSystem { gram, rhs, dgram, drhs }
}

/// Bits that must survive elimination in every pivot `d_j / G_jj`. Fewer
/// than this and the working precision no longer determines the solution.
const GUARD_BITS: i32 = 64;

/// Cholesky factor of a symmetric positive definite multiprecision matrix.
struct Cholesky {
    lower: Vec<Vec<Real>>,
}

impl Cholesky {
    /// On breakdown returns the condition estimate accumulated so far.
    fn factor(a: &[Vec<Real>], bits: usize) -> Result<Self, f64> {
        let n = a.len();
        let floor = GUARD_BITS - bits as i32;
        let mut lower = vec![vec![Real::zero(bits); n]; n];
        let (mut dmax, mut dmin) = (0.0f64, f64::INFINITY);
        for j in 0..n {
            let mut d = a[j][j].clone();
            for k in 0..j {
                d = d - &lower[j][k] * &lower[j][k];
            }
            let ratio = &d / &a[j][j];
            let surviving = !d.is_negative() && ratio.exponent().is_some_and(|e| e > floor);
            let df = d.to_f64();
            dmax = dmax.max(df);
            dmin = dmin.min(df);
            if !surviving {
                return Err(if dmin > 0.0 { dmax / dmin } else { f64::INFINITY });
            }
            let ljj = d.sqrt();
            for i in j + 1..n {
                let mut s = a[i][j].clone();
                for k in 0..j {
                    s = s - &lower[i][k] * &lower[j][k];
                }
                lower[i][j] = s / &ljj;
            }
            lower[j][j] = ljj;
        }
        Ok(Cholesky { lower })
    }

    fn solve(&self, b: &[Real]) -> Vec<Real> {
        let n = b.len();
        let l = &self.lower;
        let mut y: Vec<Real> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = b[i].clone();
            for k in 0..i {
                s = s - &l[i][k] * &y[k];
            }
            y.push(s / &l[i][i]);
        }
        let mut x = y.clone();
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s = s - &l[k][i] * &x[k];
            }
            x[i] = s / &l[i][i];
        }
        x
    }

    /// `max d_j / min d_j` over the pivots, a lower bound on `cond₂(G)`.
    fn condition_estimate(&self) -> f64 {
        let pivots: Vec<f64> = (0..self.lower.len()).map(|j| self.lower[j][j].to_f64().powi(2)).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Least squares on the weighted quadrature design matrix by column-pivoted QR.
fn qr_fallback(problem: &ExtensionProblem) -> Result<Vec<f64>, ExtensionError> {
    let rule = problem.rule()?;
    let m = problem.m;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut design = sine_basis(&rule.nodes, m);
    for (q, s) in sw.iter().enumerate() {
        design.row_mut(q).scale_mut(*s);
    }
    let target = DVector::from_fn(rule.order(), |q, _| rule.nodes[q] * sw[q]);
    let (q, r, p) = design.col_piv_qr().unpack();
    let qty = q.transpose() * target;
    let mut x = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| ExtensionError::InvalidProblem("rank-deficient design matrix".into()))?;
    p.inv_permute_rows(&mut x);
    Ok(x.iter().copied().collect())
}

/// Condition estimate of the least-squares Gram system at `(m, η)`.
pub fn gram_condition_estimate(problem: &ExtensionProblem) -> f64 {
    let bits = working_precision(problem.m);
    let sys = extended_system(problem.m, problem.eta, bits);
    Cholesky::factor(&sys.gram, bits).map_or_else(|est| est, |c| c.condition_estimate())
}

/// Continuous least-squares coefficients.
///
/// Solves `G a = b` by Cholesky on the analytic Gram matrix in multiprecision
/// arithmetic. When the factorisation breaks down the column-pivoted QR
/// solution of the quadrature design matrix is returned inside
/// [`ExtensionError::IllConditioned`].
pub fn solve_least_squares(problem: &ExtensionProblem) -> Result<CoefficientSet, ExtensionError> {
    solve_least_squares_at(problem, working_precision(problem.m))
}

fn solve_least_squares_at(problem: &ExtensionProblem, bits: usize) -> Result<CoefficientSet, ExtensionError> {
    let sys = extended_system(problem.m, problem.eta, bits);
    match Cholesky::factor(&sys.gram, bits) {
        Ok(chol) => {
            let a = chol.solve(&sys.rhs);
            Ok(CoefficientSet::new(problem.eta, a.iter().map(|x| x.to_f64()).collect(), Provenance::LeastSquares))
        }
        Err(condition_estimate) => {
            let coefficients = qr_fallback(problem)?;
            Err(ExtensionError::IllConditioned {
                fallback: CoefficientSet::new(problem.eta, coefficients, Provenance::LeastSquares),
                condition_estimate,
            })
        }
    }
}

/// Plain Fourier coefficients of the sawtooth, `a_k = (2/k)(−1)^{k−1}`.
pub fn sawtooth_coefficients(m: usize) -> CoefficientSet {
    let coefficients = (1..=m).map(|k| if k % 2 == 1 { 2.0 / k as f64 } else { -2.0 / k as f64 }).collect();
    CoefficientSet::new(1.0, coefficients, Provenance::SawtoothAnalytic)
}

/// Fitted extension factor `η(m) = 2 + 0.460·m^{−0.319}`.
pub fn eta_for_m(m: usize) -> f64 {
    2.0 + 0.460 * (m as f64).powf(-0.319)
}

/// `S_m(η) = Σ|a_k|` and `S_m'(η)` by implicit differentiation of `G a = b`.
///
/// `a'` solves `G a' = b' − G' a` with the same factorisation used for `a`.
pub fn sm_and_derivative(problem: &ExtensionProblem) -> Result<(f64, f64), ExtensionError> {
    let bits = working_precision(problem.m);
    let sys = extended_system(problem.m, problem.eta, bits);
    let chol = Cholesky::factor(&sys.gram, bits).map_err(|condition_estimate| ExtensionError::IllConditioned {
        fallback: CoefficientSet::zeros(problem.m, problem.eta, Provenance::LeastSquares),
        condition_estimate,
    })?;
    let a = chol.solve(&sys.rhs);
    if let Some((index, value)) =
        a.iter().enumerate().map(|(i, x)| (i + 1, x.to_f64())).find(|(_, x)| x.abs() < SIGN_THRESHOLD)
    {
        return Err(ExtensionError::SignAmbiguity { index, value });
    }
    let m = problem.m;
    let forcing: Vec<Real> = (0..m)
        .map(|j| {
            let mut s = sys.drhs[j].clone();
            for k in 0..m {
                s = s - &sys.dgram[j][k] * &a[k];
            }
            s
        })
        .collect();
    let da = chol.solve(&forcing);
    let mut s = Real::zero(bits);
    let mut ds = Real::zero(bits);
    for (ak, dak) in a.iter().zip(&da) {
        if ak.is_negative() {
            s = s - ak;
            ds = ds - dak;
        } else {
            s = s + ak;
            ds = ds + dak;
        }
    }
    Ok((s.to_f64(), ds.to_f64()))
}

/// `η S'(η)/S(η) − (2 − η)/(η − 1)`, zero at the cost-optimal `η`.
pub fn eta_star_residual(m: usize, eta: f64) -> Result<f64, ExtensionError> {
    let problem = ExtensionProblem::new(m, eta)?;
    let (s, ds) = sm_and_derivative(&problem)?;
    Ok(eta * ds / s - (2.0 - eta) / (eta - 1.0))
}

/// Bracket end moved toward `inner` until the normal equations factorise.
/// Large `η` shrinks the interval and worsens the Gram conditioning, so the
/// upper end can be out of reach for larger `m`.
fn usable_end(m: usize, end: f64, inner: f64) -> Result<(f64, f64), ExtensionError> {
    let mut eta = end;
    let mut last = None;
    for _ in 0..40 {
        match eta_star_residual(m, eta) {
            Ok(r) => return Ok((eta, r)),
            Err(e @ ExtensionError::IllConditioned { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
        eta = inner + 0.85 * (eta - inner);
    }
    Err(last.expect("loop ran"))
}

/// Extension factor minimising `m·α`, i.e. `η S'/S = (2 − η)/(η − 1)`.
///
/// The search runs on [`ETA_STAR_BRACKET`], with an end pulled inward when
/// the Gram matrix there is too ill-conditioned to differentiate.
pub fn eta_star(m: usize) -> Result<f64, ExtensionError> {
    let inner = eta_for_m(m);
    let (lo, f_lo) = usable_end(m, ETA_STAR_BRACKET.0, inner)?;
    let (hi, f_hi) = usable_end(m, ETA_STAR_BRACKET.1, inner)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(ExtensionError::NoBracket { lo, hi });
    }
    let mut failure = None;
    let root = brent(
        |eta| match eta_star_residual(m, eta) {
            Ok(r) => r,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        BrentOptions { xtol: 1e-10, ftol: 0.0, max_iter: 200 },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root.map_err(ExtensionError::Root)
}

/// `Σ_k a_k sin(k τ)` at each point.
pub fn series_eval(coeffs: &CoefficientSet, points: &[f64]) -> Vec<f64> {
    points.iter().map(|&t| series_at(&coeffs.coefficients, t)).collect()
}

pub(crate) fn series_at(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * t).sin()).sum()
}

/// `‖τ − Σ a_k sin(kτ)‖` in `L²(−π/η, π/η)` with the default rule.
pub fn l2_error(coeffs: &CoefficientSet) -> f64 {
    l2_error_with_order(coeffs, default_order(coeffs.m))
}

pub fn l2_error_with_order(coeffs: &CoefficientSet, quad_order: usize) -> f64 {
    let c = coeffs.half_width();
    let rule = map_to_interval(&gauss_legendre(quad_order.max(1)).expect("order >= 1"), -c, c).expect("c > 0");
    rule.integrate(|t| {
        let r = t - series_at(&coeffs.coefficients, t);
        r * r
    })
    .sqrt()
}

/// The same error from the normal system, `sqrt(‖τ‖² − 2aᵀb + aᵀGa)`.
///
/// Cancels catastrophically once the error falls below ~1e-7; use it only as
/// a cross-check.
pub fn l2_error_from_system(coeffs: &CoefficientSet, system: &NormalSystem) -> f64 {
    let c = coeffs.half_width();
    let a = DVector::from_column_slice(&coeffs.coefficients);
    let target = 2.0 * c.powi(3) / 3.0;
    let quad = target - 2.0 * a.dot(&system.rhs) + a.dot(&(&system.gram * &a));
    quad.max(0.0).sqrt()
}

/// Subnormalisation `α = (2η/π)·scale·Σ|a_k|`.
pub fn alpha_of(coeffs: &CoefficientSet, scale: f64) -> Result<f64, ExtensionError> {
    if !(scale > 0.0) {
        return Err(ExtensionError::NonpositiveScale(scale));
    }
    Ok(2.0 * coeffs.eta / PI * scale * coeffs.l1_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{ls_reference, LS_REF_TERMS};

    fn ls(m: usize, eta: f64) -> CoefficientSet {
        solve_least_squares(&ExtensionProblem::new(m, eta).unwrap()).unwrap()
    }

    #[test]
    fn problem_validation() {
        assert!(ExtensionProblem::new(0, 2.0).is_err());
        assert!(ExtensionProblem::new(1, 0.5).is_err());
        assert!(ExtensionProblem::new(1, f64::NAN).is_err());
        assert!(ExtensionProblem::new(1, 1.0).is_ok());
        let p = ExtensionProblem::new(3, 2.0).unwrap();
        assert_eq!(p.quad_order, 44);
        assert!((p.buffer() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_term_systems() {
        let sys = build_normal_system(&ExtensionProblem::new(1, 1.0).unwrap()).unwrap();
        assert!((sys.gram[(0, 0)] - PI).abs() < 1e-13);
        assert!((sys.rhs[0] - 2.0 * PI).abs() < 1e-13);
        assert!((ls(1, 1.0).coefficients[0] - 2.0).abs() < 1e-14);

        let sys = build_normal_system(&ExtensionProblem::new(1, 2.0).unwrap()).unwrap();
        assert!((sys.gram[(0, 0)] - PI / 2.0).abs() < 1e-14);
        assert!((sys.rhs[0] - 2.0).abs() < 1e-14);
        assert!((ls(1, 2.0).coefficients[0] - 4.0 / PI).abs() < 1e-15);

        let sys = build_normal_system(&ExtensionProblem::new(2, 2.0).unwrap()).unwrap();
        assert!((sys.gram[(0, 1)] - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_spot_values() {
        let cf = closed_form_system(&ExtensionProblem::new(1, 1.0).unwrap());
        assert!((cf.rhs[0] - 2.0 * PI).abs() < 1e-14);
        let cf = closed_form_system(&ExtensionProblem::new(1, 2.0).unwrap());
        assert!((cf.rhs[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for &eta in &[1.5, 2.0, 2.46] {
            for m in [1, 2, 5, 16, 33, 64] {
                let p = ExtensionProblem::new(m, eta).unwrap();
                let q = build_normal_system(&p).unwrap();
                let cf = closed_form_system(&p);
                let dg = (&q.gram - &cf.gram).amax();
                let db = (&q.rhs - &cf.rhs).amax();
                assert!(dg < 1e-12 && db < 1e-12, "m={m} eta={eta}: {dg:e} {db:e}");
            }
        }
    }

    #[test]
    fn extended_system_agrees_with_double() {
        let p = ExtensionProblem::new(12, 2.2).unwrap();
        let ext = extended_system(p.m, p.eta, working_precision(p.m));
        let cf = closed_form_system(&p);
        for j in 0..p.m {
            assert!((ext.rhs[j].to_f64() - cf.rhs[j]).abs() < 1e-14);
            for k in 0..p.m {
                assert!((ext.gram[j][k].to_f64() - cf.gram[(j, k)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sawtooth_limit() {
        let a = ls(16, 1.0);
        let s = sawtooth_coefficients(16);
        for (x, y) in a.coefficients.iter().zip(&s.coefficients) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn least_squares_reference_rows() {
        // rows below m = 16 are reproducible to near machine precision
        for m in [1, 2, 4, 8] {
            let a = ls(m, eta_for_m(m));
            for (x, y) in a.coefficients.iter().zip(ls_reference(m).unwrap()) {
                assert!((x - y).abs() < 1e-10, "m={m}: {x} vs {y}");
            }
        }
        assert_eq!(LS_REF_TERMS.len(), 5);
    }

    #[test]
    fn residual_is_orthogonal_to_solution() {
        for m in [1, 3, 6, 10] {
            let p = ExtensionProblem::new(m, 2.2).unwrap();
            let a = solve_least_squares(&p).unwrap();
            let sys = closed_form_system(&p);
            let av = DVector::from_column_slice(&a.coefficients);
            let r = &sys.rhs - &sys.gram * &av;
            assert!(av.dot(&r).abs() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn qr_fallback_agrees_on_well_conditioned_problems() {
        for m in [1, 3, 6] {
            let p = ExtensionProblem::new(m, 2.0).unwrap();
            let a = solve_least_squares(&p).unwrap();
            let b = qr_fallback(&p).unwrap();
            for (x, y) in a.coefficients.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9, "m={m}");
            }
        }
    }

    #[test]
    fn breakdown_reports_fallback() {
        // 96 bits leave too few digits for m = 24 once the guard is taken
        let p = ExtensionProblem::new(24, 2.0).unwrap();
        match solve_least_squares_at(&p, 96) {
            Err(ExtensionError::IllConditioned { fallback, condition_estimate }) => {
                assert_eq!(fallback.m, 24);
                assert!(condition_estimate > 1e3);
                assert!(l2_error(&fallback) < 1e-10);
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
        assert!(solve_least_squares(&p).is_ok());
    }

    #[test]
    fn high_precision_matches_reference() {
        // 60-digit reference solution at m = 16
        let a = ls(16, eta_for_m(16));
        let reference = [1.9110637734424463, -0.83330423542777149, 0.44161528265916305, -0.23948684985005909];
        for (x, y) in a.coefficients.iter().zip(reference) {
            assert!((x - y).abs() < 1e-15, "{x} vs {y}");
        }
    }

    #[test]
    fn eta_fit_values() {
        assert!((eta_for_m(1) - 2.46).abs() < 1e-15);
        assert!((eta_for_m(16) - 2.1899518629352155).abs() < 1e-13);
        assert!((eta_for_m(1 << 30) - 2.0).abs() < 1e-3);
    }

    fn central_difference(m: usize, eta: f64) -> f64 {
        let h = 1e-5;
        let s = |e: f64| ls(m, e).l1_norm();
        (s(eta + h) - s(eta - h)) / (2.0 * h)
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let (s, ds) = sm_and_derivative(&ExtensionProblem::new(1, 2.0).unwrap()).unwrap();
        assert!((s - 4.0 / PI).abs() < 1e-15);
        assert!((ds - central_difference(1, 2.0)).abs() < 1e-6);

        let (_, ds) = sm_and_derivative(&ExtensionProblem::new(4, 2.2).unwrap()).unwrap();
        assert!((ds - central_difference(4, 2.2)).abs() < 1e-6);

        let (s, _) = sm_and_derivative(&ExtensionProblem::new(1, 1.0).unwrap()).unwrap();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eta_star_single_term() {
        let e = eta_star(1).unwrap();
        assert!((e - eta_for_m(1)).abs() < 0.05);
        assert!(eta_star_residual(1, e).unwrap().abs() < 1e-6);
    }

    #[test]
    fn series_is_odd() {
        let c = ls(4, 2.3);
        assert_eq!(series_eval(&c, &[0.0]), vec![0.0]);
        let pts = [0.1, 0.7, 1.2];
        let neg: Vec<f64> = pts.iter().map(|x| -x).collect();
        for (a, b) in series_eval(&c, &pts).iter().zip(series_eval(&c, &neg)) {
            assert!((a + b).abs() < 1e-15);
        }
    }

    #[test]
    fn l2_error_cases() {
        let zero = CoefficientSet::zeros(3, 2.0, Provenance::LeastSquares);
        assert!((l2_error(&zero) - (PI.powi(3) / 12.0).sqrt()).abs() < 1e-13);
        for m in [1, 2, 3] {
            let p = ExtensionProblem::new(m, eta_for_m(m)).unwrap();
            let a = solve_least_squares(&p).unwrap();
            let sys = closed_form_system(&p);
            assert!((l2_error(&a) - l2_error_from_system(&a, &sys)).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_cases() {
        let zero = CoefficientSet::zeros(2, 2.0, Provenance::LeastSquares);
        assert_eq!(alpha_of(&zero, 1.0).unwrap(), 0.0);
        let a1 = CoefficientSet::new(2.46, vec![1.1749265633763890], Provenance::TableFixture);
        assert!((alpha_of(&a1, 1.0).unwrap() - 2.0 * 2.46 / PI * 1.1749265633763890).abs() < 1e-15);
        assert!((alpha_of(&a1, 1.0).unwrap() - 1.8401).abs() < 1e-4);
        assert!(matches!(alpha_of(&a1, 0.0), Err(ExtensionError::NonpositiveScale(_))));
    }

    #[test]
    fn padding_keeps_the_series() {
        let a = ls(3, 2.0);
        let p = a.padded(5);
        assert_eq!(p.m, 5);
        assert_eq!(series_eval(&a, &[0.4]), series_eval(&p, &[0.4]));
    }
}
