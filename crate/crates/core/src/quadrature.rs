//! Gauss-Legendre quadrature.

use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature order must be at least 1")]
    ZeroOrder,
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
}

/// Nodes (ascending) and positive weights of an interpolatory rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

static ORDER_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Default rule size for an `m`-term sine fit: integrands carry frequencies up
/// to `2m`, so `4m + 32` over-resolves them with margin. A process-wide
/// override set by [`set_order_override`] takes precedence.
pub fn default_order(m: usize) -> usize {
    match ORDER_OVERRIDE.load(Ordering::Relaxed) {
        0 => 4 * m + 32,
        n => n,
    }
}

/// Replace the default order for every later problem in this process;
/// `None` restores `4m + 32`.
pub fn set_order_override(order: Option<usize>) {
    ORDER_OVERRIDE.store(order.unwrap_or(0), Ordering::Relaxed);
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-15;

/// `(P_n(x), P_n'(x))` from the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule of the given order on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule, QuadratureError> {
    if order == 0 {
        return Err(QuadratureError::ZeroOrder);
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // the guesses run from the right end of the interval inwards
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Affine transport of a rule on `[−1, 1]` to `[lo, hi]`.
pub fn map_to_interval(rule: &QuadratureRule, lo: f64, hi: f64) -> Result<QuadratureRule, QuadratureError> {
    if !(lo < hi) {
        return Err(QuadratureError::EmptyInterval { lo, hi });
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(QuadratureRule {
        nodes: rule.nodes.iter().map(|&x| mid + half * x).collect(),
        weights: rule.weights.iter().map(|&w| half * w).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_orders() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);

        let r2 = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes[0] + s).abs() < 1e-15 && (r2.nodes[1] - s).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15 && (r2.weights[1] - 1.0).abs() < 1e-15);
        assert_eq!(gauss_legendre(0), Err(QuadratureError::ZeroOrder));
    }

    #[test]
    fn structural_invariants_all_orders() {
        for n in 1..=128 {
            let r = gauss_legendre(n).unwrap();
            assert_eq!(r.order(), n);
            assert!(r.weights.iter().all(|&w| w > 0.0), "order {n}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]), "order {n}");
            assert!(r.nodes.iter().all(|&x| x > -1.0 && x < 1.0));
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {n}: {total}");
            for i in 0..n {
                assert!((r.nodes[i] + r.nodes[n - 1 - i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn monomial_exactness() {
        for n in [1, 2, 3, 8, 17, 64] {
            let r = gauss_legendre(n).unwrap();
            for p in 0..(2 * n).min(40) {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let got = r.integrate(|x| x.powi(p as i32));
                assert!((got - exact).abs() < 1e-12, "order {n} degree {p}");
            }
        }
        let r = gauss_legendre(64).unwrap();
        assert!((r.integrate(|x| x.powi(4)) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn interval_mapping() {
        let r2 = gauss_legendre(2).unwrap();
        assert_eq!(map_to_interval(&r2, -1.0, 1.0).unwrap(), r2);
        let m = map_to_interval(&r2, 0.0, 2.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((m.nodes[0] - (1.0 - s)).abs() < 1e-15);
        assert!((m.nodes[1] - (1.0 + s)).abs() < 1e-15);
        assert!(m.weights.iter().all(|w| (w - 1.0).abs() < 1e-15));
        assert!(matches!(map_to_interval(&r2, 1.0, 1.0), Err(QuadratureError::EmptyInterval { .. })));

        let r = map_to_interval(&gauss_legendre(32).unwrap(), -PI / 2.0, PI / 2.0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - PI).abs() < 1e-13);
        assert!((r.integrate(|t| t * t) - PI.powi(3) / 12.0).abs() < 1e-13);
    }

    #[test]
    fn odd_sine_moments() {
        for &c in &[0.5, 1.0, PI / 2.0, 2.0, PI] {
            for k in 1..=64usize {
                let kf = k as f64;
                let rule = map_to_interval(&gauss_legendre(2 * k + 32).unwrap(), -c, c).unwrap();
                let got = rule.integrate(|t| t * (kf * t).sin());
                let exact = 2.0 * ((kf * c).sin() / (kf * kf) - c * (kf * c).cos() / kf);
                assert!((got - exact).abs() < 1e-12, "c={c} k={k}: {got} vs {exact}");
            }
        }
    }
}
