//! Bracketed scalar root finding (Brent-Dekker).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("f({a}) = {fa:e} and f({b}) = {fb:e} do not bracket a root")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("no convergence after {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct BrentOptions {
    /// Absolute tolerance on the root location.
    pub xtol: f64,
    /// Stop as soon as `|f(x)| ≤ ftol`.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        BrentOptions { xtol: 1e-12, ftol: 0.0, max_iter: 200 }
    }
}

/// Root of `f` in `[a, b]`; `f(a)` and `f(b)` must differ in sign.
///
/// Inverse quadratic interpolation with secant and bisection safeguards.
/// Each iteration costs exactly one evaluation of `f`.
pub fn brent<F>(mut f: F, a: f64, b: f64, opts: BrentOptions) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= opts.ftol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if fb == 0.0 {
            return Ok(b);
        }
    }
    Err(RootError::NoConvergence { iterations: opts.max_iter, estimate: b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, BrentOptions::default()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let r = brent(|x: f64| x.cos() - x, 0.0, 1.0, BrentOptions::default()).unwrap();
        assert!((r.cos() - r).abs() < 1e-12);
    }

    #[test]
    fn counts_one_evaluation_per_iteration() {
        let mut calls = 0;
        let r = brent(
            |x: f64| {
                calls += 1;
                x.powi(3) - x - 1.0
            },
            1.0,
            2.0,
            BrentOptions::default(),
        )
        .unwrap();
        assert!((r.powi(3) - r - 1.0).abs() < 1e-10);
        assert!(calls < 20, "{calls} evaluations");
    }

    #[test]
    fn rejects_missing_bracket() {
        let err = brent(|x| x * x + 1.0, -1.0, 1.0, BrentOptions::default()).unwrap_err();
        assert!(matches!(err, RootError::NoBracket { .. }));
    }

    #[test]
    fn ftol_stops_early() {
        let opts = BrentOptions { xtol: 0.0, ftol: 1e-3, max_iter: 100 };
        let r = brent(|x| x - 0.3, 0.0, 1.0, opts).unwrap();
        assert!((r - 0.3).abs() <= 1e-3);
    }
}
