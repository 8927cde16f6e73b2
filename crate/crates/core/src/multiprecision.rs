//! Thin arithmetic wrapper over [`astro_float::BigFloat`] for the analytic
//! normal equations.
//!
//! Each value carries its working precision in bits; binary operations run at
//! the larger of the two. Rounding is to nearest even throughout.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

#[derive(Debug, Clone)]
pub(crate) struct Real {
    v: BigFloat,
    p: usize,
}

impl Real {
    pub fn zero(p: usize) -> Real {
        Real::from_f64(0.0, p)
    }

    pub fn from_f64(x: f64, p: usize) -> Real {
        Real { v: BigFloat::from_f64(x, p), p }
    }

    pub fn pi(p: usize) -> Real {
        Real { v: CONSTS.with(|c| c.borrow_mut().pi(p, RM)), p }
    }

    pub fn sin_cos(&self) -> (Real, Real) {
        CONSTS.with(|c| {
            let mut c = c.borrow_mut();
            let s = self.v.sin(self.p, RM, &mut c);
            let co = self.v.cos(self.p, RM, &mut c);
            (Real { v: s, p: self.p }, Real { v: co, p: self.p })
        })
    }

    pub fn sqrt(&self) -> Real {
        Real { v: self.v.sqrt(self.p, RM), p: self.p }
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative()
    }

    /// Binary exponent `e` with `2^{e−1} ≤ |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        if self.v.is_zero() {
            None
        } else {
            self.v.exponent()
        }
    }

    /// Nearest double, via the decimal expansion.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        self.v.to_string().parse().unwrap_or(f64::NAN)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                let p = self.p.max(rhs.p);
                Real { v: self.v.$op(&rhs.v, p, RM), p }
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$method(rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, add);
binary_op!(Sub, sub, sub);
binary_op!(Mul, mul, mul);
binary_op!(Div, div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { v: self.v.neg(), p: self.p }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_beyond_double() {
        let p = 256;
        let one = Real::from_f64(1.0, p);
        let tiny = Real::from_f64(1e-40, p);
        let back = (&one + &tiny) - &one;
        assert!((back.to_f64() - 1e-40).abs() < 1e-55);
        let third = &one / Real::from_f64(3.0, p);
        assert!((third * Real::from_f64(3.0, p) - one).exponent().unwrap_or(i32::MIN) < -250);
    }

    #[test]
    fn trig_and_constants() {
        let p = 192;
        let pi = Real::pi(p);
        assert_eq!(pi.to_f64(), std::f64::consts::PI);
        let (s, c) = (&pi / Real::from_f64(6.0, p)).sin_cos();
        assert!((s.to_f64() - 0.5).abs() < 1e-16);
        let unit = &s * &s + &c * &c - Real::from_f64(1.0, p);
        assert!(unit.exponent().is_none_or(|e| e < -180));
        assert!(Real::from_f64(2.0, p).sqrt().to_f64() == std::f64::consts::SQRT_2);
        assert!((-Real::from_f64(2.0, p)).is_negative());
        assert_eq!(Real::zero(p).to_f64(), 0.0);
    }
}
