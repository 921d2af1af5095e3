//! Double-double arithmetic, about 106 bits of significand.
//!
//! Only what the integrator order check needs: the four operations on top
//! of error-free transforms, plus `exp` for negative arguments by Taylor
//! series. f64 roundoff (~1e-16) is larger than the fifth-order truncation
//! error at the step sizes the order check uses, so the check has to run
//! in wider arithmetic.

use std::ops::{Add, Div, Mul, Neg, Sub};

use mountctl::integrator::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const fn new(hi: f64) -> Self {
        Self { hi, lo: 0.0 }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// `exp(x)` for `x <= 0`, by squaring a reduced Taylor series.
    pub fn exp_neg(x: Dd) -> Dd {
        assert!(x.hi <= 0.0);
        let k = 16;
        let r = x / Dd::new((1u64 << k) as f64);
        let mut term = Dd::new(1.0);
        let mut sum = Dd::new(1.0);
        for n in 1..30 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..k {
            sum = sum * sum;
        }
        sum
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + -o
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        // Two Newton-style corrections on the f64 quotient.
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Real for Dd {
    fn from_f64(v: f64) -> Self {
        Dd::new(v)
    }
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}
