//! Double-double arithmetic (about 32 significant digits) for sums whose
//! exact value is an integer far above `1e6`, where `f64` cannot resolve
//! the fractional part.
//!
//! Only what the Verlinde sum needs is provided: field operations, integer
//! powers and `sin(πr)` for rational `r`. The argument reduction for `sin`
//! is done exactly in rational arithmetic, so the result is accurate to a
//! few units in the last double-double place.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Rational64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    hi: f64,
    lo: f64,
}

const PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

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

impl DoubleDouble {
    pub(crate) const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub(crate) const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub(crate) fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub(crate) fn from_ratio(r: Rational64) -> Self {
        Self::from_f64(*r.numer() as f64) / Self::from_f64(*r.denom() as f64)
    }

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub(crate) fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Taylor series of `sin y` and `cos y` for `|y| ≤ π/4`.
    fn sin_cos_small(y: Self) -> (Self, Self) {
        let y2 = y * y;
        let mut term = y;
        let mut sin = y;
        let mut k = 1.0;
        while term.hi.abs() > 1e-36 {
            term = -(term * y2) / Self::from_f64((k + 1.0) * (k + 2.0));
            sin = sin + term;
            k += 2.0;
        }
        let mut term = Self::ONE;
        let mut cos = Self::ONE;
        let mut k = 0.0;
        while term.hi.abs() > 1e-36 {
            term = -(term * y2) / Self::from_f64((k + 1.0) * (k + 2.0));
            cos = cos + term;
            k += 2.0;
        }
        (sin, cos)
    }

    /// `sin(πr)`.
    pub(crate) fn sin_pi(r: Rational64) -> Self {
        // r mod 2 in [0, 2), exactly
        let two = Rational64::from_integer(2);
        let mut x = r - (r / two).floor() * two;
        let mut sign = 1.0;
        let one = Rational64::from_integer(1);
        if x >= one {
            x -= one;
            sign = -1.0;
        }
        if x > Rational64::new(1, 2) {
            x = one - x;
        }
        let value = if x <= Rational64::new(1, 4) {
            Self::sin_cos_small(PI * Self::from_ratio(x)).0
        } else {
            Self::sin_cos_small(PI * Self::from_ratio(Rational64::new(1, 2) - x)).1
        };
        if sign < 0.0 {
            -value
        } else {
            value
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}
