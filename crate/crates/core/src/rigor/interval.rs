//! Closed real intervals with outward rounding.
//!
//! Every arithmetic operation returns an interval that contains the exact
//! image of every point selection of its operands. Directed rounding is
//! emulated on top of round-to-nearest hardware with error-free
//! transformations (`two_sum`, fused multiply-add residuals): the nearest
//! result is kept when it is exact and nudged one ulp outward otherwise.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// A closed interval `[lo, hi]` of extended reals.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Lower bound of `a + b`.
#[inline]
pub(crate) fn add_lo(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if s.is_finite() {
        if e < 0.0 {
            s.next_down()
        } else {
            s
        }
    } else if s.is_nan() {
        f64::NEG_INFINITY
    } else if s == f64::INFINITY && a.is_finite() && b.is_finite() {
        f64::MAX
    } else {
        s
    }
}

/// Upper bound of `a + b`.
#[inline]
pub(crate) fn add_hi(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if s.is_finite() {
        if e > 0.0 {
            s.next_up()
        } else {
            s
        }
    } else if s.is_nan() {
        f64::INFINITY
    } else if s == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
        f64::MIN
    } else {
        s
    }
}

// Below this magnitude an fma residual may itself be rounded.
const TINY: f64 = 1e-290;

#[inline]
pub(crate) fn mul_lo(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() {
            f64::NEG_INFINITY
        } else if p == f64::INFINITY && a.is_finite() && b.is_finite() {
            f64::MAX
        } else {
            p
        };
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    let e = a.mul_add(b, -p);
    if e < 0.0 {
        p.next_down()
    } else {
        p
    }
}

#[inline]
pub(crate) fn mul_hi(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p.is_nan() {
            f64::INFINITY
        } else if p == f64::NEG_INFINITY && a.is_finite() && b.is_finite() {
            f64::MIN
        } else {
            p
        };
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    let e = a.mul_add(b, -p);
    if e > 0.0 {
        p.next_up()
    } else {
        p
    }
}

/// Sign of `a / b - q` where `q` is the rounded quotient.
#[inline]
fn div_residual_sign(a: f64, b: f64, q: f64) -> f64 {
    // a - q*b is exact when no underflow occurs.
    let r = (-q).mul_add(b, a);
    if b > 0.0 {
        r
    } else {
        -r
    }
}

#[inline]
pub(crate) fn div_lo(a: f64, b: f64) -> f64 {
    if a == 0.0 && b != 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() {
            f64::NEG_INFINITY
        } else if q == f64::INFINITY && a.is_finite() && b != 0.0 {
            f64::MAX
        } else {
            q
        };
    }
    if q.abs() < TINY || a.abs() < TINY || b.is_infinite() {
        return q.next_down();
    }
    if div_residual_sign(a, b, q) < 0.0 {
        q.next_down()
    } else {
        q
    }
}

#[inline]
pub(crate) fn div_hi(a: f64, b: f64) -> f64 {
    if a == 0.0 && b != 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() {
        return if q.is_nan() {
            f64::INFINITY
        } else if q == f64::NEG_INFINITY && a.is_finite() && b != 0.0 {
            f64::MIN
        } else {
            q
        };
    }
    if q.abs() < TINY || a.abs() < TINY || b.is_infinite() {
        return q.next_up();
    }
    if div_residual_sign(a, b, q) > 0.0 {
        q.next_up()
    } else {
        q
    }
}

#[inline]
fn sqrt_lo(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = x.sqrt();
    if !s.is_finite() || x < TINY {
        return s.next_down().max(0.0);
    }
    if (-s).mul_add(s, x) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn sqrt_hi(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = x.sqrt();
    if !s.is_finite() {
        return s;
    }
    if x < TINY {
        return s.next_up();
    }
    if (-s).mul_add(s, x) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const HALF: Interval = Interval { lo: 0.5, hi: 0.5 };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };
    pub const SIGNED_UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    /// Builds `[lo, hi]`.
    ///
    /// # Panics
    /// If `lo > hi` or either endpoint is NaN.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Like [`Interval::new`] but returns `None` on malformed endpoints.
    pub fn try_new(lo: f64, hi: f64) -> Option<Self> {
        (lo <= hi).then_some(Interval { lo, hi })
    }

    #[inline]
    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN point interval");
        Interval { lo: x, hi: x }
    }

    /// The smallest interval with representable endpoints around a value
    /// that was rounded to nearest once (a decimal literal, a libm
    /// constant).
    pub fn around(x: f64) -> Self {
        Interval {
            lo: x.next_down(),
            hi: x.next_up(),
        }
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let m = 0.5 * self.lo + 0.5 * self.hi;
                m.clamp(self.lo, self.hi)
            }
            (false, true) => {
                if self.hi > 0.0 {
                    0.0
                } else {
                    f64::MIN
                }
            }
            (true, false) => {
                if self.lo < 0.0 {
                    0.0
                } else {
                    f64::MAX
                }
            }
            (false, false) => 0.0,
        }
    }

    /// Upper bound on `hi - lo`.
    pub fn width(self) -> f64 {
        add_hi(self.hi, -self.lo)
    }

    pub fn rad(self) -> f64 {
        let m = self.mid();
        add_hi(self.hi, -m).max(add_hi(m, -self.lo))
    }

    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn mig(self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    pub fn is_point(self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`.
    pub fn subset_of(self, other: Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn overlaps(self, other: Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_positive(self) -> bool {
        self.lo > 0.0
    }

    pub fn is_negative(self) -> bool {
        self.hi < 0.0
    }

    /// Certainly `self < other` for every selection.
    pub fn certainly_lt(self, other: Interval) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(self, other: Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(self, other: Interval) -> Option<Interval> {
        Interval::try_new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Intersection that keeps `self` if the two are disjoint. Used for
    /// clipping against a priori bounds where disjointness would signal a
    /// bug rather than a meaningful empty set.
    pub fn clip(self, bounds: Interval) -> Interval {
        self.intersect(bounds).unwrap_or(self)
    }

    pub fn split(self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    pub fn sqr(self) -> Interval {
        if self.lo >= 0.0 {
            Interval::new(mul_lo(self.lo, self.lo), mul_hi(self.hi, self.hi))
        } else if self.hi <= 0.0 {
            Interval::new(mul_lo(self.hi, self.hi), mul_hi(self.lo, self.lo))
        } else {
            let m = self.mag();
            Interval::new(0.0, mul_hi(m, m))
        }
    }

    /// Square root of the nonnegative part.
    ///
    /// # Panics
    /// If the interval lies entirely below zero.
    pub fn sqrt(self) -> Interval {
        assert!(self.hi >= 0.0, "sqrt of negative interval {self:?}");
        Interval::new(sqrt_lo(self.lo.max(0.0)), sqrt_hi(self.hi))
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval::new(0.0, self.mag())
        }
    }

    pub fn recip(self) -> Interval {
        Interval::ONE / self
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    /// Multiplication by a power of two, exact in the normal range.
    pub fn ldexp(self, k: i32) -> Interval {
        let s = Interval::point(2f64.powi(k));
        self * s
    }

    pub fn powi(self, n: u32) -> Interval {
        match n {
            0 => Interval::ONE,
            1 => self,
            _ if n % 2 == 0 => self.powi(n / 2).sqr(),
            _ => self * self.powi(n - 1),
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_lo(self.lo, rhs.lo),
            hi: add_hi(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_lo(self.lo, -rhs.hi),
            hi: add_hi(self.hi, -rhs.lo),
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        if a >= 0.0 {
            if c >= 0.0 {
                return Interval { lo: mul_lo(a, c), hi: mul_hi(b, d) };
            }
            if d <= 0.0 {
                return Interval { lo: mul_lo(b, c), hi: mul_hi(a, d) };
            }
            return Interval { lo: mul_lo(b, c), hi: mul_hi(b, d) };
        }
        if b <= 0.0 {
            if c >= 0.0 {
                return Interval { lo: mul_lo(a, d), hi: mul_hi(b, c) };
            }
            if d <= 0.0 {
                return Interval { lo: mul_lo(b, d), hi: mul_hi(a, c) };
            }
            return Interval { lo: mul_lo(a, d), hi: mul_hi(a, c) };
        }
        // a < 0 < b
        if c >= 0.0 {
            return Interval { lo: mul_lo(a, d), hi: mul_hi(b, d) };
        }
        if d <= 0.0 {
            return Interval { lo: mul_lo(b, c), hi: mul_hi(a, c) };
        }
        Interval {
            lo: mul_lo(a, d).min(mul_lo(b, c)),
            hi: mul_hi(a, c).max(mul_hi(b, d)),
        }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        if c <= 0.0 && d >= 0.0 {
            return Interval::ENTIRE;
        }
        if c > 0.0 {
            if a >= 0.0 {
                Interval { lo: div_lo(a, d), hi: div_hi(b, c) }
            } else if b <= 0.0 {
                Interval { lo: div_lo(a, c), hi: div_hi(b, d) }
            } else {
                Interval { lo: div_lo(a, c), hi: div_hi(b, c) }
            }
        } else if a >= 0.0 {
            Interval { lo: div_lo(b, d), hi: div_hi(a, c) }
        } else if b <= 0.0 {
            Interval { lo: div_lo(b, c), hi: div_hi(a, d) }
        } else {
            Interval { lo: div_lo(b, d), hi: div_hi(a, d) }
        }
    }
}

impl AddAssign for Interval {
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl Div<f64> for Interval {
    type Output = Interval;
    fn div(self, rhs: f64) -> Interval {
        self / Interval::point(rhs)
    }
}

impl Sub<Interval> for f64 {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::point(self) - rhs
    }
}

impl Mul<Interval> for f64 {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        Interval::point(self) * rhs
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::FromPrimitive;
    use proptest::prelude::*;

    fn exact(x: f64) -> BigRational {
        BigRational::from_f64(x).unwrap()
    }

    fn encloses(iv: Interval, v: &BigRational) -> bool {
        exact(iv.lo()) <= *v && *v <= exact(iv.hi())
    }

    #[test]
    fn exact_operations_stay_points() {
        let a = Interval::point(0.5);
        let b = Interval::point(0.25);
        assert!((a + b).is_point());
        assert!((a * b).is_point());
        assert!((a / b).is_point());
        assert!(Interval::point(4.0).sqrt().is_point());
    }

    #[test]
    fn inexact_operations_widen() {
        let third = Interval::ONE / Interval::point(3.0);
        assert!(!third.is_point());
        assert!(third.width() <= 2.0 * f64::EPSILON);
        let r2 = Interval::point(2.0).sqrt();
        assert!(r2.contains(std::f64::consts::SQRT_2));
        assert!(!r2.is_point());
    }

    #[test]
    fn division_by_zero_straddle_is_entire() {
        let x = Interval::ONE / Interval::new(-1.0, 1.0);
        assert_eq!(x, Interval::ENTIRE);
    }

    #[test]
    fn infinities_do_not_produce_nan() {
        let a = Interval::new(f64::NEG_INFINITY, 1.0);
        let b = Interval::new(f64::NEG_INFINITY, 2.0);
        let d = a - b;
        assert!(d.lo() == f64::NEG_INFINITY && d.hi() == f64::INFINITY);
        let z = Interval::ZERO * a;
        assert_eq!(z, Interval::ZERO);
    }

    proptest! {
        #[test]
        fn arithmetic_encloses_exact_result(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (x, y) = (Interval::point(a), Interval::point(b));
            let (ea, eb) = (exact(a), exact(b));
            prop_assert!(encloses(x + y, &(&ea + &eb)));
            prop_assert!(encloses(x - y, &(&ea - &eb)));
            prop_assert!(encloses(x * y, &(&ea * &eb)));
            if b != 0.0 {
                prop_assert!(encloses(x / y, &(&ea / &eb)));
            }
        }

        #[test]
        fn sqrt_encloses(a in 0.0f64..1e6) {
            let s = Interval::point(a).sqrt();
            let (lo, hi) = (exact(s.lo()), exact(s.hi()));
            let e = exact(a);
            prop_assert!(&lo * &lo <= e && e <= &hi * &hi);
        }

        #[test]
        fn interval_mul_contains_endpoint_products(
            a in -10.0f64..10.0, w1 in 0.0f64..5.0,
            c in -10.0f64..10.0, w2 in 0.0f64..5.0,
            s in 0.0f64..1.0, t in 0.0f64..1.0,
        ) {
            let x = Interval::new(a, a + w1);
            let y = Interval::new(c, c + w2);
            let px = a + s * w1;
            let py = c + t * w2;
            prop_assume!(x.contains(px) && y.contains(py));
            prop_assert!(encloses(x * y, &(exact(px) * exact(py))));
            if !y.contains_zero() {
                prop_assert!(encloses(x / y, &(exact(px) / exact(py))));
            }
        }
    }
}
