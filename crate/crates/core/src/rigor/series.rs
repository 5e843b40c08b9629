//! Truncated power series with interval coefficients, used to build Taylor
//! models of one-dimensional integrands.

use super::elementary::exp;
use super::interval::Interval;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients c₀..c_n of Σ c_k u^k, all operations truncated at degree n.
#[derive(Clone, Debug, PartialEq)]
pub struct Series(pub Vec<Interval>);

impl Series {
    pub fn constant(c: Interval, order: usize) -> Self {
        let mut v = vec![Interval::ZERO; order + 1];
        v[0] = c;
        Series(v)
    }

    /// The independent variable expanded at `center`: center + u.
    pub fn variable(center: Interval, order: usize) -> Self {
        let mut s = Self::constant(center, order);
        if order >= 1 {
            s.0[1] = Interval::ONE;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Interval {
        self.0[k]
    }

    pub fn scale(&self, c: Interval) -> Self {
        Series(self.0.iter().map(|&a| a * c).collect())
    }

    pub fn add_const(&self, c: Interval) -> Self {
        let mut s = self.clone();
        s.0[0] += c;
        s
    }

    pub fn sqr(&self) -> Self {
        let n = self.order();
        let a = &self.0;
        let mut out = vec![Interval::ZERO; n + 1];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = Interval::ZERO;
            for i in 0..(k + 1) / 2 {
                acc += a[i] * a[k - i];
            }
            acc = acc.ldexp(1);
            if k % 2 == 0 {
                acc += a[k / 2].sqr();
            }
            *o = acc;
        }
        Series(out)
    }

    pub fn div(&self, b: &Series) -> Self {
        let n = self.order();
        let mut c = vec![Interval::ZERO; n + 1];
        for k in 0..=n {
            let mut acc = self.0[k];
            for i in 1..=k {
                acc -= b.0[i] * c[k - i];
            }
            c[k] = acc / b.0[0];
        }
        Series(c)
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let a = &self.0;
        let mut e = vec![Interval::ZERO; n + 1];
        e[0] = exp(a[0]);
        for k in 1..=n {
            let mut acc = Interval::ZERO;
            for j in 1..=k {
                acc += a[j] * e[k - j] * (j as f64);
            }
            e[k] = acc / (k as f64);
        }
        Series(e)
    }

    pub fn sqrt(&self) -> Self {
        let n = self.order();
        let a = &self.0;
        let mut s = vec![Interval::ZERO; n + 1];
        s[0] = a[0].sqrt();
        let two_s0 = s[0].ldexp(1);
        for k in 1..=n {
            let mut acc = a[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / two_s0;
        }
        Series(s)
    }

    pub fn recip(&self) -> Self {
        Series::constant(Interval::ONE, self.order()).div(self)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, b: &Series) -> Series {
        Series(self.0.iter().zip(&b.0).map(|(&x, &y)| x + y).collect())
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, b: &Series) -> Series {
        Series(self.0.iter().zip(&b.0).map(|(&x, &y)| x - y).collect())
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series(self.0.iter().map(|&x| -x).collect())
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, b: &Series) -> Series {
        let n = self.order();
        let mut out = vec![Interval::ZERO; n + 1];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = Interval::ZERO;
            for i in 0..=k {
                acc += self.0[i] * b.0[k - i];
            }
            *o = acc;
        }
        Series(out)
    }
}
