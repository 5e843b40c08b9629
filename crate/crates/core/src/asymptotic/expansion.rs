//! Truncated multivariate polynomials in (b₁, b₂, c₁, c₂).

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

pub const B1: usize = 0;
pub const B2: usize = 1;
pub const C1: usize = 2;
pub const C2: usize = 3;
pub const NAMES: [&str; 4] = ["b1", "b2", "c1", "c2"];

/// Exponents of b₁, b₂, c₁, c₂.
pub type Monomial = [u8; 4];

pub fn degree(m: &Monomial) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

/// Σ coefficient·monomial, every term of total degree > `order` dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub order: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Expansion {
    pub fn zero(order: usize) -> Self {
        Expansion { order, terms: BTreeMap::new() }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut e = Self::zero(order);
        e.add_term([0; 4], c);
        e
    }

    pub fn var(k: usize, order: usize) -> Self {
        let mut m = [0; 4];
        m[k] = 1;
        let mut e = Self::zero(order);
        e.add_term(m, 1.0);
        e
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if degree(&m) > self.order || c == 0.0 {
            return;
        }
        *self.terms.entry(m).or_insert(0.0) += c;
    }

    pub fn coeff(&self, m: Monomial) -> f64 {
        self.terms.get(&m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff([0; 4])
    }

    /// Nonzero terms in monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, f64)> + '_ {
        self.terms.iter().filter(|(_, &c)| c != 0.0).map(|(m, c)| (*m, *c))
    }

    pub fn scale(&self, s: f64) -> Self {
        Expansion { order: self.order, terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect() }
    }

    /// Σ a_k·self^k.
    pub fn compose(&self, a: &[f64]) -> Self {
        let mut acc = Self::zero(self.order);
        for &ak in a.iter().rev() {
            acc = &(&acc * self) + &Self::constant(ak, self.order);
        }
        acc
    }

    /// Antiderivative in variable k vanishing where that variable is 0.
    pub fn integrate(&self, k: usize) -> Self {
        let mut out = Self::zero(self.order);
        for (m, c) in self.terms() {
            let mut m2 = m;
            m2[k] += 1;
            out.add_term(m2, c / m2[k] as f64);
        }
        out
    }

    /// Replaces each variable by an expansion.
    pub fn substitute(&self, images: [&Expansion; 4]) -> Self {
        let mut out = Self::zero(self.order);
        for (m, c) in self.terms() {
            let mut t = Self::constant(c, self.order);
            for (k, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t = &t * images[k];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Splits off terms of odd total degree.
    pub fn even_odd(&self) -> (Self, Self) {
        let (mut even, mut odd) = (Self::zero(self.order), Self::zero(self.order));
        for (m, c) in self.terms() {
            if degree(&m) % 2 == 0 { even.add_term(m, c) } else { odd.add_term(m, c) }
        }
        (even, odd)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    /// Terms are summed in monomial order, so evaluation is deterministic.
    pub fn eval(&self, x: [f64; 4]) -> f64 {
        self.terms().map(|(m, c)| c * mono(&m, &x)).sum()
    }

    /// One line per term, e.g. `+0.151368 b1^2`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, c) in self.terms() {
            let mut name: Vec<String> = vec![];
            for (k, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => name.push(NAMES[k].to_string()),
                    _ => name.push(format!("{}^{}", NAMES[k], e)),
                }
            }
            s.push_str(&format!("{:+.12} {}\n", c, if name.is_empty() { "1".into() } else { name.join("*") }));
        }
        s
    }
}

pub fn mono(m: &Monomial, x: &[f64; 4]) -> f64 {
    m.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
}

impl Add for &Expansion {
    type Output = Expansion;
    fn add(self, o: &Expansion) -> Expansion {
        let mut out = self.clone();
        out.order = self.order.min(o.order);
        out.terms.retain(|m, _| degree(m) <= out.order);
        for (m, c) in o.terms() {
            out.add_term(m, c);
        }
        out
    }
}

impl Sub for &Expansion {
    type Output = Expansion;
    fn sub(self, o: &Expansion) -> Expansion {
        self + &(-o)
    }
}

impl Neg for &Expansion {
    type Output = Expansion;
    fn neg(self) -> Expansion {
        self.scale(-1.0)
    }
}

impl Mul for &Expansion {
    type Output = Expansion;
    fn mul(self, o: &Expansion) -> Expansion {
        let mut out = Expansion::zero(self.order.min(o.order));
        for (m1, c1) in self.terms() {
            for (m2, c2) in o.terms() {
                let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2], m1[3] + m2[3]];
                out.add_term(m, c1 * c2);
            }
        }
        out
    }
}

/// Taylor coefficients of g^α given those of g (g₀ > 0), to degree n.
pub fn series_pow(g: &[f64], alpha: f64, n: usize) -> Vec<f64> {
    let gk = |k: usize| g.get(k).copied().unwrap_or(0.0);
    let mut f = vec![gk(0).powf(alpha)];
    for m in 1..=n {
        let s: f64 = (1..=m).map(|k| ((alpha + 1.0) * k as f64 - m as f64) * gk(k) * f[m - k]).sum();
        f.push(s / (m as f64 * gk(0)));
    }
    f
}

/// Coefficients of ∫₀ˣ f.
pub fn series_integrate(f: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(f.iter().enumerate().map(|(k, c)| c / (k + 1) as f64)).collect()
}
