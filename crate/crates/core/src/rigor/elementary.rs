//! Rigorous enclosures of the elementary functions used by the rest of the
//! crate. Only interval `+ - * / sqrt` are trusted; transcendental values
//! come from truncated series with explicit remainder bounds.

use super::interval::Interval;
use std::f64::consts;

/// π.
pub fn pi() -> Interval {
    Interval::around(consts::PI)
}

/// ln 2.
pub fn ln2() -> Interval {
    Interval::around(consts::LN_2)
}

/// √(2π).
pub fn sqrt_2pi() -> Interval {
    (pi() * 2.0).sqrt()
}

/// 1/√(2π).
pub fn inv_sqrt_2pi() -> Interval {
    sqrt_2pi().recip()
}

/// √2.
pub fn sqrt2() -> Interval {
    Interval::point(2.0).sqrt()
}

const EXP_TERMS: usize = 15;
const LN2_HI: f64 = 6.93147180369123816490e-01;
const LN2_LO: f64 = 1.9082149292705877e-10;

fn inv_factorials() -> &'static [Interval; EXP_TERMS + 1] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[Interval; EXP_TERMS + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Interval::ONE; EXP_TERMS + 1];
        for k in 1..=EXP_TERMS {
            t[k] = t[k - 1] / Interval::point(k as f64);
        }
        t
    })
}

/// exp on a point argument.
fn exp_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::new(0.0, f64::INFINITY);
    }
    if x == f64::NEG_INFINITY {
        return Interval::ZERO;
    }
    if x == f64::INFINITY {
        return Interval::point(f64::INFINITY);
    }
    if x > 709.7 {
        return Interval::new(f64::MAX, f64::INFINITY);
    }
    if x < -745.0 {
        return Interval::new(0.0, f64::MIN_POSITIVE);
    }
    if x == 0.0 {
        return Interval::ONE;
    }
    // x = k ln2 + r with |r| ≲ 0.35. The high part of ln 2 has trailing
    // zero bits so k·LN2_HI is exact for |k| < 2¹¹.
    let k = (x / consts::LN_2).round();
    let r = (Interval::point(x) - Interval::point(k * LN2_HI)) - Interval::around(LN2_LO) * k;
    let inv = inv_factorials();
    let mut acc = inv[EXP_TERMS - 1];
    for j in (0..EXP_TERMS - 1).rev() {
        acc = acc * r + inv[j];
    }
    // Lagrange remainder: |r|^N/N! * e^|r| with e^0.36 < 1.5
    let m = r.mag();
    let rem = inv[EXP_TERMS] * Interval::point(m).powi(EXP_TERMS as u32) * 1.5;
    let series = acc + Interval::new(-rem.hi(), rem.hi());
    let ki = k as i32;
    // Split the scaling so intermediate powers of two stay normal.
    let half = ki / 2;
    series.ldexp(half).ldexp(ki - half)
}

/// exp over an interval.
pub fn exp(x: Interval) -> Interval {
    let lo = exp_point(x.lo()).lo();
    let hi = exp_point(x.hi()).hi();
    Interval::new(lo.max(0.0), hi)
}

const ATAN_TERMS: usize = 14;

/// atan for an interval known to satisfy |x| ≤ 0.21.
fn atan_small(x: Interval) -> Interval {
    let x2 = x.sqr();
    let mut acc = Interval::ONE / Interval::point((2 * ATAN_TERMS - 1) as f64);
    for n in (0..ATAN_TERMS - 1).rev() {
        let c = Interval::ONE / Interval::point((2 * n + 1) as f64);
        acc = c - x2 * acc;
    }
    let series = x * acc;
    // Alternating series with decreasing terms: error below the first
    // omitted term.
    let m = x.mag();
    let rem = Interval::point(m).powi(2 * ATAN_TERMS as u32 + 1)
        / Interval::point((2 * ATAN_TERMS + 1) as f64);
    series + Interval::new(-rem.hi(), rem.hi())
}

fn atan_point(x: f64) -> Interval {
    if x.is_nan() {
        return Interval::new(-consts::FRAC_PI_2, consts::FRAC_PI_2).hull(pi() * 0.5);
    }
    if x == 0.0 {
        return Interval::ZERO;
    }
    if x < 0.0 {
        return -atan_point(-x);
    }
    let half_pi = pi() * 0.5;
    if x.is_infinite() {
        return half_pi;
    }
    let xi = Interval::point(x);
    if x > 1.0 {
        // atan(x) = π/2 − atan(1/x)
        return half_pi - atan_reduced(xi.recip());
    }
    atan_reduced(xi)
}

/// atan for 0 ≤ x ≤ 1 (as an interval) via two half-angle reductions.
fn atan_reduced(x: Interval) -> Interval {
    // atan(x) = 2 atan(x / (1 + √(1 + x²)))
    let mut y = x;
    for _ in 0..2 {
        y = y / (Interval::ONE + (Interval::ONE + y.sqr()).sqrt());
    }
    atan_small(y).ldexp(2)
}

/// atan over an interval.
pub fn atan(x: Interval) -> Interval {
    Interval::new(atan_point(x.lo()).lo(), atan_point(x.hi()).hi())
}

fn asin_point(x: f64) -> Interval {
    assert!((-1.0..=1.0).contains(&x), "asin argument {x} outside [-1, 1]");
    if x == 1.0 {
        return pi() * 0.5;
    }
    if x == -1.0 {
        return -(pi() * 0.5);
    }
    if x == 0.0 {
        return Interval::ZERO;
    }
    let xi = Interval::point(x);
    // 1 − x² computed as (1 − x)(1 + x) to keep relative accuracy near ±1.
    let c = ((Interval::ONE - xi) * (Interval::ONE + xi)).sqrt();
    let t = xi / c;
    let r = atan(t);
    let bound = pi() * 0.5;
    r.clip(Interval::new(-bound.hi(), bound.hi()))
}

/// asin over an interval ⊆ [−1, 1].
pub fn asin(x: Interval) -> Interval {
    let lo = x.lo().max(-1.0);
    let hi = x.hi().min(1.0);
    Interval::new(asin_point(lo).lo(), asin_point(hi).hi())
}

/// acos over an interval ⊆ [−1, 1].
pub fn acos(x: Interval) -> Interval {
    let r = pi() * 0.5 - asin(x);
    Interval::new(r.lo().max(0.0), r.hi())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(iv: Interval, v: f64, tol: f64) -> bool {
        iv.contains(v) || (iv.lo() - v).abs() <= tol || (iv.hi() - v).abs() <= tol
    }

    #[test]
    fn exp_known_values() {
        assert_eq!(exp(Interval::ZERO), Interval::ONE);
        let e = exp(Interval::ONE);
        assert!(e.contains(consts::E) || close(e, consts::E, 1e-15));
        assert!(e.width() < 1e-14);
        let tiny = exp(Interval::point(-700.0));
        assert!(tiny.lo() > 0.0 && tiny.hi() < 1e-300);
    }

    #[test]
    fn exp_matches_libm_closely() {
        for i in -400..=400 {
            let x = i as f64 * 0.173;
            let e = exp(Interval::point(x));
            let r = x.exp();
            assert!(
                (e.lo() - r).abs() <= 4.0 * r * f64::EPSILON
                    && (e.hi() - r).abs() <= 4.0 * r * f64::EPSILON,
                "x={x} {e:?} vs {r}"
            );
            assert!(e.width() <= 8.0 * r * f64::EPSILON);
        }
    }

    #[test]
    fn atan_and_friends() {
        let q = atan(Interval::ONE);
        assert!(close(q, consts::FRAC_PI_4, 2e-16));
        assert!(q.width() < 1e-15);
        for i in -50..=50 {
            let x = i as f64 * 0.37;
            let a = atan(Interval::point(x));
            assert!(close(a, x.atan(), 4e-16), "atan({x}) = {a:?}");
        }
        for i in -20..=20 {
            let x = i as f64 * 0.049;
            let s = asin(Interval::point(x));
            let c = acos(Interval::point(x));
            assert!(close(s, x.asin(), 4e-16), "asin({x}) = {s:?}");
            assert!(close(c, x.acos(), 4e-16), "acos({x}) = {c:?}");
        }
        assert!(acos(Interval::point(-1.0)).contains(consts::PI));
        assert!(asin(Interval::point(0.999999)).width() < 1e-12);
    }

    #[test]
    fn pi_bracket() {
        let p = pi();
        assert!(p.lo() < consts::PI && consts::PI < p.hi());
        assert!(sqrt_2pi().contains((2.0 * consts::PI).sqrt()));
    }
}
