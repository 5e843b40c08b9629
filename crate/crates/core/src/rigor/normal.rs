//! Standard normal CDF Φ and quantile Φ⁻¹ with rigorous enclosures.

use super::config::RigorConfig;
use super::elementary::{exp, inv_sqrt_2pi};
use super::interval::Interval;
use super::RigorError;

/// Standard normal density on an interval.
pub fn phi_pdf(x: Interval) -> Interval {
    // exp(-x²/2) is even; use the square for a tight argument.
    let e = exp(-(x.sqr() * 0.5));
    e * inv_sqrt_2pi()
}

/// Series Φ(a) = ½ + φ(a)·Σ a^{2n+1}/(2n+1)!!; all terms share the sign of
/// `a`, so there is no cancellation inside the sum.
fn phi_series(a: f64) -> Interval {
    if a == 0.0 {
        return Interval::HALF;
    }
    let x = Interval::point(a.abs());
    let x2 = x.sqr();
    let mut term = x;
    let mut sum = x;
    let mut n = 0usize;
    loop {
        n += 1;
        term = term * x2 / Interval::point((2 * n + 1) as f64);
        sum += term;
        let q = x2.hi() / (2 * n + 3) as f64;
        if q < 0.5 && term.hi() <= 1e-18 * sum.lo() {
            // Remaining terms are dominated by a geometric series of ratio q.
            let tail = term.hi() * q / (1.0 - q);
            sum += Interval::new(0.0, tail * (1.0 + 1e-12));
            break;
        }
        assert!(n < 400, "Φ series failed to converge at {a}");
    }
    let core = phi_pdf(x) * sum;
    if a > 0.0 {
        Interval::HALF + core
    } else {
        Interval::HALF - core
    }
}

/// Mills ratio R(a) = (1 − Φ(a))/φ(a) for a > 0 via Laplace's continued
/// fraction 1/(a + 1/(a + 2/(a + 3/(a + …)))), whose successive
/// approximants alternate around the true value.
fn mills_ratio(a: f64) -> Interval {
    let x = Interval::point(a);
    let approximant = |depth: usize| -> Interval {
        let mut v = x;
        for k in (1..depth).rev() {
            v = x + Interval::point(k as f64) / v;
        }
        v.recip()
    };
    // Roughly the depth needed for full precision; doubled if not enough.
    let mut depth = ((800.0 / (a * a)).ceil() as usize).clamp(16, 1024);
    loop {
        let r = approximant(depth).hull(approximant(depth + 1));
        if r.width() <= 4.0 * f64::EPSILON * r.lo() || depth >= 4096 {
            return r;
        }
        depth *= 2;
    }
}

/// Upper tail 1 − Φ(a) for a > 0 in the continued-fraction regime.
fn upper_tail(a: f64, cfg: &RigorConfig) -> Interval {
    let x = Interval::point(a);
    let dens = phi_pdf(x);
    if a > cfg.clamp_magnitude {
        // Gordon's inequality: a/(a²+1) < R(a) < 1/a.
        let lower = x / (x.sqr() + 1.0);
        let upper = x.recip();
        return dens * Interval::new(lower.lo(), upper.hi());
    }
    dens * mills_ratio(a)
}

const NEGATIVE_SERIES_LIMIT: f64 = 2.0;

fn phi_point(x: f64, cfg: &RigorConfig) -> Interval {
    if x.is_nan() {
        return Interval::UNIT;
    }
    if x == f64::NEG_INFINITY {
        return Interval::ZERO;
    }
    if x == f64::INFINITY {
        return Interval::ONE;
    }
    // Below zero the series subtracts from ½, so it is only used while the
    // result stays comparable to ½; further out the tail form keeps full
    // relative accuracy.
    let neg_limit = cfg.series_crossover.min(NEGATIVE_SERIES_LIMIT);
    let r = if x <= cfg.series_crossover && x >= -neg_limit {
        phi_series(x)
    } else if x > 0.0 {
        Interval::ONE - upper_tail(x, cfg)
    } else {
        upper_tail(-x, cfg)
    };
    r.clip(Interval::UNIT)
}

/// Φ over an interval. Monotonicity reduces it to the two endpoints.
pub fn phi_cdf(x: Interval, cfg: &RigorConfig) -> Interval {
    let lo = phi_point(x.lo(), cfg).lo();
    let hi = phi_point(x.hi(), cfg).hi();
    Interval::new(lo, hi)
}

/// Result of [`phi_inv`]. When `saturated` is set, at least one endpoint lies
/// beyond the clamp magnitude and the corresponding bound is only the
/// one-sided statement `Φ⁻¹(q) ≤ −clamp` (resp. `≥ clamp`) or an exact ±∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantile {
    pub value: Interval,
    pub saturated: bool,
}

fn quantile_guess(q: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * q)
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Lower,
    Upper,
}

/// One-sided bound on Φ⁻¹(q) for a point `q`, plus a saturation flag.
fn quantile_bound(q: f64, side: Side, cfg: &RigorConfig) -> (f64, bool) {
    let c = cfg.clamp_magnitude;
    if q <= 0.0 {
        return (f64::NEG_INFINITY, true);
    }
    if q >= 1.0 {
        return (f64::INFINITY, true);
    }
    let p_lo = phi_point(-c, cfg);
    let p_hi = phi_point(c, cfg);
    if q < p_lo.lo() {
        return match side {
            Side::Lower => (f64::NEG_INFINITY, true),
            Side::Upper => (-c, true),
        };
    }
    if q > p_hi.hi() {
        return match side {
            Side::Lower => (c, true),
            Side::Upper => (f64::INFINITY, true),
        };
    }
    let mut g = quantile_guess(q).clamp(-c, c);
    for _ in 0..1 {
        let d = phi_point(g, cfg).mid() - q;
        let dens = phi_pdf(Interval::point(g)).mid();
        if dens > 0.0 && d.is_finite() {
            g = (g - d / dens).clamp(-c, c);
        }
    }
    let ok = |cand: f64| {
        let v = phi_point(cand, cfg);
        match side {
            Side::Lower => v.hi() <= q,
            Side::Upper => v.lo() >= q,
        }
    };
    let mut step = 2.0 * f64::EPSILON * g.abs().max(1e-3);
    let mut cand = g;
    let mut failed: Option<f64> = None;
    for _ in 0..200 {
        if ok(cand) {
            // Pull the bound back towards the last rejected candidate.
            if let Some(mut bad) = failed {
                for _ in 0..4 {
                    let m = 0.5 * (bad + cand);
                    if m == bad || m == cand {
                        break;
                    }
                    if ok(m) {
                        cand = m;
                    } else {
                        bad = m;
                    }
                }
            }
            return (cand, false);
        }
        failed = Some(cand);
        cand = match side {
            Side::Lower => g - step,
            Side::Upper => g + step,
        };
        step *= 4.0;
        if cand <= -c {
            return match side {
                Side::Lower => (f64::NEG_INFINITY, true),
                Side::Upper => (cand, false),
            };
        }
        if cand >= c {
            return match side {
                Side::Lower => (cand, false),
                Side::Upper => (f64::INFINITY, true),
            };
        }
    }
    unreachable!("quantile bracket did not close for q={q}")
}

/// Φ⁻¹ over an interval of probabilities.
pub fn phi_inv(q: Interval, cfg: &RigorConfig) -> Result<Quantile, RigorError> {
    let q = q.intersect(Interval::UNIT).ok_or(RigorError::EmptyDomain)?;
    let (lo, s1) = quantile_bound(q.lo(), Side::Lower, cfg);
    let (hi, s2) = quantile_bound(q.hi(), Side::Upper, cfg);
    Ok(Quantile {
        value: Interval::new(lo, hi.max(lo)),
        saturated: s1 || s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> RigorConfig {
        RigorConfig::default()
    }

    #[test]
    fn phi_symmetry_and_limits() {
        let c = cfg();
        assert_eq!(phi_cdf(Interval::ZERO, &c), Interval::HALF);
        let neg = phi_cdf(Interval::point(-1e300), &c);
        let pos = phi_cdf(Interval::point(1e300), &c);
        assert!(neg.contains(0.0) && neg.hi() < 1e-300);
        assert!(pos.contains(1.0));
        assert_eq!(phi_cdf(Interval::point(f64::NEG_INFINITY), &c), Interval::ZERO);
    }

    #[test]
    fn phi_small_argument_expansion() {
        let v = phi_cdf(Interval::point(0.1), &cfg());
        let s = (2.0 * std::f64::consts::PI).sqrt();
        let approx = 0.5 + 0.1 / s - 0.001 / (6.0 * s);
        assert!((v.mid() - approx).abs() < 1e-6);
    }

    #[test]
    fn phi_matches_high_precision_values() {
        // Reference values computed with 40-digit arithmetic.
        let table = [
            (-8.0, 6.220960574271784e-16),
            (-6.0, 9.86587645037698e-10),
            (-4.5, 3.3976731247300603e-06),
            (-3.0, 0.0013498980316300946),
            (-1.0, 0.15865525393145705),
            (0.5, 0.6914624612740131),
            (2.9, 0.998134186699616),
            (3.1, 0.9990323967867817),
            (5.0, 0.9999997133484281),
            (7.5, 0.9999999999999681),
        ];
        let c = cfg();
        for (x, want) in table {
            let v = phi_cdf(Interval::point(x), &c);
            let tol = 2.0 * f64::EPSILON * want;
            assert!(v.lo() <= want + tol && want - tol <= v.hi(), "x={x}: {v:?}");
            assert!(v.width() <= 1e-14 * want, "x={x} width {}", v.width());
        }
    }

    #[test]
    fn phi_agrees_with_reference_across_regimes() {
        let c = cfg();
        for i in -120..=120 {
            let x = i as f64 * 0.1;
            let v = phi_cdf(Interval::point(x), &c);
            let r = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
            let tol = 1e-13 * r.max(1e-300) + 1e-300;
            assert!(
                v.lo() <= r + tol && r - tol <= v.hi(),
                "x={x}: {v:?} vs {r}"
            );
            if x.abs() <= c.clamp_magnitude {
                assert!(v.width() <= 2e-13 * r, "x={x} width {}", v.width());
            }
        }
    }

    #[test]
    fn crossover_is_continuous() {
        let c = cfg();
        let below = phi_cdf(Interval::point(c.series_crossover), &c);
        let above = phi_cdf(Interval::point(c.series_crossover.next_up()), &c);
        assert!(below.overlaps(above) || above.lo() - below.hi() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let c = cfg();
        let z = phi_inv(Interval::HALF, &c).unwrap();
        assert!(z.value.contains(0.0) && !z.saturated);
        let x = 1.2345;
        let q = phi_cdf(Interval::point(x), &c);
        let back = phi_inv(q, &c).unwrap();
        assert!(back.value.contains(x));
        let v = phi_inv(Interval::point(0.975), &c).unwrap().value;
        assert!((v.mid() - 1.959964).abs() < 1e-5);
        assert!(v.width() < 1e-13);
    }

    #[test]
    fn quantile_oracle_by_bisection() {
        // Independent oracle: bisect on the Φ enclosure midpoints.
        let c = cfg();
        let q = 0.975;
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if phi_cdf(Interval::point(m), &c).mid() < q {
                lo = m;
            } else {
                hi = m;
            }
        }
        let v = phi_inv(Interval::point(q), &c).unwrap().value;
        assert!((v.mid() - lo).abs() < 1e-14);
    }

    #[test]
    fn quantile_degenerate_and_saturated() {
        let c = cfg();
        let z = phi_inv(Interval::new(0.0, 0.5), &c).unwrap();
        assert!(z.saturated);
        assert_eq!(z.value.lo(), f64::NEG_INFINITY);
        assert!(z.value.contains(0.0));
        let tiny = phi_inv(Interval::point(1e-30), &c).unwrap();
        assert!(tiny.saturated && tiny.value.hi() <= -c.clamp_magnitude);
        let e = phi_inv(Interval::new(1.5, 2.0), &c);
        assert_eq!(e, Err(RigorError::EmptyDomain));
    }

    #[test]
    fn quantile_round_trip_grid() {
        let c = cfg();
        for i in 1..1000 {
            let q = i as f64 / 1000.0;
            let z = phi_inv(Interval::point(q), &c).unwrap();
            assert!(!z.saturated);
            assert!(phi_cdf(z.value, &c).contains(q), "q={q}");
            assert!(z.value.width() < 1e-12, "q={q} width {}", z.value.width());
        }
    }
}
