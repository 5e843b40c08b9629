//! Bivariate normal orthant probabilities Γ_ρ(q₁, q₂) and their partials.
//!
//! Point values come from Γ_ρ = q₁q₂ + ∫₀^ρ ∂Γ/∂r dr. Each quadrature cell
//! carries a Taylor model of the integrand: coefficients at the cell centre
//! plus a Lagrange remainder whose coefficient is enclosed over the whole
//! cell.

use super::config::RigorConfig;
use super::elementary::{exp, pi};
use super::interval::Interval;
use super::normal::{phi_cdf, phi_inv};
use super::series::Series;
use super::RigorError;

/// Quadrature data that depends only on the thresholds h = Φ⁻¹(q₁),
/// k = Φ⁻¹(q₂): A = h² + k², B = hk.
#[derive(Clone, Copy)]
struct Thresholds {
    a: Interval,
    b: Interval,
}

fn integrand_series(t: Thresholds, r0: Interval, order: usize) -> Series {
    let r = Series::variable(r0, order);
    let den = (-&r.sqr()).add_const(Interval::ONE);
    let num = &Series::constant(t.a, order) - &r.scale(t.b.ldexp(1));
    let expo = num.div(&den).scale(Interval::point(-0.5));
    let norm = (pi().ldexp(1)).recip();
    expo.exp().div(&den.sqrt()).scale(norm)
}

/// ∫ u^j over [l, u] for interval endpoints.
fn power_integral(l: Interval, u: Interval, j: u32) -> Interval {
    (u.powi(j + 1) - l.powi(j + 1)) / ((j + 1) as f64)
}

fn cell_integral(t: Thresholds, a: f64, b: f64, order: usize) -> Interval {
    let m = 0.5 * (a + b);
    let l = Interval::point(a) - m;
    let u = Interval::point(b) - m;
    let s = integrand_series(t, Interval::point(m), order);
    let mut sum = Interval::ZERO;
    for j in 0..=order {
        sum += s.coeff(j) * power_integral(l, u, j as u32);
    }
    let c = integrand_series(t, Interval::new(a, b), order + 1).coeff(order + 1);
    let p = (order + 1) as u32;
    let rem = if p % 2 == 0 {
        c * power_integral(l, u, p)
    } else {
        let m = (u.powi(p + 1) + l.powi(p + 1)) / ((p + 1) as f64);
        Interval::new(-c.mag(), c.mag()) * m
    };
    sum + rem
}

struct Cell {
    a: f64,
    b: f64,
    v: Interval,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.v.width() == o.v.width()
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.v.width().total_cmp(&o.v.width())
    }
}

const FLOOR: f64 = 1e-12;

/// Absolute width the quadrature aims for: 2⁻⁽ᵖ⁻⁸⁾ for p precision bits,
/// a little above the rounding floor of the cell sums.
pub fn quadrature_target(cfg: &RigorConfig) -> f64 {
    (8.0 - cfg.precision_bits as f64).exp2()
}

/// ∫ₐᵇ ∂Γ/∂r dr for a < b. Starts from uniform cells and keeps bisecting the
/// widest enclosure until the total is tight or the cell budget runs out.
/// A cell and the sum of its halves enclose the same integral, so a split
/// that does not help never loosens the result.
fn rho_integral(t: Thresholds, a: f64, b: f64, cfg: &RigorConfig) -> Interval {
    let n = cfg.quadrature_cells.max(1);
    let order = cfg.taylor_order.max(1);
    let budget = n * 64;
    let step = (b - a) / n as f64;
    let mut heap = std::collections::BinaryHeap::with_capacity(2 * n);
    for i in 0..n {
        let lo = if i == 0 { a } else { a + step * i as f64 };
        let hi = if i + 1 == n { b } else { a + step * (i + 1) as f64 };
        if hi > lo {
            heap.push(Cell { a: lo, b: hi, v: cell_integral(t, lo, hi, order) });
        }
    }
    let mut frozen = Interval::ZERO;
    let mut count = heap.len();
    let initial: Interval = heap.iter().map(|c| c.v).sum();
    let target = quadrature_target(cfg) * (1.0 + initial.mag().min(1.0));
    let mut width: f64 = heap.iter().map(|c| c.v.width()).sum();
    if !width.is_finite() {
        width = f64::MAX;
    }
    while count < budget && width > target {
        let Some(c) = heap.pop() else { break };
        let m = 0.5 * (c.a + c.b);
        if m <= c.a || m >= c.b {
            frozen += c.v;
            continue;
        }
        let l = cell_integral(t, c.a, m, order);
        let r = cell_integral(t, m, c.b, order);
        // Cells at the rounding floor stop improving; anything wider is
        // still converging, if slowly, towards an endpoint singularity.
        if c.v.width() < FLOOR && (l + r).width() >= c.v.width() {
            frozen += c.v;
            continue;
        }
        width += l.width() + r.width() - c.v.width();
        heap.push(Cell { a: c.a, b: m, v: l });
        heap.push(Cell { a: m, b: c.b, v: r });
        count += 1;
        // Recompute after removing a wide cell; the running sum would
        // otherwise lose everything to cancellation.
        if !width.is_finite() || c.v.width() > 1e-9 {
            width = heap.iter().map(|c| c.v.width()).sum::<f64>() + frozen.width();
        }
    }
    heap.iter().map(|c| c.v).sum::<Interval>() + frozen
}

fn frechet(q1: Interval, q2: Interval) -> Interval {
    let lower = (q1 + q2 - 1.0).max(Interval::ZERO);
    let upper = q1.min(q2);
    Interval::new(lower.lo(), upper.hi())
}

fn gamma_point(rho: f64, q1: f64, q2: f64, cfg: &RigorConfig) -> Interval {
    let (iq1, iq2) = (Interval::point(q1), Interval::point(q2));
    if q1 <= 0.0 || q2 <= 0.0 {
        return Interval::ZERO;
    }
    if q1 >= 1.0 {
        return iq2;
    }
    if q2 >= 1.0 {
        return iq1;
    }
    let indep = iq1 * iq2;
    if rho == 0.0 {
        return indep;
    }
    let fr = frechet(iq1, iq2);
    if rho >= 1.0 {
        return iq1.min(iq2);
    }
    if rho <= -1.0 {
        return (iq1 + iq2 - 1.0).max(Interval::ZERO);
    }
    // Slepian: Γ_ρ ≥ q₁q₂ for ρ ≥ 0 and ≤ q₁q₂ for ρ ≤ 0.
    let sided = if rho > 0.0 {
        Interval::new(indep.lo(), fr.hi())
    } else {
        Interval::new(fr.lo(), indep.hi())
    };
    let h = phi_inv(iq1, cfg).expect("interior probability");
    let k = phi_inv(iq2, cfg).expect("interior probability");
    if h.saturated || k.saturated {
        return sided;
    }
    let t = Thresholds {
        a: h.value.sqr() + k.value.sqr(),
        b: h.value * k.value,
    };
    let v = if rho > 0.0 {
        indep + rho_integral(t, 0.0, rho, cfg)
    } else {
        indep - rho_integral(t, rho, 0.0, cfg)
    };
    v.intersect(sided).unwrap_or(sided)
}

/// Encloses Γ_ρ(q₁, q₂). Γ is nondecreasing in all three arguments, so the
/// enclosure is spanned by the two extreme corners.
pub fn gamma(rho: Interval, q1: Interval, q2: Interval, cfg: &RigorConfig) -> Interval {
    let rho = rho.clip(Interval::SIGNED_UNIT);
    let q1 = q1.clip(Interval::UNIT);
    let q2 = q2.clip(Interval::UNIT);
    let lo = gamma_point(rho.lo(), q1.lo(), q2.lo(), cfg).lo();
    let hi = if rho.is_point() && q1.is_point() && q2.is_point() {
        gamma_point(rho.lo(), q1.lo(), q2.lo(), cfg).hi()
    } else {
        gamma_point(rho.hi(), q1.hi(), q2.hi(), cfg).hi()
    };
    Interval::new(lo.max(0.0), hi.min(1.0))
}

/// (∂Γ/∂q₁, ∂Γ/∂q₂, ∂Γ/∂ρ) in closed form.
pub fn gamma_partials(
    rho: Interval,
    q1: Interval,
    q2: Interval,
    cfg: &RigorConfig,
) -> Result<(Interval, Interval, Interval), RigorError> {
    if !(rho.lo() > -1.0 && rho.hi() < 1.0) {
        return Err(RigorError::DegenerateInput("correlation must lie in (-1, 1)"));
    }
    for q in [q1, q2] {
        if !(q.lo() > 0.0 && q.hi() < 1.0) {
            return Err(RigorError::DegenerateInput("probabilities must lie in (0, 1)"));
        }
    }
    let h = phi_inv(q1, cfg)?.value;
    let k = phi_inv(q2, cfg)?.value;
    let one_m = (Interval::ONE - rho) * (Interval::ONE + rho);
    let s = one_m.sqrt();
    let d1 = phi_cdf((k - rho * h) / s, cfg);
    let d2 = phi_cdf((h - rho * k) / s, cfg);
    // h² − 2ρhk + k² = (h − ρk)² + (1 − ρ²)k²
    let expo = -((h - rho * k).sqr() / one_m.ldexp(1)) - k.sqr().ldexp(-1);
    let dr = exp(expo) / (pi().ldexp(1) * s);
    Ok((d1, d2, Interval::new(dr.lo().max(0.0), dr.hi())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigor::elementary::asin;

    fn cfg() -> RigorConfig {
        RigorConfig::default()
    }

    fn p(x: f64) -> Interval {
        Interval::point(x)
    }

    #[test]
    fn independence_and_limits() {
        let c = cfg();
        assert!(gamma(p(0.0), p(0.5), p(0.5), &c).contains(0.25));
        assert!(gamma(p(-0.3), p(0.37), p(1.0), &c).contains(0.37));
        assert_eq!(gamma(p(0.6), p(0.37), p(0.0), &c), Interval::ZERO);
        assert!(gamma(p(1.0), p(0.2), p(0.7), &c).contains(0.2));
        assert!(gamma(p(-1.0), p(0.4), p(0.7), &c).contains(0.1));
    }

    #[test]
    fn quadrant_identity_is_tight() {
        let c = cfg();
        for i in 1..40 {
            let r = -0.975 + i as f64 * 0.05;
            let g = gamma(p(r), Interval::HALF, Interval::HALF, &c);
            let want = Interval::point(0.25) + asin(p(r)) / pi().ldexp(1);
            assert!(g.overlaps(want), "rho={r}: {g:?} vs {want:?}");
            assert!(g.width() < 1e-13, "rho={r} width {}", g.width());
        }
    }

    #[test]
    fn partials_at_trivial_points() {
        let c = cfg();
        let (d1, _, _) = gamma_partials(p(0.0), p(0.3), p(0.7), &c).unwrap();
        assert!(d1.contains(0.7) || (d1.mid() - 0.7).abs() < 1e-15);
        let (_, _, dr) = gamma_partials(p(0.0), p(0.5), p(0.5), &c).unwrap();
        assert!(dr.contains(1.0 / (2.0 * std::f64::consts::PI)));
        assert!(matches!(
            gamma_partials(p(1.0), p(0.5), p(0.5), &c),
            Err(RigorError::DegenerateInput(_))
        ));
        assert!(gamma_partials(p(0.1), p(0.0), p(0.5), &c).is_err());
    }

    #[test]
    fn partials_match_finite_differences() {
        let c = cfg();
        let (r, a, b) = (-0.5, 0.4, 0.6);
        let (d1, d2, dr) = gamma_partials(p(r), p(a), p(b), &c).unwrap();
        let g = |r: f64, a: f64, b: f64| gamma(p(r), p(a), p(b), &c).mid();
        let step = 1e-5;
        let f1 = (g(r, a + step, b) - g(r, a - step, b)) / (2.0 * step);
        let f2 = (g(r, a, b + step) - g(r, a, b - step)) / (2.0 * step);
        let fr = (g(r + step, a, b) - g(r - step, a, b)) / (2.0 * step);
        assert!((d1.mid() - f1).abs() < 1e-6);
        assert!((d2.mid() - f2).abs() < 1e-6);
        assert!((dr.mid() - fr).abs() < 1e-6);
    }

    #[test]
    fn interval_inputs_enclose_points() {
        let c = cfg();
        let wide = gamma(Interval::new(-0.7, -0.6), Interval::new(0.3, 0.35), p(0.8), &c);
        for &(r, a) in &[(-0.7, 0.3), (-0.65, 0.32), (-0.6, 0.35)] {
            assert!(gamma(p(r), p(a), p(0.8), &c).subset_of(wide));
        }
    }

    #[test]
    fn extreme_correlation_and_tails() {
        let c = cfg();
        let g = gamma(p(0.999999), p(0.3), p(0.3), &c);
        assert!(g.width() < 1e-9 && g.hi() <= 0.3);
        let t = gamma(p(-0.4), p(1e-20), p(0.5), &c);
        assert!(t.lo() >= 0.0 && t.hi() <= 1e-20);
    }
}
