//! Small-threshold expansions of Φ, Φ_ρ and the pair soundness
//! Φ(c₁) + Φ(c₂) − 2Φ_ρ(c₁, c₂), where Φ_ρ(c₁, c₂) = Pr[X ≤ c₁, Y ≤ c₂].
//!
//! Everything is built by composing one-variable Taylor series:
//!
//!   Φ_ρ(c₁, c₂) = Φ_ρ(0, 0) + ∫₀^{c₂} φ(y) Φ(−ρy/s) dy + ∫₀^{c₁} φ(x) Φ((c₂ − ρx)/s) dx,
//!
//! with s = √(1 − ρ²) and Φ_ρ(0, 0) = ½ − acos(ρ)/(2π). When ρ depends on
//! the biases it enters as an expansion too, so acos and 1/s are composed
//! around its constant term.

use super::expansion::{mono, series_integrate, series_pow, Expansion, B1, B2, C1, C2};
use crate::rigor::{self, Constants, Interval, RigorConfig};
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const ORDER: usize = 4;

/// Arguments with every |·| ≤ WINDOW keep the soundness expansion within
/// 1e-4 of the exact value (worst grid error about 6e-5; 5.6e-3 at 0.3).
pub const WINDOW: f64 = 0.15;

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// φ(x) = (2π)^{-1/2} Σ (−1)^k x^{2k} / (2^k k!).
fn pdf_coeffs(n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n + 1];
    let mut term = inv_sqrt_2pi();
    for k in 0..=n / 2 {
        a[2 * k] = term;
        term *= -0.5 / (k + 1) as f64;
    }
    a
}

fn phi_coeffs(n: usize) -> Vec<f64> {
    let mut a = series_integrate(&pdf_coeffs(n));
    a[0] = 0.5;
    a.truncate(n + 1);
    a
}

fn phi_of(u: &Expansion) -> Expansion {
    u.compose(&phi_coeffs(u.order))
}

fn pdf_of(u: &Expansion) -> Expansion {
    u.compose(&pdf_coeffs(u.order))
}

/// Φ_ρ(c₁, c₂) for a correlation given as an expansion in the biases.
pub fn phi_rho_expansion(rho: &Expansion) -> Expansion {
    let n = rho.order;
    let r0 = rho.constant_term();
    let delta = rho - &Expansion::constant(r0, n);
    // (1 − ρ²)^{-1/2} and acos ρ around r0.
    let inv_s_coeffs = series_pow(&[1.0 - r0 * r0, -2.0 * r0, -1.0], -0.5, n);
    let inv_s = delta.compose(&inv_s_coeffs);
    let mut acos_coeffs = series_integrate(&inv_s_coeffs.iter().map(|c| -c).collect::<Vec<_>>());
    acos_coeffs[0] = r0.acos();
    let acos = delta.compose(&acos_coeffs);

    let (c1, c2) = (Expansion::var(C1, n), Expansion::var(C2, n));
    let arg1 = &(&c2 - &(rho * &c1)) * &inv_s;
    let arg2 = -&(&(rho * &c2) * &inv_s);
    let i1 = (&pdf_of(&c1) * &phi_of(&arg1)).integrate(C1);
    let i2 = (&pdf_of(&c2) * &phi_of(&arg2)).integrate(C2);
    let base = &Expansion::constant(0.5, n) - &acos.scale(1.0 / (2.0 * PI));
    &(&base + &i1) + &i2
}

/// ρ = (b₁₂ − b₁b₂)/√((1 − b₁²)(1 − b₂²)) with b₁₂ fixed.
pub fn rho_expansion(b12: f64, n: usize) -> Expansion {
    let inv_sqrt_one_minus = series_pow(&[1.0, 1.0], -0.5, n);
    let factor = |k: usize| {
        let b = Expansion::var(k, n);
        (-&(&b * &b)).compose(&inv_sqrt_one_minus)
    };
    let num = &Expansion::constant(b12, n) - &(&Expansion::var(B1, n) * &Expansion::var(B2, n));
    &(&num * &factor(B1)) * &factor(B2)
}

/// Φ(c₁) + Φ(c₂) − 2Φ_ρ(c₁, c₂) with ρ eliminated through b₁₂ = `b12`,
/// before discarding odd-degree terms.
pub fn soundness_expansion_full(b12: f64) -> Expansion {
    let n = ORDER;
    let phi_rho = phi_rho_expansion(&rho_expansion(b12, n));
    let p = &phi_of(&Expansion::var(C1, n)) + &phi_of(&Expansion::var(C2, n));
    &p - &phi_rho.scale(2.0)
}

/// The even part of [`soundness_expansion_full`]. The exact function is
/// invariant under negating all four arguments, so odd-degree coefficients
/// are rounding noise.
pub fn soundness_expansion(b12: f64) -> Expansion {
    let (even, odd) = soundness_expansion_full(b12).even_odd();
    debug_assert!(odd.max_abs_coeff() < 1e-14);
    even
}

/// Midpoint of the rigorous b_GW enclosure at default settings.
pub fn b_gw() -> f64 {
    static B: OnceLock<f64> = OnceLock::new();
    *B.get_or_init(|| Constants::compute(&RigorConfig::default()).b_gw.mid())
}

fn at_bgw() -> &'static Expansion {
    static E: OnceLock<Expansion> = OnceLock::new();
    E.get_or_init(|| soundness_expansion(b_gw()))
}

pub fn taylor_phi(c: f64) -> f64 {
    static E: OnceLock<Expansion> = OnceLock::new();
    E.get_or_init(|| phi_of(&Expansion::var(C1, ORDER))).eval([0.0, 0.0, c, 0.0])
}

/// Degree-4 expansion of Φ_ρ(c₁, c₂). Mirror-image monomials are summed in
/// pairs, so swapping c₁ and c₂ gives a bitwise identical result.
pub fn taylor_phi_rho(c1: f64, c2: f64, rho: f64) -> f64 {
    let e = phi_rho_expansion(&Expansion::constant(rho, ORDER));
    let x = [0.0, 0.0, c1, c2];
    let mut sum = 0.0;
    for (m, c) in e.terms() {
        let swapped = [m[0], m[1], m[3], m[2]];
        if m < swapped {
            let paired = 0.5 * (c + e.coeff(swapped));
            sum += paired * (mono(&m, &x) + mono(&swapped, &x));
        } else if m == swapped {
            sum += c * mono(&m, &x);
        }
    }
    sum
}

pub fn soundness_expansion_at_bgw(b1: f64, b2: f64, c1: f64, c2: f64) -> f64 {
    at_bgw().eval([b1, b2, c1, c2])
}

/// Rigorous Φ(c₁) + Φ(c₂) − 2Φ_ρ(c₁, c₂) at b₁₂ = b_GW.
pub fn exact_soundness(b1: f64, b2: f64, c1: f64, c2: f64, cfg: &RigorConfig) -> Interval {
    let bgw = Constants::compute(cfg).b_gw;
    exact_soundness_with(bgw, b1, b2, c1, c2, cfg)
}

pub fn exact_soundness_with(b12: Interval, b1: f64, b2: f64, c1: f64, c2: f64, cfg: &RigorConfig) -> Interval {
    let (b1, b2) = (Interval::point(b1), Interval::point(b2));
    let den = ((Interval::ONE - b1.sqr()) * (Interval::ONE - b2.sqr())).sqrt();
    let rho = ((b12 - b1 * b2) / den).clip(Interval::new(-1.0, 1.0));
    let q1 = rigor::phi_cdf(Interval::point(c1), cfg);
    let q2 = rigor::phi_cdf(Interval::point(c2), cfg);
    q1 + q2 - rigor::gamma(rho, q1, q2, cfg).ldexp(1)
}

/// E over g ~ N(0, 1) of the expansion at the hyperplane thresholds
/// cᵢ = g·bᵢ/√(1 − bᵢ²). The integrand is a polynomial of degree 4 in g,
/// so three-point Gauss–Hermite quadrature is exact.
pub fn hyperplane_average(e: &Expansion, b1: f64, b2: f64) -> f64 {
    let (k1, k2) = (b1 / (1.0 - b1 * b1).sqrt(), b2 / (1.0 - b2 * b2).sqrt());
    let node = 3f64.sqrt();
    let at = |g: f64| e.eval([b1, b2, g * k1, g * k2]);
    (2.0 / 3.0) * at(0.0) + (at(node) + at(-node)) / 6.0
}
