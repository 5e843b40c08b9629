//! The Goemans–Williamson constants b_GW, c_GW, α_GW and the blueprint
//! offsets ν₁, ν₂.

use super::config::RigorConfig;
use super::elementary::{acos, pi};
use super::interval::Interval;
use num_rational::Rational64;

/// g(b) = cos⁻¹(b) − √((1−b)/(1+b)); its root in (−1, 0) is the stationary
/// point of b ↦ cos⁻¹(b)/(1−b).
fn stationarity(b: f64) -> Interval {
    let x = Interval::point(b);
    acos(x) - ((Interval::ONE - x) / (Interval::ONE + x)).sqrt()
}

/// Encloses b_GW by interval bisection on the stationarity condition.
pub fn compute_bgw(precision_bits: u32) -> Interval {
    assert!(precision_bits >= 16, "precision_bits must be at least 16");
    let (mut lo, mut hi) = (-0.9f64, -0.5f64);
    assert!(stationarity(lo).is_negative() && stationarity(hi).is_positive());
    let floor = (-(precision_bits as f64)).exp2();
    while hi - lo > floor {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let g = stationarity(m);
        if g.is_negative() {
            lo = m;
        } else if g.is_positive() {
            hi = m;
        } else {
            break;
        }
    }
    Interval::new(lo, hi)
}

#[derive(Clone, Debug)]
pub struct Constants {
    pub alpha_gw: Interval,
    pub b_gw: Interval,
    pub c_gw: Interval,
    /// 1 + b_GW
    pub b: Interval,
    pub nu1: Rational64,
    pub nu2: Rational64,
}

impl Constants {
    pub fn compute(cfg: &RigorConfig) -> Self {
        let b_gw = compute_bgw(cfg.precision_bits);
        let one_minus = Interval::ONE - b_gw;
        let c_gw = one_minus.ldexp(-1);
        let alpha_gw = acos(b_gw) / pi() * 2.0 / one_minus;
        Constants {
            alpha_gw,
            b_gw,
            c_gw,
            b: Interval::ONE + b_gw,
            nu1: Rational64::new(4, 1000),
            nu2: Rational64::new(13, 1000),
        }
    }

    pub fn nu1_interval(&self) -> Interval {
        super::rational_interval(&self.nu1)
    }

    pub fn nu2_interval(&self) -> Interval {
        super::rational_interval(&self.nu2)
    }
}
