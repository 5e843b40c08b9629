//! Interval arithmetic and certified enclosures of the Gaussian quantities
//! used throughout the crate.

pub mod config;
pub mod constants;
pub mod elementary;
pub mod gamma;
pub mod interval;
pub mod normal;
pub mod series;

pub use config::RigorConfig;
pub use constants::{compute_bgw, Constants};
pub use gamma::{gamma, gamma_partials};
pub use interval::Interval;
pub use normal::{phi_cdf, phi_inv, phi_pdf, Quantile};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, ToPrimitive};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RigorError {
    #[error("empty domain")]
    EmptyDomain,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

/// Tightest double interval around an exact rational.
pub fn big_rational_interval(r: &BigRational) -> Interval {
    let x = r.to_f64().unwrap_or(f64::NAN);
    if !x.is_finite() {
        return if r > &BigRational::from_integer(BigInt::from(0)) {
            Interval::new(f64::MAX, f64::INFINITY)
        } else {
            Interval::new(f64::NEG_INFINITY, f64::MIN)
        };
    }
    let exact = BigRational::from_f64(x).expect("finite");
    match exact.cmp(r) {
        std::cmp::Ordering::Equal => Interval::point(x),
        std::cmp::Ordering::Less => Interval::new(x, x.next_up()),
        std::cmp::Ordering::Greater => Interval::new(x.next_down(), x),
    }
}

pub fn rational_interval(r: &Ratio<i64>) -> Interval {
    let big = BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
    big_rational_interval(&big)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_conversion_brackets() {
        let third = rational_interval(&Ratio::new(1, 3));
        assert!(third.lo() < third.hi() && third.contains(1.0 / 3.0));
        assert!(rational_interval(&Ratio::new(3, 4)).is_point());
        let nu = rational_interval(&Ratio::new(4, 1000));
        assert!(nu.width() > 0.0 && nu.contains(0.004));
    }
}
