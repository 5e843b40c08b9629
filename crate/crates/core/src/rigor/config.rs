use serde::{Deserialize, Serialize};

/// Numerical knobs for the rigorous layer. Values are fixed for the
/// lifetime of a run and recorded in every certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigorConfig {
    /// Target width, in bits, for the bisection that encloses b_GW.
    pub precision_bits: u32,
    /// Uniform cells used by the Γ quadrature before adaptive refinement.
    pub quadrature_cells: usize,
    /// Order of the Taylor model used on each quadrature cell (odd).
    pub taylor_order: usize,
    /// Magnitude beyond which Φ uses closed-form tail bounds and Φ⁻¹
    /// saturates.
    pub clamp_magnitude: f64,
    /// |x| below which Φ uses its power series; above it the Mills-ratio
    /// continued fraction.
    pub series_crossover: f64,
}

impl Default for RigorConfig {
    fn default() -> Self {
        RigorConfig {
            precision_bits: 53,
            quadrature_cells: 8,
            taylor_order: 9,
            clamp_magnitude: 8.0,
            series_crossover: 3.0,
        }
    }
}

impl RigorConfig {
    /// Compact `key=value` rendering used in certificate headers.
    pub fn describe(&self) -> String {
        format!(
            "precision_bits={} quadrature_cells={} taylor_order={} clamp_magnitude={:?} series_crossover={:?}",
            self.precision_bits,
            self.quadrature_cells,
            self.taylor_order,
            self.clamp_magnitude,
            self.series_crossover
        )
    }

    /// Inverse of [`RigorConfig::describe`]; unknown keys are rejected.
    pub fn parse(text: &str) -> Option<RigorConfig> {
        let mut cfg = RigorConfig::default();
        for tok in text.split_whitespace() {
            let (k, v) = tok.split_once('=')?;
            match k {
                "precision_bits" => cfg.precision_bits = v.parse().ok()?,
                "quadrature_cells" => cfg.quadrature_cells = v.parse().ok()?,
                "taylor_order" => cfg.taylor_order = v.parse().ok()?,
                "clamp_magnitude" => cfg.clamp_magnitude = v.parse().ok()?,
                "series_crossover" => cfg.series_crossover = v.parse().ok()?,
                _ => return None,
            }
        }
        Some(cfg)
    }
}
