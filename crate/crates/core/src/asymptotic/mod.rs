//! Small-bias Taylor analysis of odd threshold rounding near b_GW.

pub mod expansion;
pub mod family;
pub mod taylor;

pub use expansion::{Expansion, Monomial};
pub use family::{
    family_coefficients, family_exact, family_expansion, modified_weights, solve_family_weights, solve_weights,
    FamilyRow, FamilyTable, FamilyWeights, CONFIGS, REFERENCE_RESIDUAL, REFERENCE_TABLE, REFERENCE_WEIGHTS,
};
pub use taylor::{
    b_gw, exact_soundness, hyperplane_average, phi_rho_expansion, rho_expansion, soundness_expansion,
    soundness_expansion_at_bgw, soundness_expansion_full, taylor_phi, taylor_phi_rho,
};

use crate::error::Result;

/// Recomputed table and weights next to the reference decimals.
#[derive(Clone, Debug)]
pub struct Report {
    pub table: FamilyTable,
    pub weights: FamilyWeights,
}

const COLUMNS: [&str; 3] = ["b^2-c^2", "3b^4-c^4", "b^2c^2"];

pub fn report() -> Result<Report> {
    let table = family_coefficients(b_gw());
    let weights = solve_weights(&table)?;
    Ok(Report { table, weights })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = format!("b_gw = {:.17}\n", self.table.b_gw);
        s.push_str("thresholds linked exactly: c(0) = 0, c(-b) = -c(b), c(2b) = 2c(b)\n\n");
        s.push_str(&format!("{:<8}{:>14}{:>14}{:>14}{:>14}\n", "config", "column", "recomputed", "reference", "diff"));
        for (k, row) in self.table.rows.iter().enumerate() {
            let (p, q) = CONFIGS[k];
            for (j, v) in row.as_array().iter().enumerate() {
                let r = REFERENCE_TABLE[k][j];
                let flag = if (v - r).abs() > 1e-4 { "  MISMATCH" } else { "" };
                s.push_str(&format!(
                    "{:<8}{:>14}{:>14.6}{:>14.6}{:>14.2e}{flag}\n",
                    format!("({p},{q})"),
                    COLUMNS[j],
                    v,
                    r,
                    v - r
                ));
            }
        }
        s.push('\n');
        for (k, row) in self.table.rows.iter().enumerate() {
            s.push_str(&format!(
                "config {}: [c^2]+[b^2] = {:.1e}, [c^4] = {:.6} (3b^4-c^4 needs {:.6}, 3b^4+c^4 needs {:.6}), cross terms {:.1e}\n",
                k + 1,
                row.c2 + row.quadratic,
                row.c4,
                -row.quartic,
                row.quartic,
                row.cross
            ));
        }
        let w = &self.weights;
        s.push_str(&format!(
            "\nweights  {:.5} {:.5} {:.5}  (reference {:.5} {:.5} {:.5})\n",
            w.w[0], w.w[1], w.w[2], REFERENCE_WEIGHTS[0], REFERENCE_WEIGHTS[1], REFERENCE_WEIGHTS[2]
        ));
        s.push_str(&format!("cancellation  b^2: {:.1e}  b^4: {:.1e}\n", w.quadratic_sum, w.quartic_sum));
        let flag = if (w.residual - REFERENCE_RESIDUAL).abs() > 1e-3 { "  MISMATCH" } else { "" };
        s.push_str(&format!(
            "residual b^2c^2 coefficient {:.5} (reference {:.5}){flag}\n",
            w.residual, REFERENCE_RESIDUAL
        ));
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("config,column,recomputed,reference\n");
        for (k, row) in self.table.rows.iter().enumerate() {
            for (j, v) in row.as_array().iter().enumerate() {
                s.push_str(&format!("{},{},{:.12},{}\n", k + 1, COLUMNS[j], v, REFERENCE_TABLE[k][j]));
            }
        }
        for k in 0..3 {
            s.push_str(&format!("{},weight,{:.12},{}\n", k + 1, self.weights.w[k], REFERENCE_WEIGHTS[k]));
        }
        s.push_str(&format!("all,residual,{:.12},{}\n", self.weights.residual, REFERENCE_RESIDUAL));
        s
    }
}
