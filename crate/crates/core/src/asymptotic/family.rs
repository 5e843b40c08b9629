//! The three-configuration family (b, 0), (2b, −b), (2b, −2b) at b₁₂ = b_GW
//! under an odd threshold linked as c(2b) = 2c(b), c(−b) = −c(b), c(0) = 0.
//!
//! Substituting into the soundness expansion leaves a polynomial in (b, c).
//! Weights are chosen so that the b² and b⁴ coefficients cancel across the
//! family; what remains decides whether odd rounding loses Θ(b⁴).

use super::expansion::{Expansion, B1, C1};
use super::taylor::{b_gw, exact_soundness_with, soundness_expansion, ORDER};
use crate::error::{Error, Result};
use crate::rigor::{Constants, Interval, RigorConfig};

/// (p, q) with (b₁, b₂) = (p·b, q·b) and (c₁, c₂) = (p·c, q·c).
pub const CONFIGS: [(f64, f64); 3] = [(1.0, 0.0), (2.0, -1.0), (2.0, -2.0)];

/// Reference decimals for the table (rows are configurations; columns are
/// the b² − c², 3b⁴ − c⁴ and b²c² coefficients), the weights, and the
/// residual b²c² coefficient. The recomputation is compared against these.
pub const REFERENCE_TABLE: [[f64; 3]; 3] =
    [[0.151368, 0.005672, -0.016600], [-0.121728, 0.002241, -0.029948], [-0.546192, -0.066760, -0.148955]];
pub const REFERENCE_WEIGHTS: [f64; 3] = [0.53777, 0.40301, 0.05922];
pub const REFERENCE_RESIDUAL: f64 = -0.02982;

/// Coefficients of one configuration's soundness in (b, c).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyRow {
    /// [b²]
    pub quadratic: f64,
    /// [b⁴]/3, the coefficient of 3b⁴ in the 3b⁴ ∓ c⁴ grouping.
    pub quartic: f64,
    /// [b²c²]
    pub mixed: f64,
    /// [c²]; equals −quadratic.
    pub c2: f64,
    /// [c⁴]; the b⁴ − c⁴ grouping would need −quartic.
    pub c4: f64,
    /// Largest of |[bc]|, |[b³c]|, |[bc³]|.
    pub cross: f64,
}

impl FamilyRow {
    pub fn as_array(&self) -> [f64; 3] {
        [self.quadratic, self.quartic, self.mixed]
    }

    /// [c⁴] − (−quartic): zero iff the quartic terms group as 3b⁴ − c⁴.
    pub fn minus_grouping_defect(&self) -> f64 {
        self.c4 + self.quartic
    }

    /// [c⁴] − quartic: zero iff the quartic terms group as 3b⁴ + c⁴.
    pub fn plus_grouping_defect(&self) -> f64 {
        self.c4 - self.quartic
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyTable {
    pub b_gw: f64,
    pub rows: [FamilyRow; 3],
    /// Each configuration's polynomial in (b, c), stored with b in the b₁
    /// slot and c in the c₁ slot.
    pub polys: [Expansion; 3],
}

impl FamilyTable {
    pub fn table(&self) -> [[f64; 3]; 3] {
        [self.rows[0].as_array(), self.rows[1].as_array(), self.rows[2].as_array()]
    }
}

fn family_poly(s: &Expansion, p: f64, q: f64) -> Expansion {
    let b = Expansion::var(B1, ORDER);
    let c = Expansion::var(C1, ORDER);
    s.substitute([&b.scale(p), &b.scale(q), &c.scale(p), &c.scale(q)])
}

pub fn family_coefficients(b_gw: f64) -> FamilyTable {
    let s = soundness_expansion(b_gw);
    let polys = CONFIGS.map(|(p, q)| family_poly(&s, p, q));
    let rows = std::array::from_fn(|k| {
        let e = &polys[k];
        let at = |i: u8, j: u8| e.coeff([i, 0, j, 0]);
        FamilyRow {
            quadratic: at(2, 0),
            quartic: at(4, 0) / 3.0,
            mixed: at(2, 2),
            c2: at(0, 2),
            c4: at(0, 4),
            cross: [at(1, 1), at(3, 1), at(1, 3)].iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    });
    FamilyTable { b_gw, rows, polys }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyWeights {
    pub w: [f64; 3],
    /// Σ wᵢ·[b²]ᵢ and Σ wᵢ·quarticᵢ after solving; both ≈ 0.
    pub quadratic_sum: f64,
    pub quartic_sum: f64,
    /// Σ wᵢ·[b²c²]ᵢ, the coefficient left over.
    pub residual: f64,
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut y: [f64; 3]) -> Result<[f64; 3]> {
    let scale = a.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
        if !(a[piv][col].abs() > 1e-12 * scale) {
            return Err(Error::SingularSystem(format!("pivot {} in column {col}", a[piv][col])));
        }
        a.swap(col, piv);
        y.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for k in col..3 {
                a[r][k] -= f * a[col][k];
            }
            y[r] -= f * y[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (y[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Weights cancelling the b² and b⁴ coefficients, normalized to sum 1.
pub fn solve_weights(t: &FamilyTable) -> Result<FamilyWeights> {
    let r = &t.rows;
    let a = [
        [r[0].quadratic, r[1].quadratic, r[2].quadratic],
        [r[0].quartic, r[1].quartic, r[2].quartic],
        [1.0, 1.0, 1.0],
    ];
    let w = solve3(a, [0.0, 0.0, 1.0])?;
    if w.iter().any(|&x| x < 0.0) {
        return Err(Error::SingularSystem(format!("cancelling weights {w:?} are not a distribution")));
    }
    let dot = |f: fn(&FamilyRow) -> f64| (0..3).map(|k| w[k] * f(&r[k])).sum::<f64>();
    Ok(FamilyWeights {
        w,
        quadratic_sum: dot(|x| x.quadratic),
        quartic_sum: dot(|x| x.quartic),
        residual: dot(|x| x.mixed),
    })
}

pub fn solve_family_weights() -> Result<FamilyWeights> {
    solve_weights(&family_coefficients(b_gw()))
}

/// w₁ and w₃ lowered by 0.01·b²/|[b²]₃|, w₂ unchanged; not renormalized.
pub fn modified_weights(t: &FamilyTable, w: &FamilyWeights, b: f64) -> [f64; 3] {
    let d = 0.01 * b * b / t.rows[2].quadratic.abs();
    [w.w[0] - d, w.w[1], w.w[2] - d]
}

/// Σ wᵢ·soundnessᵢ(b, c) evaluated rigorously (weights taken as exact).
pub fn family_exact(w: [f64; 3], b: f64, c: f64, cfg: &RigorConfig) -> Interval {
    let bgw = Constants::compute(cfg).b_gw;
    let mut acc = Interval::ZERO;
    for (k, &(p, q)) in CONFIGS.iter().enumerate() {
        let s = exact_soundness_with(bgw, p * b, q * b, p * c, q * c, cfg);
        acc = acc + s * Interval::point(w[k]);
    }
    acc
}

/// The family polynomial with the given weights, in (b, c).
pub fn family_expansion(t: &FamilyTable, w: [f64; 3]) -> Expansion {
    let mut acc = Expansion::zero(ORDER);
    for (k, p) in t.polys.iter().enumerate() {
        acc = &acc + &p.scale(w[k]);
    }
    acc
}

pub fn eval_family(e: &Expansion, b: f64, c: f64) -> f64 {
    e.eval([b, 0.0, c, 0.0])
}
