//! Double-precision grid of s(t₁, t₂)/c_GW.

use super::reduction::{PointReduction, Reduction};
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct Contour {
    pub n: usize,
    /// Row-major over t₁ then t₂: (t₁, t₂, s/c_GW).
    pub points: Vec<(f64, f64, f64)>,
}

/// Cell midpoint i of an n-cell grid on [−1, 1].
pub fn grid_mid(i: usize, n: usize) -> f64 {
    -1.0 + (2 * i + 1) as f64 / n as f64
}

pub fn contour(red: &Reduction, n: usize) -> Contour {
    let pt = PointReduction::new(red);
    let points = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (t1, t2) = (grid_mid(k / n, n), grid_mid(k % n, n));
            (t1, t2, pt.s(t1, t2).0 / pt.c_gw)
        })
        .collect();
    Contour { n, points }
}

impl Contour {
    pub fn max(&self) -> (f64, f64, f64) {
        self.points.iter().copied().fold((0.0, 0.0, f64::NEG_INFINITY), |a, p| if p.2 > a.2 { p } else { a })
    }

    /// Number of 4-connected components of {s/c_GW > level}.
    pub fn superlevel_components(&self, level: f64) -> usize {
        let n = self.n;
        let inside: Vec<bool> = self.points.iter().map(|p| p.2 > level).collect();
        let mut seen = vec![false; n * n];
        let mut count = 0;
        for start in 0..n * n {
            if !inside[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                let (i, j) = (k / n, k % n);
                let mut nb = Vec::with_capacity(4);
                if i > 0 {
                    nb.push(k - n);
                }
                if i + 1 < n {
                    nb.push(k + n);
                }
                if j > 0 {
                    nb.push(k - 1);
                }
                if j + 1 < n {
                    nb.push(k + 1);
                }
                for m in nb {
                    if inside[m] && !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
        count
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("# s_over_cgw is a double-precision estimate, not a rigorous bound\nt1,t2,s_over_cgw\n");
        for (a, b, v) in &self.points {
            let _ = writeln!(s, "{a},{b},{v:.10}");
        }
        s
    }
}
