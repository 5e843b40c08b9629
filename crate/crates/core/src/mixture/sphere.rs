//! Equal-area partitions of S¹ and S² into cells of small chordal diameter.
//!
//! S² uses a recursive-zonal layout: two polar caps of one cell each and
//! collars of equal-area cells in between, collar boundaries placed so that
//! every cell has area exactly 4π/N.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// Angles [a0, a1) on the circle.
    Arc { a0: f64, a1: f64 },
    /// z ∈ [z0, z1], φ ∈ [φ0, φ1).
    Zone { z0: f64, z1: f64, phi0: f64, phi1: f64 },
    /// z ≥ z0 (north) or z ≤ z0 (south).
    Cap { z0: f64, north: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub shape: Shape,
    pub rep: Vec<f64>,
    /// Upper bound on the chordal diameter.
    pub diameter: f64,
}

impl Cell {
    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::Arc { a0, a1 } => a1 - a0,
            Shape::Zone { z0, z1, phi0, phi1 } => (z1 - z0) * (phi1 - phi0),
            Shape::Cap { z0, north } => TAU * if north { 1.0 - z0 } else { 1.0 + z0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpherePartition {
    pub dim: usize,
    pub cells: Vec<Cell>,
    /// S² only: (z_top, z_bottom, first cell, count) per collar, north to south.
    collars: Vec<(f64, f64, usize, usize)>,
}

fn chord_of_arc(a: f64) -> f64 {
    2.0 * (0.5 * a).min(0.5 * PI).sin()
}

/// Rounding slack on computed diameters.
const MARGIN: f64 = 1e-12;

pub fn partition_sphere(dim: usize, eps: f64) -> Result<SpherePartition> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::Format(format!("eps must lie in (0, 2), got {eps}")));
    }
    match dim {
        2 => {
            let mut m = (PI / (0.5 * eps).asin()).ceil().max(2.0) as usize;
            while chord_of_arc(TAU / m as f64) + MARGIN > eps {
                m += 1;
            }
            Ok(circle(m))
        }
        3 => {
            // Cells are roughly square, so diameter ≈ √(2·area).
            let mut n = ((4.0 * PI / (eps * eps)).floor() as usize).max(3);
            loop {
                let p = zonal(n);
                if p.cells.iter().all(|c| c.diameter <= eps) {
                    return Ok(p);
                }
                n += (n / 100).max(1);
            }
        }
        _ => Err(Error::Format(format!("only dimensions 2 and 3 are supported, got {dim}"))),
    }
}

pub fn circle(m: usize) -> SpherePartition {
    let step = TAU / m as f64;
    let cells = (0..m)
        .map(|k| {
            let (a0, a1) = (k as f64 * step, (k + 1) as f64 * step);
            let mid = 0.5 * (a0 + a1);
            Cell { shape: Shape::Arc { a0, a1 }, rep: vec![mid.cos(), mid.sin()], diameter: chord_of_arc(step) + MARGIN }
        })
        .collect();
    SpherePartition { dim: 2, cells, collars: vec![] }
}

/// The N-cell zonal partition of S².
pub fn zonal(n: usize) -> SpherePartition {
    assert!(n >= 3);
    let nf = n as f64;
    let area = 4.0 * PI / nf;
    let zc = 1.0 - 2.0 / nf;
    let theta_c = zc.acos();
    let ideal = area.sqrt();
    let rings = (((PI - 2.0 * theta_c) / ideal).round() as usize).max(1);
    let dtheta = (PI - 2.0 * theta_c) / rings as f64;
    // Cells per collar, rounded with carried remainder.
    let mut counts = Vec::with_capacity(rings);
    let mut carry = 0.0;
    let mut used = 0usize;
    for i in 0..rings {
        let (a, b) = (theta_c + i as f64 * dtheta, theta_c + (i + 1) as f64 * dtheta);
        let want = TAU * (a.cos() - b.cos()) / area + carry;
        let m = if i + 1 == rings { n - 2 - used } else { (want.round() as usize).max(1).min(n - 2 - used - (rings - i - 1)) };
        carry = want - m as f64;
        used += m;
        counts.push(m);
    }
    let mut cells = Vec::with_capacity(n);
    cells.push(Cell {
        shape: Shape::Cap { z0: zc, north: true },
        rep: vec![0.0, 0.0, 1.0],
        diameter: cap_diameter(zc),
    });
    let mut collars = Vec::with_capacity(rings);
    let mut above = 1usize;
    for &m in &counts {
        let z1 = 1.0 - 2.0 * above as f64 / nf;
        above += m;
        let z0 = if above == n - 1 { -zc } else { 1.0 - 2.0 * above as f64 / nf };
        collars.push((z1, z0, cells.len(), m));
        let step = TAU / m as f64;
        for k in 0..m {
            let (phi0, phi1) = (k as f64 * step, (k + 1) as f64 * step);
            let (zm, pm) = (0.5 * (z0 + z1), 0.5 * (phi0 + phi1));
            let r = (1.0 - zm * zm).sqrt();
            let shape = Shape::Zone { z0, z1, phi0, phi1 };
            cells.push(Cell { shape, rep: vec![r * pm.cos(), r * pm.sin(), zm], diameter: zone_diameter(z0, z1, phi0, phi1) });
        }
    }
    cells.push(Cell {
        shape: Shape::Cap { z0: -zc, north: false },
        rep: vec![0.0, 0.0, -1.0],
        diameter: cap_diameter(zc),
    });
    SpherePartition { dim: 3, cells, collars }
}

fn cap_diameter(z: f64) -> f64 {
    // Rim diameter while the cap is at most a hemisphere, else 2.
    if z >= 0.0 {
        2.0 * (1.0 - z * z).max(0.0).sqrt() + MARGIN
    } else {
        2.0
    }
}

fn on_sphere(z: f64, phi: f64) -> [f64; 3] {
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Diameter bound for a spherical rectangle: largest distance between
/// boundary samples plus twice the largest gap from any boundary point to
/// its nearest sample. For cells smaller than a hemisphere the farthest pair
/// of points lies on the boundary.
fn zone_diameter(z0: f64, z1: f64, phi0: f64, phi1: f64) -> f64 {
    const K: usize = 24;
    let (t0, t1) = (z1.acos(), z0.acos());
    let mut pts = Vec::with_capacity(4 * K);
    for k in 0..K {
        let s = k as f64 / K as f64;
        let phi = phi0 + s * (phi1 - phi0);
        let th = t0 + s * (t1 - t0);
        pts.push(on_sphere(z1, phi));
        pts.push(on_sphere(z0, phi1 - s * (phi1 - phi0)));
        pts.push(on_sphere(th.cos(), phi1));
        pts.push(on_sphere((t1 - s * (t1 - t0)).cos(), phi0));
    }
    // Along a latitude circle of radius r the chord between samples is at most
    // r·Δφ; along a meridian it is at most Δθ.
    let rmax = (1.0 - z0 * z0).max(1.0 - z1 * z1).max(0.0).sqrt();
    let gap = 0.5 * ((phi1 - phi0) * rmax).max(t1 - t0) / K as f64;
    let mut best = 0.0f64;
    for (a, p) in pts.iter().enumerate() {
        for q in &pts[a + 1..] {
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
            best = best.max(d);
        }
    }
    best + 2.0 * gap + MARGIN
}

impl SpherePartition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    /// Largest relative deviation of a cell area from the mean.
    pub fn area_spread(&self) -> f64 {
        let total = if self.dim == 2 { TAU } else { 4.0 * PI };
        let mean = total / self.len() as f64;
        self.cells.iter().map(|c| (c.area() - mean).abs() / mean).fold(0.0, f64::max)
    }

    /// Index of the cell containing the direction of `u` (any nonzero vector).
    pub fn locate(&self, u: &[f64]) -> usize {
        let angle = |y: f64, x: f64| {
            let a = y.atan2(x);
            if a < 0.0 {
                a + TAU
            } else {
                a
            }
        };
        let bucket = |a: f64, m: usize| ((a / TAU * m as f64) as usize).min(m - 1);
        match self.dim {
            2 => bucket(angle(u[1], u[0]), self.len()),
            _ => {
                let z = u[2] / (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                let (first, last) = (self.collars[0], self.collars[self.collars.len() - 1]);
                if z >= first.0 {
                    return 0;
                }
                if z < last.1 {
                    return self.len() - 1;
                }
                // Collars run north to south; find the one with z_bottom ≤ z.
                let k = self.collars.partition_point(|c| c.1 > z).min(self.collars.len() - 1);
                let (_, _, start, m) = self.collars[k];
                start + bucket(angle(u[1], u[0]), m)
            }
        }
    }
}
