//! Finite weighted instances from the ε-net discretization, their vector
//! solutions, audits, and exhaustive balanced cuts.

use super::sample::{correlated_into, stream, PointConfigs, CHUNK};
use super::sphere::partition_sphere;
use crate::blueprint::{Blueprint, Configuration};
use crate::error::{Error, Result};
use rand::distr::Distribution;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceHeader {
    pub blueprint_id: String,
    pub dim: usize,
    pub eps: f64,
    pub seed: u64,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub bias: f64,
    /// Cell index; `None` for the two auxiliary vertices.
    pub cell: Option<usize>,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Vectors live in dimension dim + 3: coordinate 0 is v₀, coordinates
/// 1..=dim carry the cell directions, and the last two are private to the
/// auxiliary vertices so they are orthogonal to everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureInstance {
    pub header: InstanceHeader,
    pub cells: Vec<Vec<f64>>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub vectors: Vec<Vec<f64>>,
    pub v0: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lift(bias: f64, rep: &[f64], ambient: usize) -> Vec<f64> {
    let mut v = vec![0.0; ambient];
    v[0] = bias;
    let s = (1.0 - bias * bias).max(0.0).sqrt();
    for (k, r) in rep.iter().enumerate() {
        v[1 + k] = s * r;
    }
    v
}

/// The four-step sampling procedure of the ε-net reduction.
///
/// A sample lands on the auxiliary edge when the pair is not ε-good, and also
/// when the realized vectors of its endpoints would break a strict triangle
/// inequality or coincide (the reduction chooses ε small enough that this
/// never happens; at desk-scale ε it does).
pub fn build_instance(bp: &Blueprint, dim: usize, eps: f64, n_samples: u64, seed: u64) -> Result<MixtureInstance> {
    if !bp.strict_triangles() {
        return Err(Error::InfeasibleBlueprint("triangle inequalities are not all strict; apply perturb_pairwise".into()));
    }
    if bp.mu_values().iter().any(|m| m.lo() <= 0.0) {
        return Err(Error::InfeasibleBlueprint("μ does not have full support; apply perturb_mu".into()));
    }
    if n_samples == 0 {
        return Err(Error::Format("need at least one sample".into()));
    }
    let part = partition_sphere(dim, eps)?;
    let cells: Vec<Vec<f64>> = part.cells.iter().map(|c| c.rep.clone()).collect();
    let (nb, nc) = (bp.len(), cells.len());
    let ambient = dim + 3;
    let biases: Vec<f64> = bp.biases().iter().map(|b| b.mid()).collect();
    let mut vertices = Vec::with_capacity(nb * nc + 2);
    let mut vectors = Vec::with_capacity(nb * nc + 2);
    for (b, &bias) in biases.iter().enumerate() {
        for (c, rep) in cells.iter().enumerate() {
            vertices.push(Vertex { bias, cell: Some(c), weight: bp.mu(b).mid() });
            vectors.push(lift(bias, rep, ambient));
        }
    }
    let (aux, aux2) = (vertices.len(), vertices.len() + 1);
    for k in 0..2 {
        vertices.push(Vertex { bias: 0.0, cell: None, weight: 1.0 });
        let mut v = vec![0.0; ambient];
        v[dim + 1 + k] = 1.0;
        vectors.push(v);
    }
    let id = |b: usize, c: usize| b * nc + c;

    let pc = PointConfigs::new(bp)?;
    let df = dim as f64;
    let chunks = n_samples.div_ceil(CHUNK);
    let counts: Vec<BTreeMap<(usize, usize), u64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let (mut x, mut y) = (vec![0.0; dim], vec![0.0; dim]);
            let mut out = BTreeMap::new();
            for _ in 0..CHUNK.min(n_samples - k * CHUNK) {
                let e = pc.pick.sample(&mut rng);
                let rho = pc.rho[e];
                correlated_into(&mut rng, rho, &mut x, &mut y);
                // ∼_ρ N(0, I_d) with the 1/d normalization: E‖x‖² = 1.
                let (xx, yy, xy) = (dot(&x, &x) / df, dot(&y, &y) / df, dot(&x, &y) / df);
                let good = (xx - 1.0).abs() < eps && (yy - 1.0).abs() < eps && (xy - rho).abs() < eps;
                let mut key = (aux, aux2);
                if good {
                    let (u, v) = (id(pc.i[e], part.locate(&x)), id(pc.j[e], part.locate(&y)));
                    let bij = dot(&vectors[u], &vectors[v]);
                    if u != v && Configuration::points(vertices[u].bias, vertices[v].bias, bij).strict_triangle() {
                        key = (u.min(v), u.max(v));
                    }
                }
                *out.entry(key).or_insert(0) += 1;
            }
            out
        })
        .collect();
    let mut total: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for m in counts {
        for (k, c) in m {
            *total.entry(k).or_insert(0) += c;
        }
    }
    let edges = total
        .into_iter()
        .map(|((u, v), c)| Edge { u, v, weight: c as f64 / n_samples as f64 })
        .collect();
    let mut v0 = vec![0.0; ambient];
    v0[0] = 1.0;
    Ok(MixtureInstance {
        header: InstanceHeader { blueprint_id: bp.content_hash(), dim, eps, seed, samples: n_samples },
        cells,
        vertices,
        edges,
        vectors,
        v0,
    })
}

impl MixtureInstance {
    pub fn is_aux(&self, i: usize) -> bool {
        self.vertices[i].cell.is_none()
    }

    pub fn aux_mass(&self) -> f64 {
        self.edges.iter().filter(|e| self.is_aux(e.u) && self.is_aux(e.v)).map(|e| e.weight).sum()
    }

    /// Σ w_E (1 − vᵢ·vⱼ)/2.
    pub fn sdp_value(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.weight * 0.5 * (1.0 - dot(&self.vectors[e.u], &self.vectors[e.v])))
            .sum()
    }

    pub fn real_sdp_value(&self) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for e in self.edges.iter().filter(|e| !(self.is_aux(e.u) && self.is_aux(e.v))) {
            num += e.weight * 0.5 * (1.0 - dot(&self.vectors[e.u], &self.vectors[e.v]));
            den += e.weight;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Σ w_V (v₀·vᵢ).
    pub fn weighted_balance(&self) -> f64 {
        self.vertices.iter().zip(&self.vectors).map(|(v, x)| v.weight * dot(&self.v0, x)).sum()
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "maxbisect-instance 1");
        let _ = writeln!(s, "blueprint {}", h.blueprint_id);
        let _ = writeln!(s, "dim {}", h.dim);
        let _ = writeln!(s, "eps {:e}", h.eps);
        let _ = writeln!(s, "seed {}", h.seed);
        let _ = writeln!(s, "samples {}", h.samples);
        let _ = writeln!(s, "v0 {}", join(&self.v0));
        for (i, c) in self.cells.iter().enumerate() {
            let _ = writeln!(s, "cell {i} {}", join(c));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let cell = v.cell.map_or("aux".to_string(), |c| c.to_string());
            let _ = writeln!(s, "vertex {i} {:e} {cell} {:e}", v.bias, v.weight);
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {:e}", e.u, e.v, e.weight);
        }
        for (i, v) in self.vectors.iter().enumerate() {
            let _ = writeln!(s, "vector {i} {}", join(v));
        }
        s
    }

    pub fn parse(text: &str) -> Result<MixtureInstance> {
        let mut inst = MixtureInstance {
            header: InstanceHeader { blueprint_id: String::new(), dim: 0, eps: 0.0, seed: 0, samples: 0 },
            cells: vec![],
            vertices: vec![],
            edges: vec![],
            vectors: vec![],
            v0: vec![],
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, "maxbisect-instance 1")) => {}
            _ => return Err(Error::parse(1, "not a maxbisect instance file")),
        }
        for (n, line) in lines {
            let n = n + 1;
            let err = |m: &str| Error::parse(n, m.to_string());
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or_default();
            let rest: Vec<&str> = it.collect();
            let num = |k: usize| -> Result<f64> { rest.get(k).and_then(|x| x.parse().ok()).ok_or_else(|| err("bad number")) };
            let int = |k: usize| -> Result<usize> { rest.get(k).and_then(|x| x.parse().ok()).ok_or_else(|| err("bad integer")) };
            let floats = |from: usize| -> Result<Vec<f64>> {
                rest[from.min(rest.len())..].iter().map(|x| x.parse().map_err(|_| err("bad number"))).collect()
            };
            let indexed = |len: usize| -> Result<()> {
                if int(0)? != len {
                    return Err(err("rows out of order"));
                }
                Ok(())
            };
            match tag {
                "blueprint" => inst.header.blueprint_id = rest.first().ok_or_else(|| err("missing hash"))?.to_string(),
                "dim" => inst.header.dim = int(0)?,
                "eps" => inst.header.eps = num(0)?,
                "seed" => inst.header.seed = rest.first().and_then(|x| x.parse().ok()).ok_or_else(|| err("bad seed"))?,
                "samples" => inst.header.samples = rest.first().and_then(|x| x.parse().ok()).ok_or_else(|| err("bad count"))?,
                "v0" => inst.v0 = floats(0)?,
                "cell" => {
                    indexed(inst.cells.len())?;
                    inst.cells.push(floats(1)?);
                }
                "vertex" => {
                    indexed(inst.vertices.len())?;
                    let cell = match rest.get(2) {
                        Some(&"aux") => None,
                        _ => Some(int(2)?),
                    };
                    inst.vertices.push(Vertex { bias: num(1)?, cell, weight: num(3)? });
                }
                "edge" => inst.edges.push(Edge { u: int(0)?, v: int(1)?, weight: num(2)? }),
                "vector" => {
                    indexed(inst.vectors.len())?;
                    inst.vectors.push(floats(1)?);
                }
                _ => return Err(err("unknown record")),
            }
        }
        let nv = inst.vertices.len();
        if inst.vectors.len() != nv || inst.edges.iter().any(|e| e.u >= nv || e.v >= nv) {
            return Err(Error::Format("vertex, vector and edge tables disagree".into()));
        }
        if inst.vertices.iter().any(|v| v.cell.is_some_and(|c| c >= inst.cells.len())) {
            return Err(Error::Format("vertex refers to a missing cell".into()));
        }
        Ok(inst)
    }
}

/// Σᵢⱼ wᵢwⱼ|vᵢ⊥·vⱼ⊥| / (Σwᵢ)² over the non-auxiliary vertices, with vᵢ⊥ the
/// unit direction of vᵢ orthogonal to v₀.
pub fn uncorrelatedness(inst: &MixtureInstance) -> f64 {
    let mut perp = Vec::new();
    let mut total = 0.0;
    for (i, v) in inst.vertices.iter().enumerate() {
        if v.cell.is_none() {
            continue;
        }
        total += v.weight;
        let x = &inst.vectors[i];
        let b = dot(&inst.v0, x);
        let p: Vec<f64> = x.iter().zip(&inst.v0).map(|(a, z)| a - b * z).collect();
        let n = dot(&p, &p).sqrt();
        if n > 0.0 {
            perp.push((v.weight, p.iter().map(|a| a / n).collect::<Vec<f64>>()));
        }
    }
    let s: f64 = perp
        .par_iter()
        .map(|(wi, pi)| perp.iter().map(|(wj, pj)| wi * wj * dot(pi, pj).abs()).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    s / (total * total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Audit {
    pub vertices: usize,
    pub cells: usize,
    pub edges: usize,
    pub edge_weight_sum: f64,
    pub aux_mass: f64,
    pub max_norm_error: f64,
    pub max_orthogonality_error: f64,
    pub weighted_balance: f64,
    pub triangle_violations: usize,
    pub sdp_value: f64,
    /// SDP value over the non-auxiliary edges, divided by their mass.
    pub real_sdp_value: f64,
    pub uncorrelatedness: f64,
}

pub fn audit(inst: &MixtureInstance) -> Audit {
    let mut norm = 0.0f64;
    let mut orth = 0.0f64;
    for (i, v) in inst.vectors.iter().enumerate() {
        norm = norm.max((dot(v, v).sqrt() - 1.0).abs());
        // v − (v₀·v)v₀ must agree with the stored cell direction scaled by √(1 − b²).
        if let Some(c) = inst.vertices[i].cell {
            let b = inst.vertices[i].bias;
            let expect = lift(b, &inst.cells[c], v.len());
            orth = orth.max(v.iter().zip(&expect).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max));
            let p: Vec<f64> = v.iter().zip(&inst.v0).map(|(a, z)| a - dot(&inst.v0, v) * z).collect();
            orth = orth.max(dot(&p, &inst.v0).abs());
        } else {
            orth = orth.max(dot(v, &inst.v0).abs());
        }
    }
    let triangle_violations = inst
        .edges
        .iter()
        .filter(|e| !(inst.is_aux(e.u) && inst.is_aux(e.v)))
        .filter(|e| {
            let (a, b) = (&inst.vectors[e.u], &inst.vectors[e.v]);
            !Configuration::points(dot(&inst.v0, a), dot(&inst.v0, b), dot(a, b)).strict_triangle()
        })
        .count();
    Audit {
        vertices: inst.vertices.len(),
        cells: inst.cells.len(),
        edges: inst.edges.len(),
        edge_weight_sum: inst.edges.iter().map(|e| e.weight).sum(),
        aux_mass: inst.aux_mass(),
        max_norm_error: norm,
        max_orthogonality_error: orth,
        weighted_balance: inst.weighted_balance(),
        triangle_violations,
        sdp_value: inst.sdp_value(),
        real_sdp_value: inst.real_sdp_value(),
        uncorrelatedness: uncorrelatedness(inst),
    }
}

impl Audit {
    /// The vector-solution checks: unit norms and orthogonality to 1e-12,
    /// weighted balance to 1e-9, strict triangles on every real edge, edge
    /// weights summing to one.
    pub fn passes(&self) -> bool {
        self.max_norm_error <= 1e-12
            && self.max_orthogonality_error <= 1e-12
            && self.weighted_balance.abs() <= 1e-9
            && self.triangle_violations == 0
            && (self.edge_weight_sum - 1.0).abs() <= 1e-12
    }

    pub fn to_text(&self) -> String {
        format!(
            "vertices {}\ncells {}\nedges {}\nedge_weight_sum {:e}\naux_mass {:e}\nmax_norm_error {:e}\n\
             max_orthogonality_error {:e}\nweighted_balance {:e}\ntriangle_violations {}\nsdp_value {:e}\n\
             real_sdp_value {:e}\nuncorrelatedness {:e}\n",
            self.vertices,
            self.cells,
            self.edges,
            self.edge_weight_sum,
            self.aux_mass,
            self.max_norm_error,
            self.max_orthogonality_error,
            self.weighted_balance,
            self.triangle_violations,
            self.sdp_value,
            self.real_sdp_value,
            self.uncorrelatedness
        )
    }
}

/// Largest exhaustive instance, counting non-auxiliary vertices.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Maximum cut weight over subsets A with |w(A) − w(V∖A)| ≤ slack·w(V),
/// by Gray-code enumeration of every subset.
pub fn best_balanced_cut_small(inst: &MixtureInstance, slack: f64) -> Result<f64> {
    let n = inst.vertices.len();
    let real = inst.vertices.iter().filter(|v| v.cell.is_some()).count();
    if real > EXHAUSTIVE_LIMIT || n > EXHAUSTIVE_LIMIT + 2 {
        return Err(Error::TooLarge(format!("{real} vertices exceed the exhaustive limit of {EXHAUSTIVE_LIMIT}")));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![vec![]; n];
    for e in &inst.edges {
        if e.u != e.v {
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
        }
    }
    let w: Vec<f64> = inst.vertices.iter().map(|v| v.weight).collect();
    let total: f64 = w.iter().sum();
    let limit = slack * total * (1.0 + 1e-12) + 1e-12;
    // Vertex n−1 stays outside A; complements give the same cut and imbalance.
    let m = n - 1;
    let mut side = vec![false; n];
    let (mut cut, mut in_a) = (0.0f64, 0.0f64);
    let mut best = if (2.0 * in_a - total).abs() <= limit { 0.0 } else { f64::NEG_INFINITY };
    for step in 1u64..(1u64 << m) {
        let k = step.trailing_zeros() as usize;
        let now = !side[k];
        for &(j, we) in &adj[k] {
            if side[j] == now {
                cut -= we;
            } else {
                cut += we;
            }
        }
        side[k] = now;
        in_a += if now { w[k] } else { -w[k] };
        if (2.0 * in_a - total).abs() <= limit && cut > best {
            best = cut;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Format("no subset meets the balance constraint".into()));
    }
    Ok(best)
}
