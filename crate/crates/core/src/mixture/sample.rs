//! Correlated Gaussian pairs and Monte Carlo estimators over the Gaussian
//! mixture graph.
//!
//! Streams: draw k of a sampler, and chunk k of an estimator, use ChaCha8
//! seeded with the run seed on stream k. Chunks are summed by a fixed binary
//! tree over the chunk index, so results do not depend on thread count.

use crate::blueprint::{Blueprint, ThresholdFunction};
use crate::error::{Error, Result};
use crate::point;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub const CHUNK: u64 = 4096;

pub fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Fills x with N(0, 1) draws and y with ρx + √(1 − ρ²)g.
pub fn correlated_into(rng: &mut ChaCha8Rng, rho: f64, x: &mut [f64], y: &mut [f64]) {
    let s = (1.0 - rho * rho).max(0.0).sqrt();
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let u: f64 = StandardNormal.sample(rng);
        let g: f64 = StandardNormal.sample(rng);
        *a = u;
        *b = rho * u + s * g;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelatedSampler {
    pub rho: f64,
    pub dim: usize,
    pub seed: u64,
}

impl CorrelatedSampler {
    pub fn new(rho: f64, dim: usize, seed: u64) -> Result<Self> {
        if !(rho.abs() <= 1.0) || dim == 0 {
            return Err(Error::Format(format!("sampler needs |rho| <= 1 and dim >= 1, got rho={rho} dim={dim}")));
        }
        Ok(CorrelatedSampler { rho, dim, seed })
    }

    /// The `index`-th pair; unnormalized, coordinates are standard normal.
    pub fn pair(&self, index: u64) -> (Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; self.dim];
        let mut y = vec![0.0; self.dim];
        correlated_into(&mut stream(self.seed, index), self.rho, &mut x, &mut y);
        (x, y)
    }
}

pub fn sample_pair(s: &CorrelatedSampler, index: u64) -> (Vec<f64>, Vec<f64>) {
    s.pair(index)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    /// |mean − x| in standard errors.
    pub fn z(&self, x: f64) -> f64 {
        (self.mean - x).abs() / self.stderr
    }
}

fn tree_sum(v: &[(f64, f64)]) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => v[0],
        n => {
            let (a, b) = (tree_sum(&v[..n / 2]), tree_sum(&v[n / 2..]));
            (a.0 + b.0, a.1 + b.1)
        }
    }
}

/// Runs `draw` n times split into seeded chunks and returns mean ± stderr.
pub(crate) fn monte_carlo<F>(n: u64, seed: u64, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng, &mut Scratch) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, k| {
            let mut rng = stream(seed, k);
            let m = CHUNK.min(n - k * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..m {
                let v = draw(&mut rng, scratch);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = tree_sum(&parts);
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0).max(1.0)).max(0.0);
    Estimate { mean, stderr: (var / nf).sqrt(), samples: n }
}

#[derive(Default)]
pub(crate) struct Scratch {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub r: Vec<f64>,
}

impl Scratch {
    pub fn resize(&mut self, d: usize) {
        self.x.resize(d, 0.0);
        self.y.resize(d, 0.0);
        self.r.resize(d, 0.0);
    }
}

/// Per-configuration data in double precision.
pub(crate) struct PointConfigs {
    pub pick: WeightedIndex<f64>,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub rho: Vec<f64>,
}

impl PointConfigs {
    pub fn new(bp: &Blueprint) -> Result<Self> {
        let cs = bp.configs();
        let pick = WeightedIndex::new(cs.iter().map(|c| c.weight.mid().max(0.0)))
            .map_err(|e| Error::InvalidBlueprint(format!("configuration weights: {e}")))?;
        Ok(PointConfigs {
            pick,
            i: cs.iter().map(|c| c.i).collect(),
            j: cs.iter().map(|c| c.j).collect(),
            rho: cs.iter().map(|c| c.theta.relative_bias().mid()).collect(),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Average of (1 − vᵢ·vⱼ)/2 with vᵢ = bᵢv₀ + √(1 − bᵢ²)·x/‖x‖.
pub fn estimate_mixture_completeness(bp: &Blueprint, d: usize, n_samples: u64, seed: u64) -> Result<Estimate> {
    if d < 2 || n_samples < 2 {
        return Err(Error::Format("need d >= 2 and at least two samples".into()));
    }
    let pc = PointConfigs::new(bp)?;
    let b: Vec<f64> = bp.biases().iter().map(|x| x.mid()).collect();
    let perp: Vec<f64> = b.iter().map(|x| (1.0 - x * x).max(0.0).sqrt()).collect();
    Ok(monte_carlo(n_samples, seed, |rng, s| {
        s.resize(d);
        let k = pc.pick.sample(rng);
        correlated_into(rng, pc.rho[k], &mut s.x, &mut s.y);
        let c = dot(&s.x, &s.y) / (dot(&s.x, &s.x) * dot(&s.y, &s.y)).sqrt();
        let (i, j) = (pc.i[k], pc.j[k]);
        0.5 * (1.0 - (b[i] * b[j] + perp[i] * perp[j] * c))
    }))
}

/// Frequency with which exactly one endpoint lands in A, where a vertex
/// (b, x) joins A when Φ(x̂·r) > (1 − t(b))/2 for a shared Gaussian r.
pub fn estimate_mixture_soundness(
    bp: &Blueprint,
    t: &ThresholdFunction,
    d: usize,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if d < 1 || n_samples < 2 {
        return Err(Error::Format("need d >= 1 and at least two samples".into()));
    }
    if t.len() != bp.len() {
        return Err(Error::Format("threshold function has the wrong arity".into()));
    }
    let pc = PointConfigs::new(bp)?;
    // Φ(g) > q  ⇔  g > Φ⁻¹(q).
    let h: Vec<f64> = t.values().iter().map(|v| point::phi_inv(((1.0 - v.mid()) / 2.0).clamp(0.0, 1.0))).collect();
    Ok(monte_carlo(n_samples, seed, |rng, s| {
        s.resize(d);
        let k = pc.pick.sample(rng);
        correlated_into(rng, pc.rho[k], &mut s.x, &mut s.y);
        for r in s.r.iter_mut() {
            *r = StandardNormal.sample(rng);
        }
        let gi = dot(&s.x, &s.r) / dot(&s.x, &s.x).sqrt();
        let gj = dot(&s.y, &s.r) / dot(&s.y, &s.y).sqrt();
        let in_a = |g: f64, h: f64| g > h;
        if in_a(gi, h[pc.i[k]]) != in_a(gj, h[pc.j[k]]) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Fraction of configuration-weighted pairs that are not ε-good, with the
/// 1/d normalization (‖x‖², ‖y‖² within ε of 1 and x·y within ε of ρ).
pub fn eps_bad_fraction(bp: &Blueprint, d: usize, eps: f64, n_samples: u64, seed: u64) -> Result<Estimate> {
    if d < 1 || n_samples < 2 {
        return Err(Error::Format("need d >= 1 and at least two samples".into()));
    }
    let pc = PointConfigs::new(bp)?;
    let df = d as f64;
    Ok(monte_carlo(n_samples, seed, |rng, s| {
        s.resize(d);
        let k = pc.pick.sample(rng);
        correlated_into(rng, pc.rho[k], &mut s.x, &mut s.y);
        let (xx, yy, xy) = (dot(&s.x, &s.x) / df, dot(&s.y, &s.y) / df, dot(&s.x, &s.y) / df);
        let good = (xx - 1.0).abs() < eps && (yy - 1.0).abs() < eps && (xy - pc.rho[k]).abs() < eps;
        if good {
            0.0
        } else {
            1.0
        }
    }))
}
