//! Reduction of Soundness(𝒟*, t) over balanced t to a function of (t₁, t₂).
//!
//! With μ supported on {b₁, b₄}, balance fixes t₄ = λ·t₁ with
//! λ = −μ(b₁)/μ(b₄). For fixed (t₁, t₂) the soundness is concave in t₃ and in
//! t₅ separately (their partials are decreasing because every ρ < 0), so the
//! inner maxima sit at the roots located by [`root_find`].

use crate::blueprint::{threshold_mass, Blueprint};
use crate::error::{Error, Result};
use crate::point;
use crate::rigor::{gamma, phi_cdf, phi_inv, Interval, RigorConfig};

/// Index pairs (0-based) of the five configurations, in the order
/// (b₂,b₄), (b₃,b₄), (b₂,b₃), (b₂,b₅), (b₁,b₅).
pub const PAIRS: [(usize, usize); 5] = [(1, 3), (2, 3), (1, 2), (1, 4), (0, 4)];
const P24: usize = 0;
const P34: usize = 1;
const P23: usize = 2;
const P25: usize = 3;
const P15: usize = 4;

#[derive(Clone, Copy, Debug)]
pub struct Pair {
    pub weight: Interval,
    pub rho: Interval,
    /// √(1 − ρ²)
    pub s: Interval,
}

/// The data of 𝒟* that the reduced problem depends on.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub lambda: Interval,
    pub pairs: [Pair; 5],
    pub c_gw: Interval,
    pub cfg: RigorConfig,
}

/// A threshold box together with q = (1 − t)/2 and Φ⁻¹(q).
#[derive(Clone, Copy, Debug)]
struct Var {
    q: Interval,
    h: Interval,
}

impl Var {
    fn new(t: Interval, cfg: &RigorConfig) -> Var {
        let q = threshold_mass(t);
        let h = if q == Interval::ZERO || q == Interval::ONE {
            Interval::ZERO // unused: the exact limits take over
        } else {
            phi_inv(q, cfg).expect("q lies in [0, 1]").value
        };
        Var { q, h }
    }
}

/// ∂Γ_ρ/∂q₁ at (qᵢ, qⱼ) = Φ((Φ⁻¹(qⱼ) − ρΦ⁻¹(qᵢ))/√(1 − ρ²)), for ρ < 0,
/// with the exact limits on the boundary.
fn cond(p: &Pair, vi: &Var, vj: &Var, cfg: &RigorConfig) -> Interval {
    if vj.q == Interval::ZERO {
        return Interval::ZERO;
    }
    if vj.q == Interval::ONE {
        return Interval::ONE;
    }
    if vi.q == Interval::ZERO {
        return Interval::ZERO;
    }
    if vi.q == Interval::ONE {
        return Interval::ONE;
    }
    let x = (vj.h - p.rho * vi.h) / p.s;
    if x.lo().is_nan() || x.hi().is_nan() {
        return Interval::UNIT;
    }
    phi_cdf(x, cfg).clip(Interval::UNIT)
}

/// ∂/∂tᵢ of the pair value: −½ + ∂Γ/∂q₁.
fn slope(p: &Pair, vi: &Var, vj: &Var, cfg: &RigorConfig) -> Interval {
    cond(p, vi, vj, cfg) - Interval::HALF
}

impl Reduction {
    /// Checks that `bp` has the shape of 𝒟*: five biases, μ on {b₁, b₄}
    /// only, the five configurations of [`PAIRS`], all with ρ < 0.
    pub fn new(bp: &Blueprint) -> Result<Reduction> {
        if bp.len() != 5 {
            return Err(Error::InvalidBlueprint("the certifier needs exactly five biases".into()));
        }
        for i in [1, 2, 4] {
            if bp.mu(i) != Interval::ZERO {
                return Err(Error::UnsupportedMeasure("mu must be supported on {b1, b4}".into()));
            }
        }
        if bp.mu(0).lo() <= 0.0 || bp.mu(3).lo() <= 0.0 {
            return Err(Error::UnsupportedMeasure("mu must be supported on {b1, b4}".into()));
        }
        if bp.configs().len() != 5 {
            return Err(Error::InvalidBlueprint("the certifier needs exactly five configurations".into()));
        }
        let mut pairs = [Pair { weight: Interval::ZERO, rho: Interval::ZERO, s: Interval::ONE }; 5];
        let mut seen = [false; 5];
        for c in bp.configs() {
            let key = (c.i.min(c.j), c.i.max(c.j));
            let k = PAIRS
                .iter()
                .position(|&p| p == key)
                .ok_or_else(|| Error::InvalidBlueprint(format!("unexpected configuration {key:?}")))?;
            if seen[k] {
                return Err(Error::InvalidBlueprint(format!("configuration {key:?} repeated")));
            }
            seen[k] = true;
            let rho = c.theta.relative_bias();
            if rho.hi() >= 0.0 || rho.lo() <= -1.0 {
                return Err(Error::InvalidBlueprint("every relative bias must lie in (-1, 0)".into()));
            }
            let s = ((Interval::ONE - rho) * (Interval::ONE + rho)).sqrt();
            pairs[k] = Pair { weight: c.weight, rho, s };
        }
        Ok(Reduction {
            lambda: -(bp.mu(0) / bp.mu(3)),
            pairs,
            c_gw: bp.constants().c_gw,
            cfg: *bp.rigor(),
        })
    }

    pub fn t4_from_balance(&self, t1: Interval) -> Interval {
        (self.lambda * t1).clip(Interval::SIGNED_UNIT)
    }

    fn dt3(&self, v2: &Var, v3: &Var, v4: &Var) -> Interval {
        let c = &self.cfg;
        self.pairs[P34].weight * slope(&self.pairs[P34], v3, v4, c)
            + self.pairs[P23].weight * slope(&self.pairs[P23], v3, v2, c)
    }

    fn dt5(&self, v1: &Var, v2: &Var, v5: &Var) -> Interval {
        let c = &self.cfg;
        self.pairs[P25].weight * slope(&self.pairs[P25], v5, v2, c)
            + self.pairs[P15].weight * slope(&self.pairs[P15], v5, v1, c)
    }

    pub fn dpartial_t3(&self, t2: Interval, t3: Interval, t4: Interval) -> Interval {
        let c = &self.cfg;
        self.dt3(&Var::new(t2, c), &Var::new(t3, c), &Var::new(t4, c))
    }

    pub fn dpartial_t5(&self, t1: Interval, t2: Interval, t5: Interval) -> Interval {
        let c = &self.cfg;
        self.dt5(&Var::new(t1, c), &Var::new(t2, c), &Var::new(t5, c))
    }

    /// Interval containing every maximizing t₃ for (t₂, t₄) in the boxes.
    pub fn root_t3(&self, t2: Interval, t4: Interval, eps: f64) -> Interval {
        let c = &self.cfg;
        let (v2, v4) = (Var::new(t2, c), Var::new(t4, c));
        root_find(|m| self.dt3(&v2, &Var::new(Interval::point(m), c), &v4), eps)
    }

    pub fn root_t5(&self, t1: Interval, t2: Interval, eps: f64) -> Interval {
        let c = &self.cfg;
        let (v1, v2) = (Var::new(t1, c), Var::new(t2, c));
        root_find(|m| self.dt5(&v1, &v2, &Var::new(Interval::point(m), c)), eps)
    }

    /// Σ w·pair_value with every threshold an interval.
    pub fn soundness(&self, t: [Interval; 5]) -> Interval {
        let mut acc = Interval::ZERO;
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            let p = &self.pairs[k];
            acc += p.weight * pair_value_rho(p.rho, t[i], t[j], &self.cfg);
        }
        acc.clip(Interval::UNIT)
    }

    /// Encloses s over T₁×T₂×T₃×T₅ (t₄ tied to t₁) by the mean-value form
    /// around the box centre.
    pub fn mean_value_bound(&self, t1: Interval, t2: Interval, t3: Interval, t5: Interval) -> Interval {
        let c = &self.cfg;
        let t4 = self.t4_from_balance(t1);
        let v = [t1, t2, t3, t4, t5].map(|t| Var::new(t, c));
        let [v1, v2, v3, v4, v5] = &v;
        let pr = &self.pairs;
        let g1 = pr[P15].weight * slope(&pr[P15], v1, v5, c)
            + self.lambda
                * (pr[P24].weight * slope(&pr[P24], v4, v2, c) + pr[P34].weight * slope(&pr[P34], v4, v3, c));
        let g2 = pr[P24].weight * slope(&pr[P24], v2, v4, c)
            + pr[P23].weight * slope(&pr[P23], v2, v3, c)
            + pr[P25].weight * slope(&pr[P25], v2, v5, c);
        let g3 = self.dt3(v2, v3, v4);
        let g5 = self.dt5(v1, v2, v5);
        let mid = |t: Interval| Interval::point(t.mid());
        let (c1, c2, c3, c5) = (mid(t1), mid(t2), mid(t3), mid(t5));
        let centre = self.soundness([c1, c2, c3, self.t4_from_balance(c1), c5]);
        centre + g1 * (t1 - c1) + g2 * (t2 - c2) + g3 * (t3 - c3) + g5 * (t5 - c5)
    }

    /// Encloses max over (t₃, t₅) of s(t₁, t₂, t₃, t₅) for all (t₁, t₂) in
    /// the region, together with the root intervals used.
    pub fn region_bound(&self, t1: Interval, t2: Interval, eps: f64) -> RegionBound {
        let t4 = self.t4_from_balance(t1);
        let t3 = self.root_t3(t2, t4, eps);
        let t5 = self.root_t5(t1, t2, eps);
        let mv = self.mean_value_bound(t1, t2, t3, t5);
        let s = if t1.width().max(t2.width()) > NAIVE_WIDTH {
            let naive = self.soundness([t1, t2, t3, t4, t5]);
            mv.intersect(naive).unwrap_or(naive)
        } else {
            mv
        };
        RegionBound { t3, t5, s: s.clip(Interval::UNIT) }
    }
}

/// Above this region width the plain interval evaluation is also tried.
const NAIVE_WIDTH: f64 = 0.05;

#[derive(Clone, Copy, Debug)]
pub struct RegionBound {
    pub t3: Interval,
    pub t5: Interval,
    pub s: Interval,
}

fn pair_value_rho(rho: Interval, ti: Interval, tj: Interval, cfg: &RigorConfig) -> Interval {
    let qi = threshold_mass(ti);
    let qj = threshold_mass(tj);
    (qi + qj - gamma(rho, qi, qj, cfg).ldexp(1)).clip(Interval::UNIT)
}

/// Encloses the root of a decreasing function on [−1, 1] from evaluations
/// at points. A bracket end moves only on a strict sign proof, so every root
/// of every point selection stays inside the result; if the function has no
/// root the result touches the endpoint where the maximum lies.
pub fn root_find(df: impl Fn(f64) -> Interval, eps: f64) -> Interval {
    let search = |upper: bool| {
        let (mut l, mut r) = (-1.0f64, 1.0f64);
        while r - l >= eps {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            let d = df(m);
            let go_right = if upper { !(d.hi() < 0.0) } else { d.lo() > 0.0 };
            if go_right {
                l = m;
            } else {
                r = m;
            }
        }
        (l, r)
    };
    let (lo, _) = search(false);
    let (_, hi) = search(true);
    Interval::new(lo, hi.max(lo))
}

pub fn reduction(bp: &Blueprint) -> Result<Reduction> {
    Reduction::new(bp)
}

pub fn t4_from_balance(bp: &Blueprint, t1: Interval) -> Result<Interval> {
    Ok(Reduction::new(bp)?.t4_from_balance(t1))
}

pub fn dpartial_t3(bp: &Blueprint, t2: Interval, t3: Interval, t4: Interval) -> Result<Interval> {
    Ok(Reduction::new(bp)?.dpartial_t3(t2, t3, t4))
}

pub fn dpartial_t5(bp: &Blueprint, t1: Interval, t2: Interval, t5: Interval) -> Result<Interval> {
    Ok(Reduction::new(bp)?.dpartial_t5(t1, t2, t5))
}

/// s(t₁, t₂) enclosure over a region, using inner root accuracy `eps`.
pub fn reduced_soundness(bp: &Blueprint, t1: Interval, t2: Interval, eps: f64) -> Result<Interval> {
    Ok(Reduction::new(bp)?.region_bound(t1, t2, eps).s)
}

/// Rigorous lower bound on Soundness(𝒟*) from one balanced threshold
/// function: t₁, t₂ as given, t₃ and t₅ at the point-arithmetic optimum.
pub fn lower_bound_at(red: &Reduction, pt: &PointReduction, t1: f64, t2: f64) -> (f64, f64, Interval) {
    let (_, t3, t5) = pt.s(t1, t2);
    let t = [
        Interval::point(t1),
        Interval::point(t2),
        Interval::point(t3),
        red.t4_from_balance(Interval::point(t1)),
        Interval::point(t5),
    ];
    (t3, t5, red.soundness(t))
}

/// Double-precision counterpart of [`Reduction`], for contours, heuristics
/// and test oracles.
#[derive(Clone, Debug)]
pub struct PointReduction {
    pub lambda: f64,
    pub weight: [f64; 5],
    pub rho: [f64; 5],
    pub c_gw: f64,
}

fn point_cond(rho: f64, qi: f64, qj: f64) -> f64 {
    if qj <= 0.0 {
        return 0.0;
    }
    if qj >= 1.0 {
        return 1.0;
    }
    if qi <= 0.0 {
        return 0.0;
    }
    if qi >= 1.0 {
        return 1.0;
    }
    let (h, k) = (point::phi_inv(qi), point::phi_inv(qj));
    point::phi((k - rho * h) / (1.0 - rho * rho).sqrt())
}

impl PointReduction {
    pub fn new(red: &Reduction) -> Self {
        PointReduction {
            lambda: red.lambda.mid(),
            weight: red.pairs.map(|p| p.weight.mid()),
            rho: red.pairs.map(|p| p.rho.mid()),
            c_gw: red.c_gw.mid(),
        }
    }

    fn slope(&self, k: usize, ti: f64, tj: f64) -> f64 {
        self.weight[k] * (point_cond(self.rho[k], (1.0 - ti) / 2.0, (1.0 - tj) / 2.0) - 0.5)
    }

    pub fn dt3(&self, t2: f64, t3: f64, t4: f64) -> f64 {
        self.slope(P34, t3, t4) + self.slope(P23, t3, t2)
    }

    pub fn dt5(&self, t1: f64, t2: f64, t5: f64) -> f64 {
        self.slope(P25, t5, t2) + self.slope(P15, t5, t1)
    }

    /// Plain bisection for the root of a decreasing function on [−1, 1].
    pub fn bisect(f: impl Fn(f64) -> f64) -> f64 {
        let (mut l, mut r) = (-1.0f64, 1.0f64);
        if f(l) <= 0.0 {
            return l;
        }
        if f(r) >= 0.0 {
            return r;
        }
        loop {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                return m;
            }
            if f(m) > 0.0 {
                l = m;
            } else {
                r = m;
            }
        }
    }

    pub fn soundness(&self, t: [f64; 5]) -> f64 {
        PAIRS
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| {
                let (qi, qj) = ((1.0 - t[i]) / 2.0, (1.0 - t[j]) / 2.0);
                self.weight[k] * (qi + qj - 2.0 * point::gamma(self.rho[k], qi, qj))
            })
            .sum()
    }

    /// (s(t₁, t₂), t₃*, t₅*).
    pub fn s(&self, t1: f64, t2: f64) -> (f64, f64, f64) {
        let t4 = (self.lambda * t1).clamp(-1.0, 1.0);
        let t3 = Self::bisect(|x| self.dt3(t2, x, t4));
        let t5 = Self::bisect(|x| self.dt5(t1, t2, x));
        (self.soundness([t1, t2, t3, t4, t5]), t3, t5)
    }
}
