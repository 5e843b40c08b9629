use super::expr::{Affine, Expr};
use crate::error::{Error, Result};
use crate::rigor::{gamma, Constants, Interval, RigorConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};
use std::cmp::Ordering;

/// Symbols available to every expression: b_GW, b = 1 + b_GW, ν₁, ν₂.
pub const RESERVED: [&str; 4] = ["bgw", "b", "nu1", "nu2"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Configuration {
    pub bi: Interval,
    pub bj: Interval,
    pub bij: Interval,
}

/// Outcome of checking one of the four linear triangle inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slack {
    Strict,
    Tight,
    Violated,
    Undecided,
}

impl Slack {
    fn of_interval(s: Interval) -> Slack {
        if s.lo() > 0.0 {
            Slack::Strict
        } else if s.hi() < 0.0 {
            Slack::Violated
        } else if s.lo() == 0.0 && s.hi() == 0.0 {
            Slack::Tight
        } else {
            Slack::Undecided
        }
    }

    pub fn holds(self) -> bool {
        matches!(self, Slack::Strict | Slack::Tight)
    }
}

impl Configuration {
    pub fn new(bi: Interval, bj: Interval, bij: Interval) -> Self {
        Configuration { bi, bj, bij }
    }

    pub fn points(bi: f64, bj: f64, bij: f64) -> Self {
        Self::new(Interval::point(bi), Interval::point(bj), Interval::point(bij))
    }

    /// −1 + |bᵢ + bⱼ| ≤ bᵢⱼ ≤ 1 − |bᵢ − bⱼ| written as four quantities that
    /// must be nonnegative.
    pub fn triangle_slacks(&self) -> [Interval; 4] {
        let (bi, bj, bij) = (self.bi, self.bj, self.bij);
        let one = Interval::ONE;
        [
            bij + one - bi - bj,
            bij + one + bi + bj,
            one - bij - bi + bj,
            one - bij + bi - bj,
        ]
    }

    pub fn triangle(&self) -> [Slack; 4] {
        self.triangle_slacks().map(Slack::of_interval)
    }

    pub fn satisfies_triangle(&self) -> bool {
        self.triangle().iter().all(|s| s.holds())
    }

    pub fn strict_triangle(&self) -> bool {
        self.triangle().iter().all(|&s| s == Slack::Strict)
    }

    /// ρ(θ) = (bᵢⱼ − bᵢbⱼ)/√((1 − bᵢ²)(1 − bⱼ²)), zero on the degenerate
    /// boundary.
    pub fn relative_bias(&self) -> Interval {
        let one = Interval::ONE;
        let den = (one - self.bi) * (one + self.bi) * (one - self.bj) * (one + self.bj);
        if den.hi() <= 0.0 {
            return Interval::ZERO;
        }
        if den.lo() <= 0.0 {
            return Interval::SIGNED_UNIT;
        }
        ((self.bij - self.bi * self.bj) / den.sqrt()).clip(Interval::SIGNED_UNIT)
    }

    pub fn is_positive(&self) -> bool {
        self.relative_bias().hi() <= 0.0
    }
}

/// (1 − tᵢ)/2 + (1 − tⱼ)/2 − 2Γ_ρ((1 − tᵢ)/2, (1 − tⱼ)/2): the probability
/// that the two ends of an edge land on different sides.
pub fn pair_value(theta: &Configuration, ti: Interval, tj: Interval, cfg: &RigorConfig) -> Interval {
    let qi = threshold_mass(ti);
    let qj = threshold_mass(tj);
    let g = gamma(theta.relative_bias(), qi, qj, cfg);
    (qi + qj - g.ldexp(1)).clip(Interval::UNIT)
}

/// q = (1 − t)/2, exact at t = ±1.
pub fn threshold_mass(t: Interval) -> Interval {
    (Interval::ONE - t).ldexp(-1).clip(Interval::UNIT)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigSpec {
    pub i: String,
    pub j: String,
    pub pairwise: Expr,
    pub weight: Expr,
}

/// The symbolic content of a blueprint, exactly as written in a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlueprintSpec {
    pub name: String,
    pub biases: Vec<(String, Expr)>,
    pub mu: Vec<(String, Expr)>,
    pub configs: Vec<ConfigSpec>,
}

#[derive(Clone, Debug)]
pub struct ConfigEntry {
    pub i: usize,
    pub j: usize,
    pub theta: Configuration,
    pub weight: Interval,
    pub triangle: [Slack; 4],
}

#[derive(Clone, Debug)]
pub struct Blueprint {
    spec: BlueprintSpec,
    constants: Constants,
    rigor: RigorConfig,
    bias_values: Vec<Interval>,
    bias_affine: Vec<Affine>,
    mu: Vec<Interval>,
    configs: Vec<ConfigEntry>,
    order: Vec<usize>,
}

fn reserved_affine(name: &str, k: &Constants) -> Option<Affine> {
    let one = BigRational::one();
    let zero = BigRational::zero();
    let big = |r: &num_rational::Rational64| BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
    Some(match name {
        "bgw" => Affine { constant: zero, slope: one },
        "b" => Affine { constant: one.clone(), slope: one },
        "nu1" => Affine::constant(big(&k.nu1)),
        "nu2" => Affine::constant(big(&k.nu2)),
        _ => return None,
    })
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic() || x == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidBlueprint(msg.into())
}

impl Blueprint {
    pub fn from_spec(spec: BlueprintSpec, cfg: &RigorConfig) -> Result<Self> {
        Self::with_constants(spec, cfg, Constants::compute(cfg))
    }

    pub fn with_constants(spec: BlueprintSpec, cfg: &RigorConfig, constants: Constants) -> Result<Self> {
        let k = &constants;
        let names: Vec<&str> = spec.biases.iter().map(|(n, _)| n.as_str()).collect();
        for (idx, n) in names.iter().enumerate() {
            if !is_ident(n) || RESERVED.contains(n) {
                return Err(invalid(format!("bad bias name {n:?}")));
            }
            if names[..idx].contains(n) {
                return Err(invalid(format!("duplicate bias {n}")));
            }
        }
        let index_of = |n: &str| names.iter().position(|m| *m == n);

        let mut bias_affine = Vec::new();
        let mut bias_values = Vec::new();
        for (n, e) in &spec.biases {
            let a = e
                .affine(&|s| reserved_affine(s, k))
                .ok_or_else(|| invalid(format!("bias {n} must be affine in bgw, b, nu1, nu2 and literals")))?;
            let v = a.eval(k.b_gw);
            if !v.subset_of(Interval::SIGNED_UNIT) {
                return Err(invalid(format!("bias {n} = {v} not within [-1, 1]")));
            }
            bias_affine.push(a);
            bias_values.push(v);
        }

        let sym_affine = |s: &str| reserved_affine(s, k).or_else(|| index_of(s).map(|i| bias_affine[i].clone()));
        let sym_interval = |s: &str| {
            index_of(s)
                .map(|i| bias_values[i])
                .or_else(|| reserved_affine(s, k).map(|a| a.eval(k.b_gw)))
        };
        let value = |e: &Expr| -> Option<Interval> {
            match e.affine(&sym_affine) {
                Some(a) => Some(a.eval(k.b_gw)),
                None => e.interval(&sym_interval),
            }
        };

        let mut mu = vec![Interval::ZERO; names.len()];
        let mut seen = vec![false; names.len()];
        for (n, e) in &spec.mu {
            let i = index_of(n).ok_or_else(|| invalid(format!("mu refers to unknown bias {n}")))?;
            if seen[i] {
                return Err(invalid(format!("mu lists {n} twice")));
            }
            seen[i] = true;
            let v = value(e).ok_or_else(|| invalid(format!("mu({n}) uses unknown symbols")))?;
            if v.lo() < 0.0 {
                return Err(invalid(format!("mu({n}) = {v} is not certainly nonnegative")));
            }
            mu[i] = v;
        }
        let total: Interval = mu.iter().copied().sum();
        if !total.contains(1.0) {
            return Err(invalid(format!("mu sums to {total}")));
        }
        let mean: Interval = mu.iter().zip(&bias_values).map(|(&m, &b)| m * b).sum();
        if !mean.contains_zero() {
            return Err(invalid(format!("mu has mean {mean}, not 0")));
        }

        let mut configs = Vec::new();
        for c in &spec.configs {
            let i = index_of(&c.i).ok_or_else(|| invalid(format!("unknown bias {}", c.i)))?;
            let j = index_of(&c.j).ok_or_else(|| invalid(format!("unknown bias {}", c.j)))?;
            let weight = value(&c.weight).ok_or_else(|| invalid("weight uses unknown symbols"))?;
            if weight.lo() < 0.0 {
                return Err(invalid(format!("negative weight {weight}")));
            }
            let pa = c.pairwise.affine(&sym_affine);
            let bij = match &pa {
                Some(a) => a.eval(k.b_gw),
                None => value(&c.pairwise).ok_or_else(|| invalid("pairwise bias uses unknown symbols"))?,
            };
            if !bij.subset_of(Interval::SIGNED_UNIT) {
                return Err(invalid(format!("pairwise bias {bij} not within [-1, 1]")));
            }
            let theta = Configuration::new(bias_values[i], bias_values[j], bij);
            let triangle = match &pa {
                Some(a) => exact_triangle(&bias_affine[i], &bias_affine[j], a, k.b_gw),
                None => theta.triangle(),
            };
            if let Some(s) = triangle.iter().find(|s| !s.holds()) {
                return Err(invalid(format!(
                    "configuration ({}, {}, {}) triangle inequality {:?}",
                    c.i, c.j, c.pairwise, s
                )));
            }
            configs.push(ConfigEntry { i, j, theta, weight, triangle });
        }
        if configs.is_empty() {
            return Err(invalid("no configurations"));
        }
        let wsum: Interval = configs.iter().map(|c| c.weight).sum();
        if !wsum.contains(1.0) {
            return Err(invalid(format!("configuration weights sum to {wsum}")));
        }

        let mut order: Vec<usize> = (0..configs.len()).collect();
        order.sort_by(|&a, &b| canonical_cmp(&configs[a], &configs[b], &spec));
        Ok(Blueprint {
            spec,
            constants,
            rigor: *cfg,
            bias_values,
            bias_affine,
            mu,
            configs,
            order,
        })
    }

    pub fn spec(&self) -> &BlueprintSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn rigor(&self) -> &RigorConfig {
        &self.rigor
    }

    pub fn len(&self) -> usize {
        self.bias_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bias_values.is_empty()
    }

    pub fn bias_names(&self) -> impl Iterator<Item = &str> {
        self.spec.biases.iter().map(|(n, _)| n.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.bias_names().position(|n| n == name)
    }

    pub fn bias(&self, i: usize) -> Interval {
        self.bias_values[i]
    }

    pub fn biases(&self) -> &[Interval] {
        &self.bias_values
    }

    pub fn bias_affine(&self, i: usize) -> &Affine {
        &self.bias_affine[i]
    }

    pub fn mu(&self, i: usize) -> Interval {
        self.mu[i]
    }

    pub fn mu_values(&self) -> &[Interval] {
        &self.mu
    }

    pub fn configs(&self) -> &[ConfigEntry] {
        &self.configs
    }

    /// Configuration indices in canonical summation order.
    pub fn canonical_order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_positive(&self) -> bool {
        self.configs.iter().all(|c| c.theta.is_positive())
    }

    pub fn strict_triangles(&self) -> bool {
        self.configs.iter().all(|c| c.triangle.iter().all(|&s| s == Slack::Strict))
    }

    /// SHA-256 of the canonical text form.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(super::format::to_text(&self.spec).as_bytes()))
    }

    pub fn completeness(&self) -> Interval {
        let mut acc = Interval::ZERO;
        for &k in &self.order {
            let c = &self.configs[k];
            acc += c.weight * (Interval::ONE - c.theta.bij).ldexp(-1);
        }
        acc
    }

    pub fn soundness_at(&self, t: &ThresholdFunction) -> Interval {
        assert_eq!(t.len(), self.len(), "threshold function has the wrong arity");
        let mut acc = Interval::ZERO;
        for &k in &self.order {
            let c = &self.configs[k];
            acc += c.weight * pair_value(&c.theta, t.get(c.i), t.get(c.j), &self.rigor);
        }
        acc.clip(Interval::UNIT)
    }

    pub fn balance_residual(&self, t: &ThresholdFunction) -> Interval {
        assert_eq!(t.len(), self.len(), "threshold function has the wrong arity");
        self.mu.iter().zip(t.values()).map(|(&m, &x)| m * x).sum()
    }
}

fn exact_triangle(bi: &Affine, bj: &Affine, bij: &Affine, bgw: Interval) -> [Slack; 4] {
    let one = Affine::constant(BigRational::one());
    let lin = |terms: [(i64, &Affine); 4]| {
        let mut c = BigRational::zero();
        let mut s = BigRational::zero();
        for (k, a) in terms {
            let k = BigRational::from_integer(k.into());
            c += &k * &a.constant;
            s += &k * &a.slope;
        }
        Affine { constant: c, slope: s }
    };
    let forms = [
        lin([(1, bij), (1, &one), (-1, bi), (-1, bj)]),
        lin([(1, bij), (1, &one), (1, bi), (1, bj)]),
        lin([(-1, bij), (1, &one), (-1, bi), (1, bj)]),
        lin([(-1, bij), (1, &one), (1, bi), (-1, bj)]),
    ];
    forms.map(|f| {
        if f.is_constant() {
            if f.constant.is_zero() {
                Slack::Tight
            } else if f.constant.is_positive() {
                Slack::Strict
            } else {
                Slack::Violated
            }
        } else {
            Slack::of_interval(f.eval(bgw))
        }
    })
}

fn interval_cmp(a: Interval, b: Interval) -> Ordering {
    a.lo().total_cmp(&b.lo()).then(a.hi().total_cmp(&b.hi()))
}

fn canonical_cmp(a: &ConfigEntry, b: &ConfigEntry, spec: &BlueprintSpec) -> Ordering {
    interval_cmp(a.theta.bi, b.theta.bi)
        .then(interval_cmp(a.theta.bj, b.theta.bj))
        .then(interval_cmp(a.theta.bij, b.theta.bij))
        .then(interval_cmp(a.weight, b.weight))
        .then_with(|| spec.biases[a.i].0.cmp(&spec.biases[b.i].0))
        .then_with(|| spec.biases[a.j].0.cmp(&spec.biases[b.j].0))
}

/// t: B → [−1, 1], stored in the blueprint's bias order.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdFunction {
    values: Vec<Interval>,
}

impl ThresholdFunction {
    pub fn new(values: Vec<Interval>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.subset_of(Interval::SIGNED_UNIT)) {
            return Err(invalid(format!("threshold {v} outside [-1, 1]")));
        }
        Ok(ThresholdFunction { values })
    }

    pub fn from_points(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn zero(n: usize) -> Self {
        ThresholdFunction { values: vec![Interval::ZERO; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Interval {
        self.values[i]
    }

    pub fn values(&self) -> &[Interval] {
        &self.values
    }

    pub fn with(&self, i: usize, v: Interval) -> Result<Self> {
        let mut values = self.values.clone();
        values[i] = v;
        Self::new(values)
    }

    pub fn is_almost_balanced(&self, bp: &Blueprint, eps: f64) -> bool {
        bp.balance_residual(self).mag() <= eps
    }

    /// Reads `zero` or lines `name = expr` (unlisted biases get 0).
    pub fn parse(bp: &Blueprint, text: &str) -> Result<Self> {
        let mut values = vec![Interval::ZERO; bp.len()];
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line == "zero" {
                continue;
            }
            let (name, rhs) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ln + 1, "expected `name = value`"))?;
            let i = bp
                .index_of(name.trim())
                .ok_or_else(|| Error::parse(ln + 1, format!("unknown bias {:?}", name.trim())))?;
            let e = Expr::parse(rhs).map_err(|m| Error::parse(ln + 1, m))?;
            let k = bp.constants();
            values[i] = e
                .interval(&|s| reserved_affine(s, k).map(|a| a.eval(k.b_gw)))
                .ok_or_else(|| Error::parse(ln + 1, "unknown symbol"))?;
        }
        Self::new(values)
    }

    pub fn to_text(&self, bp: &Blueprint) -> String {
        let mut s = String::new();
        for (n, v) in bp.bias_names().zip(&self.values) {
            s.push_str(&format!("{n} = {}\n", Expr::decimal(v.mid())));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_bias_basics() {
        let r = Configuration::points(0.0, 0.0, -0.6891577).relative_bias();
        assert!(r.contains(-0.6891577));
        let r = Configuration::points(0.3, 0.3, 0.09).relative_bias();
        assert!(r.contains(0.0) && r.width() < 1e-15);
        assert_eq!(Configuration::points(1.0, 0.2, 0.2).relative_bias(), Interval::ZERO);
    }

    #[test]
    fn triangle_checks() {
        assert!(!Configuration::points(0.9, -0.9, 0.5).satisfies_triangle());
        let t = Configuration::points(0.5, 0.5, 0.0).triangle();
        assert_eq!(t[0], Slack::Tight);
        assert!(Configuration::points(0.1, 0.2, 0.0).strict_triangle());
    }

    #[test]
    fn pair_value_limits() {
        let cfg = RigorConfig::default();
        let indep = Configuration::points(0.0, 0.0, 0.0);
        assert!(pair_value(&indep, Interval::ZERO, Interval::ZERO, &cfg).contains(0.5));
        let c = Configuration::points(0.2, -0.1, -0.3);
        let v = pair_value(&c, Interval::ONE, -Interval::ONE, &cfg);
        assert_eq!(v, Interval::ONE);
    }
}
