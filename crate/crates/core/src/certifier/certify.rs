//! Branch-and-bound over (t₁, t₂) ∈ [−1, 1]², certificates and replay.

use super::reduction::{lower_bound_at, PointReduction, Reduction};
use crate::blueprint::{Blueprint, Expr};
use crate::error::{Error, Result};
use crate::rigor::{big_rational_interval, Interval, RigorConfig};
use rayon::prelude::*;
use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsRule {
    /// Average of the two region widths, but never below `floor`.
    AverageWidth { floor: f64 },
    Fixed(f64),
}

impl Default for EpsRule {
    fn default() -> Self {
        EpsRule::AverageWidth { floor: 2f64.powi(-30) }
    }
}

impl EpsRule {
    pub fn eps(&self, r: &Region) -> f64 {
        match *self {
            EpsRule::AverageWidth { floor } => (0.5 * (r.t1.width() + r.t2.width())).max(floor),
            EpsRule::Fixed(e) => e,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            EpsRule::AverageWidth { floor } => format!("average-width floor={floor:e}"),
            EpsRule::Fixed(e) => format!("fixed {e:e}"),
        }
    }

    pub fn parse(s: &str) -> Option<EpsRule> {
        let mut it = s.split_whitespace();
        let rule = match (it.next()?, it.next()?) {
            ("average-width", f) => EpsRule::AverageWidth { floor: f.strip_prefix("floor=")?.parse().ok()? },
            ("fixed", e) => EpsRule::Fixed(e.parse().ok()?),
            _ => return None,
        };
        it.next().is_none().then_some(rule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub t1: Interval,
    pub t2: Interval,
    pub depth: u32,
}

type Key = (u64, u64, u64, u64);

impl Region {
    pub fn root() -> Region {
        Region { t1: Interval::SIGNED_UNIT, t2: Interval::SIGNED_UNIT, depth: 0 }
    }

    /// Halves the wider side (t₁ on ties).
    pub fn split(&self) -> (Region, Region) {
        let d = self.depth + 1;
        if self.t1.width() >= self.t2.width() {
            let (a, b) = self.t1.split();
            (Region { t1: a, depth: d, ..*self }, Region { t1: b, depth: d, ..*self })
        } else {
            let (a, b) = self.t2.split();
            (Region { t2: a, depth: d, ..*self }, Region { t2: b, depth: d, ..*self })
        }
    }

    fn key(&self) -> Key {
        (self.t1.lo().to_bits(), self.t1.hi().to_bits(), self.t2.lo().to_bits(), self.t2.hi().to_bits())
    }

    fn order(&self, o: &Region) -> std::cmp::Ordering {
        self.t1
            .lo()
            .total_cmp(&o.t1.lo())
            .then(self.t2.lo().total_cmp(&o.t2.lo()))
            .then(self.depth.cmp(&o.depth))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Verified,
    RefutedRegion,
    Inconclusive,
    /// Only in checkpoints.
    InProgress,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::RefutedRegion => "refuted-region",
            Status::Inconclusive => "inconclusive",
            Status::InProgress => "in-progress",
        }
    }

    fn from_name(s: &str) -> Option<Status> {
        [Status::Verified, Status::RefutedRegion, Status::Inconclusive, Status::InProgress]
            .into_iter()
            .find(|x| x.name() == s)
    }
}

/// A balanced threshold function whose soundness provably exceeds the bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t5: f64,
    pub lower: Interval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub blueprint_id: String,
    pub bound: f64,
    pub normalizer: Interval,
    pub settings: RigorConfig,
    pub eps_rule: EpsRule,
    pub max_depth: u32,
    /// Regions whose upper bound is below `bound`·c_GW, sorted.
    pub regions: Vec<(Region, Interval)>,
    /// Regions that failed at the depth limit.
    pub open: Vec<(Region, Interval)>,
    /// Regions not yet examined (checkpoints only).
    pub pending: Vec<Region>,
    pub witness: Option<Witness>,
    pub status: Status,
    pub wall_time: Option<f64>,
}

/// `bound` as the decimal it was written as, enclosed.
fn bound_interval(bound: f64) -> Interval {
    big_rational_interval(&Expr::decimal(bound).exact().expect("literal"))
}

/// s/c_GW < bound, decided pessimistically.
pub fn below(s: Interval, c_gw: Interval, bound: f64) -> bool {
    (Interval::point(s.hi()) / Interval::point(c_gw.lo())).hi() < bound_interval(bound).lo()
}

fn above(s: Interval, c_gw: Interval, bound: f64) -> bool {
    (Interval::point(s.lo()) / Interval::point(c_gw.hi())).lo() > bound_interval(bound).hi()
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub bound: f64,
    pub max_depth: u32,
    pub eps_rule: EpsRule,
    /// Regions evaluated per batch; the batch is the unit of parallel work
    /// and of checkpointing.
    pub batch: usize,
    pub checkpoint: Option<PathBuf>,
    /// Write the checkpoint every this many batches.
    pub checkpoint_every: usize,
}

impl CertifyOptions {
    pub fn new(bound: f64, max_depth: u32) -> Self {
        CertifyOptions {
            bound,
            max_depth,
            eps_rule: EpsRule::default(),
            batch: 64,
            checkpoint: None,
            checkpoint_every: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Progress {
    pub verified: usize,
    pub open: usize,
    pub pending: usize,
    pub depth: u32,
}

enum Outcome {
    Pass(Interval),
    Split,
    Open(Interval),
    Refuted(Interval, Witness),
}

fn evaluate(red: &Reduction, pt: &PointReduction, r: &Region, opts: &CertifyOptions) -> Outcome {
    let b = red.region_bound(r.t1, r.t2, opts.eps_rule.eps(r));
    if below(b.s, red.c_gw, opts.bound) {
        return Outcome::Pass(b.s);
    }
    // Before splitting, see whether the region's centre already beats the
    // bound; the point estimate screens out hopeless rigorous evaluations.
    let (c1, c2) = (r.t1.mid(), r.t2.mid());
    let (s, _, _) = pt.s(c1, c2);
    if s / pt.c_gw > opts.bound {
        let (t3, t5, lower) = lower_bound_at(red, pt, c1, c2);
        if above(lower, red.c_gw, opts.bound) {
            return Outcome::Refuted(b.s, Witness { t1: c1, t2: c2, t3, t5, lower });
        }
    }
    if r.depth >= opts.max_depth {
        Outcome::Open(b.s)
    } else {
        Outcome::Split
    }
}

pub fn certify(bp: &Blueprint, bound: f64, max_depth: u32, eps_rule: EpsRule) -> Result<Certificate> {
    let opts = CertifyOptions { eps_rule, ..CertifyOptions::new(bound, max_depth) };
    certify_with(bp, &opts, None, |_| {})
}

/// Runs the branch-and-bound, optionally continuing from a checkpoint.
/// Regions are processed breadth-first in a fixed order and results are
/// sorted before output, so the certificate does not depend on the thread
/// count or on where a run was interrupted.
pub fn certify_with(
    bp: &Blueprint,
    opts: &CertifyOptions,
    resume: Option<Certificate>,
    mut progress: impl FnMut(&Progress),
) -> Result<Certificate> {
    if !(opts.bound > 0.0 && opts.bound.is_finite()) {
        return Err(Error::Format("bound must be positive".into()));
    }
    let red = Reduction::new(bp)?;
    let pt = PointReduction::new(&red);
    let mut cert = Certificate {
        blueprint_id: bp.content_hash(),
        bound: opts.bound,
        normalizer: red.c_gw,
        settings: *bp.rigor(),
        eps_rule: opts.eps_rule,
        max_depth: opts.max_depth,
        regions: vec![],
        open: vec![],
        pending: vec![],
        witness: None,
        status: Status::InProgress,
        wall_time: None,
    };
    let mut queue: VecDeque<Region> = VecDeque::new();
    match resume {
        Some(prev) => {
            let same = prev.blueprint_id == cert.blueprint_id
                && prev.bound == cert.bound
                && prev.settings == cert.settings
                && prev.eps_rule == cert.eps_rule
                && prev.max_depth == cert.max_depth;
            if !same || prev.status != Status::InProgress {
                return Err(Error::Format("checkpoint does not match this run".into()));
            }
            cert.regions = prev.regions;
            cert.open = prev.open;
            queue.extend(prev.pending);
        }
        None => queue.push_back(Region::root()),
    }

    let mut batches = 0usize;
    while !queue.is_empty() {
        let n = opts.batch.max(1).min(queue.len());
        let batch: Vec<Region> = queue.drain(..n).collect();
        let results: Vec<Outcome> = batch.par_iter().map(|r| evaluate(&red, &pt, r, opts)).collect();
        for (r, out) in batch.iter().zip(results) {
            match out {
                Outcome::Pass(s) => cert.regions.push((*r, s)),
                Outcome::Open(s) => cert.open.push((*r, s)),
                Outcome::Split => {
                    let (a, b) = r.split();
                    queue.push_back(a);
                    queue.push_back(b);
                }
                Outcome::Refuted(s, w) => {
                    if cert.witness.is_none() {
                        cert.witness = Some(w);
                        cert.open.push((*r, s));
                    }
                }
            }
        }
        batches += 1;
        progress(&Progress {
            verified: cert.regions.len(),
            open: cert.open.len(),
            pending: queue.len(),
            depth: queue.front().map_or(0, |r| r.depth),
        });
        if cert.witness.is_some() {
            break;
        }
        if let Some(path) = &opts.checkpoint {
            if batches % opts.checkpoint_every.max(1) == 0 && !queue.is_empty() {
                let mut snap = cert.clone();
                snap.pending = queue.iter().copied().collect();
                snap.sort();
                write_atomic(path, &snap.to_text())?;
            }
        }
    }
    cert.status = if cert.witness.is_some() {
        Status::RefutedRegion
    } else if cert.open.is_empty() {
        Status::Verified
    } else {
        Status::Inconclusive
    };
    cert.sort();
    Ok(cert)
}

fn write_atomic(path: &std::path::Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn f(x: f64) -> String {
    format!("{x:e}")
}

impl Certificate {
    fn sort(&mut self) {
        self.regions.sort_by(|a, b| a.0.order(&b.0));
        self.open.sort_by(|a, b| a.0.order(&b.0));
    }

    /// Largest s/c_GW upper bound over the verified regions.
    pub fn max_ratio(&self) -> f64 {
        self.regions
            .iter()
            .map(|(_, s)| (Interval::point(s.hi()) / Interval::point(self.normalizer.lo())).hi())
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "maxbisect-certificate 1");
        let _ = writeln!(s, "blueprint {}", self.blueprint_id);
        let _ = writeln!(s, "bound {}", self.bound);
        let _ = writeln!(s, "normalizer {} {}", f(self.normalizer.lo()), f(self.normalizer.hi()));
        let _ = writeln!(s, "settings {}", self.settings.describe());
        let _ = writeln!(s, "eps_rule {}", self.eps_rule.describe());
        let _ = writeln!(s, "max_depth {}", self.max_depth);
        let rec = |s: &mut String, tag: &str, r: &Region, v: &Interval| {
            let _ = writeln!(
                s,
                "{tag} {} {} {} {} {} {} {}",
                f(r.t1.lo()),
                f(r.t1.hi()),
                f(r.t2.lo()),
                f(r.t2.hi()),
                r.depth,
                f(v.lo()),
                f(v.hi())
            );
        };
        for (r, v) in &self.regions {
            rec(&mut s, "region", r, v);
        }
        for (r, v) in &self.open {
            rec(&mut s, "open", r, v);
        }
        for r in &self.pending {
            let _ = writeln!(s, "pending {} {} {} {} {}", f(r.t1.lo()), f(r.t1.hi()), f(r.t2.lo()), f(r.t2.hi()), r.depth);
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(
                s,
                "witness {} {} {} {} {} {}",
                f(w.t1),
                f(w.t2),
                f(w.t3),
                f(w.t5),
                f(w.lower.lo()),
                f(w.lower.hi())
            );
        }
        let _ = writeln!(s, "status {}", self.status.name());
        let _ = writeln!(s, "regions {}", self.regions.len() + self.open.len());
        match self.wall_time {
            Some(t) => {
                let _ = writeln!(s, "wall_time {t:.3}");
            }
            None => {
                let _ = writeln!(s, "wall_time -");
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Certificate> {
        let bad = |ln: usize, m: &str| Error::Format(format!("line {ln}: {m}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let mut field = |name: &str| -> Result<(usize, String)> {
            let (ln, l) = lines.next().ok_or_else(|| Error::Format(format!("missing {name}")))?;
            let rest = l.strip_prefix(name).ok_or_else(|| bad(ln, &format!("expected {name}")))?;
            Ok((ln, rest.trim().to_string()))
        };
        let (ln, v) = field("maxbisect-certificate")?;
        if v != "1" {
            return Err(bad(ln, "unsupported version"));
        }
        let blueprint_id = field("blueprint")?.1;
        let (ln, v) = field("bound")?;
        let bound: f64 = v.parse().map_err(|_| bad(ln, "bad bound"))?;
        let (ln, v) = field("normalizer")?;
        let nums = floats(&v).ok_or_else(|| bad(ln, "bad normalizer"))?;
        let normalizer = match nums[..] {
            [a, b] if a <= b => Interval::new(a, b),
            _ => return Err(bad(ln, "bad normalizer")),
        };
        let (ln, v) = field("settings")?;
        let settings = RigorConfig::parse(&v).ok_or_else(|| bad(ln, "bad settings"))?;
        let (ln, v) = field("eps_rule")?;
        let eps_rule = EpsRule::parse(&v).ok_or_else(|| bad(ln, "bad eps rule"))?;
        let (ln, v) = field("max_depth")?;
        let max_depth: u32 = v.parse().map_err(|_| bad(ln, "bad max_depth"))?;

        let mut cert = Certificate {
            blueprint_id,
            bound,
            normalizer,
            settings,
            eps_rule,
            max_depth,
            regions: vec![],
            open: vec![],
            pending: vec![],
            witness: None,
            status: Status::InProgress,
            wall_time: None,
        };
        let mut count = None;
        let mut status = None;
        let mut wall = None;
        for (ln, l) in lines {
            let (tag, rest) = l.split_once(' ').ok_or_else(|| bad(ln, "malformed record"))?;
            match tag {
                "region" | "open" | "pending" => {
                    let want = if tag == "pending" { 5 } else { 7 };
                    let v = floats(rest).filter(|v| v.len() == want).ok_or_else(|| bad(ln, "malformed region"))?;
                    let iv = |a: f64, b: f64| Interval::try_new(a, b).ok_or_else(|| bad(ln, "inverted interval"));
                    let depth = v[4];
                    if depth < 0.0 || depth.fract() != 0.0 {
                        return Err(bad(ln, "bad depth"));
                    }
                    let r = Region { t1: iv(v[0], v[1])?, t2: iv(v[2], v[3])?, depth: depth as u32 };
                    match tag {
                        "region" => cert.regions.push((r, iv(v[5], v[6])?)),
                        "open" => cert.open.push((r, iv(v[5], v[6])?)),
                        _ => cert.pending.push(r),
                    }
                }
                "witness" => {
                    let v = floats(rest).filter(|v| v.len() == 6).ok_or_else(|| bad(ln, "malformed witness"))?;
                    let lower = Interval::try_new(v[4], v[5]).ok_or_else(|| bad(ln, "inverted interval"))?;
                    cert.witness = Some(Witness { t1: v[0], t2: v[1], t3: v[2], t5: v[3], lower });
                }
                "status" => status = Some(Status::from_name(rest).ok_or_else(|| bad(ln, "unknown status"))?),
                "regions" => count = Some(rest.parse::<usize>().map_err(|_| bad(ln, "bad count"))?),
                "wall_time" => {
                    wall = Some(if rest == "-" {
                        None
                    } else {
                        Some(rest.parse::<f64>().map_err(|_| bad(ln, "bad wall time"))?)
                    })
                }
                _ => return Err(bad(ln, "unknown record")),
            }
        }
        cert.status = status.ok_or_else(|| Error::Format("missing status".into()))?;
        cert.wall_time = wall.ok_or_else(|| Error::Format("missing wall_time".into()))?;
        if count != Some(cert.regions.len() + cert.open.len()) {
            return Err(Error::Format("region count does not match the records".into()));
        }
        Ok(cert)
    }
}

fn floats(s: &str) -> Option<Vec<f64>> {
    s.split_whitespace().map(|x| x.parse().ok()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Replay {
    Verified,
    Mismatch { index: Option<usize>, reason: String },
}

/// Checks that the verified regions tile [−1, 1]² exactly, by walking the
/// deterministic split tree.
fn check_tiling(cert: &Certificate) -> std::result::Result<(), String> {
    let mut leaves: HashSet<Key> = HashSet::new();
    for (r, _) in &cert.regions {
        if !leaves.insert(r.key()) {
            return Err("duplicate region".into());
        }
    }
    // Strict ancestors of every leaf in the split tree; a leaf that is not
    // reachable this way was not produced by splitting.
    let mut inner: HashSet<Key> = HashSet::new();
    for (leaf, _) in &cert.regions {
        let (c1, c2) = (leaf.t1.mid(), leaf.t2.mid());
        let mut r = Region::root();
        while r.key() != leaf.key() {
            if r.depth >= leaf.depth || r.depth >= cert.max_depth {
                return Err(format!("region t1={} t2={} is not in the split tree", leaf.t1, leaf.t2));
            }
            inner.insert(r.key());
            let (a, b) = r.split();
            r = if a.t1.contains(c1) && a.t2.contains(c2) { a } else { b };
        }
    }
    let mut used = 0usize;
    let mut stack = vec![Region::root()];
    while let Some(r) = stack.pop() {
        if leaves.contains(&r.key()) {
            if inner.contains(&r.key()) {
                return Err(format!("regions overlap at t1={} t2={}", r.t1, r.t2));
            }
            used += 1;
            continue;
        }
        if !inner.contains(&r.key()) {
            return Err(format!("hole at t1={} t2={}", r.t1, r.t2));
        }
        let (a, b) = r.split();
        stack.push(b);
        stack.push(a);
    }
    if used != leaves.len() {
        return Err("regions overlap or do not come from the split tree".into());
    }
    Ok(())
}

/// Re-evaluates every region independently and re-checks the tiling and
/// the threshold comparisons.
pub fn replay(cert: &Certificate, bp: &Blueprint) -> Result<Replay> {
    replay_sampled(cert, bp, 1)
}

/// Like [`replay`] but re-evaluates only every `stride`-th region. Tiling,
/// normalizer and witness are still checked in full.
pub fn replay_sampled(cert: &Certificate, bp: &Blueprint, stride: usize) -> Result<Replay> {
    let stride = stride.max(1);
    if bp.content_hash() != cert.blueprint_id {
        return Ok(Replay::Mismatch { index: None, reason: "blueprint hash differs".into() });
    }
    if *bp.rigor() != cert.settings {
        return Err(Error::Format("certificate settings differ from the blueprint's".into()));
    }
    let red = Reduction::new(bp)?;
    if !red.c_gw.subset_of(cert.normalizer) {
        return Ok(Replay::Mismatch { index: None, reason: "normalizer does not enclose c_GW".into() });
    }
    if cert.status == Status::Verified {
        if !cert.open.is_empty() || !cert.pending.is_empty() || cert.witness.is_some() {
            return Ok(Replay::Mismatch { index: None, reason: "verified certificate with open regions".into() });
        }
        if let Err(reason) = check_tiling(cert) {
            return Ok(Replay::Mismatch { index: None, reason });
        }
    }
    let all: Vec<&(Region, Interval)> = cert.regions.iter().chain(&cert.open).collect();
    let found = all.par_iter().enumerate().filter(|(k, _)| k % stride == 0).find_first(|(k, (r, recorded))| {
        let s = red.region_bound(r.t1, r.t2, cert.eps_rule.eps(r)).s;
        let pass = below(s, red.c_gw, cert.bound);
        s.hi() > recorded.hi() || (*k < cert.regions.len() && !(pass && below(*recorded, red.c_gw, cert.bound)))
    });
    if let Some((k, _)) = found {
        return Ok(Replay::Mismatch { index: Some(k), reason: "region bound not reproduced".into() });
    }
    if let Some(w) = &cert.witness {
        let t = [
            Interval::point(w.t1),
            Interval::point(w.t2),
            Interval::point(w.t3),
            red.t4_from_balance(Interval::point(w.t1)),
            Interval::point(w.t5),
        ];
        let lower = red.soundness(t);
        if !above(lower, red.c_gw, cert.bound) {
            return Ok(Replay::Mismatch { index: None, reason: "witness does not exceed the bound".into() });
        }
    }
    Ok(Replay::Verified)
}
