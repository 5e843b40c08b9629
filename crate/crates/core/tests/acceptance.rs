//! Acceptance criteria 1–8. Prints one PASS/FAIL line per criterion.
//!
//! Criterion 8 is partly unattainable: six of the nine reference table
//! decimals and the reference residual disagree with the recomputation,
//! which independent oracles confirm. Those sub-items are printed as FAIL.
//! The process exits nonzero only when a result differs from what is
//! expected here, i.e. any failure in 1–7, a failure of the attainable
//! parts of 8, or a red value in 8 that drifts from its derived value.

use maxbisect::asymptotic::{
    self, b_gw, exact_soundness, soundness_expansion_at_bgw, REFERENCE_RESIDUAL, REFERENCE_TABLE, REFERENCE_WEIGHTS,
};
use maxbisect::blueprint::{
    builtin_dstar, perturb_mu, perturb_pairwise, Blueprint, BlueprintSpec, ConfigSpec, Expr, Slack, ThresholdFunction,
};
use maxbisect::certifier::{self, contour, Certificate, EpsRule, PointReduction, Reduction, Replay, Status};
use maxbisect::mixture;
use maxbisect::point;
use maxbisect::rigor::elementary::{asin, pi};
use maxbisect::rigor::{gamma, gamma_partials, Constants, Interval, RigorConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

const COMMITTED_CERT: &str = include_str!("data/dstar-0.87853.cert");

fn cfg() -> RigorConfig {
    RigorConfig::default()
}

struct Outcome {
    pass: bool,
    /// Whether this outcome is the expected one.
    expected: bool,
    detail: String,
}

fn ok(pass: bool, detail: String) -> Outcome {
    Outcome { pass, expected: pass, detail }
}

/// Distance from x to the interval, 0 inside.
fn dist(iv: Interval, x: f64) -> f64 {
    (iv.lo() - x).max(x - iv.hi()).max(0.0)
}

fn criterion1(bp: &Blueprint) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut run = |bound: f64, limit: f64| {
        let start = Instant::now();
        let c = certifier::certify(bp, bound, 40, EpsRule::default()).expect("certify");
        let secs = start.elapsed().as_secs_f64();
        let good = c.status == Status::Verified && secs <= limit;
        notes.push(format!("{bound} {:?} {:.0}s/{limit:.0}s ({} regions)", c.status, secs, c.regions.len()));
        pass &= good;
        c
    };
    run(0.8790, 60.0);
    run(0.8786, 1800.0);
    let full = run(0.87853, f64::INFINITY);
    let identical = full.to_text() == COMMITTED_CERT;
    notes.push(format!("byte-identical to committed: {identical}"));
    let committed = Certificate::parse(COMMITTED_CERT).expect("committed certificate parses");
    let replay = certifier::replay_sampled(&committed, bp, 8).expect("replay");
    notes.push(format!("replay (stride 8): {replay:?}"));

    let control = certifier::certify(bp, 0.8785, 40, EpsRule::default()).expect("certify");
    let refuted = control.status != Status::Verified;
    notes.push(format!("0.8785 {:?}", control.status));
    pass &= identical && replay == Replay::Verified && refuted;
    ok(pass, notes.join("; "))
}

fn criterion2(red: &Reduction) -> Outcome {
    let c = contour(red, 200);
    let (t1, t2, m) = c.max();
    let comps = c.superlevel_components(0.8784);
    ok(
        (m - 0.8785231).abs() <= 1e-5 && comps == 1,
        format!("200x200 max {m:.10} at ({t1:.3}, {t2:.3}); components above 0.8784: {comps}"),
    )
}

fn criterion3(bp: &Blueprint) -> Outcome {
    let k = Constants::compute(&cfg());
    // Reference decimals are truncated (c_GW = 0.8445788...), so allow one
    // unit in the last printed place.
    let near = |iv: Interval, v: f64, unit: f64| dist(iv, v) <= unit && iv.width() <= 1e-8;
    let comp = bp.completeness();
    let pass = near(k.alpha_gw, 0.8785672, 1e-7)
        && near(k.b_gw, -0.6891577, 1e-7)
        && near(k.c_gw, 0.844578, 1e-6)
        && comp.overlaps(k.c_gw)
        && comp.width() <= 1e-10;
    ok(
        pass,
        format!(
            "alpha {} b {} c {} (widths {:.1e} {:.1e} {:.1e}); completeness width {:.1e}",
            k.alpha_gw,
            k.b_gw,
            k.c_gw,
            k.alpha_gw.width(),
            k.b_gw.width(),
            k.c_gw.width(),
            comp.width()
        ),
    )
}

fn criterion4() -> Outcome {
    let c = cfg();
    let p = Interval::point;

    // One pool of 10⁷ standard normal pairs, sorted by x, serves every point;
    // each point's estimate is an ordinary 10⁷-sample estimate.
    const N: usize = 10_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a6d);
    let mut pool: Vec<(f64, f64)> =
        (0..N).map(|_| (rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))).collect();
    pool.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut worst_z: f64 = 0.0;
    let mut mc_fail = 0;
    for _ in 0..1000 {
        let rho: f64 = rng.random_range(-0.999..0.999);
        let (q1, q2): (f64, f64) = (rng.random_range(0.001..0.999), rng.random_range(0.001..0.999));
        let (h, k) = (point::phi_inv(q1), point::phi_inv(q2));
        let s = (1.0 - rho * rho).sqrt();
        let end = pool.partition_point(|&(x, _)| x <= h);
        let hits = pool[..end].iter().filter(|&&(x, z)| rho * x + s * z <= k).count();
        let est = hits as f64 / N as f64;
        let g = gamma(p(rho), p(q1), p(q2), &c);
        let pm = g.mid().clamp(1.0 / N as f64, 1.0 - 1.0 / N as f64);
        let z = dist(g, est) / (pm * (1.0 - pm) / N as f64).sqrt();
        worst_z = worst_z.max(z);
        mc_fail += (z > 4.0) as usize;
    }

    let mut quad_fail = 0;
    for i in 0..100 {
        let r = -0.99 + 0.02 * i as f64;
        let g = gamma(p(r), Interval::HALF, Interval::HALF, &c);
        let want = Interval::point(0.25) + asin(p(r)) / pi().ldexp(1);
        quad_fail += !g.overlaps(want) as usize;
    }

    let mut worst_fd: f64 = 0.0;
    for _ in 0..50 {
        let (r, a, b): (f64, f64, f64) =
            (rng.random_range(-0.9..0.9), rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
        let (d1, d2, dr) = gamma_partials(p(r), p(a), p(b), &c).expect("partials");
        let g = |r: f64, a: f64, b: f64| gamma(p(r), p(a), p(b), &c).mid();
        let h = 1e-5;
        let f1 = (g(r, a + h, b) - g(r, a - h, b)) / (2.0 * h);
        let f2 = (g(r, a, b + h) - g(r, a, b - h)) / (2.0 * h);
        let fr = (g(r + h, a, b) - g(r - h, a, b)) / (2.0 * h);
        for (d, f) in [(d1, f1), (d2, f2), (dr, fr)] {
            worst_fd = worst_fd.max((d.mid() - f).abs());
        }
    }
    ok(
        mc_fail == 0 && quad_fail == 0 && worst_fd <= 1e-6,
        format!(
            "MC 1000 pts x 1e7: {mc_fail} beyond 4 se (worst {worst_z:.2}); quadrant 100 rho: {quad_fail} misses; \
             partials vs finite differences worst {worst_fd:.1e}"
        ),
    )
}

fn random_blueprint(rng: &mut ChaCha8Rng) -> Blueprint {
    let round = |v: f64| (v * 1e4).round() / 1e4;
    let vals = [round(rng.random_range(0.05..0.8)), round(-rng.random_range(0.05..0.8)), round(rng.random_range(-0.5..0.5))];
    let names = ["p", "n", "m"];
    let biases = names.iter().zip(vals).map(|(n, v)| (n.to_string(), Expr::decimal(v))).collect();
    let mu = vec![("p".to_string(), Expr::parse("-n/(p - n)").unwrap()), ("n".to_string(), Expr::parse("p/(p - n)").unwrap())];
    let k = rng.random_range(1..5usize);
    let configs = (0..k)
        .map(|_| {
            let (a, b) = (rng.random_range(0..3usize), rng.random_range(0..3usize));
            let (x, y) = (vals[a], vals[b]);
            let (lo, hi) = (-1.0 + (x + y).abs(), 1.0 - (x - y).abs());
            let f: f64 = rng.random_range(0.05..0.95);
            ConfigSpec {
                i: names[a].into(),
                j: names[b].into(),
                pairwise: Expr::decimal(round(lo + f * (hi - lo))),
                weight: Expr::parse(&format!("1/{k}")).unwrap(),
            }
        })
        .collect();
    Blueprint::from_spec(BlueprintSpec { name: "random".into(), biases, mu, configs }, &cfg()).unwrap()
}

fn criterion5(bp: &Blueprint, red: &Reduction) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut notes = Vec::new();

    let mut lip_fail = 0;
    let mut b = random_blueprint(&mut rng);
    for trial in 0..1000 {
        if trial % 10 == 0 {
            b = if trial % 100 == 0 { bp.clone() } else { random_blueprint(&mut rng) };
        }
        let n = b.len();
        let t: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let u: Vec<f64> = t.iter().map(|&x| (x + rng.random_range(-0.3..=0.3)).clamp(-1.0, 1.0)).collect();
        let s1 = b.soundness_at(&ThresholdFunction::from_points(&t).unwrap());
        let s2 = b.soundness_at(&ThresholdFunction::from_points(&u).unwrap());
        let l1: f64 = t.iter().zip(&u).map(|(a, b)| (a - b).abs()).sum();
        lip_fail += ((s1.mid() - s2.mid()).abs() > l1 + s1.width() + s2.width() + 1e-15) as usize;
    }
    notes.push(format!("Lipschitz 1000 trials: {lip_fail} violations"));

    let mut pert_ok = true;
    for eps in [1e-4, 1e-3, 1e-2] {
        let p = perturb_mu(bp, eps).expect("perturb_mu");
        let mean: Interval = (0..p.len()).map(|i| p.mu(i) * p.bias(i)).sum();
        pert_ok &= (0..p.len()).all(|i| p.mu(i).lo() >= eps) && mean.contains_zero() && p.completeness() == bp.completeness();
    }
    notes.push(format!("mu perturbation invariants: {pert_ok}"));

    let tight: Vec<(usize, usize)> =
        bp.configs().iter().filter(|c| c.triangle.contains(&Slack::Tight)).map(|c| (c.i, c.j)).collect();
    let strict_after = perturb_pairwise(bp, 1e-3).map(|p| p.strict_triangles()).unwrap_or(false);
    let flags_ok = tight.len() == 3
        && [(2, 3), (1, 2), (1, 4)].iter().all(|x| tight.contains(x))
        && !bp.strict_triangles()
        && strict_after;
    notes.push(format!("tight triangles {tight:?}, strict after pairwise perturbation: {strict_after}"));

    let pt = PointReduction::new(red);
    let mut root_fail = 0;
    for _ in 0..100 {
        let (x, y): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let (_, t3, t5) = pt.s(x, y);
        let t4 = red.t4_from_balance(Interval::point(x));
        let r3 = red.root_t3(Interval::point(y), t4, 1e-6);
        let r5 = red.root_t5(Interval::point(x), Interval::point(y), 1e-6);
        root_fail += (!r3.contains(t3) || !r5.contains(t5)) as usize;
    }
    notes.push(format!("root containment 100 points: {root_fail} misses"));
    ok(lip_fail == 0 && pert_ok && flags_ok && root_fail == 0, notes.join("; "))
}

fn criterion6(bp: &Blueprint) -> Outcome {
    let start = Instant::now();
    let zero = ThresholdFunction::zero(bp.len());
    let comp = mixture::estimate_mixture_completeness(bp, 400, 1_000_000, 1).expect("completeness");
    let sound = mixture::estimate_mixture_soundness(bp, &zero, 400, 1_000_000, 2).expect("soundness");
    let secs = start.elapsed().as_secs_f64();
    let c_gw = bp.constants().c_gw.mid();
    let exact = bp.soundness_at(&zero);
    let z = dist(exact, sound.mean) / sound.stderr;
    ok(
        (comp.mean - c_gw).abs() <= 0.01 && z <= 4.0 && secs <= 300.0,
        format!(
            "completeness {:.6} (c_gw {c_gw:.6}); soundness {:.6} +- {:.6}, {z:.2} se from {exact}; {secs:.1}s",
            comp.mean, sound.mean, sound.stderr
        ),
    )
}

fn criterion7(bp: &Blueprint) -> Outcome {
    let p = perturb_mu(&perturb_pairwise(bp, 1e-3).expect("pairwise"), 1e-3).expect("mu");
    let inst = |eps: f64| mixture::build_instance(&p, 3, eps, 200_000, 7).expect("instance");
    let i02 = inst(0.2);
    let a = mixture::audit(&i02);
    let c_gw = bp.constants().c_gw.mid();
    let u = [mixture::uncorrelatedness(&inst(0.4)), mixture::uncorrelatedness(&inst(0.3)), a.uncorrelatedness];
    let pass = a.passes()
        && a.triangle_violations == 0
        && a.weighted_balance.abs() <= 1e-9
        && a.sdp_value >= c_gw - 0.05 - a.aux_mass
        && u[0] > u[1]
        && u[1] > u[2];
    ok(
        pass,
        format!(
            "dim 3 eps 0.2: {} edges, triangle violations {}, balance {:.1e}, sdp {:.4} (aux mass {:.4}, real-edge sdp {:.4}); \
             uncorrelatedness at 0.4/0.3/0.2: {:.4}/{:.4}/{:.4}",
            a.edges, a.triangle_violations, a.weighted_balance, a.sdp_value, a.aux_mass, a.real_sdp_value, u[0], u[1], u[2]
        ),
    )
}

// Recomputed values for the entries that disagree with the reference;
// see tests/asymptotic.rs for the oracles.
const DERIVED_QUARTIC: [f64; 3] = [0.049252, 0.019465, -0.579695];
const DERIVED_MIXED: [f64; 3] = [-0.144143, 0.260046, 1.293406];
const DERIVED_RESIDUAL: f64 = 0.10388;

fn criterion8() -> Outcome {
    let r = asymptotic::report().expect("family weights");
    let t = r.table.table();
    let mut matched = Vec::new();
    let mut red = Vec::new();
    // Red entries must stay at their derived values.
    let mut drift = false;
    for (row, (&q, &m)) in DERIVED_QUARTIC.iter().zip(&DERIVED_MIXED).enumerate() {
        for (col, derived) in [(0, None), (1, Some(q)), (2, Some(m))] {
            let (got, want) = (t[row][col], REFERENCE_TABLE[row][col]);
            if (got - want).abs() <= 1e-4 {
                matched.push(format!("[{row}][{col}]"));
            } else {
                red.push(format!("[{row}][{col}] {got:.6} vs {want}"));
                drift |= derived.map_or(true, |d| (got - d).abs() > 1e-5);
            }
        }
    }
    let weights_ok = r.weights.w.iter().zip(REFERENCE_WEIGHTS).all(|(a, b)| (a - b).abs() <= 1e-4);
    let residual = r.weights.residual;
    let residual_ok = (residual - REFERENCE_RESIDUAL).abs() <= 1e-3;
    drift |= !residual_ok && (residual - DERIVED_RESIDUAL).abs() > 1e-5;

    // Expansion against the rigorous value over three halvings.
    let mut ratios = Vec::new();
    for dir in [[1.0, -0.5, 0.7, -0.4], [1.0, 0.0, 1.0, 0.0], [2.0, -2.0, 2.0, -2.0]] {
        let err = |s: f64| {
            let x = dir.map(|d| d * s);
            (soundness_expansion_at_bgw(x[0], x[1], x[2], x[3]) - exact_soundness(x[0], x[1], x[2], x[3], &cfg()).mid()).abs()
        };
        let e: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&s| err(s)).collect();
        ratios.extend(e.windows(2).map(|w| w[0] / w[1]));
    }
    let order_ok = ratios.iter().all(|&x| x >= 28.0);
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);

    let pass = red.is_empty() && weights_ok && residual_ok && order_ok;
    let expected = weights_ok && order_ok && !drift && red.len() == 6 && !residual_ok;
    let detail = format!(
        "table {}/9 match, mismatched {}; weights {:?} ({}); residual {residual:.5} vs {REFERENCE_RESIDUAL} ({}); \
         error-order ratios >= {min_ratio:.1} ({}); b_gw {:.12}",
        matched.len(),
        if red.is_empty() { "none".into() } else { red.join(", ") },
        r.weights.w.map(|w| (w * 1e5).round() / 1e5),
        if weights_ok { "match" } else { "MISMATCH" },
        if residual_ok { "match" } else { "MISMATCH" },
        if order_ok { "ok" } else { "FAIL" },
        b_gw()
    );
    Outcome { pass, expected: if pass { true } else { expected }, detail }
}

fn main() {
    // Honour `cargo test -- <filter>` loosely: skip unless the filter names this target.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let bp = builtin_dstar(&cfg());
    let red = Reduction::new(&bp).expect("reduction");
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 8] = [
        ("certification", Box::new(|| criterion1(&bp))),
        ("contour", Box::new(|| criterion2(&red))),
        ("constants", Box::new(|| criterion3(&bp))),
        ("gamma oracles", Box::new(criterion4)),
        ("property suite", Box::new(|| criterion5(&bp, &red))),
        ("mixture estimators", Box::new(|| criterion6(&bp))),
        ("instance audit", Box::new(|| criterion7(&bp))),
        ("small-bias table", Box::new(criterion8)),
    ];
    let mut unexpected = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if o.expected { "" } else { " [UNEXPECTED]" };
        println!("criterion {} {tag} {name} ({:.1}s): {}{note}", k + 1, start.elapsed().as_secs_f64(), o.detail);
        unexpected += !o.expected as usize;
    }
    if unexpected > 0 {
        println!("{unexpected} criteria did not give their expected result");
        std::process::exit(1);
    }
}
