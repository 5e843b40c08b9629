use maxbisect::blueprint::{
    builtin_dstar, dstar_spec, format, pair_value, perturb_mu, perturb_pairwise, Blueprint, BlueprintSpec,
    ConfigSpec, Configuration, Expr, Slack, ThresholdFunction, DSTAR_TEXT,
};
use maxbisect::rigor::elementary::{acos, pi};
use maxbisect::rigor::{Interval, RigorConfig};
use proptest::prelude::*;
use std::sync::OnceLock;

fn cfg() -> RigorConfig {
    RigorConfig::default()
}

fn dstar() -> &'static Blueprint {
    static D: OnceLock<Blueprint> = OnceLock::new();
    D.get_or_init(|| builtin_dstar(&cfg()))
}

fn near(iv: Interval, v: f64, tol: f64) -> bool {
    iv.lo() - tol <= v && v <= iv.hi() + tol
}

// 30-digit reference values for the biases and relative pairwise biases.
const BIASES: [f64; 5] = [
    -0.63468452670967111,
    -0.31484226335483556,
    0.004,
    0.30684226335483556,
    0.62568452670967111,
];
const RHO: [(&str, &str, f64); 5] = [
    ("b2", "b4", -0.65594265391604771),
    ("b3", "b4", -0.72538281866482883),
    ("b2", "b3", -0.72476238016219304),
    ("b2", "b5", -0.66472543765725655),
    ("b1", "b5", -0.48446499995228483),
];

#[test]
fn dstar_biases_and_weights() {
    let d = dstar();
    for (i, &b) in BIASES.iter().enumerate() {
        assert!(near(d.bias(i), b, 1e-16), "b{} = {}", i + 1, d.bias(i));
        assert!(d.bias(i).width() < 1e-14);
    }
    let total: Interval = d.configs().iter().map(|c| c.weight).sum();
    assert!(total.contains(1.0));
    assert!(near(d.mu(0), 0.325898600625, 1e-10));
    assert!(near(d.mu(3), 0.674101399375, 1e-10));
    let mean: Interval = (0..5).map(|i| d.mu(i) * d.bias(i)).sum();
    assert!(mean.contains_zero() && mean.width() < 1e-13);
    assert!(d.is_positive());
}

#[test]
fn dstar_relative_biases() {
    let d = dstar();
    for (i, j, want) in RHO {
        let (i, j) = (d.index_of(i).unwrap(), d.index_of(j).unwrap());
        let c = d.configs().iter().find(|c| c.i == i && c.j == j).unwrap();
        let r = c.theta.relative_bias();
        assert!(near(r, want, 1e-15), "{r} vs {want}");
        assert!(r.width() < 1e-13);
    }
}

#[test]
fn dstar_tight_triangles() {
    let d = dstar();
    let tight: Vec<(usize, usize)> = d
        .configs()
        .iter()
        .filter(|c| c.triangle.contains(&Slack::Tight))
        .map(|c| (c.i, c.j))
        .collect();
    assert_eq!(tight.len(), 3);
    for pair in [(2, 3), (1, 2), (1, 4)] {
        assert!(tight.contains(&pair), "{pair:?}");
    }
    assert!(d.configs().iter().all(|c| c.triangle.iter().all(|s| s.holds())));
}

#[test]
fn completeness_is_c_gw() {
    let d = dstar();
    let c = d.completeness();
    assert!(c.overlaps(d.constants().c_gw));
    assert!(c.width() <= 1e-10);
    assert!(near(c, 0.84457886832258222, 1e-12));

    let one = |bij: f64, w: &str| ConfigSpec {
        i: "x".into(),
        j: "x".into(),
        pairwise: Expr::decimal(bij),
        weight: Expr::parse(w).unwrap(),
    };
    let spec = |configs| BlueprintSpec {
        name: "z".into(),
        biases: vec![("x".into(), Expr::decimal(0.0))],
        mu: vec![("x".into(), Expr::decimal(1.0))],
        configs,
    };
    let perfect = Blueprint::from_spec(spec(vec![one(-1.0, "1")]), &cfg()).unwrap();
    assert_eq!(perfect.completeness(), Interval::ONE);
    let mixed = Blueprint::from_spec(spec(vec![one(0.0, "0.5"), one(-1.0, "0.5")]), &cfg()).unwrap();
    assert!(mixed.completeness().contains(0.75));
}

#[test]
fn soundness_at_zero_thresholds() {
    let d = dstar();
    let t = ThresholdFunction::zero(5);
    let s = d.soundness_at(&t);
    // Each pair at (½, ½) contributes cos⁻¹(ρ)/π.
    let mut oracle = Interval::ZERO;
    for c in d.configs() {
        oracle += c.weight * (acos(c.theta.relative_bias()) / pi());
    }
    assert!(s.overlaps(oracle), "{s} vs {oracle}");
    assert!(near(s, 0.74198205738315182, 1e-12));
    let ratio = s / d.constants().c_gw;
    assert!(near(ratio, 0.87852311395950754, 1e-11), "{ratio}");
    assert!(s.width() < 1e-11);
}

#[test]
fn pair_value_at_gw_config() {
    let k = &dstar().constants().clone();
    let theta = Configuration::new(Interval::ZERO, Interval::ZERO, k.b_gw);
    let v = pair_value(&theta, Interval::ZERO, Interval::ZERO, &cfg());
    assert!(v.overlaps(acos(k.b_gw) / pi()));
    assert!(v.overlaps(k.alpha_gw * k.c_gw));
}

#[test]
fn balance_residuals() {
    let d = dstar();
    assert_eq!(d.balance_residual(&ThresholdFunction::zero(5)), Interval::ZERO);
    let ones = ThresholdFunction::new(vec![Interval::ONE; 5]).unwrap();
    assert!(d.balance_residual(&ones).contains(1.0));
    let t4 = -(d.mu(0) / d.mu(3));
    let t = ThresholdFunction::new(vec![Interval::ONE, Interval::point(0.3), Interval::ZERO, t4, Interval::point(-0.9)]).unwrap();
    let r = d.balance_residual(&t);
    assert!(r.contains_zero() && r.width() < 1e-13);
    assert!(t.is_almost_balanced(d, 1e-13));
}

#[test]
fn text_round_trip() {
    let spec = dstar_spec();
    assert_eq!(format::to_text(&spec), DSTAR_TEXT);
    assert_eq!(format::parse(&format::to_text(&spec)).unwrap(), spec);
    let h = dstar().content_hash();
    assert_eq!(h.len(), 64);
    assert_eq!(h, builtin_dstar(&cfg()).content_hash());
}

#[test]
fn validation_rejects_bad_blueprints() {
    let bad = [
        // triangle violated
        "blueprint x\n[biases]\np = 0.9\nq = -0.9\n[mu]\np = 0.5\nq = 0.5\n[configs]\np q | 0.5 | 1\n",
        // mu not balanced
        "blueprint x\n[biases]\np = 0.5\nq = -0.25\n[mu]\np = 0.5\nq = 0.5\n[configs]\np q | -0.5 | 1\n",
        // weights do not sum to 1
        "blueprint x\n[biases]\np = 0\n[mu]\np = 1\n[configs]\np p | 0 | 0.9\n",
        // unknown bias
        "blueprint x\n[biases]\np = 0\n[mu]\np = 1\n[configs]\np r | 0 | 1\n",
        // reserved name
        "blueprint x\n[biases]\nb = 0\n[mu]\nb = 1\n[configs]\nb b | 0 | 1\n",
        // nonlinear bias
        "blueprint x\n[biases]\np = bgw*bgw\n[mu]\np = 1\n[configs]\np p | 1 | 1\n",
    ];
    for text in bad {
        let spec = format::parse(text).unwrap();
        assert!(Blueprint::from_spec(spec, &cfg()).is_err(), "{text}");
    }
}

#[test]
fn pairwise_perturbation() {
    let d = dstar();
    assert_eq!(perturb_pairwise(d, 0.0).unwrap().spec(), d.spec());
    let p = perturb_pairwise(d, 1e-4).unwrap();
    assert!(p.strict_triangles());
    let drop = d.completeness() - p.completeness();
    assert!(drop.contains(0.5e-4) && drop.width() < 1e-14);
    assert!(perturb_pairwise(d, -1e-4).is_err());
    assert!(perturb_pairwise(d, 0.9).is_err());
}

#[test]
fn measure_perturbation() {
    let d = dstar();
    assert_eq!(perturb_mu(d, 0.0).unwrap().spec(), d.spec());
    let p = perturb_mu(d, 1e-3).unwrap();
    for i in 0..5 {
        assert!(p.mu(i).lo() >= 1e-3, "{}", p.mu(i));
    }
    let mean: Interval = (0..5).map(|i| p.mu(i) * p.bias(i)).sum();
    assert!(mean.contains_zero() && mean.width() < 1e-13);
    assert_eq!(p.completeness(), d.completeness());
    // the perturbed measure survives a text round trip
    let again = format::parse(&format::to_text(p.spec())).unwrap();
    assert_eq!(&again, p.spec());
    assert!(perturb_mu(d, 0.5).is_err());
}

/// A random valid blueprint on decimal biases with μ on one positive and one
/// negative bias.
fn arb_blueprint() -> impl Strategy<Value = BlueprintSpec> {
    (
        prop::collection::vec(1i64..90, 1..3),
        prop::collection::vec(-90i64..=0, 1..3),
        prop::collection::vec((0usize..6, 0usize..6, 0i64..=100, 1i64..20), 1..5),
    )
        .prop_map(|(pos, neg, raw)| {
            let vals: Vec<i64> = pos.iter().chain(&neg).copied().collect();
            let names: Vec<String> = (0..vals.len()).map(|i| format!("x{i}")).collect();
            let biases = vals
                .iter()
                .zip(&names)
                .map(|(&v, n)| (n.clone(), Expr::decimal(v as f64 / 100.0)))
                .collect();
            let (p, q) = (&names[0], &names[pos.len()]);
            let mu = if vals[pos.len()] == 0 {
                vec![(q.clone(), Expr::decimal(1.0))]
            } else {
                vec![
                    (p.clone(), Expr::parse(&format!("-{q}/({p} - {q})")).unwrap()),
                    (q.clone(), Expr::parse(&format!("{p}/({p} - {q})")).unwrap()),
                ]
            };
            let total: i64 = raw.iter().map(|r| r.3).sum();
            let configs = raw
                .iter()
                .map(|&(a, b, f, w)| {
                    let (a, b) = (a % vals.len(), b % vals.len());
                    let (x, y) = (vals[a], vals[b]);
                    let lo = -100 + (x + y).abs();
                    let hi = 100 - (x - y).abs();
                    let bij = lo + (hi - lo) * f / 100;
                    ConfigSpec {
                        i: names[a].clone(),
                        j: names[b].clone(),
                        pairwise: Expr::decimal(bij as f64 / 100.0),
                        weight: Expr::parse(&format!("{w}/{total}")).unwrap(),
                    }
                })
                .collect();
            BlueprintSpec { name: "random".into(), biases, mu, configs }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn soundness_is_lipschitz(
        spec in arb_blueprint(),
        t in prop::collection::vec(-1.0f64..=1.0, 6),
        d in prop::collection::vec(-0.3f64..=0.3, 6),
    ) {
        let bp = Blueprint::from_spec(spec, &cfg()).unwrap();
        let n = bp.len();
        let t1: Vec<f64> = t[..n].to_vec();
        let t2: Vec<f64> = t1.iter().zip(&d).map(|(a, b)| (a + b).clamp(-1.0, 1.0)).collect();
        let s1 = bp.soundness_at(&ThresholdFunction::from_points(&t1).unwrap());
        let s2 = bp.soundness_at(&ThresholdFunction::from_points(&t2).unwrap());
        let dist: f64 = t1.iter().zip(&t2).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!((s1.mid() - s2.mid()).abs() <= dist + s1.width() + s2.width() + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn summation_order_is_canonical(spec in arb_blueprint(), seed in any::<u64>(), t in prop::collection::vec(-1.0f64..=1.0, 6)) {
        let bp = Blueprint::from_spec(spec.clone(), &cfg()).unwrap();
        let mut shuffled = spec;
        let k = shuffled.configs.len();
        shuffled.configs.rotate_left((seed as usize) % k);
        if seed & 1 == 1 {
            shuffled.configs.reverse();
        }
        let other = Blueprint::from_spec(shuffled, &cfg()).unwrap();
        let th = ThresholdFunction::from_points(&t[..bp.len()]).unwrap();
        prop_assert_eq!(bp.soundness_at(&th), other.soundness_at(&th));
        prop_assert_eq!(bp.completeness(), other.completeness());
    }

    #[test]
    fn positive_pairs_at_origin(spec in arb_blueprint()) {
        let bp = Blueprint::from_spec(spec, &cfg()).unwrap();
        for c in bp.configs().iter().filter(|c| c.theta.is_positive()) {
            let v = pair_value(&c.theta, Interval::ZERO, Interval::ZERO, &cfg());
            let want = acos(c.theta.relative_bias()) / pi();
            prop_assert!(v.overlaps(want), "{} vs {}", v, want);
        }
    }

    #[test]
    fn random_blueprints_round_trip(spec in arb_blueprint()) {
        let text = format::to_text(&spec);
        prop_assert_eq!(format::parse(&text).unwrap(), spec);
    }
}
