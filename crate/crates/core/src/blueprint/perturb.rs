//! Perturbations that keep the soundness essentially unchanged: giving every
//! bias positive μ-mass, and making every triangle inequality strict.

use super::expr::{Expr, Op};
use super::model::{Blueprint, BlueprintSpec};
use crate::error::{Error, Result};
use crate::rigor::Interval;
use num_rational::BigRational;
use num_traits::Zero;

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasiblePerturbation(msg.into())
}

fn rebuild(bp: &Blueprint, spec: BlueprintSpec) -> Result<Blueprint> {
    Blueprint::with_constants(spec, bp.rigor(), bp.constants().clone()).map_err(|e| infeasible(e.to_string()))
}

/// Adds `delta` to every pairwise bias.
pub fn perturb_pairwise(bp: &Blueprint, delta: f64) -> Result<Blueprint> {
    if !delta.is_finite() {
        return Err(infeasible("delta must be finite"));
    }
    if delta == 0.0 {
        return Ok(bp.clone());
    }
    let mut spec = bp.spec().clone();
    let (op, mag) = if delta > 0.0 { (Op::Add, delta) } else { (Op::Sub, -delta) };
    for c in &mut spec.configs {
        c.pairwise = Expr::bin(op, c.pairwise.clone(), Expr::decimal(mag));
    }
    let out = rebuild(bp, spec)?;
    if !out.strict_triangles() {
        return Err(infeasible(format!("delta = {delta} leaves a non-strict triangle inequality")));
    }
    Ok(out)
}

/// |b| as an expression, given the sign of b.
fn abs_sym(name: &str, sign: i8) -> Expr {
    if sign > 0 {
        Expr::sym(name)
    } else {
        Expr::Neg(Box::new(Expr::sym(name)))
    }
}

/// Mixes μ with the average of zero-mean two-point measures μ_b, one per
/// bias, each putting mass |p|/(|b| + |p|) on b and the rest on a partner p
/// of opposite sign. The mixing weight is the smallest decimal that lifts
/// every bias to at least `eps`.
pub fn perturb_mu(bp: &Blueprint, eps: f64) -> Result<Blueprint> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(infeasible("eps must be a nonnegative number"));
    }
    if eps == 0.0 {
        return Ok(bp.clone());
    }
    let n = bp.len();
    let names: Vec<String> = bp.bias_names().map(str::to_string).collect();
    let mut sign = vec![0i8; n];
    for i in 0..n {
        let v = bp.bias(i);
        let a = bp.bias_affine(i);
        sign[i] = if v.lo() > 0.0 {
            1
        } else if v.hi() < 0.0 {
            -1
        } else if a.constant.is_zero() && a.slope.is_zero() {
            0
        } else {
            return Err(infeasible(format!("sign of bias {} is undecided", names[i])));
        };
    }
    let farthest = |s: i8| {
        (0..n)
            .filter(|&i| sign[i] == s)
            .max_by(|&a, &b| bp.bias(a).mag().total_cmp(&bp.bias(b).mag()))
    };
    let (Some(pos), Some(neg)) = (farthest(1), farthest(-1)) else {
        return Err(infeasible("needs both positive and negative biases"));
    };

    // contrib[b] collects Σ_{b'} μ_{b'}(b) term by term.
    let mut contrib: Vec<Vec<Expr>> = vec![vec![]; n];
    for i in 0..n {
        if sign[i] == 0 {
            contrib[i].push(Expr::Num(BigRational::from_integer(1.into())));
            continue;
        }
        let p = if sign[i] > 0 { neg } else { pos };
        let ai = abs_sym(&names[i], sign[i]);
        let ap = abs_sym(&names[p], sign[p]);
        let den = Expr::bin(Op::Add, ai.clone(), ap.clone());
        contrib[i].push(Expr::bin(Op::Div, ap, den.clone()));
        contrib[p].push(Expr::bin(Op::Div, ai, den));
    }
    let lookup = |s: &str| bp.index_of(s).map(|i| bp.bias(i));
    let mut avg = Vec::with_capacity(n);
    let mut sums = Vec::with_capacity(n);
    for terms in &contrib {
        let sum = terms
            .iter()
            .cloned()
            .reduce(|a, b| Expr::bin(Op::Add, a, b))
            .unwrap_or(Expr::Num(BigRational::zero()));
        let v: Interval = sum.interval(&lookup).expect("symbols are biases") / n as f64;
        avg.push(v);
        sums.push(sum);
    }

    let mut eta: f64 = 0.0;
    for i in 0..n {
        let m = bp.mu(i);
        if m.lo() >= eps {
            continue;
        }
        if avg[i].lo() <= eps {
            return Err(infeasible(format!("eps = {eps} exceeds the mass available to {}", names[i])));
        }
        eta = eta.max((eps - m.lo()) / (avg[i].lo() - m.lo()));
    }
    let eta = (eta * (1.0 + 1e-6) + 1e-12).min(1.0);
    let eta_e = Expr::decimal(eta);
    let keep = Expr::decimal(1.0 - eta);
    let bp_mu = &bp.spec().mu;

    let mut spec = bp.spec().clone();
    spec.mu = (0..n)
        .map(|i| {
            let base = bp_mu.iter().find(|(nm, _)| *nm == names[i]).map(|(_, e)| e.clone());
            let mixed = Expr::bin(
                Op::Mul,
                Expr::bin(Op::Div, eta_e.clone(), Expr::decimal(n as f64)),
                sums[i].clone(),
            );
            let e = match base {
                Some(b) => Expr::bin(Op::Add, Expr::bin(Op::Mul, keep.clone(), b), mixed),
                None => mixed,
            };
            (names[i].clone(), e)
        })
        .collect();
    let out = rebuild(bp, spec)?;
    if let Some(i) = (0..n).find(|&i| out.mu(i).lo() < eps) {
        return Err(infeasible(format!("mu({}) = {} stays below {eps}", names[i], out.mu(i))));
    }
    Ok(out)
}
