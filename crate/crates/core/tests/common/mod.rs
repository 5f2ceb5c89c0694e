//! Oracles computed from first principles, independent of the library's
//! own closed forms.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use pdmp::models::{self, ModelInstance};
use pdmp::stieltjes::{sexp, slog, Atom, FvFunction, MFunction, RealFn};

pub fn model(name: &str) -> ModelInstance {
    models::build(name, &BTreeMap::new()).unwrap()
}

pub fn model_with(name: &str, params: &[(&str, f64)]) -> ModelInstance {
    let p = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    models::build(name, &p).unwrap()
}

/// `∫_a^b (x + s) e^{−δs} ds`.
pub fn linear_discounted(x: f64, delta: f64, a: f64, b: f64) -> f64 {
    let prim = |s: f64| -(-delta * s).exp() * ((x + s) / delta + 1.0 / (delta * delta));
    prim(b) - prim(a)
}

/// Value of `∫ e^{−δs} X_s ds` for unit drift with a reset to 0 at each
/// integer crossing with probability `p`, by summing over crossings.
pub fn quasi_step_value(x: f64, p: f64, delta: f64) -> f64 {
    // Crossing j happens at path time j − frac(x).
    let from = |x: f64, restart: f64| -> f64 {
        let frac = x - x.floor();
        let mut total = 0.0;
        let mut alive = 1.0;
        let mut start = 0.0;
        for j in 1..4000 {
            let cross = j as f64 - frac;
            total += alive * linear_discounted(x, delta, start, cross);
            total += alive * p * (-delta * cross).exp() * restart;
            alive *= 1.0 - p;
            start = cross;
        }
        total
    };
    // R = A + B R from the renewal at 0.
    let a = from(0.0, 0.0);
    let b = from(0.0, 1.0) - a;
    let r = a / (1.0 - b);
    from(x, r)
}

/// Davis boundary model without interior jumps: drift to 1, then restart
/// uniformly on `[0, 1/2]`.
pub fn davis_value(x: f64, delta: f64) -> f64 {
    let running = |y: f64| linear_discounted(y, delta, 0.0, 1.0 - y);
    let n = 20_000;
    let h = 0.5 / n as f64;
    // Simpson on [0, 1/2].
    let mut s = running(0.0) + running(0.5);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * running(k as f64 * h);
    }
    let mean_running = 2.0 * s * h / 3.0;
    let mean_discount = 2.0 * ((-delta * 0.5).exp() - (-delta).exp()) / delta;
    let m = mean_running / (1.0 - mean_discount);
    running(x) + (-delta * (1.0 - x)).exp() * m
}

fn closed(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
    Arc::new(f)
}

/// Survival functions in additive form: `(name, F, atom_only)`.
pub fn survival_corpus() -> Vec<(String, MFunction, bool)> {
    let mut out = Vec::new();
    for a in [0.3, 1.0, 4.0] {
        let fv = FvFunction::new(8.0, Some(closed(move |t| -a * (-a * t).exp())), vec![], 1.0)
            .unwrap()
            .with_cumulative(closed(move |t| (-a * t).exp() - 1.0));
        out.push((
            format!("exponential({a})"),
            MFunction::new(fv).unwrap(),
            false,
        ));
    }
    let fv = FvFunction::new(
        2.0,
        Some(closed(|t| -3.0 * t * t * (-t * t * t).exp())),
        vec![],
        1.0,
    )
    .unwrap();
    out.push(("weibull(3)".into(), MFunction::new(fv).unwrap(), false));
    let fv = FvFunction::new(6.0, Some(closed(|t| -2.0 / (1.0 + t).powi(3))), vec![], 1.0).unwrap();
    out.push(("lomax".into(), MFunction::new(fv).unwrap(), false));

    for (name, drops) in [
        ("two-drops", vec![(0.5, 0.25), (1.5, 0.5)]),
        ("geometric", (1..=6).map(|k| (k as f64, 0.3)).collect()),
        ("to-zero", vec![(1.0, 0.2), (3.0, 1.0)]),
    ] {
        let mut level = 1.0;
        let atoms = drops
            .iter()
            .map(|&(t, p)| {
                let size = -level * p;
                level += size;
                Atom::new(t, size)
            })
            .collect();
        let fv = FvFunction::atoms_only(7.0, atoms, 1.0).unwrap();
        out.push((name.into(), MFunction::new(fv).unwrap(), true));
    }

    // F(t) = e^{−t/2} ∏_{s_k ≤ t} (1 − p_k).
    for (name, drops) in [
        ("mixed", vec![(1.0, 0.5)]),
        ("mixed-three", vec![(0.7, 0.1), (1.4, 0.2), (2.1, 0.3)]),
        ("mixed-killed", vec![(2.0, 1.0)]),
    ] {
        let d2 = drops.clone();
        let product = move |t: f64, inclusive: bool| -> f64 {
            d2.iter()
                .filter(|a| if inclusive { a.0 <= t } else { a.0 < t })
                .map(|a| 1.0 - a.1)
                .product()
        };
        let p2 = product.clone();
        let atoms = drops
            .iter()
            .map(|&(t, p)| Atom::new(t, -(-0.5 * t).exp() * product(t, false) * p))
            .collect();
        let fv = FvFunction::new(
            5.0,
            Some(closed(move |t| -0.5 * (-0.5 * t).exp() * p2(t, false))),
            atoms,
            1.0,
        )
        .unwrap();
        out.push((name.into(), MFunction::new(fv).unwrap(), false));
    }
    out
}

/// `sup |sexp(slog F) − F|` over 400 points and at atom left limits.
pub fn roundtrip_error(f: &MFunction) -> f64 {
    let back = sexp(&slog(f).unwrap());
    let end = back.domain_end().min(f.domain_end());
    let fv = f.to_fv().unwrap();
    let mut times: Vec<f64> = (0..=400).map(|k| end * k as f64 / 400.0).collect();
    times.extend(fv.atoms().iter().map(|a| a.time).filter(|&t| t <= end));
    times
        .into_iter()
        .map(|t| {
            let v = (back.value(t).unwrap() - f.value(t).unwrap()).abs();
            let l = (back.left_limit(t).unwrap() - f.left_limit(t).unwrap()).abs();
            v.max(l)
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov distance between sorted samples (jumps only, `n` draws in
/// total, the rest beyond `horizon`) and the law with distribution function
/// `cdf`, comparing at each sample and just before it.
pub fn ks_distance(sorted: &[f64], n: usize, horizon: f64, cdf: &dyn Fn(f64) -> f64) -> f64 {
    let n_f = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == t {
            j += 1;
        }
        let before = cdf(t - 1e-12 * t.max(1.0));
        d = d.max((i as f64 / n_f - before).abs());
        d = d.max((j as f64 / n_f - cdf(t)).abs());
        i = j;
    }
    d.max((sorted.len() as f64 / n_f - cdf(horizon)).abs())
}
