mod common;

use std::f64::consts::TAU;

use pdmp::error::Error;
use pdmp::generator::generator_measure;
use pdmp::models::{ModelInstance, MODEL_NAMES};
use pdmp::sds::{Flow, SdsFunctional};
use proptest::prelude::*;

fn zoo() -> Vec<ModelInstance> {
    MODEL_NAMES.iter().map(|n| common::model(n)).collect()
}

/// Every functional a model carries: hazard, reward, test-function paths
/// and generator measures.
fn corpus(m: &ModelInstance) -> Vec<(String, SdsFunctional<f64>)> {
    let mut out = vec![
        ("hazard".to_string(), m.triple.hazard().clone()),
        ("reward".to_string(), m.reward().clone()),
    ];
    for (name, f) in m.test_functions() {
        out.push((format!("D{name}"), f.path().clone()));
        out.push((format!("A{name}"), generator_measure(&m.triple, f)));
    }
    out
}

fn integer_steps(size: f64) -> SdsFunctional<f64> {
    SdsFunctional::zero().with_jumps(
        move |z: &f64| {
            if (z - z.round()).abs() < 1e-9 && z.round() >= 1.0 {
                size
            } else {
                0.0
            }
        },
        |x: &f64, t_max| {
            let mut out = Vec::new();
            let mut k = (x + 1e-9).floor() + 1.0;
            while k - x <= t_max {
                out.push(k - x);
                k += 1.0;
            }
            out
        },
    )
}

#[test]
fn equilibrium_rate_accumulates_linearly() {
    let flow = Flow::unbounded(|_, x: &f64| *x);
    let a = SdsFunctional::constant_rate(0.8);
    for t in [0.0, 0.5, 3.0, 12.25] {
        assert!((a.evaluate(&flow, &2.0, t).unwrap() - 0.8 * t).abs() <= 1e-12);
    }
}

#[test]
fn scheduled_atoms_are_summed() {
    let flow = Flow::unbounded(|t, x: &f64| x + t);
    assert_eq!(integer_steps(0.5).evaluate(&flow, &0.0, 2.5).unwrap(), 1.0);
}

#[test]
fn state_rate_on_a_drift_flow() {
    let c = 1.5;
    let flow = Flow::unbounded(move |t, x: &f64| x + c * t);
    let a = SdsFunctional::from_rate(|x: &f64| *x);
    for (x, t) in [(0.0, 1.0), (1.0, 2.0), (-3.0, 0.7)] {
        let want = x * t + c * t * t / 2.0;
        assert!((a.evaluate(&flow, &x, t).unwrap() - want).abs() <= 1e-9);
    }
}

#[test]
fn evaluation_past_the_killing_time_is_an_error() {
    let m = common::model("davis_boundary");
    match m.reward().evaluate(m.triple.flow(), &0.25, 0.8) {
        Err(Error::OutsideDomain { killing_time, .. }) => assert_eq!(killing_time, 0.75),
        other => panic!("expected an out-of-domain error, got {other:?}"),
    }
}

#[test]
fn additivity_at_fixed_points() {
    let m = common::model("drift_poisson_reset");
    let flow = m.triple.flow();
    for (name, a) in corpus(&m) {
        assert_eq!(
            a.additivity_residual(flow, &1.0, 0.0, 0.7).unwrap(),
            0.0,
            "{name}"
        );
        assert!(
            a.additivity_residual(flow, &1.0, 0.5, 0.7).unwrap().abs() <= 1e-9,
            "{name}"
        );
    }
}

#[test]
fn additivity_across_a_full_rotation() {
    let m = common::model("circle_rotation");
    let flow = m.triple.flow();
    for (name, a) in corpus(&m) {
        let r = a.additivity_residual(flow, &1.0, 4.0, 3.5).unwrap();
        assert!(r.abs() <= 1e-9, "{name}: {r:e}");
    }
}

#[test]
fn periodic_reduction_on_the_circle() {
    let m = common::model("circle_rotation");
    let flow = m.triple.flow();
    let period = m.metadata.period.unwrap();
    assert_eq!(period, TAU);
    let a = SdsFunctional::from_rate(|x: &f64| 1.0 + x.cos());
    let x = 0.3;
    assert_eq!(
        a.periodic_reduction(flow, &x, period, period).unwrap(),
        a.evaluate(flow, &x, period).unwrap()
    );
    let reduced = a
        .periodic_reduction(flow, &x, period, 2.5 * period)
        .unwrap();
    let direct = a.evaluate(flow, &x, 2.5 * period).unwrap();
    assert!((reduced - direct).abs() <= 1e-8);
    // The cosine averages out over a period.
    assert!((a.evaluate(flow, &x, period).unwrap() - TAU).abs() <= 1e-9);
    assert_eq!(a.periodic_reduction(flow, &x, period, 0.0).unwrap(), 0.0);
    assert!(matches!(
        a.periodic_reduction(flow, &x, 0.0, 1.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn decomposition_sums_to_the_functional() {
    for m in zoo() {
        let flow = m.triple.flow();
        for (name, a) in corpus(&m) {
            let (ac, pd) = (a.ac_part(), a.pd_part());
            for &x in m.triple.probes() {
                let t = 0.9 * flow.killing_time(&x).min(3.0);
                let whole = a.evaluate(flow, &x, t).unwrap();
                let parts = ac.evaluate(flow, &x, t).unwrap() + pd.evaluate(flow, &x, t).unwrap();
                assert!(
                    (whole - parts).abs() <= 1e-10,
                    "{}/{name} at {x}: {whole} vs {parts}",
                    m.name
                );
            }
        }
    }
}

#[test]
fn right_derivative_is_the_rate_at_continuity_points() {
    let h = 1e-6;
    for m in zoo() {
        let flow = m.triple.flow();
        for (name, a) in corpus(&m) {
            let x = m.default_x0();
            for s in [0.1, 0.33] {
                if !a.schedule(&x, s + 2.0 * h).unwrap().is_empty() {
                    continue;
                }
                let diff =
                    (a.evaluate(flow, &x, s + h).unwrap() - a.evaluate(flow, &x, s).unwrap()) / h;
                let rate = a.rate(&flow.at(s, &x));
                assert!(
                    (diff - rate).abs() <= 1e-4 * rate.abs().max(1.0),
                    "{}/{name} at s = {s}: {diff} vs {rate}",
                    m.name
                );
            }
        }
    }
}

#[test]
fn schedules_are_flow_consistent() {
    for m in zoo() {
        let flow = m.triple.flow();
        for (name, a) in corpus(&m) {
            let x = m.default_x0();
            let (u, t) = (0.2, 2.0);
            if flow.killing_time(&x) <= u + t {
                continue;
            }
            let shifted = a.schedule(&flow.at(u, &x), t).unwrap();
            let from_x: Vec<f64> = a
                .schedule(&x, u + t)
                .unwrap()
                .into_iter()
                .filter(|&s| s > u)
                .map(|s| s - u)
                .collect();
            assert_eq!(shifted.len(), from_x.len(), "{}/{name}", m.name);
            for (p, q) in shifted.iter().zip(&from_x) {
                assert!((p - q).abs() <= 1e-9, "{}/{name}", m.name);
            }
        }
    }
}

#[test]
fn atom_cap_is_enforced() {
    let flow = Flow::unbounded(|t, x: &f64| x + t);
    let a = integer_steps(1.0).with_atom_cap(10);
    match a.evaluate(&flow, &0.0, 50.0) {
        Err(Error::AtomCap { cap, .. }) => assert_eq!(cap, 10),
        other => panic!("expected the atom cap, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn flows_satisfy_the_semigroup_law(k in 0..MODEL_NAMES.len(), x in 0.0..0.95f64, s in 0.0..5.0f64, t in 0.0..5.0f64) {
        let m = common::model(MODEL_NAMES[k]);
        let flow = m.triple.flow();
        let c = flow.killing_time(&x);
        let (s, t) = if s + t < c { (s, t) } else { (s * c / 10.0, t * c / 10.0) };
        prop_assert!(flow.semigroup_residual(&x, s, t) <= 1e-9);
        prop_assert!(flow.killing_residual(&x, t) <= 1e-9);
        prop_assert_eq!(flow.at(0.0, &x), x);
    }

    #[test]
    fn corpus_functionals_are_additive(k in 0..MODEL_NAMES.len(), x in 0.0..0.95f64, s in 0.0..3.0f64, t in 0.0..3.0f64) {
        let m = common::model(MODEL_NAMES[k]);
        let flow = m.triple.flow();
        let c = flow.killing_time(&x);
        let (s, t) = if s + t < c { (s, t) } else { (s * c / 7.0, t * c / 7.0) };
        for (name, a) in corpus(&m) {
            let r = a.additivity_residual(flow, &x, s, t).unwrap();
            let scale = a.evaluate(flow, &x, s + t).unwrap().abs().max(1.0);
            prop_assert!(r.abs() <= 1e-8 * scale, "{}/{}: {:e}", m.name, name, r);
        }
    }
}
