mod common;

use std::sync::Arc;

use pdmp::error::Error;
use pdmp::generator::PathStatistics;
use pdmp::models::MODEL_NAMES;
use pdmp::pdmp::{
    simulate_paths, CharacteristicTriple, HazardClass, JumpKernel, JumpTime, Trajectory,
};
use pdmp::rng::{open01, PathStreams};
use pdmp::sds::{Flow, SdsFunctional};
use pdmp::stieltjes::{sexp, AFunction, Atom, FvFunction};
use rand::RngCore;

fn drift(c: f64) -> Flow<f64> {
    Flow::unbounded(move |t, x: &f64| x + c * t)
}

fn constant_rate(lambda: f64) -> CharacteristicTriple<f64> {
    CharacteristicTriple::new(
        drift(1.0),
        SdsFunctional::constant_rate(lambda),
        JumpKernel::deterministic(|_| 0.0),
        vec![0.0],
    )
    .unwrap()
}

fn integer_crossings(x: f64, t_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = (x + 1e-9).floor() + 1.0;
    while k - x <= t_max {
        out.push(k - x);
        k += 1.0;
    }
    out
}

fn on_integer(z: f64) -> bool {
    (z - z.round()).abs() <= 1e-9 && z.round() >= 1.0
}

/// Unit drift, rate `lambda`, atoms of size `p` at integers.
fn integer_atoms(lambda: f64, p: f64, kernel: JumpKernel<f64>) -> CharacteristicTriple<f64> {
    let hazard = SdsFunctional::constant_rate(lambda).with_jumps(
        move |z: &f64| if on_integer(*z) { p } else { 0.0 },
        |x: &f64, t| integer_crossings(*x, t),
    );
    CharacteristicTriple::new(drift(1.0), hazard, kernel, vec![0.0, 0.5]).unwrap()
}

/// Moves to `x/2` or `0` with equal probability.
fn halving_kernel() -> JumpKernel<f64> {
    JumpKernel::new(
        |x: &f64, rng: &mut dyn RngCore| if open01(rng) < 0.5 { x / 2.0 } else { 0.0 },
        |x: &f64, f: &dyn Fn(&f64) -> f64| 0.5 * f(&(x / 2.0)) + 0.5 * f(&0.0),
    )
}

fn no_jumps(x: f64, horizon: f64) -> Trajectory<f64> {
    Trajectory {
        initial_state: x,
        jumps: Vec::new(),
        horizon,
        lifetime: None,
    }
}

#[test]
fn survival_of_a_constant_rate() {
    let got = constant_rate(0.7).survival(&0.0, 1.0).unwrap();
    assert!((got - (-0.7f64).exp()).abs() <= 1e-14);
}

#[test]
fn survival_of_a_single_atom() {
    let hazard = SdsFunctional::zero().with_jumps(
        |z: &f64| if (z - 1.0).abs() < 1e-12 { 0.4 } else { 0.0 },
        |x: &f64, t| {
            if 1.0 - x > 0.0 && 1.0 - x <= t {
                vec![1.0 - x]
            } else {
                vec![]
            }
        },
    );
    let triple = CharacteristicTriple::new(
        drift(1.0),
        hazard,
        JumpKernel::deterministic(|_| 0.0),
        vec![0.0],
    )
    .unwrap();
    assert!((triple.survival(&0.0, 2.0).unwrap() - 0.6).abs() <= 1e-15);
    assert_eq!(triple.classification(), HazardClass::QuasiStep);
}

#[test]
fn survival_of_a_mixed_hazard_matches_the_product_integral() {
    let triple = integer_atoms(1.0, 0.5, JumpKernel::deterministic(|_| 0.0));
    assert_eq!(triple.classification(), HazardClass::MixedNonsingular);
    // Independent A-function `t + ⌊t⌋/2` through sexp.
    let atoms = (1..=4).map(|k| Atom::new(k as f64, 0.5)).collect();
    let oracle = sexp(
        &AFunction::new(FvFunction::new(4.0, Some(Arc::new(|_| 1.0)), atoms, 0.0).unwrap())
            .unwrap(),
    );
    for k in 0..=40 {
        let t = k as f64 / 10.0;
        let got = triple.survival(&0.0, t).unwrap();
        assert!((got - oracle.value(t).unwrap()).abs() <= 1e-12, "t = {t}");
    }
    assert!((triple.survival(&0.0, 2.0).unwrap() - (-2.0f64).exp() * 0.25).abs() <= 1e-14);
}

#[test]
fn negative_rates_are_rejected() {
    let r = CharacteristicTriple::new(
        drift(1.0),
        SdsFunctional::from_rate(|x: &f64| 1.0 - x),
        JumpKernel::deterministic(|_| 0.0),
        vec![0.0],
    );
    assert!(matches!(r, Err(Error::InvalidModel(_))));
}

#[test]
fn survival_is_multiplicative_across_the_zoo() {
    for name in MODEL_NAMES {
        let m = common::model(name);
        let flow = m.triple.flow();
        for &x in m.triple.probes() {
            let c = flow.killing_time(&x);
            for (s, t) in [(0.3, 0.4), (0.5, 1.7), (1.2, 2.0)] {
                if s + t >= c {
                    continue;
                }
                let r = m.triple.multiplicative_residual(&x, s, t).unwrap();
                assert!(r.abs() <= 1e-10, "{name} at {x}: {r:e}");
            }
        }
    }
}

#[test]
fn zoo_survival_matches_closed_forms() {
    for name in MODEL_NAMES {
        let m = common::model(name);
        let flow = m.triple.flow();
        for &x in m.triple.probes() {
            let c = flow.killing_time(&x).min(6.0);
            for k in 0..=30 {
                let t = c * k as f64 / 30.0;
                let got = m.triple.survival(&x, t).unwrap();
                let want = m.survival_oracle(x, t);
                assert!(
                    (got - want).abs() <= 1e-8,
                    "{name} at ({x}, {t}): {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn inversion_of_a_constant_rate() {
    let lambda = 1.3;
    match constant_rate(lambda)
        .sample_jump_time(&0.0, (-lambda).exp())
        .unwrap()
    {
        JumpTime::Interior(t) => assert!((t - 1.0).abs() <= 1e-9, "{t}"),
        other => panic!("expected an interior jump, got {other:?}"),
    }
}

#[test]
fn zero_hazard_never_jumps() {
    let triple = common::model("drift_only").triple;
    assert_eq!(
        triple.sample_jump_time_within(&0.0, 0.5, 100.0).unwrap(),
        JumpTime::Beyond
    );
    let path = triple
        .sample_path(&1.0, 10.0, &mut PathStreams::new(3).stream(0))
        .unwrap();
    assert!(path.jumps.is_empty());
    assert_eq!(path.state_at(triple.flow(), 10.0).unwrap(), 11.0);
}

#[test]
fn boundary_jumps_happen_at_the_killing_time() {
    let triple = common::model("davis_boundary").triple;
    for u in [1e-9, 0.2, 0.5, 0.999_999] {
        assert_eq!(
            triple.sample_jump_time(&0.3, u).unwrap(),
            JumpTime::Boundary(0.7)
        );
    }
}

#[test]
fn inversion_is_monotone_in_the_variate() {
    let triple = integer_atoms(0.4, 0.3, JumpKernel::deterministic(|_| 0.0));
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let u = k as f64 / 200.0;
        let t = match triple.sample_jump_time(&0.25, u).unwrap() {
            JumpTime::Interior(t) => t,
            other => panic!("unexpected {other:?}"),
        };
        assert!(t <= prev, "u = {u}: {t} after {prev}");
        prev = t;
    }
}

#[test]
fn integer_atoms_give_a_geometric_law() {
    let p = 0.3;
    let triple = integer_atoms(0.0, p, JumpKernel::deterministic(|_| 0.0));
    let mut rng = PathStreams::new(11).stream(0);
    let n = 100_000;
    let bins = 15;
    let mut counts = vec![0usize; bins + 1];
    for _ in 0..n {
        let t = match triple.sample_jump_time(&0.0, open01(&mut rng)).unwrap() {
            JumpTime::Interior(t) => t,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(t, t.round(), "jump off an integer: {t}");
        counts[(t as usize).min(bins + 1) - 1] += 1;
    }
    let mut chi2 = 0.0;
    for (i, &obs) in counts.iter().enumerate() {
        let k = i as i32 + 1;
        let prob = if i < bins {
            p * (1.0 - p).powi(k - 1)
        } else {
            (1.0 - p).powi(bins as i32)
        };
        let expected = prob * n as f64;
        chi2 += (obs as f64 - expected).powi(2) / expected;
    }
    // 15 degrees of freedom; the 0.9999 quantile is about 44.3.
    assert!(chi2 < 44.3, "chi-square {chi2}");
}

#[test]
fn jump_counts_are_poisson() {
    let (lambda, horizon) = (1.5, 4.0);
    let paths = simulate_paths(&constant_rate(lambda), &0.0, horizon, 10_000, 5).unwrap();
    let counts: Vec<f64> = paths
        .iter()
        .map(|p| p.jumps.len() as f64 - lambda * horizon)
        .collect();
    let stats = PathStatistics::from_samples(&counts);
    assert!(stats.z_score.abs() <= 4.0, "{stats:?}");
    // Poisson variance equals the mean.
    let var = stats.standard_error.powi(2) * stats.n_paths as f64;
    assert!(
        (var / (lambda * horizon) - 1.0).abs() < 0.1,
        "variance {var}"
    );
}

#[test]
fn trajectories_are_consistent_with_the_flow() {
    for name in MODEL_NAMES {
        let m = common::model(name);
        let flow = m.triple.flow();
        for path in simulate_paths(&m.triple, &m.default_x0(), 8.0, 50, 17).unwrap() {
            let mut prev_time = 0.0;
            let mut prev_state = path.initial_state;
            for j in &path.jumps {
                assert!(j.time > prev_time || (j.time == prev_time && j.sojourn == 0.0));
                assert!((j.sojourn - (j.time - prev_time)).abs() <= 1e-12);
                assert_eq!(j.pre_state, flow.at(j.sojourn, &prev_state));
                prev_time = j.time;
                prev_state = j.post_state;
            }
            assert!(prev_time <= 8.0);
        }
    }
}

#[test]
fn quasi_step_jumps_only_at_integer_times() {
    let paths = simulate_paths(
        &common::model("quasi_step_maintenance").triple,
        &0.0,
        20.0,
        500,
        2,
    )
    .unwrap();
    let mut total = 0;
    for path in paths {
        for j in &path.jumps {
            assert!((j.time - j.time.round()).abs() <= 1e-9, "{}", j.time);
            total += 1;
        }
    }
    assert!(total > 0);
}

#[test]
fn explosion_is_reported_with_the_path() {
    let triple = constant_rate(50.0).with_jump_cap(20);
    match simulate_paths(&triple, &0.0, 10.0, 4, 1) {
        Err(Error::Explosion { cap, tail, .. }) => {
            assert_eq!(cap, 20);
            assert!(!tail.is_empty());
        }
        other => panic!("expected an explosion, got {other:?}"),
    }
}

#[test]
fn compensator_on_jump_free_paths() {
    let lambda = 0.8;
    let nu = constant_rate(lambda)
        .compensator(&no_jumps(0.0, 3.0), 3.0, &|_, _| 1.0)
        .unwrap();
    assert!((nu - lambda * 3.0).abs() <= 1e-12);

    let p = 0.3;
    let triple = common::model_with("quasi_step_maintenance", &[("p", p)]).triple;
    let nu = triple
        .compensator(&no_jumps(0.0, 2.5), 2.5, &|_, _| 1.0)
        .unwrap();
    assert!((nu - 2.0 * p).abs() <= 1e-15);
}

#[test]
fn jumping_measure_and_compensator_agree_in_mean() {
    let triple = integer_atoms(0.5, 0.3, halving_kernel());
    let f = |s: f64, y: &f64| (-0.3 * s).exp() * (1.0 + y);
    let t = 6.0;
    let paths = simulate_paths(&triple, &0.5, t, 10_000, 23).unwrap();
    let diffs: Vec<f64> = paths
        .iter()
        .map(|p| triple.jump_sum(p, t, &f) - triple.compensator(p, t, &f).unwrap())
        .collect();
    let stats = PathStatistics::from_samples(&diffs);
    assert!(stats.z_score.abs() <= 4.0, "{stats:?}");
}

#[test]
fn kernels_are_normalized_and_match_their_samplers() {
    let mut rng = PathStreams::new(99).stream(0);
    for name in MODEL_NAMES {
        let m = common::model(name);
        for &x in m.triple.probes() {
            let kernel = m.triple.kernel();
            assert!(kernel.normalization_residual(&x) <= 1e-8, "{name}");
            for f in [|y: &f64| *y, |y: &f64| y.cos()] {
                let exact = kernel.integrate(&x, &f);
                let (mean, se) = kernel.empirical_mean(&x, &f, 100_000, &mut rng);
                assert!(
                    (mean - exact).abs() <= 4.0 * se + 1e-12,
                    "{name} at {x}: {mean} ± {se} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn zoo_classification() {
    let class = |name: &str, params: &[(&str, f64)]| {
        common::model_with(name, params).triple.classification()
    };
    assert_eq!(class("drift_poisson_reset", &[]), HazardClass::QuasiIto);
    assert_eq!(class("cramer_lundberg", &[]), HazardClass::QuasiIto);
    assert_eq!(class("circle_rotation", &[]), HazardClass::QuasiIto);
    assert_eq!(class("quasi_step_maintenance", &[]), HazardClass::QuasiStep);
    assert_eq!(class("davis_boundary", &[]), HazardClass::QuasiStep);
    assert_eq!(
        class("davis_boundary", &[("lambda", 0.5)]),
        HazardClass::MixedNonsingular
    );
}

#[test]
fn streams_do_not_depend_on_evaluation_order() {
    let triple = common::model("circle_rotation").triple;
    let all = simulate_paths(&triple, &0.5, 5.0, 8, 42).unwrap();
    let streams = PathStreams::new(42);
    for i in (0..8).rev() {
        let one = triple
            .sample_path(&0.5, 5.0, &mut streams.stream(i))
            .unwrap();
        assert_eq!(one, all[i as usize]);
    }
}
