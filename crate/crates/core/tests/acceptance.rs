//! Acceptance criteria. Prints one line per criterion and fails if any is red.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;

use common::*;
use pdmp::generator::{constraint_check, martingale_test, MartingaleOptions};
use pdmp::models::{
    davis_corrected_function, davis_violating_function, ModelInstance, MODEL_NAMES,
};
use pdmp::pdmp::JumpTime;
use pdmp::rng::{open01, PathStreams};
use pdmp::value::{
    fixed_point_solve, mc_value, mide_residual, Grid1d, SolveOptions, ValueSpec, TRUNCATION_LOG,
};

const SEED: u64 = 20_240_601;
const DELTA: f64 = 0.5;

type Oracle = Box<dyn Fn(f64) -> f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(number: u32, name: &str, limit: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = outcome.pass && in_time;
    println!(
        "criterion {number} {name}: {} ({}; {:.1}s of {}s)",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn stieltjes_roundtrip() -> Outcome {
    let corpus = survival_corpus();
    let mut worst_ac: f64 = 0.0;
    let mut worst_atoms: f64 = 0.0;
    for (_, f, atom_only) in &corpus {
        let e = roundtrip_error(f);
        if *atom_only {
            worst_atoms = worst_atoms.max(e);
        } else {
            worst_ac = worst_ac.max(e);
        }
    }
    Outcome {
        pass: corpus.len() >= 10 && worst_ac <= 1e-8 && worst_atoms <= 1e-10,
        detail: format!(
            "{} functions, max error {worst_ac:.2e} (with density), {worst_atoms:.2e} (atom-only)",
            corpus.len()
        ),
    }
}

fn random_case(m: &ModelInstance, rng: &mut impl Rng) -> (f64, f64, f64) {
    let g = m.default_grid();
    let x = g.lo + (g.hi - g.lo) * rng.random::<f64>();
    let c = m.triple.flow().killing_time(&x).min(8.0);
    (
        x,
        0.5 * c * rng.random::<f64>(),
        0.5 * c * rng.random::<f64>(),
    )
}

fn algebraic_laws() -> Outcome {
    let probes: [fn(&f64) -> f64; 3] = [|y| *y, |y| y.sin(), |y| (-y * y).exp()];
    let mut worst = [0.0f64; 5];
    for (k, name) in MODEL_NAMES.iter().enumerate() {
        let m = model(name);
        let flow = m.triple.flow();
        let mut rng = PathStreams::new(SEED).stream(k as u64);
        for _ in 0..1000 {
            let (x, s, t) = random_case(&m, &mut rng);
            worst[0] = worst[0].max(flow.semigroup_residual(&x, s, t));
            worst[1] = worst[1].max(flow.killing_residual(&x, s + t));
            let mut add: f64 = 0.0;
            for a in [m.triple.hazard(), m.reward()] {
                add = add.max(a.additivity_residual(flow, &x, s, t).unwrap().abs());
            }
            for (_, f) in m.test_functions() {
                add = add.max(f.path().additivity_residual(flow, &x, s, t).unwrap().abs());
            }
            worst[2] = worst[2].max(add);
            worst[3] = worst[3].max(m.triple.multiplicative_residual(&x, s, t).unwrap().abs());
            let one = flow.at(s + t, &x);
            let two = flow.at(t, &flow.at(s, &x));
            for g in probes {
                let q1 = m.triple.kernel().integrate(&one, &g);
                let q2 = m.triple.kernel().integrate(&two, &g);
                worst[4] = worst[4].max((q1 - q2).abs());
            }
        }
    }
    Outcome {
        pass: worst.iter().all(|&w| w <= 1e-8),
        detail: format!(
            "6 models x 1000 cases: semigroup {:.1e}, killing {:.1e}, additivity {:.1e}, multiplicative {:.1e}, kernel {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    }
}

fn first_jumps(m: &ModelInstance, x: f64, horizon: f64, n: usize, stream: u64) -> Vec<f64> {
    let mut rng = PathStreams::new(SEED).stream(stream);
    let mut times = Vec::new();
    for _ in 0..n {
        let jt = m
            .triple
            .sample_jump_time_within(&x, open01(&mut rng), horizon)
            .unwrap();
        if let Some((t, _)) = jt.as_jump() {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    times
}

fn sampling_law() -> Outcome {
    const N: usize = 100_000;
    let mut details = Vec::new();
    let mut pass = true;

    let cases: Vec<(&str, ModelInstance, f64, Oracle)> = vec![
        (
            "drift_poisson_reset",
            model("drift_poisson_reset"),
            0.5,
            Box::new(|t| 1.0 - (-t).exp()),
        ),
        (
            "cramer_lundberg",
            model("cramer_lundberg"),
            0.5,
            Box::new(|t| 1.0 - (-t).exp()),
        ),
        (
            "circle_rotation",
            model("circle_rotation"),
            0.5,
            Box::new(|t| 1.0 - (-(t + 0.5 * ((0.5 + t).sin() - 0.5f64.sin()))).exp()),
        ),
        (
            "davis_boundary(lambda=0.8)",
            model_with("davis_boundary", &[("lambda", 0.8)]),
            0.25,
            Box::new(|t| {
                if t >= 0.75 {
                    1.0
                } else {
                    1.0 - (-0.8 * t).exp()
                }
            }),
        ),
    ];
    for (k, (name, m, x, cdf)) in cases.iter().enumerate() {
        let horizon = 20.0;
        let times = first_jumps(m, *x, horizon, N, 10 + k as u64);
        let d = ks_distance(&times, N, horizon, cdf.as_ref());
        pass &= d <= 0.01;
        details.push(format!("KS {name} {d:.4}"));
    }

    // Geometric atom masses at the integer crossings.
    let p: f64 = 0.3;
    let m = model("quasi_step_maintenance");
    let times = first_jumps(&m, 0.5, 60.0, N, 20);
    let mut worst_z: f64 = 0.0;
    for n in 1..=10 {
        let at = n as f64 - 0.5;
        let count = times.iter().filter(|&&t| (t - at).abs() < 1e-9).count() as f64;
        let mass = p * (1.0 - p).powi(n - 1);
        let se = (mass * (1.0 - mass) / N as f64).sqrt();
        worst_z = worst_z.max((count / N as f64 - mass).abs() / se);
    }
    let off_lattice = times
        .iter()
        .filter(|&&t| ((t + 0.5) - (t + 0.5).round()).abs() > 1e-9)
        .count();
    pass &= worst_z <= 4.0 && off_lattice == 0;
    details.push(format!("quasi-step masses max |z| {worst_z:.2}"));

    // Forced boundary jumps of the Davis model.
    let m = model("davis_boundary");
    let mut rng = PathStreams::new(SEED).stream(30);
    let mut exact = 0;
    for _ in 0..N {
        let x = 0.999 * rng.random::<f64>();
        let u = open01(&mut rng);
        if m.triple.sample_jump_time(&x, u).unwrap() == JumpTime::Boundary(1.0 - x) {
            exact += 1;
        }
    }
    pass &= exact == N;
    details.push(format!("Davis tau1 = c(x) on {exact}/{N}"));
    Outcome {
        pass,
        detail: details.join(", "),
    }
}

const MARTINGALE_T: f64 = 5.0;
const MARTINGALE_N: usize = 10_000;

fn martingale_suite() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut weakest_detection = f64::INFINITY;
    let mut count = 0;
    for name in MODEL_NAMES {
        let m = model(name);
        let x = m.default_x0();
        for (i, (_, f)) in m.test_functions().iter().enumerate() {
            let opts = MartingaleOptions::new(MARTINGALE_T, MARTINGALE_N, SEED);
            let z = martingale_test(&m.triple, f, &x, opts).unwrap().z_score;
            worst = worst.max(z.abs());
            count += 1;
            if i == 0 {
                let biased = martingale_test(&m.triple, f, &x, opts.with_bias(0.05)).unwrap();
                weakest_detection = weakest_detection.min(biased.z_score.abs());
            }
        }
    }
    Outcome {
        pass: worst <= 4.0 && weakest_detection > 4.0,
        detail: format!(
            "{count} test functions at {MARTINGALE_N} paths, max |z| {worst:.2}; bias 0.05 detected with min |z| {weakest_detection:.1}"
        ),
    }
}

fn value_agreement() -> Outcome {
    const N: usize = 100_000;
    let horizon = TRUNCATION_LOG / DELTA;
    let d = DELTA;
    let oracles: Vec<(&str, Oracle)> = vec![
        ("drift_only", Box::new(move |x| x / d + 1.0 / (d * d))),
        // Reset to 0 at rate 1: V = αx + β with α = 1/(δ+1), β = α/δ.
        (
            "drift_poisson_reset",
            Box::new(move |x| x / (d + 1.0) + 1.0 / (d * (d + 1.0))),
        ),
        (
            "cramer_lundberg",
            Box::new(move |x| x / d + (1.5 - 1.0) / (d * d)),
        ),
        (
            "quasi_step_maintenance",
            Box::new(move |x| quasi_step_value(x, 0.3, d)),
        ),
        ("davis_boundary", Box::new(move |x| davis_value(x, d))),
    ];
    let mut pass = true;
    let mut worst_mc: f64 = 0.0;
    let mut worst_solver: f64 = 0.0;
    let mut worst_ac: f64 = 0.0;
    let mut worst_atom: f64 = 0.0;
    for (name, oracle) in &oracles {
        let m = model(name);
        let x = m.default_x0();
        let spec = ValueSpec::new(m.reward().clone(), DELTA).unwrap();
        let mc = mc_value(&m.triple, &spec, &x, horizon, N, SEED, m.growth_bound(x)).unwrap();
        let exact = oracle(x);
        let budget = 4.0 * mc.standard_error + mc.truncation_bound + 1e-9 * exact.abs().max(1.0);
        let ratio = (mc.estimate - exact).abs() / budget;
        worst_mc = worst_mc.max(ratio);

        let grid = m.default_grid();
        let sol = fixed_point_solve(&m.triple, &spec, grid, SolveOptions::default()).unwrap();
        for i in 1..grid.n - 1 {
            let o = oracle(grid.node(i));
            worst_solver = worst_solver.max((sol.values[i] - o).abs() / o.abs());
        }

        let v = m.value_oracle(DELTA).unwrap();
        let t = 5.0f64.min(m.triple.flow().killing_time(&x));
        let mide = mide_residual(&m.triple, &spec, &v, &x, t).unwrap();
        worst_ac = worst_ac.max(mide.ac_residual);
        worst_atom = worst_atom.max(mide.max_atom_residual());
        // The library's closed forms must agree with the ones derived here.
        for i in 0..grid.n {
            let z = grid.node(i);
            pass &= (v.value(&z) - oracle(z)).abs() <= 1e-9 * oracle(z).abs().max(1.0);
        }
    }
    pass &= worst_mc <= 1.0 && worst_solver <= 1e-3 && worst_ac <= 1e-6 && worst_atom <= 1e-8;
    Outcome {
        pass,
        detail: format!(
            "MC error / (4SE + truncation) max {worst_mc:.2}, solver max rel error {worst_solver:.1e}, MIDE ac {worst_ac:.1e} atoms {worst_atom:.1e}"
        ),
    }
}

fn constraint_detection() -> Outcome {
    let m = model("davis_boundary");
    let x = m.default_x0();
    let t = 5.0;
    let bad = davis_violating_function();
    let good = davis_corrected_function();
    let c = m.triple.flow().killing_time(&x);
    let bad_report = constraint_check(&m.triple, &bad, &x, c).unwrap();
    let good_report = constraint_check(&m.triple, &good, &x, c).unwrap();
    let opts = MartingaleOptions::new(t, 10_000, SEED);
    let z_bad = martingale_test(&m.triple, &bad, &x, opts.extended())
        .unwrap()
        .z_score;
    let z_good_ext = martingale_test(&m.triple, &good, &x, opts.extended())
        .unwrap()
        .z_score;
    let z_good = martingale_test(&m.triple, &good, &x, opts).unwrap().z_score;
    Outcome {
        pass: !bad_report.pass
            && z_bad.abs() > 4.0
            && good_report.pass
            && z_good_ext.abs() <= 4.0
            && z_good.abs() <= 4.0,
        detail: format!(
            "f = x: constraint residual {:.2}, drift |z| {:.0}; corrected f: residual {:.1e}, |z| {:.2} (extended), {:.2} (measure)",
            bad_report.max_residual,
            z_bad.abs(),
            good_report.max_residual,
            z_good_ext.abs(),
            z_good.abs()
        ),
    }
}

fn optional_reduction() -> Outcome {
    // Claim payments of Cramér–Lundberg charged at the jump: b̄ = pre − post.
    let m = model("cramer_lundberg");
    let x = m.default_x0();
    let with_b = ValueSpec::new(m.reward().clone(), DELTA)
        .unwrap()
        .with_post_jump_reward(|pre: &f64, post: &f64| pre - post);
    let substitute = with_b.predictable_substitute(&m.triple);
    let horizon = TRUNCATION_LOG / DELTA;
    let n = 20_000;
    let growth = m.growth_bound(x).with_jump_rate(1.0);
    let mc_b = mc_value(&m.triple, &with_b, &x, horizon, n, SEED, growth).unwrap();
    let mc_a = mc_value(&m.triple, &substitute, &x, horizon, n, SEED + 1, growth).unwrap();
    let se = mc_b.standard_error.hypot(mc_a.standard_error);
    let mc_gap = (mc_b.estimate - mc_a.estimate).abs();
    let mc_ok = mc_gap <= 4.0 * se + mc_b.truncation_bound + mc_a.truncation_bound;

    let grid = Grid1d::new(0.0, 10.0, 101).unwrap();
    let sol_b = fixed_point_solve(&m.triple, &with_b, grid, SolveOptions::default()).unwrap();
    let sol_a = fixed_point_solve(&m.triple, &substitute, grid, SolveOptions::default()).unwrap();
    let mut solver_gap: f64 = 0.0;
    for i in 1..grid.n - 1 {
        solver_gap =
            solver_gap.max((sol_b.values[i] - sol_a.values[i]).abs() / sol_a.values[i].abs());
    }
    // The claims add λ/(θδ) to the value.
    let exact = x / DELTA + (1.5 - 1.0) / (DELTA * DELTA) + 1.0 / DELTA;
    let oracle_gap = (sol_b.interpolant().eval(x) - exact).abs() / exact;
    Outcome {
        pass: mc_ok && solver_gap <= 1e-3 && oracle_gap <= 1e-3,
        detail: format!(
            "MC |b - a*| {mc_gap:.4} vs 4SE {:.4}; solver max rel gap {solver_gap:.1e}; oracle rel error {oracle_gap:.1e}",
            4.0 * se
        ),
    }
}

fn run_cli_with_threads(args: &[&str], threads: usize, dir: &std::path::Path) -> Vec<u8> {
    let out = dir.join(format!("out-{threads}.txt"));
    let threads_s = threads.to_string();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_pdmp"))
        .args(args)
        .args(["--threads", &threads_s, "--output", out.to_str().unwrap()])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success(), "{args:?}");
    std::fs::read(out).unwrap()
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 5] = [
        &[
            "simulate",
            "--model",
            "cramer_lundberg",
            "--n-paths",
            "200",
            "--seed",
            "7",
        ],
        &[
            "simulate",
            "--model",
            "quasi_step_maintenance",
            "--n-paths",
            "200",
            "--seed",
            "7",
            "--format",
            "jsonl",
        ],
        &[
            "value-mc",
            "--model",
            "circle_rotation",
            "--n-paths",
            "2000",
            "--seed",
            "7",
            "--horizon",
            "20",
        ],
        &[
            "ito-check",
            "--model",
            "davis_boundary",
            "--n-paths",
            "2000",
            "--seed",
            "7",
        ],
        &[
            "value-solve",
            "--model",
            "drift_poisson_reset",
            "--grid",
            "0:10:41",
        ],
    ];
    let mut identical = 0;
    for args in runs {
        let base = run_cli_with_threads(args, 1, dir.path());
        if [2, 8]
            .iter()
            .all(|&t| run_cli_with_threads(args, t, dir.path()) == base)
        {
            identical += 1;
        }
    }
    Outcome {
        pass: identical == runs.len(),
        detail: format!(
            "{identical}/{} commands byte-identical across 1, 2 and 8 threads",
            runs.len()
        ),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "stieltjes roundtrip", secs(5), stieltjes_roundtrip),
        criterion(2, "algebraic laws", secs(30), algebraic_laws),
        criterion(3, "sampling law", secs(60), sampling_law),
        criterion(4, "martingale suite", secs(300), martingale_suite),
        criterion(5, "value agreement", secs(600), value_agreement),
        criterion(6, "constraint detection", secs(120), constraint_detection),
        criterion(
            7,
            "optional-functional reduction",
            secs(300),
            optional_reduction,
        ),
        criterion(8, "reproducibility", secs(300), reproducibility),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
