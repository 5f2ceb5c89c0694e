//! Invariant suites run by `pdmp verify`. Each produces pass/fail checks at
//! sample sizes small enough for a quick command-line run.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::{Check, CliError, RunConfig, Z_THRESHOLD};
use crate::generator::{apply_generator, constraint_check, martingale_test, MartingaleOptions};
use crate::models::{self, davis_corrected_function, davis_violating_function, ModelInstance};
use crate::rng::{open01, PathStreams};
use crate::stieltjes::{sexp, slog, Atom, FvFunction, MFunction, RealFn};
use crate::value::{fixed_point_solve, mc_value, mide_residual, Grid1d, SolveOptions, ValueSpec};

pub const SUITES: [&str; 6] = ["all", "stieltjes", "sds", "pdmp", "generator", "value"];

const LAW_TOL: f64 = 1e-8;
const RANDOM_CASES: usize = 200;
const MARTINGALE_T: f64 = 5.0;
const SOLVER_REL_TOL: f64 = 1e-3;
/// Rounding and quadrature allowance on top of the statistical tolerance.
const NUMERIC_FLOOR: f64 = 1e-9;

pub(super) fn run(config: &RunConfig) -> Result<Vec<Check>, CliError> {
    let seed = config.seed()?;
    let zoo: Vec<ModelInstance> = match &config.model {
        Some(name) => vec![models::build(name, &config.params)?],
        None => models::MODEL_NAMES
            .iter()
            .map(|n| models::build(n, &BTreeMap::new()))
            .collect::<crate::Result<_>>()?,
    };
    let wants = |s: &str| config.suite == "all" || config.suite == s;
    let mut checks = Vec::new();
    if wants("stieltjes") {
        checks.extend(stieltjes_suite()?);
    }
    for (k, m) in zoo.iter().enumerate() {
        let stream = seed.wrapping_add(k as u64);
        if wants("sds") {
            checks.extend(sds_suite(m, stream)?);
        }
        if wants("pdmp") {
            checks.extend(pdmp_suite(m, stream, config.n_paths)?);
        }
        if wants("generator") {
            checks.extend(generator_suite(m, seed, config.n_paths.max(1000))?);
        }
        if wants("value") {
            checks.extend(value_suite(
                m,
                seed,
                config.n_paths.max(2),
                config.discount,
            )?);
        }
    }
    Ok(checks)
}

fn closed(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RealFn {
    Arc::new(f)
}

/// `(name, F, atom_only)` covering pure-ac, pure-atom and mixed survivals.
fn survival_corpus() -> crate::Result<Vec<(String, MFunction, bool)>> {
    let mut out = Vec::new();
    for a in [0.5, 2.0] {
        let fv = FvFunction::new(
            10.0,
            Some(closed(move |t| -a * (-a * t).exp())),
            vec![],
            1.0,
        )?
        .with_cumulative(closed(move |t| (-a * t).exp() - 1.0));
        out.push((format!("exp-{a}"), MFunction::new(fv)?, false));
    }
    let fv = FvFunction::new(
        10.0,
        Some(closed(|t| -2.0 * (1.0 + t).powi(-3))),
        vec![],
        1.0,
    )?
    .with_cumulative(closed(|t| (1.0 + t).powi(-2) - 1.0));
    out.push(("pareto".into(), MFunction::new(fv)?, false));
    let fv = FvFunction::new(
        3.0,
        Some(closed(|t| -2.0 * t * (-t * t).exp())),
        vec![],
        1.0,
    )?
    .with_cumulative(closed(|t| (-t * t).exp() - 1.0));
    out.push(("gauss".into(), MFunction::new(fv)?, false));

    let drops = |ps: &[(f64, f64)]| -> Vec<Atom> {
        let mut level = 1.0;
        ps.iter()
            .map(|&(t, p)| {
                let size = -level * p;
                level += size;
                Atom::new(t, size)
            })
            .collect()
    };
    for (name, ps) in [
        (
            "geometric",
            vec![(1.0, 0.3), (2.0, 0.3), (3.0, 0.3), (4.0, 0.3)],
        ),
        ("uneven", vec![(0.25, 0.1), (1.5, 0.6), (1.75, 0.05)]),
        ("terminal", vec![(0.5, 0.5), (2.0, 1.0)]),
    ] {
        let fv = FvFunction::atoms_only(5.0, drops(&ps), 1.0)?;
        out.push((name.into(), MFunction::new(fv)?, true));
    }
    // e^{−t} times step drops: density −e^{−t}∏(1 − p) over earlier atoms.
    for (name, ps) in [
        ("mixed-one", vec![(1.0, 0.4)]),
        ("mixed-two", vec![(0.5, 0.2), (2.0, 0.5)]),
        ("mixed-kill", vec![(1.0, 0.3), (2.5, 1.0)]),
    ] {
        let factors = ps.clone();
        let level = move |t: f64| {
            factors
                .iter()
                .filter(|a| a.0 < t)
                .map(|a| 1.0 - a.1)
                .product::<f64>()
        };
        let lv = level.clone();
        let atoms = ps
            .iter()
            .map(|&(t, p)| Atom::new(t, -(-t).exp() * level(t) * p))
            .collect();
        let fv = FvFunction::new(4.0, Some(closed(move |t| -(-t).exp() * lv(t))), atoms, 1.0)?;
        out.push((name.into(), MFunction::new(fv)?, false));
    }
    Ok(out)
}

/// `sup |sexp(slog F) − F|` over a grid plus left limits at the atoms.
pub(crate) fn roundtrip_error(f: &MFunction) -> crate::Result<f64> {
    let back = sexp(&slog(f)?);
    let end = back.domain_end().min(f.domain_end());
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let t = end * k as f64 / 200.0;
        worst = worst.max((back.value(t)? - f.value(t)?).abs());
        worst = worst.max((back.left_limit(t)? - f.left_limit(t)?).abs());
    }
    Ok(worst)
}

fn stieltjes_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for (name, f, atom_only) in survival_corpus()? {
        let tol = if atom_only { 1e-10 } else { 1e-8 };
        checks.push(Check::at_most(
            format!("stieltjes/roundtrip/{name}"),
            roundtrip_error(&f)?,
            tol,
        ));
    }
    Ok(checks)
}

/// A random state in the model's grid hull and times `s, t` with `s + t`
/// inside the definition interval.
fn random_case(m: &ModelInstance, rng: &mut impl Rng) -> (f64, f64, f64) {
    let grid = m.default_grid();
    let x = grid.lo + (grid.hi - grid.lo) * rng.random::<f64>();
    let c = m.triple.flow().killing_time(&x).min(6.0);
    let s = c * rng.random::<f64>() * 0.5;
    let t = c * rng.random::<f64>() * 0.5;
    (x, s, t)
}

fn sds_suite(m: &ModelInstance, seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = PathStreams::new(seed).stream(1);
    let flow = m.triple.flow();
    let (mut semigroup, mut killing, mut additivity): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..RANDOM_CASES {
        let (x, s, t) = random_case(m, &mut rng);
        semigroup = semigroup.max(flow.semigroup_residual(&x, s, t));
        killing = killing.max(flow.killing_residual(&x, s + t));
        for functional in [m.triple.hazard(), m.reward()] {
            additivity = additivity.max(functional.additivity_residual(flow, &x, s, t)?.abs());
        }
    }
    let name = m.name;
    Ok(vec![
        Check::at_most(format!("sds/semigroup/{name}"), semigroup, LAW_TOL),
        Check::at_most(format!("sds/killing/{name}"), killing, LAW_TOL),
        Check::at_most(format!("sds/additivity/{name}"), additivity, LAW_TOL),
    ])
}

/// Kolmogorov distance between sampled first jump times (cut at `horizon`)
/// and `1 − F(x, ·)`, including left limits at atoms.
pub(crate) fn first_jump_ks(
    m: &ModelInstance,
    x: f64,
    horizon: f64,
    n: usize,
    seed: u64,
) -> crate::Result<f64> {
    let mut rng = PathStreams::new(seed).stream(2);
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        let u = open01(&mut rng);
        if let Some((t, _)) = m.triple.sample_jump_time_within(&x, u, horizon)?.as_jump() {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    let cdf = |t: f64| 1.0 - m.survival_oracle(x, t);
    let n_f = n as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < times.len() {
        let t = times[i];
        let mut j = i;
        while j < times.len() && times[j] == t {
            j += 1;
        }
        let before = cdf(t * (1.0 - 1e-12) - 1e-300);
        d = d.max((i as f64 / n_f - before).abs());
        d = d.max((j as f64 / n_f - cdf(t)).abs());
        i = j;
    }
    d = d.max((times.len() as f64 / n_f - cdf(horizon)).abs());
    Ok(d)
}

fn pdmp_suite(m: &ModelInstance, seed: u64, n: usize) -> Result<Vec<Check>, CliError> {
    let mut rng = PathStreams::new(seed).stream(3);
    let (mut mult, mut oracle, mut norm): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..RANDOM_CASES {
        let (x, s, t) = random_case(m, &mut rng);
        mult = mult.max(m.triple.multiplicative_residual(&x, s, t)?.abs());
        oracle = oracle.max((m.triple.survival(&x, s + t)? - m.survival_oracle(x, s + t)).abs());
        norm = norm.max(
            m.triple
                .kernel()
                .normalization_residual(&m.triple.flow().at(s, &x)),
        );
    }
    let name = m.name;
    let x = m.default_x0();
    let ks = first_jump_ks(m, x, 10.0, n, seed)?;
    // 99.9% asymptotic Kolmogorov quantile; conservative for atoms.
    let ks_limit = 1.95 / (n as f64).sqrt();
    Ok(vec![
        Check::at_most(format!("pdmp/multiplicative/{name}"), mult, LAW_TOL),
        Check::at_most(format!("pdmp/survival-oracle/{name}"), oracle, LAW_TOL),
        Check::at_most(format!("pdmp/kernel-normalization/{name}"), norm, LAW_TOL),
        Check::at_most(format!("pdmp/first-jump-ks/{name}"), ks, ks_limit),
    ])
}

fn generator_suite(m: &ModelInstance, seed: u64, n: usize) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let name = m.name;
    let x = m.default_x0();
    let triple = &m.triple;
    let t = MARTINGALE_T.min(triple.flow().killing_time(&x));
    if let Some(oracle) = m.generator_identity_oracle(x, t) {
        let a = apply_generator(
            triple,
            &crate::generator::TestFunction::new(|x: &f64| *x, {
                let flow = triple.flow().clone();
                move |x: &f64| (flow.at(1e-6, x) - flow.at(0.0, x)) / 1e-6
            }),
            &x,
            t,
        );
        // The identity test function carries the exact drift; use it.
        let a = match m.test_functions().iter().find(|f| f.0 == "identity") {
            Some((_, f)) => apply_generator(triple, f, &x, t)?,
            None => a?,
        };
        checks.push(Check::at_most(
            format!("generator/identity-oracle/{name}"),
            (a - oracle).abs(),
            LAW_TOL * oracle.abs().max(1.0),
        ));
    }
    for (fname, f) in m.test_functions() {
        let stats = martingale_test(triple, f, &x, MartingaleOptions::new(MARTINGALE_T, n, seed))?;
        checks.push(Check::at_most(
            format!("generator/martingale/{name}/{fname}"),
            stats.z_score.abs(),
            Z_THRESHOLD,
        ));
    }
    if name == "davis_boundary" {
        let bad = davis_violating_function();
        let good = davis_corrected_function();
        let rejected = constraint_check(triple, &bad, &x, t)?;
        let accepted = constraint_check(triple, &good, &x, t)?;
        checks.push(Check::above(
            "generator/davis-constraint-rejects/identity",
            rejected.max_residual,
            LAW_TOL,
        ));
        checks.push(Check::at_most(
            "generator/davis-constraint-accepts/corrected",
            accepted.max_residual,
            LAW_TOL,
        ));
        let opts = MartingaleOptions::new(MARTINGALE_T, n, seed).extended();
        let drift = martingale_test(triple, &bad, &x, {
            // The extended residual of a constraint-violating function is
            // built from its rate part only, which is what exposes the drift.
            opts
        });
        let z = match drift {
            Ok(s) => s.z_score.abs(),
            Err(crate::Error::NotInDomain(_)) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        checks.push(Check::above(
            "generator/davis-drift/identity",
            z,
            Z_THRESHOLD,
        ));
        let ok = martingale_test(triple, &good, &x, opts)?;
        checks.push(Check::at_most(
            "generator/davis-extended/corrected",
            ok.z_score.abs(),
            Z_THRESHOLD,
        ));
    }
    Ok(checks)
}

fn value_suite(m: &ModelInstance, seed: u64, n: usize, delta: f64) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let name = m.name;
    let x = m.default_x0();
    let spec = ValueSpec::new(m.reward().clone(), delta)?;
    let horizon = crate::value::TRUNCATION_LOG / delta;
    let mc = mc_value(&m.triple, &spec, &x, horizon, n, seed, m.growth_bound(x))?;
    let default = m.default_grid();
    // A coarser grid keeps the run short; nodes stay on the default lattice.
    let grid = Grid1d::new(default.lo, default.hi, (default.n - 1) / 8 + 1)?;
    let sol = fixed_point_solve(&m.triple, &spec, grid, SolveOptions::default())?;
    let v_grid = sol.interpolant();
    match m.value_oracle(delta) {
        Some(v) => {
            let exact = v.value(&x);
            checks.push(Check::at_most(
                format!("value/mc-oracle/{name}"),
                (mc.estimate - exact).abs(),
                4.0 * mc.standard_error
                    + mc.truncation_bound
                    + NUMERIC_FLOOR * exact.abs().max(1.0),
            ));
            let mut rel: f64 = 0.0;
            for i in 1..grid.n - 1 {
                let z = grid.node(i);
                let o = v.value(&z);
                rel = rel.max((sol.values[i] - o).abs() / o.abs().max(1e-12));
            }
            checks.push(Check::at_most(
                format!("value/solver-oracle/{name}"),
                rel,
                SOLVER_REL_TOL,
            ));
            let t = 5.0f64.min(m.triple.flow().killing_time(&x));
            let mide = mide_residual(&m.triple, &spec, &v, &x, t)?;
            checks.push(Check::at_most(
                format!("value/mide-ac/{name}"),
                mide.ac_residual,
                1e-6,
            ));
            checks.push(Check::at_most(
                format!("value/mide-atoms/{name}"),
                mide.max_atom_residual(),
                1e-8,
            ));
        }
        None => {
            let gap = (mc.estimate - v_grid.eval(x)).abs();
            checks.push(Check::at_most(
                format!("value/mc-solver/{name}"),
                gap,
                4.0 * mc.standard_error + mc.truncation_bound + SOLVER_REL_TOL * mc.estimate.abs(),
            ));
        }
    }
    Ok(checks)
}
