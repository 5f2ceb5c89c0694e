//! Generators of a general PDMP acting on test functions.
//!
//! * the measure-valued generator `𝒜f(x, t) = Df(x, t) + ∫_{(0,t]} [Qf − f](φ(s, x)) Λ(x, ds)`,
//!   an additive functional of the flow;
//! * the extended generator `𝒜′f = 𝒳f + λ (Qf − f)`, valid where the atom
//!   constraint `Δf + ΔΛ (Qf − f) = 0` holds;
//! * the L-extended generator `𝒜″f = Kf + Qf − f` where `Df(x, dt) = Kf(φ(t, x)) Λ(x, dt)`.
//!
//! Along simulated paths the Itô residual
//! `M^f_t = f(X_t) − f(X_0) − Σ_n 𝒜f(X_{τ_n}, t∧τ_{n+1} − τ_n)` is a local
//! martingale for `f` in the domain, which [`martingale_test`] checks.

use std::cell::Cell;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pdmp::{with_path_index, CharacteristicTriple, Trajectory};
use crate::quadrature;
use crate::rng::PathStreams;
use crate::sds::{merge_schedules, Flow, SdsFunctional, State, StateFn};
use crate::stieltjes::ls_integral;

/// Default finiteness threshold for the domain integral.
pub const DOMAIN_THRESHOLD: f64 = 1e12;
/// Tolerance for certifying `Df` and for the atom constraints.
pub const CHECK_TOL: f64 = 1e-8;
const CERTIFY_POINTS: usize = 64;
const MIN_MARTINGALE_PATHS: usize = 1000;

/// A test function `f` with its path derivative `𝒳f`, its path jumps `Δf`
/// and the schedule of those jumps. `Df(x, t) = f(φ(t, x)) − f(x)` is the
/// additive functional with rate `𝒳f` and atoms `Δf`.
#[derive(Clone, Debug)]
pub struct TestFunction<S> {
    value: ValueFn<S>,
    path: SdsFunctional<S>,
}

#[derive(Clone)]
struct ValueFn<S>(StateFn<S>);

impl<S> std::fmt::Debug for ValueFn<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("f")
    }
}

impl<S: State> TestFunction<S> {
    /// Path-continuous `f` with path derivative `path_rate`.
    pub fn new(
        value: impl Fn(&S) -> f64 + Send + Sync + 'static,
        path_rate: impl Fn(&S) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: ValueFn(Arc::new(value)),
            path: SdsFunctional::from_rate(path_rate),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            value: ValueFn(Arc::new(move |_| c)),
            path: SdsFunctional::zero(),
        }
    }

    /// Adds path jumps `Δf` at the times given by `schedule`.
    pub fn with_jumps(
        mut self,
        jump: impl Fn(&S) -> f64 + Send + Sync + 'static,
        schedule: impl Fn(&S, f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.path = self.path.with_jumps(jump, schedule);
        self
    }

    /// Closed form of `∫₀ᵗ 𝒳f(φ(s, x)) ds`.
    pub fn with_integrated_rate(
        mut self,
        integral: impl Fn(&S, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.path = self.path.with_integrated_rate(integral);
        self
    }

    pub fn value(&self, x: &S) -> f64 {
        (self.value.0)(x)
    }

    pub fn path_rate(&self, x: &S) -> f64 {
        self.path.rate(x)
    }

    pub fn path_jump(&self, x: &S) -> f64 {
        self.path.jump(x)
    }

    /// `Df` as an additive functional.
    pub fn path(&self) -> &SdsFunctional<S> {
        &self.path
    }

    /// `Df(x, t)` from the rate/jump representation.
    pub fn df(&self, flow: &Flow<S>, x: &S, t: f64) -> Result<f64> {
        self.path.evaluate(flow, x, t)
    }

    /// `sup_t |Df(x, t) − (f(φ(t, x)) − f(x))|` over a grid of `(0, horizon]`
    /// and every scheduled jump time of `f`.
    pub fn certify(&self, flow: &Flow<S>, x: &S, horizon: f64) -> Result<f64> {
        let horizon = horizon.min(flow.killing_time(x));
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "certification needs a finite positive horizon, got {horizon}"
            )));
        }
        let mut times: Vec<f64> = (1..=CERTIFY_POINTS)
            .map(|k| horizon * k as f64 / CERTIFY_POINTS as f64)
            .filter(|&t| flow.contains(x, t))
            .collect();
        times.extend(self.path.schedule(x, horizon)?);
        let f0 = self.value(x);
        let mut worst: f64 = 0.0;
        for t in times {
            let direct = self.value(&flow.at(t, x)) - f0;
            worst = worst.max((self.df(flow, x, t)? - direct).abs());
        }
        Ok(worst)
    }
}

/// `∫ f(y) Q(z, dy) − f(z)`.
fn kernel_gap<S: State>(triple: &CharacteristicTriple<S>, f: &TestFunction<S>, z: &S) -> f64 {
    triple.kernel().integrate(z, &|y| f.value(y)) - f.value(z)
}

/// `𝒜f(x, t)`.
pub fn apply_generator<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
    t: f64,
) -> Result<f64> {
    let flow = triple.flow();
    flow.check_time(x, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let df = f.df(flow, x, t)?;
    let hazard = triple.hazard().restriction(flow, x, t)?;
    let g = |s: f64| kernel_gap(triple, f, &flow.at(s, x));
    let jumps = ls_integral(&g, &hazard, t).map_err(|e| match e {
        Error::Integrability { lo, hi, value } => Error::NotInDomain(format!(
            "∫[Qf − f] dΛ is not finite on [{lo}, {hi}] (got {value})"
        )),
        other => other,
    })?;
    if !df.is_finite() {
        return Err(Error::NotInDomain(format!("Df(x, {t}) is not finite")));
    }
    Ok(df + jumps)
}

/// `𝒜f` as an additive functional of the flow: rate `𝒳f + λ(Qf − f)`,
/// atoms `Δf + ΔΛ(Qf − f)` on the union of both schedules.
pub fn generator_measure<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
) -> SdsFunctional<S> {
    let (t1, f1) = (triple.clone(), f.clone());
    let rate: StateFn<S> = Arc::new(move |z: &S| {
        let l = t1.hazard().rate(z);
        let xf = f1.path_rate(z);
        if l == 0.0 {
            xf
        } else {
            xf + l * kernel_gap(&t1, &f1, z)
        }
    });
    let (t2, f2) = (triple.clone(), f.clone());
    let jump: StateFn<S> = Arc::new(move |z: &S| {
        let d = t2.hazard().jump(z);
        let jf = f2.path_jump(z);
        if d == 0.0 {
            jf
        } else {
            jf + d * kernel_gap(&t2, &f2, z)
        }
    });
    let schedule = merge_schedules(
        f.path().schedule_fn().cloned(),
        triple.hazard().schedule_fn().cloned(),
    );
    SdsFunctional::from_parts(rate, jump, schedule)
}

/// Outcome of [`domain_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    /// `sup |Df − (f∘φ − f)|` on the probe path.
    pub certification_residual: f64,
    /// `∫_{(0,t]} ∫ |f(y) − f(φ(s, x))| Q(φ(s, x), dy) Λ(x, ds)`.
    pub jump_integral: f64,
    /// The same integral on `(0, t/8], (0, t/4], (0, t/2], (0, t]`.
    pub growth: Vec<(f64, f64)>,
    pub threshold: f64,
    pub pass: bool,
    pub diagnosis: Option<String>,
}

/// Checks `f ∈ 𝒟(𝒜)` along the path from `x` up to `t`.
pub fn domain_check<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
    t: f64,
    threshold: f64,
) -> DomainReport {
    let flow = triple.flow();
    let mut diagnosis = None;
    let certification_residual = match f.certify(flow, x, t) {
        Ok(r) => r,
        Err(e) => {
            diagnosis = Some(format!("certification failed: {e}"));
            f64::INFINITY
        }
    };
    if certification_residual > CHECK_TOL && diagnosis.is_none() {
        diagnosis = Some(format!(
            "Df does not reproduce f(φ(t, x)) − f(x): residual {certification_residual:e}"
        ));
    }
    let bad_time = Cell::new(None);
    let integral_to = |h: f64| -> Result<f64> {
        let hazard = triple.hazard().restriction(flow, x, h)?;
        let g = |s: f64| {
            let z = flow.at(s, x);
            let fz = f.value(&z);
            let v = triple.kernel().integrate(&z, &|y| (f.value(y) - fz).abs());
            if !v.is_finite() && bad_time.get().is_none() {
                bad_time.set(Some(s));
            }
            v
        };
        ls_integral(&g, &hazard, h)
    };
    let mut growth = Vec::new();
    for k in (0..4).rev() {
        let h = t / f64::from(1 << k);
        let v = integral_to(h).unwrap_or(f64::INFINITY);
        growth.push((h, v));
    }
    let jump_integral = growth.last().map_or(f64::INFINITY, |g| g.1);
    let finite = jump_integral.is_finite() && jump_integral <= threshold;
    if !finite {
        let reason = match bad_time.get() {
            Some(s) => format!("∫|f(y) − f(φ(s, x))| Q(φ(s, x), dy) diverges at path time {s}"),
            None => format!(
                "jump integral {jump_integral:e} exceeds threshold {threshold:e}; \
                 growth over doubling horizons {:?}",
                growth.iter().map(|g| g.1).collect::<Vec<_>>()
            ),
        };
        diagnosis = Some(match diagnosis {
            Some(d) => format!("{d}; {reason}"),
            None => reason,
        });
    }
    DomainReport {
        certification_residual,
        jump_integral,
        growth,
        threshold,
        pass: finite && certification_residual <= CHECK_TOL,
        diagnosis,
    }
}

/// Residual of the atom constraint at a state: `Δf(z) + ΔΛ(z)(Qf(z) − f(z))`.
pub fn atom_constraint<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    z: &S,
) -> f64 {
    let d = triple.hazard().jump(z);
    let jf = f.path_jump(z);
    if d == 0.0 {
        jf
    } else {
        jf + d * kernel_gap(triple, f, z)
    }
}

fn constraint_tolerance<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    z: &S,
) -> f64 {
    CHECK_TOL
        * (1.0 + f.path_jump(z).abs() + f.value(z).abs())
            .max(1.0 + triple.kernel().integrate(z, &|y| f.value(y).abs()))
}

/// `𝒜′f(x) = 𝒳f(x) + λ(x)(Qf(x) − f(x))`. The atom constraint must hold at `x`.
pub fn extended_generator<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
) -> Result<f64> {
    let r = atom_constraint(triple, f, x);
    if r.abs() > constraint_tolerance(triple, f, x) {
        return Err(Error::NotInDomain(format!(
            "atom constraint Δf + ΔΛ(Qf − f) = {r} at {x:?}"
        )));
    }
    Ok(extended_rate(triple, f, x))
}

fn extended_rate<S: State>(triple: &CharacteristicTriple<S>, f: &TestFunction<S>, x: &S) -> f64 {
    let l = triple.hazard().rate(x);
    let xf = f.path_rate(x);
    if l == 0.0 {
        xf
    } else {
        xf + l * kernel_gap(triple, f, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomCheck {
    pub time: f64,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub atoms: Vec<AtomCheck>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Evaluates the atom constraint at every hazard atom and every jump of `f`
/// on `(0, t]` along the path from `x`. The singular-continuous constraint
/// holds trivially since neither functional has such a part.
pub fn constraint_check<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
    t: f64,
) -> Result<ConstraintReport> {
    let flow = triple.flow();
    flow.check_time(x, t)?;
    let mut times = triple.hazard().schedule(x, t)?;
    times.extend(f.path().schedule(x, t)?);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let atoms: Vec<AtomCheck> = times
        .into_iter()
        .map(|s| {
            let z = flow.at(s, x);
            AtomCheck {
                time: s,
                residual: atom_constraint(triple, f, &z),
                tolerance: constraint_tolerance(triple, f, &z),
            }
        })
        .collect();
    let max_residual = atoms.iter().map(|a| a.residual.abs()).fold(0.0, f64::max);
    let pass = atoms.iter().all(|a| a.residual.abs() <= a.tolerance);
    Ok(ConstraintReport {
        atoms,
        max_residual,
        pass,
    })
}

const ZERO_TOL: f64 = 1e-12;

/// `Kf(x)`: `Δf(x)/ΔΛ(x)` at hazard atoms, otherwise `𝒳f(x)/λ(x)`.
pub fn k_function<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
) -> Result<f64> {
    let d = triple.hazard().jump(x);
    let jf = f.path_jump(x);
    if d > 0.0 {
        return Ok(jf / d);
    }
    if jf.abs() > ZERO_TOL {
        return Err(Error::KfNonexistent(format!(
            "f jumps by {jf} at {x:?} where the hazard has no atom"
        )));
    }
    let l = triple.hazard().rate(x);
    let xf = f.path_rate(x);
    if l > 0.0 {
        Ok(xf / l)
    } else if xf.abs() > ZERO_TOL {
        Err(Error::KfNonexistent(format!(
            "𝒳f = {xf} at {x:?} where the hazard rate vanishes"
        )))
    } else {
        Ok(0.0)
    }
}

/// `𝒜″f(x) = Kf(x) + Qf(x) − f(x)`.
pub fn l_extended_generator<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
) -> Result<f64> {
    Ok(k_function(triple, f, x)? + kernel_gap(triple, f, x))
}

/// `∫_{(0,t]} 𝒜″f(φ(s, x)) Λ(x, ds)`; equals `𝒜f(x, t)` when `Kf` exists.
pub fn l_extended_integral<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
    t: f64,
) -> Result<f64> {
    let flow = triple.flow();
    let hazard = triple.hazard().restriction(flow, x, t)?;
    let failure = std::sync::Mutex::new(None);
    let g = |s: f64| match l_extended_generator(triple, f, &flow.at(s, x)) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        }
    };
    let v = ls_integral(&g, &hazard, t)?;
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// `M^f_t` along a trajectory, using `𝒜f` on each inter-jump segment.
pub fn ito_residual<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    trajectory: &Trajectory<S>,
    t: f64,
) -> Result<f64> {
    let end = stopped_time(trajectory, t);
    let mut drift = 0.0;
    for seg in trajectory.segments(t)? {
        drift += apply_generator(triple, f, seg.state, seg.length)?;
    }
    let xt = trajectory.state_at(triple.flow(), end)?;
    Ok(f.value(&xt) - f.value(&trajectory.initial_state) - drift)
}

/// `f(X_t) − f(X_0) − ∫₀ᵗ 𝒜′f(X_s) ds` along a trajectory. Only the rate
/// part of `𝒜f` enters, so this is a martingale only when the atom
/// constraint holds along the path.
pub fn extended_residual<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    trajectory: &Trajectory<S>,
    t: f64,
) -> Result<f64> {
    let flow = triple.flow();
    let end = stopped_time(trajectory, t);
    let mut drift = 0.0;
    for seg in trajectory.segments(t)? {
        if seg.length <= 0.0 {
            continue;
        }
        let breaks = triple.hazard().schedule(seg.state, seg.length)?;
        drift += quadrature::integral(
            &|u| extended_rate(triple, f, &flow.at(u, seg.state)),
            0.0,
            seg.length,
            &breaks,
        )?;
    }
    let xt = trajectory.state_at(flow, end)?;
    Ok(f.value(&xt) - f.value(&trajectory.initial_state) - drift)
}

/// `t ∧ τ`.
pub fn stopped_time<S: State>(trajectory: &Trajectory<S>, t: f64) -> f64 {
    trajectory.lifetime.map_or(t, |life| t.min(life))
}

/// Sample mean, standard error and z-score of per-path statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathStatistics {
    pub n_paths: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub z_score: f64,
}

impl PathStatistics {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let standard_error = (var / n as f64).sqrt();
        // Identical samples leave only rounding in the mean.
        let scale = samples.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
        let floor = 1e-12 * scale;
        let z_score = if standard_error <= floor && mean.abs() <= floor {
            0.0
        } else if standard_error > 0.0 {
            mean / standard_error
        } else {
            mean.signum() * f64::INFINITY
        };
        Self {
            n_paths: n,
            mean,
            standard_error,
            z_score,
        }
    }
}

/// Simulates `n_paths` paths from `x` on `[0, horizon]` and evaluates
/// `statistic` on each. Path `i` uses stream `i` of `seed`; the values come
/// back in path order whatever the thread count.
pub fn map_paths<S: State, T: Send>(
    triple: &CharacteristicTriple<S>,
    x: &S,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    statistic: impl Fn(&Trajectory<S>) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let streams = PathStreams::new(seed);
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            let path = triple
                .sample_path(x, horizon, &mut rng)
                .map_err(|e| with_path_index(e, i))?;
            statistic(&path)
        })
        .collect()
}

/// Which residual [`martingale_test`] averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualForm {
    /// `M^f` built from the measure-valued generator.
    Measure,
    /// `M′` built from the rate part of the extended generator only.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleOptions {
    pub t: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub form: ResidualForm,
    /// Adds `bias · t` to the generator, i.e. subtracts `bias · (t∧τ)` from the residual.
    pub bias: f64,
}

impl MartingaleOptions {
    pub fn new(t: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            t,
            n_paths,
            seed,
            form: ResidualForm::Measure,
            bias: 0.0,
        }
    }

    pub fn extended(mut self) -> Self {
        self.form = ResidualForm::Extended;
        self
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }
}

/// Sample statistics of the residual at `t ∧ τ` over independent paths.
pub fn martingale_test<S: State>(
    triple: &CharacteristicTriple<S>,
    f: &TestFunction<S>,
    x: &S,
    opts: MartingaleOptions,
) -> Result<PathStatistics> {
    if opts.n_paths < MIN_MARTINGALE_PATHS {
        return Err(Error::InvalidArgument(format!(
            "martingale tests need at least {MIN_MARTINGALE_PATHS} paths, got {}",
            opts.n_paths
        )));
    }
    let samples = map_paths(triple, x, opts.t, opts.n_paths, opts.seed, |path| {
        let m = match opts.form {
            ResidualForm::Measure => ito_residual(triple, f, path, opts.t)?,
            ResidualForm::Extended => extended_residual(triple, f, path, opts.t)?,
        };
        Ok(m - opts.bias * stopped_time(path, opts.t))
    })?;
    Ok(PathStatistics::from_samples(&samples))
}

/// Post-jump part `b̄(pre, post)` of an additive functional of the PDMP.
pub type JumpReward<S> = Arc<dyn Fn(&S, &S) -> f64 + Send + Sync>;

/// `A = a + b` with `a` predictable and `b` charged at jump times.
#[derive(Clone)]
pub struct FunctionalPair<S> {
    pub predictable: SdsFunctional<S>,
    pub jump_reward: JumpReward<S>,
}

impl<S: State> FunctionalPair<S> {
    /// The pair `(a, b)` with `a(x, t) = −∫_{(0,t]} ∫ b̄(φ(s, x), y) Q(φ(s, x), dy) Λ(x, ds)`,
    /// whose sum is a local martingale.
    pub fn compensated(
        triple: &CharacteristicTriple<S>,
        jump_reward: impl Fn(&S, &S) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let b: JumpReward<S> = Arc::new(jump_reward);
        let (t1, b1) = (triple.clone(), b.clone());
        let mean_reward = move |z: &S| t1.kernel().integrate(z, &|y| b1(z, y));
        let mean_reward = Arc::new(mean_reward);
        let (t2, m2) = (triple.clone(), mean_reward.clone());
        let (t3, m3) = (triple.clone(), mean_reward);
        let predictable = SdsFunctional::from_parts(
            Arc::new(move |z: &S| {
                let l = t2.hazard().rate(z);
                if l == 0.0 {
                    0.0
                } else {
                    -l * m2(z)
                }
            }),
            Arc::new(move |z: &S| {
                let d = t3.hazard().jump(z);
                if d == 0.0 {
                    0.0
                } else {
                    -d * m3(z)
                }
            }),
            triple.hazard().schedule_fn().cloned(),
        );
        Self {
            predictable,
            jump_reward: b,
        }
    }

    /// `A_{t∧τ}` along a trajectory.
    pub fn evaluate(&self, flow: &Flow<S>, trajectory: &Trajectory<S>, t: f64) -> Result<f64> {
        let mut total = 0.0;
        for seg in trajectory.segments(t)? {
            total += self.predictable.evaluate(flow, seg.state, seg.length)?;
        }
        for jump in trajectory.jumps.iter().take_while(|j| j.time <= t) {
            total += (self.jump_reward)(&jump.pre_state, &jump.post_state);
        }
        Ok(total)
    }
}

/// Martingale test for `A = a + b` (with optional drift `bias · (t∧τ)`).
pub fn pair_martingale_test<S: State>(
    triple: &CharacteristicTriple<S>,
    pair: &FunctionalPair<S>,
    x: &S,
    opts: MartingaleOptions,
) -> Result<PathStatistics> {
    let samples = map_paths(triple, x, opts.t, opts.n_paths, opts.seed, |path| {
        Ok(pair.evaluate(triple.flow(), path, opts.t)? + opts.bias * stopped_time(path, opts.t))
    })?;
    Ok(PathStatistics::from_samples(&samples))
}
