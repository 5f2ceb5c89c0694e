//! Expected discounted value `V(x) = E_x ∫_{(0,τ)} e^{−δs} dA_s` of an
//! additive functional `A = a + b` (predictable part `a`, post-jump rewards
//! `b`): Monte Carlo estimation, Picard iteration of the first-jump operator
//! on a 1-D grid, residuals of the measure integro-differential equation and
//! the uniqueness conditions.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{map_paths, stopped_time, JumpReward, PathStatistics, TestFunction};
use crate::pdmp::{CharacteristicTriple, Trajectory};
use crate::quadrature;
use crate::sds::{merge_schedules, SdsFunctional, State, StateFn};

/// `T_max = TRUNCATION_LOG / δ` makes `e^{−δ T_max} = 10⁻¹²`.
pub const TRUNCATION_LOG: f64 = 27.631_021_115_928_547;
const CONTRACTION_MARGIN: f64 = 1e-6;
const TRANSVERSALITY_TOL: f64 = 1e-3;
const MIDE_POINTS: usize = 128;

/// `E|l(X_s)| ≤ base + slope · s` and predictable jump or post-jump rewards
/// accrue at most `jump_rate` per unit time in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthBound {
    pub base: f64,
    pub slope: f64,
    pub jump_rate: f64,
}

impl GrowthBound {
    pub fn linear(base: f64, slope: f64) -> Self {
        Self {
            base,
            slope,
            jump_rate: 0.0,
        }
    }

    pub fn with_jump_rate(mut self, rate: f64) -> Self {
        self.jump_rate = rate;
        self
    }

    /// `∫_T^∞ e^{−δs} (base + slope s + jump_rate) ds`.
    pub fn tail(&self, delta: f64, horizon: f64) -> f64 {
        (-delta * horizon).exp()
            * ((self.base + self.slope * horizon + self.jump_rate) / delta
                + self.slope / (delta * delta))
    }
}

/// Running functional, optional post-jump reward and discount rate.
#[derive(Clone)]
pub struct ValueSpec<S> {
    pub running: SdsFunctional<S>,
    /// `b̄(X_{τ−}, X_τ)`, so that `b(x, t, y) = b̄(φ(t, x), y)`.
    pub post_jump_reward: Option<JumpReward<S>>,
    pub discount: f64,
}

impl<S> fmt::Debug for ValueSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValueSpec")
            .field("running", &self.running)
            .field("post_jump_reward", &self.post_jump_reward.is_some())
            .field("discount", &self.discount)
            .finish()
    }
}

impl<S: State> ValueSpec<S> {
    pub fn new(running: SdsFunctional<S>, discount: f64) -> Result<Self> {
        if !(discount > 0.0 && discount.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "discount rate must be positive and finite, got {discount}"
            )));
        }
        Ok(Self {
            running,
            post_jump_reward: None,
            discount,
        })
    }

    pub fn with_post_jump_reward(
        mut self,
        reward: impl Fn(&S, &S) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.post_jump_reward = Some(Arc::new(reward));
        self
    }

    /// Same discount, no rewards.
    pub fn zero(discount: f64) -> Result<Self> {
        Self::new(SdsFunctional::zero(), discount)
    }

    /// The predictable substitute `a*(x, dt) = a(x, dt) + Λ(x, dt) ∫ b̄(φ(t, x), y) Q(φ(t, x), dy)`
    /// without post-jump rewards.
    pub fn predictable_substitute(&self, triple: &CharacteristicTriple<S>) -> Self {
        let Some(b) = self.post_jump_reward.clone() else {
            return self.clone();
        };
        let mean_reward: StateFn<S> = {
            let triple = triple.clone();
            Arc::new(move |z: &S| triple.kernel().integrate(z, &|y| b(z, y)))
        };
        let (h1, a1, m1) = (
            triple.hazard().clone(),
            self.running.clone(),
            mean_reward.clone(),
        );
        let rate: StateFn<S> = Arc::new(move |z: &S| {
            let l = h1.rate(z);
            a1.rate(z) + if l == 0.0 { 0.0 } else { l * m1(z) }
        });
        let (h2, a2, m2) = (triple.hazard().clone(), self.running.clone(), mean_reward);
        let jump: StateFn<S> = Arc::new(move |z: &S| {
            let d = h2.jump(z);
            a2.jump(z) + if d == 0.0 { 0.0 } else { d * m2(z) }
        });
        let schedule = merge_schedules(
            self.running.schedule_fn().cloned(),
            triple.hazard().schedule_fn().cloned(),
        );
        Self {
            running: SdsFunctional::from_parts(rate, jump, schedule),
            post_jump_reward: None,
            discount: self.discount,
        }
    }
}

/// `∫_{(0, t∧τ]} e^{−δs} dA_s` along one trajectory.
pub fn discounted_functional<S: State>(
    triple: &CharacteristicTriple<S>,
    spec: &ValueSpec<S>,
    trajectory: &Trajectory<S>,
    t: f64,
) -> Result<f64> {
    let flow = triple.flow();
    let delta = spec.discount;
    let mut total = 0.0;
    for seg in trajectory.segments(t)? {
        if seg.length <= 0.0 {
            continue;
        }
        let atoms = spec.running.schedule(seg.state, seg.length)?;
        let ac = quadrature::integral(
            &|u| (-delta * u).exp() * spec.running.rate(&flow.at(u, seg.state)),
            0.0,
            seg.length,
            &atoms,
        )?;
        let pd: f64 = atoms
            .iter()
            .map(|&s| (-delta * s).exp() * spec.running.jump(&flow.at(s, seg.state)))
            .sum();
        total += (-delta * seg.start).exp() * (ac + pd);
    }
    if let Some(b) = &spec.post_jump_reward {
        for jump in trajectory.jumps.iter().take_while(|j| j.time <= t) {
            total += (-delta * jump.time).exp() * b(&jump.pre_state, &jump.post_state);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McValue {
    pub estimate: f64,
    pub standard_error: f64,
    /// Bound on the neglected tail `E ∫_{(T,∞)} e^{−δs} |dA_s|`.
    pub truncation_bound: f64,
    pub n_paths: usize,
    pub horizon: f64,
    /// Mean of `Σ_{τ_n ≤ T} |b̄(X_{τ_n−}, X_{τ_n})|` when post-jump rewards are present.
    pub post_jump_abs_sum: Option<f64>,
}

/// Monte Carlo estimate of `V(x)` from paths truncated at `horizon`.
pub fn mc_value<S: State>(
    triple: &CharacteristicTriple<S>,
    spec: &ValueSpec<S>,
    x: &S,
    horizon: f64,
    n_paths: usize,
    seed: u64,
    growth: GrowthBound,
) -> Result<McValue> {
    if n_paths < 2 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least two paths, got {n_paths}"
        )));
    }
    let samples = map_paths(triple, x, horizon, n_paths, seed, |path| {
        let v = discounted_functional(triple, spec, path, horizon)?;
        let b_abs = match &spec.post_jump_reward {
            Some(b) => path
                .jumps
                .iter()
                .map(|j| b(&j.pre_state, &j.post_state).abs())
                .sum(),
            None => 0.0,
        };
        Ok((v, b_abs))
    })?;
    let values: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let stats = PathStatistics::from_samples(&values);
    let post_jump_abs_sum = spec
        .post_jump_reward
        .as_ref()
        .map(|_| samples.iter().map(|s| s.1).sum::<f64>() / n_paths as f64);
    Ok(McValue {
        estimate: stats.mean,
        standard_error: stats.standard_error,
        truncation_bound: growth.tail(spec.discount, horizon),
        n_paths,
        horizon,
        post_jump_abs_sum,
    })
}

/// `(T V)(x) = ∫_{(0,c(x)]} e^{−δs} F(x, s−) [a(x, ds) + Λ(x, ds) ∫ (V(y) + b̄(φ(s, x), y)) Q(φ(s, x), dy)]`,
/// with the range cut at `t_max` when `c(x) = ∞`.
pub fn first_jump_operator<S: State>(
    triple: &CharacteristicTriple<S>,
    spec: &ValueSpec<S>,
    v: &(dyn Fn(&S) -> f64 + Sync),
    x: &S,
    t_max: f64,
) -> Result<f64> {
    let flow = triple.flow();
    let hazard = triple.hazard();
    let delta = spec.discount;
    let c = flow.killing_time(x);
    let end = if c.is_finite() { c } else { t_max };
    if end <= 0.0 {
        return Ok(0.0);
    }
    let continuation = |z: &S| -> f64 {
        match &spec.post_jump_reward {
            None => triple.kernel().integrate(z, v),
            Some(b) => triple.kernel().integrate(z, &|y| v(y) + b(z, y)),
        }
    };
    let mut atoms = hazard.schedule(x, end)?;
    atoms.extend(spec.running.schedule(x, end)?);
    atoms.sort_by(f64::total_cmp);
    atoms.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));

    let mut total = 0.0;
    let mut prev = 0.0;
    let mut cum = 0.0;
    let mut product = 1.0;
    let pieces = atoms
        .iter()
        .map(|&s| (s, true))
        .chain(std::iter::once((end, false)));
    for (s, is_atom) in pieces {
        if s > prev {
            let (p0, h0) = (product, cum);
            let integrand = |u: f64| -> f64 {
                let z = flow.at(u, x);
                let l = hazard.rate(&z);
                let h = match triple.cumulative_hazard(x, prev, u) {
                    Ok(h) => h0 + h,
                    Err(_) => f64::NAN,
                };
                let mut r = spec.running.rate(&z);
                if l != 0.0 {
                    r += l * continuation(&z);
                }
                (-delta * u - h).exp() * p0 * r
            };
            // Geometric breakpoints on the initial decay scale, so a stiff
            // hazard cannot hide its mass between the first nodes.
            let k0 = delta + hazard.rate(&flow.at(prev, x)).max(0.0);
            let mut breaks = Vec::new();
            let mut w = 1.0 / k0;
            while prev + w < s && breaks.len() < 64 {
                breaks.push(prev + w);
                w *= 2.0;
            }
            total += quadrature::integral(&integrand, prev, s, &breaks)?;
            cum += triple.cumulative_hazard(x, prev, s)?;
            prev = s;
        }
        if !is_atom {
            break;
        }
        let z = flow.at(s, x);
        let d = hazard.jump(&z);
        let weight = (-delta * s - cum).exp() * product;
        let mut r = spec.running.jump(&z);
        if d != 0.0 {
            r += d * continuation(&z);
        }
        total += weight * r;
        product *= 1.0 - d;
        if product <= 0.0 {
            break;
        }
    }
    Ok(total)
}

/// Uniform grid `lo = x_0 < … < x_{n−1} = hi`, written `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1d {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1d {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs finite lo < hi and at least two nodes, got {lo}:{hi}:{n}"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl fmt::Display for Grid1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

impl FromStr for Grid1d {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::InvalidArgument(format!("grid must look like lo:hi:n, got {s:?}"));
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        Self::new(lo, hi, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Nearest,
    #[serde(rename = "linear-1d")]
    Linear,
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "linear" | "linear-1d" => Ok(Self::Linear),
            _ => Err(Error::InvalidArgument(format!(
                "interpolation must be nearest or linear-1d, got {s:?}"
            ))),
        }
    }
}

/// What a grid function returns outside `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffGrid {
    /// Value at the nearest end node.
    Clamp,
    /// Continue the end cell's interpolant (linear interpolation only).
    Extrapolate,
}

impl FromStr for OffGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(Self::Clamp),
            "extrapolate" => Ok(Self::Extrapolate),
            _ => Err(Error::InvalidArgument(format!(
                "off-grid policy must be clamp or extrapolate, got {s:?}"
            ))),
        }
    }
}

/// Values on a grid with an interpolation rule. Evaluations outside the
/// grid hull are counted.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Grid1d,
    pub values: Vec<f64>,
    pub interpolation: Interpolation,
    pub off_grid: OffGrid,
    off_grid_count: Arc<AtomicUsize>,
}

impl GridFunction {
    pub fn new(
        grid: Grid1d,
        values: Vec<f64>,
        interpolation: Interpolation,
        off_grid: OffGrid,
    ) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n
            )));
        }
        Ok(Self {
            grid,
            values,
            interpolation,
            off_grid,
            off_grid_count: Arc::new(AtomicUsize::new(0)),
        })
    }

    pub fn off_grid_evaluations(&self) -> usize {
        self.off_grid_count.load(Ordering::Relaxed)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let mut pos = (x - g.lo) / h;
        if !g.contains(x) {
            self.off_grid_count.fetch_add(1, Ordering::Relaxed);
            if self.off_grid == OffGrid::Clamp || self.interpolation == Interpolation::Nearest {
                pos = pos.clamp(0.0, (g.n - 1) as f64);
            }
        }
        match self.interpolation {
            Interpolation::Nearest => self.values[(pos.round() as usize).min(g.n - 1)],
            Interpolation::Linear => {
                let i = (pos.floor().max(0.0) as usize).min(g.n - 2);
                let w = pos - i as f64;
                self.values[i] * (1.0 - w) + self.values[i + 1] * w
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iter: usize,
    pub interpolation: Interpolation,
    pub off_grid: OffGrid,
    /// Integration range when `c(x) = ∞`; defaults to `TRUNCATION_LOG / δ`.
    pub t_max: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iter: 10_000,
            interpolation: Interpolation::Linear,
            off_grid: OffGrid::Extrapolate,
            t_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSolution {
    pub grid: Grid1d,
    pub values: Vec<f64>,
    pub interpolation: Interpolation,
    pub off_grid: OffGrid,
    pub iterations: usize,
    pub final_sup_change: f64,
    /// `sup_x (T 1)(x)` with no rewards, an upper bound on `sup_x E_x e^{−δτ₁}`.
    pub contraction_estimate: f64,
    /// `e^{−δ T_max} / (1 − β) · max(1, sup |V|)` when some node has `c(x) = ∞`.
    pub truncation_bound: f64,
    pub off_grid_evaluations: usize,
    pub sup_changes: Vec<f64>,
}

impl GridSolution {
    pub fn interpolant(&self) -> GridFunction {
        GridFunction::new(
            self.grid,
            self.values.clone(),
            self.interpolation,
            self.off_grid,
        )
        .expect("solution matches its grid")
    }

    /// The interpolant as a test function whose path derivative is a
    /// one-sided second-order difference along the flow.
    pub fn as_test_function(&self, triple: &CharacteristicTriple<f64>) -> TestFunction<f64> {
        let v = self.interpolant();
        let v2 = v.clone();
        let flow = triple.flow().clone();
        let h = self.grid.spacing() / 4.0;
        TestFunction::new(
            move |x: &f64| v.eval(*x),
            move |x: &f64| {
                let f0 = v2.eval(*x);
                let f1 = v2.eval(flow.at(h, x));
                let f2 = v2.eval(flow.at(2.0 * h, x));
                (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
            },
        )
    }
}

/// Picard iteration `V_{k+1} = T V_k` from `V_0 ≡ 0` on a 1-D grid.
pub fn fixed_point_solve(
    triple: &CharacteristicTriple<f64>,
    spec: &ValueSpec<f64>,
    grid: Grid1d,
    opts: SolveOptions,
) -> Result<GridSolution> {
    if !(opts.tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    let delta = spec.discount;
    let t_max = opts.t_max.unwrap_or(TRUNCATION_LOG / delta);
    let nodes = grid.nodes();
    let apply = |s: &ValueSpec<f64>, v: &(dyn Fn(&f64) -> f64 + Sync)| -> Result<Vec<f64>> {
        nodes
            .par_iter()
            .map(|x| first_jump_operator(triple, s, v, x, t_max))
            .collect()
    };

    let bare = ValueSpec::zero(delta)?;
    let ones = apply(&bare, &|_| 1.0)?;
    let beta = ones.iter().copied().fold(0.0, f64::max);
    if !(beta < 1.0 - CONTRACTION_MARGIN) {
        return Err(Error::NonContraction { estimate: beta });
    }

    let mut values = vec![0.0; grid.n];
    let mut sup_changes = Vec::new();
    let mut off_grid = 0;
    for k in 1..=opts.max_iter {
        let current = GridFunction::new(grid, values.clone(), opts.interpolation, opts.off_grid)?;
        let next = apply(spec, &|y: &f64| current.eval(*y))?;
        off_grid += current.off_grid_evaluations();
        let change = next
            .iter()
            .zip(&values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(Error::Integrability {
                lo: grid.lo,
                hi: grid.hi,
                value: change,
            });
        }
        values = next;
        sup_changes.push(change);
        if change <= opts.tolerance {
            let unbounded = nodes
                .iter()
                .any(|x| triple.flow().killing_time(x).is_infinite());
            let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
            let truncation_bound = if unbounded {
                (-delta * t_max).exp() / (1.0 - beta) * scale
            } else {
                0.0
            };
            if off_grid > 0 {
                log::info!("value solve: {off_grid} evaluations outside the grid hull");
            }
            return Ok(GridSolution {
                grid,
                values,
                interpolation: opts.interpolation,
                off_grid: opts.off_grid,
                iterations: k,
                final_sup_change: change,
                contraction_estimate: beta,
                truncation_bound,
                off_grid_evaluations: off_grid,
                sup_changes,
            });
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        sup_change: sup_changes.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MideReport {
    /// `sup |𝒳V + λ(QV − V) + λ Qb + l − δV|` along the path, off atoms.
    pub ac_residual: f64,
    /// `(time, |ΔV + ΔΛ(QV − V) + ΔΛ Qb + g|)` at each atom in `(0, t]`.
    pub atom_residuals: Vec<(f64, f64)>,
}

impl MideReport {
    pub fn max_atom_residual(&self) -> f64 {
        self.atom_residuals.iter().map(|a| a.1).fold(0.0, f64::max)
    }
}

/// Residuals of `𝒜V(x, dt) + a(x, dt) = δ V(φ(t, x)) dt` along the path from `x`.
pub fn mide_residual<S: State>(
    triple: &CharacteristicTriple<S>,
    spec: &ValueSpec<S>,
    v: &TestFunction<S>,
    x: &S,
    t: f64,
) -> Result<MideReport> {
    let flow = triple.flow();
    flow.check_time(x, t)?;
    let hazard = triple.hazard();
    let gap = |z: &S| -> f64 {
        let vz = v.value(z);
        match &spec.post_jump_reward {
            None => triple.kernel().integrate(z, &|y| v.value(y)) - vz,
            Some(b) => triple.kernel().integrate(z, &|y| v.value(y) + b(z, y)) - vz,
        }
    };
    let mut atoms = hazard.schedule(x, t)?;
    atoms.extend(spec.running.schedule(x, t)?);
    atoms.extend(v.path().schedule(x, t)?);
    atoms.sort_by(f64::total_cmp);
    atoms.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));

    let mut ac_residual: f64 = 0.0;
    for k in 0..MIDE_POINTS {
        let s = t * (k as f64 + 0.5) / MIDE_POINTS as f64;
        if atoms.iter().any(|a| (a - s).abs() < 1e-9) {
            continue;
        }
        let z = flow.at(s, x);
        let l = hazard.rate(&z);
        let mut r = v.path_rate(&z) + spec.running.rate(&z) - spec.discount * v.value(&z);
        if l != 0.0 {
            r += l * gap(&z);
        }
        ac_residual = ac_residual.max(r.abs());
    }
    let atom_residuals = atoms
        .into_iter()
        .map(|s| {
            let z = flow.at(s, x);
            let d = hazard.jump(&z);
            let mut r = v.path_jump(&z) + spec.running.jump(&z);
            if d != 0.0 {
                r += d * gap(&z);
            }
            (s, r.abs())
        })
        .collect();
    Ok(MideReport {
        ac_residual,
        atom_residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    /// Mean and standard error of `Σ_{τ_n ≤ T} e^{−δτ_n} |V(X_{τ_n}) − V(X_{τ_n−})|`.
    pub discounted_jump_sum: (f64, f64),
    /// `(t, |E e^{−δt} V(X_{t∧τ})|, SE)` at doubling horizons up to `T`.
    pub transversality: Vec<(f64, f64, f64)>,
    pub n_paths: usize,
    pub pass: bool,
}

/// Empirical check of the conditions under which a solution of the MIDE
/// is the value function: summable discounted jumps of `V` and
/// `E e^{−δt} V(X_{t∧τ}) → 0`. Only the sampled paths are covered.
pub fn uniqueness_check<S: State>(
    triple: &CharacteristicTriple<S>,
    spec: &ValueSpec<S>,
    v: &(dyn Fn(&S) -> f64 + Sync),
    x: &S,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let delta = spec.discount;
    let times: Vec<f64> = (0..7).rev().map(|k| horizon / f64::from(1 << k)).collect();
    let flow = triple.flow();
    let samples = map_paths(triple, x, horizon, n_paths, seed, |path| {
        let jumps: f64 = path
            .jumps
            .iter()
            .map(|j| (-delta * j.time).exp() * (v(&j.post_state) - v(&j.pre_state)).abs())
            .sum();
        let mut ends = Vec::with_capacity(times.len());
        for &t in &times {
            let end = stopped_time(path, t);
            ends.push((-delta * t).exp() * v(&path.state_at(flow, end)?));
        }
        Ok((jumps, ends))
    })?;
    let jump_stats = PathStatistics::from_samples(&samples.iter().map(|s| s.0).collect::<Vec<_>>());
    let transversality: Vec<(f64, f64, f64)> = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let column: Vec<f64> = samples.iter().map(|s| s.1[k]).collect();
            let st = PathStatistics::from_samples(&column);
            (t, st.mean.abs(), st.standard_error)
        })
        .collect();
    let peak = transversality.iter().map(|t| t.1).fold(1.0, f64::max);
    let last = transversality.last().map_or(f64::INFINITY, |t| t.1);
    let pass = jump_stats.mean.is_finite() && last.is_finite() && last <= TRANSVERSALITY_TOL * peak;
    Ok(UniquenessReport {
        discounted_jump_sum: (jump_stats.mean, jump_stats.standard_error),
        transversality,
        n_paths,
        pass,
    })
}
