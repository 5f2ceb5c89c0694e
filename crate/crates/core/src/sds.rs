//! Semi-dynamic systems (closed-form flows with killing) and additive
//! functionals of a flow.
//!
//! An additive functional is given by its path-rate `𝒳a`, its jump map `Δa`
//! and a schedule listing the finitely many times at which `Δa(φ(s, x))` is
//! nonzero along the path from `x`. Along a single path it is
//!
//! ```text
//! a(x, t) = ∫₀ᵗ 𝒳a(φ(s, x)) ds + Σ_{0<s≤t} Δa(φ(s, x))
//! ```

use std::fmt::{self, Debug};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::stieltjes::{Atom, FvFunction, RealFn};

/// Default cap on the number of atoms a schedule may return on one window.
pub const DEFAULT_ATOM_CAP: usize = 100_000;

/// A state of the process.
pub trait State: Clone + Debug + Send + Sync + 'static {
    /// Distance used by invariant checks.
    fn distance(&self, other: &Self) -> f64;
}

impl State for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

pub type FlowMap<S> = Arc<dyn Fn(f64, &S) -> S + Send + Sync>;
pub type StateFn<S> = Arc<dyn Fn(&S) -> f64 + Send + Sync>;
pub type Schedule<S> = Arc<dyn Fn(&S, f64) -> Vec<f64> + Send + Sync>;
pub type PathIntegral<S> = Arc<dyn Fn(&S, f64) -> f64 + Send + Sync>;
pub type StateMap<S> = Arc<dyn Fn(&S) -> S + Send + Sync>;
pub type Metric<S> = Arc<dyn Fn(&S, &S) -> f64 + Send + Sync>;

/// Deterministic flow `φ` with killing time `c(x)`.
#[derive(Clone)]
pub struct Flow<S> {
    phi: FlowMap<S>,
    killing_time: StateFn<S>,
    boundary_point: Option<StateMap<S>>,
    metric: Option<Metric<S>>,
}

impl<S> Debug for Flow<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flow")
            .field("has_boundary", &self.boundary_point.is_some())
            .finish_non_exhaustive()
    }
}

impl<S: State> Flow<S> {
    pub fn new(
        phi: impl Fn(f64, &S) -> S + Send + Sync + 'static,
        killing_time: impl Fn(&S) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            phi: Arc::new(phi),
            killing_time: Arc::new(killing_time),
            boundary_point: None,
            metric: None,
        }
    }

    /// Flow that is never killed.
    pub fn unbounded(phi: impl Fn(f64, &S) -> S + Send + Sync + 'static) -> Self {
        Self::new(phi, |_| f64::INFINITY)
    }

    /// Declares the flowing-out boundary point `φ(c(x), x)`.
    pub fn with_boundary(mut self, boundary: impl Fn(&S) -> S + Send + Sync + 'static) -> Self {
        self.boundary_point = Some(Arc::new(boundary));
        self
    }

    /// Overrides [`State::distance`], e.g. for states on a circle.
    pub fn with_metric(mut self, metric: impl Fn(&S, &S) -> f64 + Send + Sync + 'static) -> Self {
        self.metric = Some(Arc::new(metric));
        self
    }

    /// `φ(t, x)`.
    pub fn at(&self, t: f64, x: &S) -> S {
        (self.phi)(t, x)
    }

    pub fn killing_time(&self, x: &S) -> f64 {
        (self.killing_time)(x)
    }

    /// `φ(c(x), x)` when `c(x)` is finite and a boundary is declared.
    pub fn boundary_point(&self, x: &S) -> Option<S> {
        let c = self.killing_time(x);
        if c.is_finite() {
            self.boundary_point.as_ref().map(|b| b(x))
        } else {
            None
        }
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_point.is_some()
    }

    pub fn distance(&self, a: &S, b: &S) -> f64 {
        match &self.metric {
            Some(m) => m(a, b),
            None => a.distance(b),
        }
    }

    /// Whether `t` lies in the definition interval of the path from `x`:
    /// `[0, c(x)]` when the boundary is reachable, `[0, c(x))` otherwise.
    pub fn contains(&self, x: &S, t: f64) -> bool {
        let c = self.killing_time(x);
        t >= 0.0 && (t < c || (t == c && c.is_finite() && self.has_boundary()))
    }

    pub fn check_time(&self, x: &S, t: f64) -> Result<()> {
        if self.contains(x, t) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                t,
                killing_time: self.killing_time(x),
            })
        }
    }

    /// `|φ(t, φ(s, x)) − φ(s + t, x)|`.
    pub fn semigroup_residual(&self, x: &S, s: f64, t: f64) -> f64 {
        let two_step = self.at(t, &self.at(s, x));
        let one_step = self.at(s + t, x);
        self.distance(&two_step, &one_step)
    }

    /// `|c(φ(t, x)) − (c(x) − t)|`; zero when both sides are infinite.
    pub fn killing_residual(&self, x: &S, t: f64) -> f64 {
        let lhs = self.killing_time(&self.at(t, x));
        let rhs = self.killing_time(x) - t;
        if lhs.is_infinite() && rhs.is_infinite() && lhs.signum() == rhs.signum() {
            0.0
        } else {
            (lhs - rhs).abs()
        }
    }
}

/// Additive functional of a flow in rate/jump/schedule form.
#[derive(Clone)]
pub struct SdsFunctional<S> {
    rate: StateFn<S>,
    jump: StateFn<S>,
    schedule: Option<Schedule<S>>,
    integrated_rate: Option<PathIntegral<S>>,
    atom_cap: usize,
}

impl<S> Debug for SdsFunctional<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdsFunctional")
            .field("has_schedule", &self.schedule.is_some())
            .field("closed_form_rate_integral", &self.integrated_rate.is_some())
            .finish_non_exhaustive()
    }
}

impl<S: State> SdsFunctional<S> {
    /// Functional with path-rate `rate` and no atoms. Quadrature only splits
    /// at scheduled times, so `rate` should be continuous along paths between
    /// them; otherwise attach [`Self::with_integrated_rate`].
    pub fn from_rate(rate: impl Fn(&S) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            rate: Arc::new(rate),
            jump: Arc::new(|_| 0.0),
            schedule: None,
            integrated_rate: None,
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }

    pub(crate) fn from_parts(
        rate: StateFn<S>,
        jump: StateFn<S>,
        schedule: Option<Schedule<S>>,
    ) -> Self {
        Self {
            rate,
            jump,
            schedule,
            integrated_rate: None,
            atom_cap: DEFAULT_ATOM_CAP,
        }
    }

    pub fn zero() -> Self {
        Self::from_rate(|_| 0.0).with_integrated_rate(|_, _| 0.0)
    }

    /// `a(x, t) = γ t`.
    pub fn constant_rate(gamma: f64) -> Self {
        Self::from_rate(move |_| gamma).with_integrated_rate(move |_, t| gamma * t)
    }

    /// Adds atoms: `jump` gives `Δa` at a state and `schedule(x, t_max)` the
    /// ordered times in `(0, t_max]` where it is nonzero along the path.
    pub fn with_jumps(
        mut self,
        jump: impl Fn(&S) -> f64 + Send + Sync + 'static,
        schedule: impl Fn(&S, f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jump = Arc::new(jump);
        self.schedule = Some(Arc::new(schedule));
        self
    }

    /// Closed form of `t ↦ ∫₀ᵗ 𝒳a(φ(s, x)) ds`, used instead of quadrature.
    pub fn with_integrated_rate(
        mut self,
        integral: impl Fn(&S, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.integrated_rate = Some(Arc::new(integral));
        self
    }

    pub fn with_atom_cap(mut self, cap: usize) -> Self {
        self.atom_cap = cap;
        self
    }

    pub fn rate(&self, x: &S) -> f64 {
        (self.rate)(x)
    }

    pub fn jump(&self, x: &S) -> f64 {
        (self.jump)(x)
    }

    pub fn has_jumps(&self) -> bool {
        self.schedule.is_some()
    }

    pub fn has_integrated_rate(&self) -> bool {
        self.integrated_rate.is_some()
    }

    pub(crate) fn schedule_fn(&self) -> Option<&Schedule<S>> {
        self.schedule.as_ref()
    }

    /// Atom times in `(0, t_max]`, validated: strictly increasing, inside
    /// the window, and no more than the atom cap.
    pub fn schedule(&self, x: &S, t_max: f64) -> Result<Vec<f64>> {
        let Some(schedule) = &self.schedule else {
            return Ok(Vec::new());
        };
        if !t_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "jump schedules need a finite window, got {t_max}"
            )));
        }
        if t_max <= 0.0 {
            return Ok(Vec::new());
        }
        let times = schedule(x, t_max);
        if times.len() > self.atom_cap {
            return Err(Error::AtomCap {
                cap: self.atom_cap,
                t_max,
            });
        }
        let mut previous = 0.0;
        for &s in &times {
            if !(s > previous) || s > t_max {
                return Err(Error::InvalidModel(format!(
                    "jump schedule returned {s} after {previous} on (0, {t_max}]"
                )));
            }
            previous = s;
        }
        Ok(times)
    }

    /// `∫₀ᵗ 𝒳a(φ(s, x)) ds`.
    pub fn integrated_rate(&self, flow: &Flow<S>, x: &S, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if let Some(closed) = &self.integrated_rate {
            return Ok(closed(x, t));
        }
        let breaks = self.schedule(x, t)?;
        crate::quadrature::integral(&|s| self.rate(&flow.at(s, x)), 0.0, t, &breaks)
    }

    /// Restriction `a(x, ·)` on `[0, horizon]` as a finite-variation function.
    /// Scheduled times whose jump size is zero are dropped.
    pub fn restriction(&self, flow: &Flow<S>, x: &S, horizon: f64) -> Result<FvFunction> {
        let horizon = horizon.max(f64::MIN_POSITIVE);
        let mut atoms = Vec::new();
        for s in self.schedule(x, horizon)? {
            let size = self.jump(&flow.at(s, x));
            if size != 0.0 {
                atoms.push(Atom::new(s, size));
            }
        }
        let rate = self.rate.clone();
        let path_flow = flow.clone();
        let origin = x.clone();
        let density: RealFn = Arc::new(move |s: f64| rate(&path_flow.at(s, &origin)));
        let mut fv = FvFunction::new(horizon, Some(density), atoms, 0.0)?;
        if let Some(closed) = &self.integrated_rate {
            let closed = closed.clone();
            let origin = x.clone();
            fv = fv.with_cumulative(Arc::new(move |t| closed(&origin, t)));
        }
        Ok(fv)
    }

    /// `a(x, t)`.
    pub fn evaluate(&self, flow: &Flow<S>, x: &S, t: f64) -> Result<f64> {
        flow.check_time(x, t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let continuous = self.integrated_rate(flow, x, t)?;
        let mut discrete = 0.0;
        for s in self.schedule(x, t)? {
            discrete += self.jump(&flow.at(s, x));
        }
        Ok(continuous + discrete)
    }

    /// `a(x, s) + a(φ(s, x), t) − a(x, s + t)`.
    pub fn additivity_residual(&self, flow: &Flow<S>, x: &S, s: f64, t: f64) -> Result<f64> {
        flow.check_time(x, s + t)?;
        let head = self.evaluate(flow, x, s)?;
        let tail = self.evaluate(flow, &flow.at(s, x), t)?;
        let whole = self.evaluate(flow, x, s + t)?;
        Ok(head + tail - whole)
    }

    /// `a(x, t) = ⌊t/T⌋·a(x, T) + a(x, t − ⌊t/T⌋T)` for a state declared
    /// periodic with period `T`.
    pub fn periodic_reduction(&self, flow: &Flow<S>, x: &S, period: f64, t: f64) -> Result<f64> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let cycles = (t / period).floor();
        let remainder = t - cycles * period;
        let full = if cycles > 0.0 {
            self.evaluate(flow, x, period)?
        } else {
            0.0
        };
        Ok(cycles * full + self.evaluate(flow, x, remainder)?)
    }

    /// Absolutely continuous part: same rate, no atoms.
    pub fn ac_part(&self) -> Self {
        Self {
            rate: self.rate.clone(),
            jump: Arc::new(|_| 0.0),
            schedule: None,
            integrated_rate: self.integrated_rate.clone(),
            atom_cap: self.atom_cap,
        }
    }

    /// Purely discontinuous part: same atoms, zero rate.
    pub fn pd_part(&self) -> Self {
        Self {
            rate: Arc::new(|_| 0.0),
            jump: self.jump.clone(),
            schedule: self.schedule.clone(),
            integrated_rate: Some(Arc::new(|_, _| 0.0)),
            atom_cap: self.atom_cap,
        }
    }

    /// Builds `a + b` with the union of both schedules.
    pub fn sum(&self, other: &Self) -> Self {
        let (ra, rb) = (self.rate.clone(), other.rate.clone());
        let (ja, jb) = (self.jump.clone(), other.jump.clone());
        let integrated = match (&self.integrated_rate, &other.integrated_rate) {
            (Some(ia), Some(ib)) => {
                let (ia, ib) = (ia.clone(), ib.clone());
                Some(Arc::new(move |x: &S, t: f64| ia(x, t) + ib(x, t)) as PathIntegral<S>)
            }
            _ => None,
        };
        Self {
            rate: Arc::new(move |x| ra(x) + rb(x)),
            jump: Arc::new(move |x| ja(x) + jb(x)),
            schedule: merge_schedules(self.schedule.clone(), other.schedule.clone()),
            integrated_rate: integrated,
            atom_cap: self.atom_cap.max(other.atom_cap),
        }
    }
}

/// Union of two schedules, sorted, with coincident times merged.
pub fn merge_schedules<S: State>(
    a: Option<Schedule<S>>,
    b: Option<Schedule<S>>,
) -> Option<Schedule<S>> {
    match (a, b) {
        (None, None) => None,
        (Some(a), None) | (None, Some(a)) => Some(a),
        (Some(a), Some(b)) => Some(Arc::new(move |x: &S, t: f64| {
            let mut times = a(x, t);
            times.extend(b(x, t));
            times.sort_by(f64::total_cmp);
            times.dedup_by(|p, q| (*p - *q).abs() <= 1e-12 * q.abs().max(1.0));
            times
        })),
    }
}
