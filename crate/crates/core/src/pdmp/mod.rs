//! The characteristic triple `(φ, Λ, Q)` of a general PDMP: survival,
//! hazard classification, exact path simulation and the compensator of the
//! jumping measure.

mod sampling;
mod trajectory;

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::sds::{Flow, SdsFunctional, State};
use crate::stieltjes::{ls_integral, AFunction, MFunction};

pub(crate) use sampling::with_path_index;
pub use sampling::{simulate_paths, JumpTime, DEFAULT_JUMP_CAP};
pub use trajectory::{Jump, Segment, Trajectory};

pub type Sampler<S> = Arc<dyn Fn(&S, &mut dyn RngCore) -> S + Send + Sync>;
pub type Integrator<S> = Arc<dyn Fn(&S, &dyn Fn(&S) -> f64) -> f64 + Send + Sync>;

/// Post-jump kernel `Q(x, dy)`: a sampler and an integrator for the same law.
#[derive(Clone)]
pub struct JumpKernel<S> {
    sampler: Sampler<S>,
    integrator: Integrator<S>,
}

impl<S> fmt::Debug for JumpKernel<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("JumpKernel")
    }
}

impl<S: State> JumpKernel<S> {
    pub fn new(
        sampler: impl Fn(&S, &mut dyn RngCore) -> S + Send + Sync + 'static,
        integrator: impl Fn(&S, &dyn Fn(&S) -> f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sampler: Arc::new(sampler),
            integrator: Arc::new(integrator),
        }
    }

    /// Kernel that moves `x` to `target(x)` with probability one.
    pub fn deterministic(target: impl Fn(&S) -> S + Send + Sync + 'static) -> Self {
        let target = Arc::new(target);
        let t2 = target.clone();
        Self::new(move |x, _| target(x), move |x, f| f(&t2(x)))
    }

    pub fn sample(&self, x: &S, rng: &mut dyn RngCore) -> S {
        (self.sampler)(x, rng)
    }

    /// `∫ f(y) Q(x, dy)`.
    pub fn integrate(&self, x: &S, f: &dyn Fn(&S) -> f64) -> f64 {
        (self.integrator)(x, f)
    }

    /// `|∫ Q(x, dy) − 1|`.
    pub fn normalization_residual(&self, x: &S) -> f64 {
        (self.integrate(x, &|_| 1.0) - 1.0).abs()
    }

    /// Sample mean and standard error of `f(Y)`, `Y ~ Q(x, ·)`, over `n` draws.
    pub fn empirical_mean(
        &self,
        x: &S,
        f: &dyn Fn(&S) -> f64,
        n: usize,
        rng: &mut dyn RngCore,
    ) -> (f64, f64) {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let v = f(&self.sample(x, rng));
            sum += v;
            sum_sq += v * v;
        }
        let n_f = n as f64;
        let mean = sum / n_f;
        let var = ((sum_sq - n_f * mean * mean) / (n_f - 1.0)).max(0.0);
        (mean, (var / n_f).sqrt())
    }
}

/// Shape of the hazard along paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HazardClass {
    /// Absolutely continuous hazard, no atoms.
    QuasiIto,
    /// Pure-atom hazard, zero rate.
    QuasiStep,
    /// Rate and atoms, no singular-continuous part.
    MixedNonsingular,
}

impl fmt::Display for HazardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HazardClass::QuasiIto => "quasi-ito",
            HazardClass::QuasiStep => "quasi-step",
            HazardClass::MixedNonsingular => "mixed-nonsingular",
        })
    }
}

const PROBE_HORIZON: f64 = 10.0;
const PROBE_POINTS: usize = 33;

/// `(φ, Λ, Q)` plus the probe states used to classify and validate the
/// hazard.
#[derive(Clone, Debug)]
pub struct CharacteristicTriple<S> {
    flow: Flow<S>,
    hazard: SdsFunctional<S>,
    kernel: JumpKernel<S>,
    probes: Vec<S>,
    classification: HazardClass,
    jump_cap: usize,
}

impl<S: State> CharacteristicTriple<S> {
    /// Builds the triple and checks on every probe path that the hazard is
    /// an A-function: nonnegative rate, atoms in `(0, 1)`, and a unit atom
    /// only at a reachable boundary.
    pub fn new(
        flow: Flow<S>,
        hazard: SdsFunctional<S>,
        kernel: JumpKernel<S>,
        probes: Vec<S>,
    ) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::InvalidModel(
                "at least one probe state is required".into(),
            ));
        }
        let mut triple = Self {
            flow,
            hazard,
            kernel,
            probes,
            classification: HazardClass::MixedNonsingular,
            jump_cap: DEFAULT_JUMP_CAP,
        };
        for x in triple.probes.clone() {
            triple.hazard_along(&x, triple.probe_horizon(&x))?;
        }
        triple.classification = triple.classify_probes();
        Ok(triple)
    }

    pub fn with_jump_cap(mut self, cap: usize) -> Self {
        self.jump_cap = cap;
        self
    }

    pub fn flow(&self) -> &Flow<S> {
        &self.flow
    }

    pub fn hazard(&self) -> &SdsFunctional<S> {
        &self.hazard
    }

    pub fn kernel(&self) -> &JumpKernel<S> {
        &self.kernel
    }

    pub fn probes(&self) -> &[S] {
        &self.probes
    }

    pub fn jump_cap(&self) -> usize {
        self.jump_cap
    }

    pub fn classification(&self) -> HazardClass {
        self.classification
    }

    fn probe_horizon(&self, x: &S) -> f64 {
        self.flow.killing_time(x).min(PROBE_HORIZON)
    }

    fn classify_probes(&self) -> HazardClass {
        let mut zero_rate = true;
        let mut no_atoms = true;
        for x in &self.probes {
            let horizon = self.probe_horizon(x);
            for k in 0..PROBE_POINTS {
                let s = horizon * k as f64 / PROBE_POINTS as f64;
                if self.hazard.rate(&self.flow.at(s, x)) != 0.0 {
                    zero_rate = false;
                }
            }
            if !self
                .hazard
                .schedule(x, horizon)
                .unwrap_or_default()
                .is_empty()
            {
                no_atoms = false;
            }
        }
        if zero_rate {
            HazardClass::QuasiStep
        } else if no_atoms {
            HazardClass::QuasiIto
        } else {
            HazardClass::MixedNonsingular
        }
    }

    /// `Λ(x, ·)` on `[0, horizon]` as a validated A-function.
    pub fn hazard_along(&self, x: &S, horizon: f64) -> Result<AFunction> {
        let fv = self.hazard.restriction(&self.flow, x, horizon)?;
        AFunction::new(fv).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    /// `F(x, ·) = sexp Λ(x, ·)` on `[0, horizon]`.
    pub fn survival_function(&self, x: &S, horizon: f64) -> Result<MFunction> {
        Ok(crate::stieltjes::sexp(&self.hazard_along(x, horizon)?))
    }

    /// `∫_lo^hi λ(φ(s, x)) ds`; a negative rate encountered is a model error.
    pub fn cumulative_hazard(&self, x: &S, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        if self.hazard.has_integrated_rate() {
            let h = self.hazard.integrated_rate(&self.flow, x, hi)?
                - self.hazard.integrated_rate(&self.flow, x, lo)?;
            if h < -1e-12 {
                return Err(Error::InvalidModel(format!(
                    "cumulative hazard decreases on [{lo}, {hi}] ({h})"
                )));
            }
            return Ok(h.max(0.0));
        }
        let negative = Cell::new(None);
        let integrand = |s: f64| {
            let r = self.hazard.rate(&self.flow.at(s, x));
            if r < 0.0 {
                negative.set(Some((s, r)));
            }
            r
        };
        let h = crate::quadrature::integral(&integrand, lo, hi, &[])?;
        if let Some((s, r)) = negative.get() {
            return Err(Error::InvalidModel(format!(
                "negative hazard rate {r} at path time {s}"
            )));
        }
        Ok(h)
    }

    fn checked_atom(&self, x: &S, s: f64) -> Result<f64> {
        let d = self.hazard.jump(&self.flow.at(s, x));
        let c = self.flow.killing_time(x);
        if !(0.0..=1.0).contains(&d) || (d == 1.0 && s < c) {
            return Err(Error::InvalidModel(format!(
                "hazard atom {d} at path time {s} (killing time {c})"
            )));
        }
        Ok(d)
    }

    /// `F(x, t) = exp(−∫₀ᵗ λ(φ(s, x)) ds) · Π_{s≤t} (1 − ΔΛ(φ(s, x)))`.
    pub fn survival(&self, x: &S, t: f64) -> Result<f64> {
        self.flow.check_time(x, t)?;
        let mut value = (-self.cumulative_hazard(x, 0.0, t)?).exp();
        for s in self.hazard.schedule(x, t)? {
            value *= 1.0 - self.checked_atom(x, s)?;
        }
        Ok(value)
    }

    /// `F(x, s) F(φ(s, x), t) − F(x, s + t)`.
    pub fn multiplicative_residual(&self, x: &S, s: f64, t: f64) -> Result<f64> {
        let head = self.survival(x, s)?;
        let tail = self.survival(&self.flow.at(s, x), t)?;
        Ok(head * tail - self.survival(x, s + t)?)
    }

    /// `∫_{(0,t]×E} f dν` along a trajectory, where `ν` is the compensator of
    /// the jumping measure:
    /// `Σ_n ∫_{(τ_n, t∧τ_{n+1}]} ∫ f(s, y) Q(φ(s−τ_n, X_{τ_n}), dy) Λ(X_{τ_n}, ds − τ_n)`.
    pub fn compensator(
        &self,
        trajectory: &Trajectory<S>,
        t: f64,
        f: &dyn Fn(f64, &S) -> f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        for seg in trajectory.segments(t)? {
            if seg.length <= 0.0 {
                continue;
            }
            let hazard = self.hazard.restriction(&self.flow, seg.state, seg.length)?;
            let g = |u: f64| {
                let z = self.flow.at(u, seg.state);
                self.kernel.integrate(&z, &|y| f(seg.start + u, y))
            };
            total += ls_integral(&g, &hazard, seg.length)?;
        }
        Ok(total)
    }

    /// `∫_{(0,t]×E} f dμ = Σ_{τ_n ≤ t} f(τ_n, X_{τ_n})`.
    pub fn jump_sum(&self, trajectory: &Trajectory<S>, t: f64, f: &dyn Fn(f64, &S) -> f64) -> f64 {
        trajectory
            .jumps
            .iter()
            .take_while(|j| j.time <= t)
            .map(|j| f(j.time, &j.post_state))
            .sum()
    }
}
