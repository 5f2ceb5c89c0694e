//! Built-in models on one-dimensional state spaces, each with closed-form
//! oracles for the quantities the generic machinery computes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::generator::TestFunction;
use crate::pdmp::{CharacteristicTriple, JumpKernel};
use crate::quadrature;
use crate::rng::open01;
use crate::sds::{Flow, SdsFunctional};
use crate::value::{Grid1d, GrowthBound};

pub const MODEL_NAMES: [&str; 6] = [
    "drift_only",
    "drift_poisson_reset",
    "cramer_lundberg",
    "quasi_step_maintenance",
    "davis_boundary",
    "circle_rotation",
];

/// States within this distance of an integer (quasi-step) or of the
/// boundary point (Davis) are treated as lying on it.
const SNAP: f64 = 1e-9;

type Oracle2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type ValueOracle = Arc<dyn Fn(f64) -> Option<TestFunction<f64>> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelMetadata {
    /// Closed state-space hull `[lo, hi]`.
    pub state_space: (f64, f64),
    /// Common period of every state, when all states are periodic.
    pub period: Option<f64>,
    pub has_equilibrium: bool,
    pub confluent_free: bool,
}

/// A zoo member: the triple, its parameters and its oracles.
#[derive(Clone)]
pub struct ModelInstance {
    pub name: &'static str,
    pub params: BTreeMap<String, f64>,
    pub triple: CharacteristicTriple<f64>,
    pub metadata: ModelMetadata,
    reward: SdsFunctional<f64>,
    reward_name: &'static str,
    survival: Oracle2,
    generator_identity: Option<Oracle2>,
    value: Option<ValueOracle>,
    growth: Arc<dyn Fn(f64) -> GrowthBound + Send + Sync>,
    tests: Vec<(&'static str, TestFunction<f64>)>,
    default_grid: Grid1d,
    default_x0: f64,
}

impl fmt::Debug for ModelInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelInstance")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("classification", &self.triple.classification())
            .finish_non_exhaustive()
    }
}

impl ModelInstance {
    /// Closed-form `F(x, t)`.
    pub fn survival_oracle(&self, x: f64, t: f64) -> f64 {
        (self.survival)(x, t)
    }

    /// Closed-form `𝒜f(x, t)` for `f(x) = x`, where available.
    pub fn generator_identity_oracle(&self, x: f64, t: f64) -> Option<f64> {
        self.generator_identity.as_ref().map(|g| g(x, t))
    }

    /// The running reward `l` of the default value problem.
    pub fn reward(&self) -> &SdsFunctional<f64> {
        &self.reward
    }

    pub fn reward_name(&self) -> &'static str {
        self.reward_name
    }

    /// Closed-form value function for the default reward and discount
    /// `delta`, with its path derivative and jumps.
    pub fn value_oracle(&self, delta: f64) -> Option<TestFunction<f64>> {
        self.value.as_ref().and_then(|v| v(delta))
    }

    /// Bound on `E|l(X_s)|` from `x`.
    pub fn growth_bound(&self, x: f64) -> GrowthBound {
        (self.growth)(x)
    }

    /// Test functions in the domain of the measure-valued generator.
    pub fn test_functions(&self) -> &[(&'static str, TestFunction<f64>)] {
        &self.tests
    }

    pub fn default_grid(&self) -> Grid1d {
        self.default_grid
    }

    pub fn default_x0(&self) -> f64 {
        self.default_x0
    }
}

struct Params<'a> {
    model: &'static str,
    given: &'a BTreeMap<String, f64>,
    used: BTreeMap<String, f64>,
}

impl<'a> Params<'a> {
    fn new(model: &'static str, given: &'a BTreeMap<String, f64>) -> Self {
        Self {
            model,
            given,
            used: BTreeMap::new(),
        }
    }

    fn get(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.given.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(Error::InvalidModel(format!(
                "{}: parameter {key} must be finite, got {v}",
                self.model
            )));
        }
        self.used.insert(key.to_string(), v);
        Ok(v)
    }

    fn rate(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default)?;
        if v < 0.0 {
            return Err(Error::InvalidModel(format!(
                "{}: rate {key} must be nonnegative, got {v}",
                self.model
            )));
        }
        Ok(v)
    }

    fn finish(self) -> Result<BTreeMap<String, f64>> {
        if let Some(extra) = self.given.keys().find(|k| !self.used.contains_key(*k)) {
            return Err(Error::InvalidArgument(format!(
                "{} has no parameter {extra:?} (known: {})",
                self.model,
                self.used.keys().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        Ok(self.used)
    }
}

/// Builds a zoo model by name. Unknown names and parameters are argument
/// errors; out-of-range values are model errors.
pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    match name {
        "drift_only" => drift_only(params),
        "drift_poisson_reset" => drift_poisson_reset(params),
        "cramer_lundberg" => cramer_lundberg(params),
        "quasi_step_maintenance" => quasi_step_maintenance(params),
        "davis_boundary" => davis_boundary(params),
        "circle_rotation" => circle_rotation(params),
        other => Err(Error::InvalidArgument(format!(
            "unknown model {other:?} (known: {})",
            MODEL_NAMES.join(", ")
        ))),
    }
}

fn identity_reward() -> SdsFunctional<f64> {
    SdsFunctional::from_rate(|x: &f64| *x)
}

/// `V = αx + β` with path derivative `c α`.
fn linear_value(alpha: f64, beta: f64, c: f64) -> TestFunction<f64> {
    TestFunction::new(move |x: &f64| alpha * x + beta, move |_| c * alpha)
}

fn linear_tests(c: f64) -> Vec<(&'static str, TestFunction<f64>)> {
    vec![
        ("identity", TestFunction::new(|x: &f64| *x, move |_| c)),
        (
            "square",
            TestFunction::new(|x: &f64| x * x, move |x: &f64| 2.0 * c * x),
        ),
    ]
}

fn drift_flow(c: f64) -> Flow<f64> {
    Flow::unbounded(move |t, x: &f64| x + c * t)
}

fn drift_only(given: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    let mut p = Params::new("drift_only", given);
    let c = p.get("c", 1.0)?;
    let params = p.finish()?;
    let triple = CharacteristicTriple::new(
        drift_flow(c),
        SdsFunctional::zero(),
        JumpKernel::deterministic(|x: &f64| *x),
        vec![0.0, 0.5, 3.0],
    )?;
    Ok(ModelInstance {
        name: "drift_only",
        params,
        triple,
        metadata: ModelMetadata {
            state_space: (f64::NEG_INFINITY, f64::INFINITY),
            period: None,
            has_equilibrium: c == 0.0,
            confluent_free: true,
        },
        reward: identity_reward(),
        reward_name: "x",
        survival: Arc::new(|_, _| 1.0),
        generator_identity: Some(Arc::new(move |_, t| c * t)),
        value: Some(Arc::new(move |delta| {
            Some(linear_value(1.0 / delta, c / (delta * delta), c))
        })),
        growth: Arc::new(move |x| GrowthBound::linear(x.abs(), c.abs())),
        tests: linear_tests(c),
        default_grid: Grid1d::new(0.0, 10.0, 401).expect("static grid"),
        default_x0: 0.5,
    })
}

fn drift_poisson_reset(given: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    let mut p = Params::new("drift_poisson_reset", given);
    let lambda = p.rate("lambda", 1.0)?;
    let c = p.get("c", 1.0)?;
    let params = p.finish()?;
    let triple = CharacteristicTriple::new(
        drift_flow(c),
        SdsFunctional::constant_rate(lambda),
        JumpKernel::deterministic(|_| 0.0),
        vec![0.0, 0.5, 3.0],
    )?;
    Ok(ModelInstance {
        name: "drift_poisson_reset",
        params,
        triple,
        metadata: ModelMetadata {
            state_space: (f64::NEG_INFINITY, f64::INFINITY),
            period: None,
            has_equilibrium: false,
            confluent_free: true,
        },
        reward: identity_reward(),
        reward_name: "x",
        survival: Arc::new(move |_, t| (-lambda * t).exp()),
        generator_identity: Some(Arc::new(move |x, t| {
            c * t - lambda * (x * t + 0.5 * c * t * t)
        })),
        // V = αx + β with α = 1/(δ+λ), β = cα/δ: the reset kernel pulls the
        // state to 0, so the jump size depends on the state.
        value: Some(Arc::new(move |delta| {
            let alpha = 1.0 / (delta + lambda);
            Some(linear_value(alpha, c * alpha / delta, c))
        })),
        growth: Arc::new(move |x| GrowthBound::linear(x.abs(), c.abs())),
        tests: linear_tests(c),
        default_grid: Grid1d::new(0.0, 10.0, 401).expect("static grid"),
        default_x0: 0.5,
    })
}

fn cramer_lundberg(given: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    let mut p = Params::new("cramer_lundberg", given);
    let lambda = p.rate("lambda", 1.0)?;
    let c = p.get("c", 1.5)?;
    let theta = p.get("theta", 1.0)?;
    if theta <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "cramer_lundberg: claim rate theta must be positive, got {theta}"
        )));
    }
    let params = p.finish()?;
    let kernel = JumpKernel::new(
        move |x: &f64, rng: &mut dyn RngCore| x + open01(rng).ln() / theta,
        move |x: &f64, f: &dyn Fn(&f64) -> f64| {
            quadrature::integral(
                &|u| f(&(x - u)) * theta * (-theta * u).exp(),
                0.0,
                f64::INFINITY,
                &[],
            )
            .unwrap_or(f64::NAN)
        },
    );
    let triple = CharacteristicTriple::new(
        drift_flow(c),
        SdsFunctional::constant_rate(lambda),
        kernel,
        vec![0.0, 0.5, 3.0],
    )?;
    let mut tests = vec![("identity", TestFunction::new(|x: &f64| *x, move |_| c))];
    tests.push((
        "cosine",
        TestFunction::new(|x: &f64| x.cos(), move |x: &f64| -c * x.sin()),
    ));
    Ok(ModelInstance {
        name: "cramer_lundberg",
        params,
        triple,
        metadata: ModelMetadata {
            state_space: (f64::NEG_INFINITY, f64::INFINITY),
            period: None,
            has_equilibrium: false,
            confluent_free: true,
        },
        reward: identity_reward(),
        reward_name: "x",
        survival: Arc::new(move |_, t| (-lambda * t).exp()),
        generator_identity: Some(Arc::new(move |_, t| (c - lambda / theta) * t)),
        value: Some(Arc::new(move |delta| {
            Some(linear_value(
                1.0 / delta,
                (c - lambda / theta) / (delta * delta),
                c,
            ))
        })),
        growth: Arc::new(move |x| GrowthBound::linear(x.abs(), c.abs() + lambda / theta)),
        tests,
        default_grid: Grid1d::new(0.0, 10.0, 401).expect("static grid"),
        default_x0: 0.5,
    })
}

/// Next integer index strictly after `x` along the unit-speed flow.
fn next_integer(x: f64) -> f64 {
    (x + SNAP).floor() + 1.0
}

/// Path times in `(0, t_max]` at which the flow `x + t` crosses a positive integer.
fn integer_crossings(x: f64, t_max: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut k = next_integer(x).max(1.0);
    while k - x <= t_max {
        times.push(k - x);
        k += 1.0;
    }
    times
}

fn at_positive_integer(z: f64) -> Option<f64> {
    let k = z.round();
    (k >= 1.0 && (z - k).abs() <= SNAP).then_some(k)
}

/// `J(0) = 0`, `(1 − p) J(k) = J(k−1) + p k`: jumps that make `x + J(⌊x⌋)`
/// satisfy the atom constraint of the quasi-step model.
fn compensating_offsets(p: f64, k: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 0.0;
    let mut j = 1.0;
    while j <= k {
        prev = cur;
        cur = (cur + p * j) / (1.0 - p);
        j += 1.0;
    }
    (prev, cur)
}

/// Value of the quasi-step model for `l(x) = x`.
#[derive(Debug, Clone, Copy)]
struct QuasiStepValue {
    p: f64,
    delta: f64,
    r: f64,
    a: f64,
    b: f64,
    v0: f64,
}

impl QuasiStepValue {
    fn new(p: f64, delta: f64) -> Self {
        let e = (-delta).exp();
        let r = (1.0 - p) * e;
        let a = (1.0 - e) / delta;
        let b = (1.0 - e * (1.0 + delta)) / (delta * delta);
        let v0 = (a * r / (1.0 - r).powi(2) + b / (1.0 - r)) / (1.0 - p * e / (1.0 - r));
        Self {
            p,
            delta,
            r,
            a,
            b,
            v0,
        }
    }

    /// `V(k)` at an integer state.
    fn at_integer(&self, k: f64) -> f64 {
        let (r, e) = (self.r, (-self.delta).exp());
        self.a * (k / (1.0 - r) + r / (1.0 - r).powi(2))
            + (self.b + e * self.p * self.v0) / (1.0 - r)
    }

    /// `∫₀ᵈ (x + s) e^{−δs} ds`.
    fn running(&self, x: f64, d: f64) -> f64 {
        let q = (-self.delta * d).exp();
        x * (1.0 - q) / self.delta + (1.0 - q * (1.0 + self.delta * d)) / (self.delta * self.delta)
    }

    fn continuation(&self, k: f64) -> f64 {
        self.p * self.v0 + (1.0 - self.p) * self.at_integer(k)
    }

    fn value(&self, x: f64) -> f64 {
        let k = next_integer(x);
        let d = k - x;
        self.running(x, d) + (-self.delta * d).exp() * self.continuation(k)
    }

    fn path_rate(&self, x: f64) -> f64 {
        let k = next_integer(x);
        let d = k - x;
        let q = (-self.delta * d).exp();
        (1.0 - q) / self.delta - k * q + self.delta * q * self.continuation(k)
    }
}

fn quasi_step_maintenance(given: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    let mut p = Params::new("quasi_step_maintenance", given);
    let prob = p.get("p", 0.3)?;
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidModel(format!(
            "quasi_step_maintenance: atom size p must lie in (0, 1), got {prob}"
        )));
    }
    let params = p.finish()?;
    let hazard = SdsFunctional::zero().with_jumps(
        move |z: &f64| at_positive_integer(*z).map_or(0.0, |_| prob),
        |x: &f64, t_max| integer_crossings(*x, t_max),
    );
    let triple = CharacteristicTriple::new(
        Flow::unbounded(|t, x: &f64| x + t),
        hazard,
        JumpKernel::deterministic(|_| 0.0),
        vec![0.0, 0.5, 2.25],
    )?;
    let compensated = TestFunction::new(
        move |x: &f64| x + compensating_offsets(prob, (x + SNAP).floor().max(0.0)).1,
        |_| 1.0,
    )
    .with_jumps(
        move |z: &f64| match at_positive_integer(*z) {
            Some(k) => {
                let (prev, cur) = compensating_offsets(prob, k);
                cur - prev
            }
            None => 0.0,
        },
        |x: &f64, t_max| integer_crossings(*x, t_max),
    );
    Ok(ModelInstance {
        name: "quasi_step_maintenance",
        params,
        triple,
        metadata: ModelMetadata {
            state_space: (0.0, f64::INFINITY),
            period: None,
            has_equilibrium: false,
            confluent_free: true,
        },
        reward: identity_reward(),
        reward_name: "x",
        survival: Arc::new(move |x, t| (1.0 - prob).powi(integer_crossings(x, t).len() as i32)),
        generator_identity: Some(Arc::new(move |x, t| {
            t - prob * integer_crossings(x, t).iter().map(|s| x + s).sum::<f64>()
        })),
        value: Some(Arc::new(move |delta| {
            let v = QuasiStepValue::new(prob, delta);
            Some(
                TestFunction::new(move |x: &f64| v.value(*x), move |x: &f64| v.path_rate(*x))
                    .with_jumps(
                        move |z: &f64| match at_positive_integer(*z) {
                            Some(k) => v.p * (v.at_integer(k) - v.v0),
                            None => 0.0,
                        },
                        |x: &f64, t_max| integer_crossings(*x, t_max),
                    ),
            )
        })),
        growth: Arc::new(|x| GrowthBound::linear(x.abs(), 1.0)),
        tests: vec![
            ("identity", TestFunction::new(|x: &f64| *x, |_| 1.0)),
            ("compensated", compensated),
        ],
        default_grid: Grid1d::new(0.0, 10.0, 401).expect("static grid"),
        default_x0: 0.5,
    })
}

fn at_boundary(z: f64) -> bool {
    z >= 1.0 - SNAP
}

fn boundary_schedule(x: f64, t_max: f64) -> Vec<f64> {
    let c = 1.0 - x;
    if c > 0.0 && c <= t_max {
        vec![c]
    } else {
        Vec::new()
    }
}

fn uniform_half_integral(f: &dyn Fn(&f64) -> f64) -> f64 {
    2.0 * quadrature::integral(&|y| f(&y), 0.0, 0.5, &[]).unwrap_or(f64::NAN)
}

/// `f(x) = x² − 11x/9` on `[0, 1)` and `f(1) = 2`: the left limit at the
/// boundary equals `Qf(1) = −2/9`, and the jump into the boundary state is
/// cancelled by the forced jump.
pub fn davis_corrected_function() -> TestFunction<f64> {
    const A: f64 = 11.0 / 9.0;
    let smooth = |y: f64| y * y - A * y;
    TestFunction::new(
        move |x: &f64| if at_boundary(*x) { 2.0 } else { smooth(*x) },
        |x: &f64| 2.0 * x - A,
    )
    .with_jumps(
        move |z: &f64| {
            if at_boundary(*z) {
                2.0 - smooth(1.0)
            } else {
                0.0
            }
        },
        |x: &f64, t_max| boundary_schedule(*x, t_max),
    )
}

/// `f(x) = x`: path-continuous, with `Qf(1) − f(1) = −3/4`.
pub fn davis_violating_function() -> TestFunction<f64> {
    TestFunction::new(|x: &f64| *x, |_| 1.0)
}

fn davis_boundary(given: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    let mut p = Params::new("davis_boundary", given);
    let lambda = p.rate("lambda", 0.0)?;
    let params = p.finish()?;
    let flow = Flow::new(|t, x: &f64| (x + t).min(1.0), |x: &f64| (1.0 - x).max(0.0))
        .with_boundary(|_| 1.0);
    let hazard = SdsFunctional::constant_rate(lambda).with_jumps(
        |z: &f64| if at_boundary(*z) { 1.0 } else { 0.0 },
        |x: &f64, t_max| boundary_schedule(*x, t_max),
    );
    let kernel = JumpKernel::new(
        |_: &f64, rng: &mut dyn RngCore| 0.5 * open01(rng),
        |_: &f64, f: &dyn Fn(&f64) -> f64| uniform_half_integral(f),
    );
    let triple = CharacteristicTriple::new(flow, hazard, kernel, vec![0.0, 0.25, 0.5, 0.9])?;
    let value = move |delta: f64| -> Option<TestFunction<f64>> {
        if lambda != 0.0 {
            return None;
        }
        // Deterministic sojourn d = 1 − x, then Q = U[0, 1/2]:
        // V(x) = ∫₀ᵈ (x + s) e^{−δs} ds + e^{−δd} m, m = 2∫₀^{1/2} V.
        let running = move |x: f64| {
            let d = 1.0 - x;
            let q = (-delta * d).exp();
            x * (1.0 - q) / delta + (1.0 - q * (1.0 + delta * d)) / (delta * delta)
        };
        let num = uniform_half_integral(&|y| running(*y));
        let den = 1.0 - uniform_half_integral(&|y| (-delta * (1.0 - y)).exp());
        let m = num / den;
        Some(TestFunction::new(
            move |x: &f64| {
                if at_boundary(*x) {
                    m
                } else {
                    running(*x) + (-delta * (1.0 - x)).exp() * m
                }
            },
            move |x: &f64| {
                let q = (-delta * (1.0 - x)).exp();
                (1.0 - q) / delta - q + delta * q * m
            },
        ))
    };
    Ok(ModelInstance {
        name: "davis_boundary",
        params,
        triple,
        metadata: ModelMetadata {
            state_space: (0.0, 1.0),
            period: None,
            has_equilibrium: false,
            confluent_free: true,
        },
        reward: identity_reward(),
        reward_name: "x",
        survival: Arc::new(move |x, t| {
            if t >= 1.0 - x {
                0.0
            } else {
                (-lambda * t).exp()
            }
        }),
        generator_identity: None,
        value: Some(Arc::new(value)),
        growth: Arc::new(|_| GrowthBound::linear(1.0, 0.0)),
        tests: vec![
            ("corrected", davis_corrected_function()),
            ("identity", davis_violating_function()),
        ],
        default_grid: Grid1d::new(0.0, 0.95, 191).expect("static grid"),
        default_x0: 0.5,
    })
}

const PERIODIC_POINTS: usize = 256;

/// Mean over `[0, 2π)` by the trapezoid rule, which converges geometrically
/// for smooth periodic integrands and is exact for piecewise-linear ones
/// with kinks on the nodes.
fn periodic_mean(f: &dyn Fn(&f64) -> f64) -> f64 {
    let h = TAU / PERIODIC_POINTS as f64;
    (0..PERIODIC_POINTS)
        .map(|k| f(&(k as f64 * h)))
        .sum::<f64>()
        / PERIODIC_POINTS as f64
}

fn circle_rotation(given: &BTreeMap<String, f64>) -> Result<ModelInstance> {
    let mut p = Params::new("circle_rotation", given);
    let omega = p.get("omega", 1.0)?;
    let lambda = p.rate("lambda", 1.0)?;
    if omega == 0.0 {
        return Err(Error::InvalidModel(
            "circle_rotation: omega must be nonzero".into(),
        ));
    }
    let params = p.finish()?;
    let flow = Flow::unbounded(move |t, x: &f64| (x + omega * t).rem_euclid(TAU)).with_metric(
        |a: &f64, b: &f64| {
            let d = (a - b).rem_euclid(TAU);
            d.min(TAU - d)
        },
    );
    let hazard = SdsFunctional::from_rate(move |x: &f64| lambda * (1.0 + 0.5 * x.cos()))
        .with_integrated_rate(move |x: &f64, t| {
            lambda * (t + 0.5 * ((x + omega * t).sin() - x.sin()) / omega)
        });
    let kernel = JumpKernel::new(
        |_: &f64, rng: &mut dyn RngCore| TAU * open01(rng),
        |_: &f64, f: &dyn Fn(&f64) -> f64| periodic_mean(f),
    );
    let triple = CharacteristicTriple::new(flow, hazard, kernel, vec![0.0, 1.0, 4.0])?;
    let cumulative =
        move |x: f64, t: f64| lambda * (t + 0.5 * ((x + omega * t).sin() - x.sin()) / omega);
    Ok(ModelInstance {
        name: "circle_rotation",
        params,
        triple,
        metadata: ModelMetadata {
            state_space: (0.0, TAU),
            period: Some(TAU / omega.abs()),
            has_equilibrium: false,
            confluent_free: true,
        },
        reward: SdsFunctional::from_rate(|x: &f64| 1.0 + x.cos()),
        reward_name: "1+cos(x)",
        survival: Arc::new(move |x, t| (-cumulative(x, t)).exp()),
        generator_identity: None,
        value: None,
        growth: Arc::new(|_| GrowthBound::linear(2.0, 0.0)),
        tests: vec![
            (
                "cosine",
                TestFunction::new(|x: &f64| x.cos(), move |x: &f64| -omega * x.sin()),
            ),
            (
                "sine",
                TestFunction::new(|x: &f64| x.sin(), move |x: &f64| omega * x.cos()),
            ),
        ],
        default_grid: Grid1d::new(0.0, TAU, 257).expect("static grid"),
        default_x0: 0.5,
    })
}
