//! Exact simulation by inversion of the survival function.
//!
//! Given `U ~ Uniform(0, 1)` the next jump time is `inf{t : F(x, t) ≤ U}`.
//! Working with `−log F`, the continuous hazard is accumulated segment by
//! segment between scheduled atoms; the root inside a segment is bracketed
//! and bisected, and each atom adds `−log(1 − ΔΛ)` exactly. No dominating
//! rate is needed, so atom-only and mixed laws are handled the same way.

use rand::RngCore;
use rayon::prelude::*;

use super::{CharacteristicTriple, Jump, Trajectory};
use crate::error::{Error, Result};
use crate::rng::{open01, PathStreams};
use crate::sds::State;

pub const DEFAULT_JUMP_CAP: usize = 1_000_000;
const TIME_TOL: f64 = 1e-10;
const FIRST_WINDOW: f64 = 1.0;
const MAX_WINDOWS: usize = 1100;

/// Outcome of inverting the survival function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpTime {
    /// Jump at the given time before the killing time.
    Interior(f64),
    /// Forced jump at the active boundary, `τ = c(x)`.
    Boundary(f64),
    /// The flow reaches `c(x)` at the given time without a boundary jump;
    /// the process dies there.
    Killed(f64),
    /// No jump up to the search limit.
    Beyond,
}

impl JumpTime {
    /// `(τ, at_boundary)` for the two jump outcomes.
    pub fn as_jump(&self) -> Option<(f64, bool)> {
        match *self {
            JumpTime::Interior(t) => Some((t, false)),
            JumpTime::Boundary(t) => Some((t, true)),
            _ => None,
        }
    }
}

impl<S: State> CharacteristicTriple<S> {
    /// Inverts `F(x, ·)` at `u`; see [`Self::sample_jump_time_within`].
    pub fn sample_jump_time(&self, x: &S, u: f64) -> Result<JumpTime> {
        self.sample_jump_time_within(x, u, f64::INFINITY)
    }

    /// `inf{t ≤ limit : F(x, t) ≤ u}`, or [`JumpTime::Beyond`] when the
    /// survival stays above `u` on `[0, limit]`. Larger `u` never gives a
    /// later jump.
    pub fn sample_jump_time_within(&self, x: &S, u: f64, limit: f64) -> Result<JumpTime> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "uniform variate must lie in (0, 1), got {u}"
            )));
        }
        let target = -u.ln();
        let c = self.flow().killing_time(x);
        let end = c.min(limit);
        let mut acc = 0.0;
        let mut prev = 0.0;
        let mut window_end = if end.is_finite() { end } else { FIRST_WINDOW };
        let mut width = FIRST_WINDOW;

        for _ in 0..MAX_WINDOWS {
            let atoms = self.hazard().schedule(x, window_end)?;
            for s in atoms {
                if s <= prev {
                    continue;
                }
                let segment = self.cumulative_hazard(x, prev, s)?;
                if acc + segment >= target {
                    return Ok(JumpTime::Interior(self.bisect(x, prev, s, target - acc)?));
                }
                acc += segment;
                prev = s;
                let d = self.checked_atom(x, s)?;
                if d >= 1.0 {
                    return Ok(JumpTime::Boundary(s));
                }
                acc -= (1.0 - d).ln();
                if acc >= target {
                    return Ok(JumpTime::Interior(s));
                }
            }
            let segment = self.cumulative_hazard(x, prev, window_end)?;
            if acc + segment >= target {
                return Ok(JumpTime::Interior(self.bisect(
                    x,
                    prev,
                    window_end,
                    target - acc,
                )?));
            }
            acc += segment;
            prev = window_end;
            if window_end >= end || !window_end.is_finite() {
                if c.is_finite() && window_end >= c {
                    if self.flow().boundary_point(x).is_some() {
                        return Err(Error::InvalidModel(format!(
                            "path reaches the active boundary at c(x) = {c} with survival {} \
                             but the hazard has no unit atom there",
                            (-acc).exp()
                        )));
                    }
                    return Ok(JumpTime::Killed(c));
                }
                return Ok(JumpTime::Beyond);
            }
            width *= 2.0;
            window_end = (window_end + width).min(end);
            if !window_end.is_finite() {
                return Ok(JumpTime::Beyond);
            }
        }
        Ok(JumpTime::Beyond)
    }

    /// Solves `∫_lo^t λ(φ(s, x)) ds = need` for `t ∈ (lo, hi]`.
    fn bisect(&self, x: &S, lo: f64, hi: f64, need: f64) -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        while b - a > TIME_TOL.max(4.0 * f64::EPSILON * b.abs()) {
            let mid = 0.5 * (a + b);
            if self.cumulative_hazard(x, lo, mid)? >= need {
                b = mid;
            } else {
                a = mid;
            }
        }
        Ok(b)
    }

    /// Simulates one path from `x` on `[0, horizon]`.
    pub fn sample_path(&self, x: &S, horizon: f64, rng: &mut dyn RngCore) -> Result<Trajectory<S>> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be finite and positive, got {horizon}"
            )));
        }
        let mut now = 0.0;
        let mut state = x.clone();
        let mut jumps: Vec<Jump<S>> = Vec::new();
        let mut lifetime = None;
        loop {
            if jumps.len() >= self.jump_cap() {
                return Err(Error::Explosion {
                    path: 0,
                    cap: self.jump_cap(),
                    tail: jumps.iter().rev().take(8).rev().map(|j| j.time).collect(),
                });
            }
            let u = open01(rng);
            let (sojourn, forced) = match self.sample_jump_time_within(&state, u, horizon - now)? {
                JumpTime::Beyond => break,
                JumpTime::Killed(c) => {
                    lifetime = Some(now + c);
                    break;
                }
                JumpTime::Interior(t) => (t, false),
                JumpTime::Boundary(t) => (t, true),
            };
            let pre_state = self.flow().at(sojourn, &state);
            let post_state = self.kernel().sample(&pre_state, rng);
            now += sojourn;
            jumps.push(Jump {
                time: now,
                sojourn,
                pre_state,
                post_state: post_state.clone(),
                forced,
            });
            state = post_state;
        }
        Ok(Trajectory {
            initial_state: x.clone(),
            jumps,
            horizon,
            lifetime,
        })
    }
}

/// Simulates `n` paths in parallel. Path `i` uses stream `i` of `seed`, so
/// the result does not depend on the number of worker threads.
pub fn simulate_paths<S: State>(
    triple: &CharacteristicTriple<S>,
    x: &S,
    horizon: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<Trajectory<S>>> {
    let streams = PathStreams::new(seed);
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            triple
                .sample_path(x, horizon, &mut rng)
                .map_err(|e| with_path_index(e, i))
        })
        .collect()
}

pub(crate) fn with_path_index(e: Error, index: u64) -> Error {
    match e {
        Error::Explosion { cap, tail, .. } => Error::Explosion {
            path: index,
            cap,
            tail,
        },
        other => other,
    }
}
