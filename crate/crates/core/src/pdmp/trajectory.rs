use serde::Serialize;

use crate::error::{Error, Result};
use crate::sds::{Flow, State};

/// One jump of a simulated path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Jump<S> {
    /// Jump time `τ_n`.
    pub time: f64,
    /// Inter-jump time `σ_n = τ_n − τ_{n−1}`, exactly as sampled.
    pub sojourn: f64,
    /// `X_{τ_n}⁻ = φ(σ_n, X_{τ_{n−1}})`.
    pub pre_state: S,
    /// `X_{τ_n}`.
    pub post_state: S,
    /// Whether the jump was forced at the active boundary.
    pub forced: bool,
}

/// A simulated path on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<S> {
    pub initial_state: S,
    pub jumps: Vec<Jump<S>>,
    pub horizon: f64,
    /// Lifetime `τ` when the flow was killed before the horizon.
    pub lifetime: Option<f64>,
}

/// Piece of a path between consecutive jumps, clipped at some time `t`.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a, S> {
    /// `τ_n`.
    pub start: f64,
    /// `X_{τ_n}`.
    pub state: &'a S,
    /// `t∧τ_{n+1} − τ_n`; equals the sampled sojourn when the segment ends in a jump.
    pub length: f64,
    pub ends_in_jump: bool,
}

impl<S: State> Trajectory<S> {
    pub fn killed(&self) -> bool {
        self.lifetime.is_some()
    }

    /// `N_t`.
    pub fn jump_count(&self, t: f64) -> usize {
        self.jumps.iter().take_while(|j| j.time <= t).count()
    }

    pub fn jump_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.jumps.iter().map(|j| j.time)
    }

    /// `X_{τ_n}` for the last jump at or before `t`, with `τ_n`.
    fn anchor(&self, t: f64) -> (f64, &S) {
        match self.jumps.iter().rposition(|j| j.time <= t) {
            Some(i) => (self.jumps[i].time, &self.jumps[i].post_state),
            None => (0.0, &self.initial_state),
        }
    }

    fn check(&self, t: f64) -> Result<()> {
        if t < 0.0 || t > self.horizon || t.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "time {t} is outside the simulated window [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    /// `X_t`.
    pub fn state_at(&self, flow: &Flow<S>, t: f64) -> Result<S> {
        self.check(t)?;
        let (start, state) = self.anchor(t);
        Ok(flow.at(t - start, state))
    }

    /// `X_{t−}`; at a jump time this is the recorded pre-jump state.
    pub fn state_before(&self, flow: &Flow<S>, t: f64) -> Result<S> {
        self.check(t)?;
        if let Some(j) = self.jumps.iter().find(|j| j.time == t) {
            return Ok(j.pre_state.clone());
        }
        let (start, state) = self.anchor(t);
        Ok(flow.at(t - start, state))
    }

    /// Segments `(τ_n, t∧τ_{n+1}]` covering `(0, t∧τ]`.
    pub fn segments(&self, t: f64) -> Result<Vec<Segment<'_, S>>> {
        self.check(t)?;
        let t = self.lifetime.map_or(t, |life| t.min(life));
        let mut out = Vec::with_capacity(self.jumps.len() + 1);
        let mut start = 0.0;
        let mut state = &self.initial_state;
        for jump in &self.jumps {
            if jump.time > t {
                break;
            }
            out.push(Segment {
                start,
                state,
                length: jump.sojourn,
                ends_in_jump: true,
            });
            start = jump.time;
            state = &jump.post_state;
        }
        out.push(Segment {
            start,
            state,
            length: (t - start).max(0.0),
            ends_in_jump: false,
        });
        Ok(out)
    }
}
