//! One-dimensional corridor with a distractor segment.

use std::collections::BTreeMap;

use crate::config::Params;
use crate::error::{Error, Result};

use super::{EnvSpec, FiniteMdp, Transition};

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;
pub const NOOP: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct CorridorParams {
    pub length: usize,
    /// Half-open cell range where standing still is cheaper.
    pub distractor: (usize, usize),
    /// Added to the step penalty when idling inside the distractor segment.
    pub distractor_reward: f64,
    pub goal_reward: f64,
    pub step_penalty: f64,
    /// Start uniformly in `[0, start_span)`; 1 means a fixed start at cell 0.
    pub start_span: usize,
}

impl Default for CorridorParams {
    fn default() -> Self {
        Self {
            length: 12,
            distractor: (4, 8),
            distractor_reward: 0.5,
            goal_reward: 20.0,
            step_penalty: -1.0,
            start_span: 1,
        }
    }
}

impl CorridorParams {
    pub(crate) fn from_table(table: &BTreeMap<String, String>) -> Result<Self> {
        let d = Self::default();
        let mut p = Params::new("env_params", table);
        let out = Self {
            length: p.get("length", d.length)?,
            distractor: (
                p.get("distractor_start", d.distractor.0)?,
                p.get("distractor_end", d.distractor.1)?,
            ),
            distractor_reward: p.get("distractor_reward", d.distractor_reward)?,
            goal_reward: p.get("goal_reward", d.goal_reward)?,
            step_penalty: p.get("step_penalty", d.step_penalty)?,
            start_span: p.get("start_span", d.start_span)?,
        };
        p.finish()?;
        Ok(out)
    }
}

/// Cells `0..length`, goal at `length - 1`, absorbing state `length`.
/// Reaching the goal pays `step_penalty + goal_reward` and terminates.
#[derive(Clone, Debug)]
pub struct Corridor {
    params: CorridorParams,
    spec: EnvSpec,
    starts: Vec<(usize, f64)>,
}

impl Corridor {
    pub fn new(params: CorridorParams, horizon: usize) -> Result<Self> {
        let bad = |key: &str, msg: &str| Err(Error::config(format!("env_params.{key}"), msg));
        if params.length < 2 {
            return bad("length", "corridor needs at least two cells");
        }
        let (lo, hi) = params.distractor;
        if lo > hi || hi > params.length {
            return bad("distractor_start", "distractor segment outside the corridor");
        }
        if params.start_span == 0 || params.start_span >= params.length {
            return bad("start_span", "start span must be in [1, length)");
        }
        for (k, v) in [
            ("distractor_reward", params.distractor_reward),
            ("goal_reward", params.goal_reward),
            ("step_penalty", params.step_penalty),
        ] {
            if !v.is_finite() {
                return bad(k, "must be finite");
            }
        }
        let p = 1.0 / params.start_span as f64;
        let starts = (0..params.start_span).map(|s| (s, p)).collect();
        let spec = EnvSpec {
            name: "corridor".into(),
            state_count: params.length + 1,
            action_count: 3,
            horizon,
            deterministic: params.start_span == 1,
            params: vec![
                ("length".into(), params.length.to_string()),
                ("distractor".into(), format!("{lo},{hi}")),
                ("distractor_reward".into(), params.distractor_reward.to_string()),
                ("goal_reward".into(), params.goal_reward.to_string()),
                ("step_penalty".into(), params.step_penalty.to_string()),
                ("start_span".into(), params.start_span.to_string()),
            ],
        };
        Ok(Self { params, spec, starts })
    }

    pub fn params(&self) -> &CorridorParams {
        &self.params
    }
}

impl FiniteMdp for Corridor {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn start_distribution(&self) -> &[(usize, f64)] {
        &self.starts
    }

    fn transition(&self, state: usize, action: usize) -> Transition {
        let p = &self.params;
        let goal = p.length - 1;
        if state >= goal {
            return Transition {
                next_state: self.absorbing_state(),
                reward: 0.0,
                done: true,
            };
        }
        let next = match action {
            LEFT => state.saturating_sub(1),
            RIGHT => state + 1,
            _ => state,
        };
        if next == goal {
            return Transition {
                next_state: self.absorbing_state(),
                reward: p.step_penalty + p.goal_reward,
                done: true,
            };
        }
        let idle = next == state;
        let mut reward = p.step_penalty;
        if idle && (p.distractor.0..p.distractor.1).contains(&state) {
            reward += p.distractor_reward;
        }
        Transition {
            next_state: next,
            reward,
            done: false,
        }
    }

    fn absorbing_state(&self) -> usize {
        self.params.length
    }

    fn noop_action(&self) -> usize {
        NOOP
    }

    fn coords(&self, state: usize) -> Option<Vec<i64>> {
        (state < self.params.length).then(|| vec![state as i64])
    }
}
