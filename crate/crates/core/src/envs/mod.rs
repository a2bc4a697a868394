//! Finite MDPs with planted structure, exact experts and the rollout harness.

pub mod corridor;
mod expert;
pub mod keydoor;
mod policy;
mod rollout;

use std::sync::Arc;

use rand::RngCore;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub use corridor::{Corridor, CorridorParams};
pub(crate) use expert::argmax_lowest;
pub use expert::{expert_policy, optimal_q_values, optimal_start_value, ExpertPolicy};
pub use keydoor::{KeyDoor, KeyDoorParams};
pub use policy::{ActionRule, Policy, TabularPolicy};
pub use rollout::{evaluate, gen_demos, rollout, Rollout};

/// Static description of an environment.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_count: usize,
    pub action_count: usize,
    pub horizon: usize,
    /// True when the start state is fixed; transitions are always deterministic.
    pub deterministic: bool,
    pub params: Vec<(String, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub next_state: usize,
    pub reward: f64,
    pub done: bool,
}

/// A finite MDP with deterministic transitions and a (possibly random) start.
///
/// Every environment has one absorbing state entered on termination and a
/// designated no-op action used to pad trajectories after termination.
pub trait FiniteMdp: Send + Sync {
    fn spec(&self) -> &EnvSpec;

    /// Start states with their probabilities.
    fn start_distribution(&self) -> &[(usize, f64)];

    fn transition(&self, state: usize, action: usize) -> Transition;

    fn absorbing_state(&self) -> usize;

    fn noop_action(&self) -> usize;

    /// Integer coordinates for nearest-state lookups; `None` for states
    /// without a position (the absorbing state).
    fn coords(&self, state: usize) -> Option<Vec<i64>>;

    fn sample_start(&self, rng: &mut dyn RngCore) -> usize {
        use rand::Rng;
        let starts = self.start_distribution();
        if starts.len() == 1 {
            return starts[0].0;
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(s, p) in starts {
            acc += p;
            if u < acc {
                return s;
            }
        }
        starts[starts.len() - 1].0
    }
}

/// A single-use episode over a shared environment.
pub struct Episode<'a> {
    env: &'a dyn FiniteMdp,
    state: usize,
    t: usize,
    done: bool,
}

impl<'a> Episode<'a> {
    pub fn start(env: &'a dyn FiniteMdp, rng: &mut dyn RngCore) -> Self {
        Self {
            state: env.sample_start(rng),
            env,
            t: 0,
            done: env.spec().horizon == 0,
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Elapsed steps.
    pub fn time(&self) -> usize {
        self.t
    }

    /// Applies `action` and returns `(next_state, reward, done)`.
    ///
    /// After termination the episode sits in the absorbing state and every
    /// step pays zero. `done` also becomes true once the horizon is reached.
    pub fn step(&mut self, action: usize) -> Result<(usize, f64, bool)> {
        let spec = self.env.spec();
        if action >= spec.action_count {
            return Err(Error::InvalidAction {
                state: self.state,
                action,
                action_count: spec.action_count,
            });
        }
        self.t += 1;
        if self.done {
            self.state = self.env.absorbing_state();
            return Ok((self.state, 0.0, true));
        }
        let tr = self.env.transition(self.state, action);
        self.state = tr.next_state;
        self.done = tr.done || self.t >= spec.horizon;
        Ok((self.state, tr.reward, self.done))
    }
}

/// Builds a named environment. `horizon` is the demo length `T`.
pub fn make_env(
    name: &str,
    params: &std::collections::BTreeMap<String, String>,
    horizon: usize,
) -> Result<Arc<dyn FiniteMdp>> {
    match name {
        "keydoor" => Ok(Arc::new(KeyDoor::new(
            KeyDoorParams::from_table(params)?,
            horizon,
        )?)),
        "corridor" => Ok(Arc::new(Corridor::new(
            CorridorParams::from_table(params)?,
            horizon,
        )?)),
        other => Err(Error::config(
            "env",
            format!("unknown environment `{other}` (expected keydoor or corridor)"),
        )),
    }
}

pub fn env_from_config(cfg: &RunConfig) -> Result<Arc<dyn FiniteMdp>> {
    make_env(&cfg.env, &cfg.env_params, cfg.frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn unknown_env_is_config_error() {
        let err = make_env("pong", &BTreeMap::new(), 10).err().unwrap();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "env"));
    }

    #[test]
    fn unknown_param_is_reported() {
        let mut p = BTreeMap::new();
        p.insert("colour".to_string(), "red".to_string());
        let err = make_env("keydoor", &p, 10).err().unwrap();
        assert!(matches!(err, Error::UnknownKey(ref k) if k == "env_params.colour"));
    }

    #[test]
    fn episode_pads_after_termination() {
        let env = make_env("corridor", &BTreeMap::new(), 15).unwrap();
        let mut rng = crate::seed::rng_from(1);
        let mut ep = Episode::start(env.as_ref(), &mut rng);
        for _ in 0..11 {
            ep.step(1).unwrap();
        }
        assert!(ep.is_done());
        let (s, r, done) = ep.step(0).unwrap();
        assert_eq!((s, r, done), (env.absorbing_state(), 0.0, true));
        assert!(ep.step(9).is_err());
    }
}
