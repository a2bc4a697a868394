//! Rollouts, evaluation and demonstration generation.

use crate::demo::{DemoSet, Step, Trajectory};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from};
use crate::stats::ReturnStats;

use super::{expert_policy, Episode, FiniteMdp, Policy};

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub trajectory: Trajectory,
    /// Sum of per-step rewards over the horizon.
    pub ret: f64,
}

/// Runs one episode of exactly `horizon` frames.
///
/// Frames after termination are `(absorbing, no-op, 0)`; the policy is not
/// consulted for them.
pub fn rollout(env: &dyn FiniteMdp, policy: &dyn Policy, seed: u64) -> Result<Rollout> {
    let mut rng = rng_from(seed);
    let horizon = env.spec().horizon;
    let mut ep = Episode::start(env, &mut rng);
    let mut steps = Vec::with_capacity(horizon);
    let mut terminated = false;
    let mut ret = 0.0;
    for t in 0..horizon {
        let state = ep.state();
        let action = if terminated {
            env.noop_action()
        } else {
            policy.act(state, t, &mut rng)
        };
        let (_, reward, done) = ep.step(action)?;
        steps.push(Step {
            state,
            action,
            reward,
        });
        ret += reward;
        terminated |= done;
    }
    Ok(Rollout {
        trajectory: Trajectory { steps },
        ret,
    })
}

/// `J` rollouts with seeds `derive_seed(seed, j)`.
pub fn evaluate(env: &dyn FiniteMdp, policy: &dyn Policy, rollouts: usize, seed: u64) -> Result<ReturnStats> {
    if rollouts == 0 {
        return Err(Error::config("n_rollouts", "must be at least 1"));
    }
    let returns = (0..rollouts)
        .map(|j| rollout(env, policy, derive_seed(seed, j as u64)).map(|r| r.ret))
        .collect::<Result<Vec<_>>>()?;
    ReturnStats::from_returns(returns)
}

/// `H` expert trajectories with seeds `derive_seed(seed, h)`.
pub fn gen_demos(env: &dyn FiniteMdp, rows: usize, seed: u64) -> Result<DemoSet> {
    if rows == 0 {
        return Err(Error::config("H", "must be at least 1"));
    }
    let expert = expert_policy(env);
    let trajectories = (0..rows)
        .map(|h| rollout(env, &expert, derive_seed(seed, h as u64)).map(|r| r.trajectory))
        .collect::<Result<Vec<_>>>()?;
    let spec = env.spec();
    DemoSet::new(&spec.name, spec.horizon, spec.action_count, trajectories)
}
