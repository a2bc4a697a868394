//! Exact finite-horizon value iteration.

use rand::RngCore;

use super::{FiniteMdp, Policy};

const TIE_EPS: f64 = 1e-9;

/// `Q_k(s, a)` for `k = 1..=horizon` steps to go; entry `k - 1` holds `Q_k`,
/// row-major `[state][action]`.
fn q_tables(env: &dyn FiniteMdp, horizon: usize) -> Vec<Vec<Vec<f64>>> {
    let spec = env.spec();
    let (ns, na) = (spec.state_count, spec.action_count);
    let mut values = vec![0.0; ns];
    let mut tables = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let q: Vec<Vec<f64>> = (0..ns)
            .map(|s| {
                (0..na)
                    .map(|a| {
                        let tr = env.transition(s, a);
                        tr.reward + if tr.done { 0.0 } else { values[tr.next_state] }
                    })
                    .collect()
            })
            .collect();
        for (v, row) in values.iter_mut().zip(&q) {
            *v = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        tables.push(q);
    }
    tables
}

/// `Q_T(s, a)` for `T = horizon` steps to go, row-major `[state][action]`.
pub fn optimal_q_values(env: &dyn FiniteMdp, horizon: usize) -> Vec<Vec<f64>> {
    let spec = env.spec();
    q_tables(env, horizon)
        .pop()
        .unwrap_or_else(|| vec![vec![0.0; spec.action_count]; spec.state_count])
}

/// Expected optimal return over the start distribution.
pub fn optimal_start_value(env: &dyn FiniteMdp) -> f64 {
    let q = optimal_q_values(env, env.spec().horizon);
    env.start_distribution()
        .iter()
        .map(|&(s, p)| p * q[s].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

/// The finite-horizon optimal policy: at step `t` it is greedy on
/// `Q_{T-t}`, ties broken toward the lowest action index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpertPolicy {
    /// `actions[t][s]`.
    actions: Vec<Vec<usize>>,
    noop: usize,
}

impl ExpertPolicy {
    /// The expert's action in `state` at step `t`; the no-op past the horizon.
    pub fn action(&self, state: usize, t: usize) -> usize {
        self.actions
            .get(t)
            .and_then(|row| row.get(state))
            .copied()
            .unwrap_or(self.noop)
    }
}

impl Policy for ExpertPolicy {
    fn act(&self, state: usize, t: usize, _rng: &mut dyn RngCore) -> usize {
        self.action(state, t)
    }
}

pub fn expert_policy(env: &dyn FiniteMdp) -> ExpertPolicy {
    let mut tables = q_tables(env, env.spec().horizon);
    tables.reverse();
    let actions = tables
        .iter()
        .map(|q| q.iter().map(|row| argmax_lowest(row)).collect())
        .collect();
    ExpertPolicy {
        actions,
        noop: env.noop_action(),
    }
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] + TIE_EPS {
            best = i;
        }
    }
    best
}
