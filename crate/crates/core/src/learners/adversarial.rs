//! Tabular adversarial imitation.
//!
//! The generator is a soft-Q policy over the environment's own transition
//! table. Each round it is rolled out, a logistic discriminator over one-hot
//! `(state, action)` features is fitted to separate expert occupancy from
//! generator occupancy, and soft value iteration is rerun on reward `ln D`.
//! The absorbing state is terminal: it has value zero and is left out of
//! the discriminator, so demonstrations that omit post-termination padding
//! still describe a task that ends.

use rand::{Rng, RngCore};

use crate::envs::{argmax_lowest, rollout, ActionRule, FiniteMdp, Policy, TabularPolicy};
use crate::error::Result;
use crate::seed::{derive_seed, rng_from};

use super::TrainingSet;

#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialParams {
    pub rounds: usize,
    /// Generator rollouts per round.
    pub gen_rollouts: usize,
    /// Discriminator gradient steps per round.
    pub disc_steps: usize,
    pub disc_lr: f64,
    pub l2: f64,
    pub discount: f64,
    /// Softmax temperature of the generator.
    pub temperature: f64,
    /// Soft value iteration sweeps per round.
    pub vi_iters: usize,
}

impl Default for AdversarialParams {
    fn default() -> Self {
        Self {
            rounds: 30,
            gen_rollouts: 30,
            disc_steps: 50,
            disc_lr: 0.5,
            l2: 0.01,
            discount: 0.95,
            temperature: 0.3,
            vi_iters: 100,
        }
    }
}

struct SoftmaxPolicy {
    probs: Vec<Vec<f64>>,
}

impl Policy for SoftmaxPolicy {
    fn act(&self, state: usize, _t: usize, rng: &mut dyn RngCore) -> usize {
        let row = &self.probs[state];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        row.len() - 1
    }
}

/// Returns the greedy policy and the generator's mean return per round.
pub(super) fn train(
    params: &AdversarialParams,
    data: &TrainingSet,
    env: &dyn FiniteMdp,
    seed: u64,
) -> Result<(TabularPolicy, Vec<f64>)> {
    let spec = env.spec();
    let (ns, na) = (spec.state_count, spec.action_count);
    let absorbing = env.absorbing_state();
    let next: Vec<Vec<usize>> = (0..ns)
        .map(|s| {
            (0..na)
                .map(|a| {
                    if s == absorbing {
                        absorbing
                    } else {
                        env.transition(s, a).next_state
                    }
                })
                .collect()
        })
        .collect();

    // Occupancies are scaled to visits per episode.
    let per_episode = spec.horizon.max(1) as f64;
    let counts = data.counts(ns, na);
    let expert_occ: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| c as f64 * per_episode / data.len() as f64)
                .collect()
        })
        .collect();

    let mut rng = rng_from(seed);
    let mut logits: Vec<Vec<f64>> = (0..ns)
        .map(|_| (0..na).map(|_| rng.gen_range(-0.01..=0.01)).collect())
        .collect();
    let mut q = vec![vec![0.0; na]; ns];
    let mut round_returns = Vec::with_capacity(params.rounds);

    for round in 0..params.rounds {
        let generator = SoftmaxPolicy {
            probs: q.iter().map(|row| softmax(row, params.temperature)).collect(),
        };
        let mut gen_occ = vec![vec![0.0; na]; ns];
        let weight = 1.0 / params.gen_rollouts as f64;
        let mut ret = 0.0;
        for j in 0..params.gen_rollouts {
            let r = rollout(
                env,
                &generator,
                derive_seed(seed, ((round as u64) << 32) | j as u64),
            )?;
            for step in r.trajectory.steps.iter().filter(|s| s.state != absorbing) {
                gen_occ[step.state][step.action] += weight;
            }
            ret += r.ret * weight;
        }
        round_returns.push(ret);

        for _ in 0..params.disc_steps {
            for s in (0..ns).filter(|&s| s != absorbing) {
                for a in 0..na {
                    let w = logits[s][a];
                    let d = sigmoid(w);
                    let g = -expert_occ[s][a] * (1.0 - d) + gen_occ[s][a] * d + params.l2 * w;
                    logits[s][a] = w - params.disc_lr * g;
                }
            }
        }

        let reward: Vec<Vec<f64>> = logits
            .iter()
            .map(|row| row.iter().map(|&w| log_sigmoid(w)).collect())
            .collect();
        let mut v = vec![0.0; ns];
        for _ in 0..params.vi_iters {
            for s in (0..ns).filter(|&s| s != absorbing) {
                for a in 0..na {
                    q[s][a] = reward[s][a] + params.discount * v[next[s][a]];
                }
            }
            for s in (0..ns).filter(|&s| s != absorbing) {
                v[s] = soft_max(&q[s], params.temperature);
            }
        }
    }

    let rules = q
        .iter()
        .map(|row| ActionRule::Fixed(argmax_lowest(row)))
        .collect();
    Ok((TabularPolicy::new(na, rules), round_returns))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln sigmoid(x)` without overflow.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// `τ · ln Σ exp(q / τ)`.
fn soft_max(q: &[f64], tau: f64) -> f64 {
    let m = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + tau * q.iter().map(|x| ((x - m) / tau).exp()).sum::<f64>().ln()
}

fn softmax(q: &[f64], tau: f64) -> Vec<f64> {
    let m = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = q.iter().map(|x| ((x - m) / tau).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}
