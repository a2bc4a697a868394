//! Behavioral cloning: majority vote and softmax regression.

use rand::Rng;

use crate::envs::{ActionRule, FiniteMdp, TabularPolicy};
use crate::seed::rng_from;

use super::{Fallback, TrainingSet};

/// Fixed training schedule for [`super::LearnerSpec::BcLinear`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinearParams {
    pub epochs: usize,
    /// Constant full-batch gradient step.
    pub learning_rate: f64,
    /// Initial weights are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1.0,
            init_scale: 0.01,
        }
    }
}

pub(super) fn train_tabular(data: &TrainingSet, env: &dyn FiniteMdp, fallback: Fallback) -> TabularPolicy {
    let spec = env.spec();
    let counts = data.counts(spec.state_count, spec.action_count);
    let majority: Vec<Option<usize>> = counts.iter().map(|row| majority_vote(row)).collect();

    let seen: Vec<(usize, Vec<i64>)> = match fallback {
        Fallback::Uniform => Vec::new(),
        Fallback::NearestSeen => majority
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_some())
            .filter_map(|(s, _)| env.coords(s).map(|c| (s, c)))
            .collect(),
    };

    let rules = majority
        .iter()
        .enumerate()
        .map(|(s, m)| match (m, fallback) {
            (Some(a), _) => ActionRule::Fixed(*a),
            (None, Fallback::Uniform) => ActionRule::Uniform,
            (None, Fallback::NearestSeen) => nearest(&seen, env.coords(s))
                .and_then(|n| majority[n])
                .map_or(ActionRule::Uniform, ActionRule::Fixed),
        })
        .collect();
    TabularPolicy::new(spec.action_count, rules)
}

/// Most frequent action, lowest index on ties; `None` if unseen.
fn majority_vote(counts: &[u32]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (a, &c) in counts.iter().enumerate() {
        if c > 0 && best.is_none_or(|b| c > counts[b]) {
            best = Some(a);
        }
    }
    best
}

fn nearest(seen: &[(usize, Vec<i64>)], coords: Option<Vec<i64>>) -> Option<usize> {
    let coords = coords?;
    seen.iter()
        .min_by_key(|(s, c)| {
            let d: i64 = c.iter().zip(&coords).map(|(x, y)| (x - y).abs()).sum();
            (d, *s)
        })
        .map(|(s, _)| *s)
}

pub(super) fn train_linear(
    params: &LinearParams,
    data: &TrainingSet,
    env: &dyn FiniteMdp,
    seed: u64,
) -> TabularPolicy {
    let spec = env.spec();
    let (ns, na) = (spec.state_count, spec.action_count);
    let counts = data.counts(ns, na);
    let total = data.len() as f64;

    let mut rng = rng_from(seed);
    let scale = params.init_scale;
    let mut init = |_| {
        if scale > 0.0 {
            rng.gen_range(-scale..=scale)
        } else {
            0.0
        }
    };
    let mut weights: Vec<Vec<f64>> = (0..ns).map(|_| (0..na).map(&mut init).collect()).collect();
    let mut bias: Vec<f64> = (0..na).map(&mut init).collect();

    let observed: Vec<usize> = (0..ns).filter(|&s| counts[s].iter().any(|&c| c > 0)).collect();
    let mut probs = vec![0.0; na];
    let mut grad_bias = vec![0.0; na];
    for _ in 0..params.epochs {
        grad_bias.iter_mut().for_each(|g| *g = 0.0);
        for &s in &observed {
            softmax_into(&weights[s], &bias, &mut probs);
            let n_s: f64 = counts[s].iter().map(|&c| c as f64).sum();
            for a in 0..na {
                let g = (n_s * probs[a] - counts[s][a] as f64) / total;
                weights[s][a] -= params.learning_rate * g;
                grad_bias[a] += g;
            }
        }
        for (b, g) in bias.iter_mut().zip(&grad_bias) {
            *b -= params.learning_rate * g;
        }
    }

    let rules = weights
        .iter()
        .map(|w| {
            let logits: Vec<f64> = w.iter().zip(&bias).map(|(w, b)| w + b).collect();
            ActionRule::Fixed(crate::envs::argmax_lowest(&logits))
        })
        .collect();
    TabularPolicy::new(na, rules)
}

fn softmax_into(w: &[f64], b: &[f64], out: &mut [f64]) {
    let max = w
        .iter()
        .zip(b)
        .map(|(w, b)| w + b)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for ((o, w), b) in out.iter_mut().zip(w).zip(b) {
        *o = (w + b - max).exp();
        z += *o;
    }
    out.iter_mut().for_each(|o| *o /= z);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_env, Policy};
    use crate::learners::{train, LearnerSpec, TrainingPair};
    use std::collections::BTreeMap;

    fn set(items: &[(usize, usize)]) -> TrainingSet {
        TrainingSet {
            pairs: items
                .iter()
                .enumerate()
                .map(|(i, &(state, action))| TrainingPair {
                    state,
                    action,
                    row: 0,
                    frame: i,
                })
                .collect(),
        }
    }

    fn keydoor() -> std::sync::Arc<dyn FiniteMdp> {
        make_env("keydoor", &BTreeMap::new(), 20).unwrap()
    }

    #[test]
    fn majority_vote_with_ties() {
        assert_eq!(majority_vote(&[1, 2, 0]), Some(1));
        assert_eq!(majority_vote(&[2, 2, 1]), Some(0));
        assert_eq!(majority_vote(&[0, 0, 0]), None);
    }

    #[test]
    fn tabular_majority_and_uniform_fallback() {
        let env = keydoor();
        let p = train_tabular(&set(&[(3, 1), (3, 1), (3, 0)]), env.as_ref(), Fallback::Uniform);
        let mut rng = crate::seed::rng_from(0);
        assert_eq!(p.act(3, 0, &mut rng), 1);
        assert_eq!(p.rule(4), ActionRule::Uniform);
    }

    #[test]
    fn nearest_seen_copies_closest_state() {
        let env = keydoor();
        // state 0 = (0,0) no key -> action 1; state 24 = (4,4) no key -> action 3
        let p = train_tabular(&set(&[(0, 1), (24, 3)]), env.as_ref(), Fallback::NearestSeen);
        assert_eq!(p.rule(1), ActionRule::Fixed(1)); // (0,1)
        assert_eq!(p.rule(23), ActionRule::Fixed(3)); // (4,3)
        assert_eq!(p.rule(12), ActionRule::Fixed(1)); // (2,2): tie, lower state id wins
        assert_eq!(p.rule(50), ActionRule::Uniform); // absorbing has no coordinates
    }

    /// With one-hot features a set is linearly separable iff no state carries
    /// two different labels.
    fn separable(data: &TrainingSet) -> bool {
        let mut label: BTreeMap<usize, usize> = BTreeMap::new();
        data.pairs
            .iter()
            .all(|p| *label.entry(p.state).or_insert(p.action) == p.action)
    }

    #[test]
    fn linear_fits_separable_two_state_set() {
        let env = keydoor();
        let data = set(&[(5, 1), (5, 1), (5, 1), (5, 1), (9, 3)]);
        assert!(separable(&data));
        let out = train(&LearnerSpec::bc_linear(), &data, env.as_ref(), 11).unwrap();
        let mut rng = crate::seed::rng_from(0);
        let correct = data
            .pairs
            .iter()
            .filter(|p| out.policy.act(p.state, 0, &mut rng) == p.action)
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn linear_is_deterministic_per_seed() {
        let env = keydoor();
        let data = set(&[(5, 1), (6, 3), (7, 0)]);
        let a = train(&LearnerSpec::bc_linear(), &data, env.as_ref(), 4).unwrap();
        let b = train(&LearnerSpec::bc_linear(), &data, env.as_ref(), 4).unwrap();
        assert_eq!(a, b);
    }
}
