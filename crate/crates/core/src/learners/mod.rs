//! Black-box imitation learners: demonstrations in, policy out.

mod adversarial;
mod bc;

use std::fmt;
use std::str::FromStr;

use crate::config::{Params, RunConfig};
use crate::envs::{FiniteMdp, TabularPolicy};
use crate::error::{Error, Result};

pub use adversarial::AdversarialParams;
pub use bc::LinearParams;

/// A `(state, action)` pair kept after masking, with its source frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainingPair {
    pub state: usize,
    pub action: usize,
    pub row: usize,
    pub frame: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainingSet {
    pub pairs: Vec<TrainingPair>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `counts[state][action]`.
    pub(crate) fn counts(&self, state_count: usize, action_count: usize) -> Vec<Vec<u32>> {
        let mut counts = vec![vec![0u32; action_count]; state_count];
        for p in &self.pairs {
            counts[p.state][p.action] += 1;
        }
        counts
    }
}

/// What an unseen state does under a tabular behavior-cloning policy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fallback {
    #[default]
    Uniform,
    /// Copy the action of the closest seen state (L1 over env coordinates).
    NearestSeen,
}

impl FromStr for Fallback {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Fallback::Uniform),
            "nearest" | "nearest_seen" => Ok(Fallback::NearestSeen),
            other => Err(format!("unknown fallback `{other}` (uniform or nearest)")),
        }
    }
}

impl fmt::Display for Fallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fallback::Uniform => "uniform",
            Fallback::NearestSeen => "nearest",
        })
    }
}

/// Learner choice and its fixed hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub enum LearnerSpec {
    /// Majority action per observed state.
    BcTabular { fallback: Fallback },
    /// Softmax regression on one-hot state features.
    BcLinear(LinearParams),
    /// Tabular generator/discriminator imitation.
    AdvIl(AdversarialParams),
    /// Ignores its data and always plays one action.
    StubConstant { action: usize },
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::BcTabular { .. } => "bc_tabular",
            LearnerSpec::BcLinear(_) => "bc_linear",
            LearnerSpec::AdvIl(_) => "adv_il",
            LearnerSpec::StubConstant { .. } => "stub_constant",
        }
    }

    pub fn bc_tabular() -> Self {
        LearnerSpec::BcTabular {
            fallback: Fallback::Uniform,
        }
    }

    pub fn bc_linear() -> Self {
        LearnerSpec::BcLinear(LinearParams::default())
    }

    pub fn adv_il() -> Self {
        LearnerSpec::AdvIl(AdversarialParams::default())
    }

    /// Builds the learner named in `cfg`; `env` resolves `stub_constant` returns.
    pub fn from_config(cfg: &RunConfig, env: &dyn FiniteMdp) -> Result<Self> {
        let mut p = Params::new("learner_params", &cfg.learner_params);
        let spec = match cfg.learner.as_str() {
            "bc_tabular" => LearnerSpec::BcTabular {
                fallback: p.get("fallback", Fallback::Uniform)?,
            },
            "bc_linear" => {
                let d = LinearParams::default();
                LearnerSpec::BcLinear(LinearParams {
                    epochs: p.get("epochs", d.epochs)?,
                    learning_rate: p.get("learning_rate", d.learning_rate)?,
                    init_scale: p.get("init_scale", d.init_scale)?,
                })
            }
            "adv_il" => {
                let d = AdversarialParams::default();
                LearnerSpec::AdvIl(AdversarialParams {
                    rounds: p.get("rounds", d.rounds)?,
                    gen_rollouts: p.get("gen_rollouts", d.gen_rollouts)?,
                    disc_steps: p.get("disc_steps", d.disc_steps)?,
                    disc_lr: p.get("disc_lr", d.disc_lr)?,
                    l2: p.get("l2", d.l2)?,
                    discount: p.get("discount", d.discount)?,
                    temperature: p.get("temperature", d.temperature)?,
                    vi_iters: p.get("vi_iters", d.vi_iters)?,
                })
            }
            "stub_constant" => {
                let action: Option<usize> = p.get_opt("action")?;
                let ret: Option<f64> = p.get_opt("return")?;
                match (action, ret) {
                    (Some(action), _) => LearnerSpec::StubConstant { action },
                    (None, Some(ret)) => make_stub_constant(env, ret)?,
                    (None, None) => {
                        return Err(Error::config(
                            "learner_params.return",
                            "stub_constant needs learner_params.return or learner_params.action",
                        ))
                    }
                }
            }
            other => {
                return Err(Error::config(
                    "learner",
                    format!("unknown learner `{other}` (bc_tabular, bc_linear, adv_il, stub_constant)"),
                ))
            }
        };
        p.finish()?;
        spec.check(env)?;
        Ok(spec)
    }

    fn check(&self, env: &dyn FiniteMdp) -> Result<()> {
        let bad = |k: &str, m: &str| Err(Error::config(format!("learner_params.{k}"), m));
        match self {
            LearnerSpec::BcTabular { .. } => Ok(()),
            LearnerSpec::BcLinear(p) => {
                if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
                    return bad("learning_rate", "must be positive");
                }
                if !(p.init_scale.is_finite() && p.init_scale >= 0.0) {
                    return bad("init_scale", "must be non-negative");
                }
                Ok(())
            }
            LearnerSpec::AdvIl(p) => {
                if p.gen_rollouts == 0 {
                    return bad("gen_rollouts", "must be at least 1");
                }
                if !(0.0..1.0).contains(&p.discount) {
                    return bad("discount", "must be in [0, 1)");
                }
                if !(p.temperature.is_finite() && p.temperature > 0.0) {
                    return bad("temperature", "must be positive");
                }
                if !(p.disc_lr.is_finite() && p.disc_lr > 0.0 && p.l2.is_finite() && p.l2 >= 0.0) {
                    return bad(
                        "disc_lr",
                        "discriminator step and l2 must be finite and non-negative",
                    );
                }
                Ok(())
            }
            LearnerSpec::StubConstant { action } => {
                if *action >= env.spec().action_count {
                    return bad("action", "action out of range for the environment");
                }
                Ok(())
            }
        }
    }

    /// Hyperparameters as one line for run logs.
    pub fn describe(&self) -> String {
        match self {
            LearnerSpec::BcTabular { fallback } => format!("bc_tabular(fallback={fallback})"),
            LearnerSpec::BcLinear(p) => format!(
                "bc_linear(epochs={},learning_rate={},init_scale={})",
                p.epochs, p.learning_rate, p.init_scale
            ),
            LearnerSpec::AdvIl(p) => format!(
                "adv_il(rounds={},gen_rollouts={},disc_steps={},disc_lr={},l2={},discount={},temperature={},vi_iters={})",
                p.rounds, p.gen_rollouts, p.disc_steps, p.disc_lr, p.l2, p.discount, p.temperature, p.vi_iters
            ),
            LearnerSpec::StubConstant { action } => format!("stub_constant(action={action})"),
        }
    }
}

/// Output of one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub policy: TabularPolicy,
    /// Training set was empty and the uniform fallback policy was returned.
    pub used_fallback: bool,
    /// Mean environment return of the generator per adversarial round.
    /// Logged only; never fed back into training.
    pub round_returns: Vec<f64>,
}

/// Trains a fresh model. Pure in `(spec, data, env, seed)`.
pub fn train(spec: &LearnerSpec, data: &TrainingSet, env: &dyn FiniteMdp, seed: u64) -> Result<TrainOutcome> {
    let es = env.spec();
    if let Some(p) = data
        .pairs
        .iter()
        .find(|p| p.state >= es.state_count || p.action >= es.action_count)
    {
        return Err(Error::Contract(format!(
            "training pair (state {}, action {}) outside {} ({} states, {} actions)",
            p.state, p.action, es.name, es.state_count, es.action_count
        )));
    }
    if let LearnerSpec::StubConstant { action } = spec {
        return Ok(TrainOutcome {
            policy: TabularPolicy::constant(es.state_count, es.action_count, *action),
            used_fallback: false,
            round_returns: Vec::new(),
        });
    }
    if data.is_empty() {
        return Ok(TrainOutcome {
            policy: TabularPolicy::uniform(es.state_count, es.action_count),
            used_fallback: true,
            round_returns: Vec::new(),
        });
    }
    Ok(match spec {
        LearnerSpec::BcTabular { fallback } => plain(bc::train_tabular(data, env, *fallback)),
        LearnerSpec::BcLinear(p) => plain(bc::train_linear(p, data, env, seed)),
        LearnerSpec::AdvIl(p) => {
            let (policy, round_returns) = adversarial::train(p, data, env, seed)?;
            TrainOutcome {
                policy,
                used_fallback: false,
                round_returns,
            }
        }
        LearnerSpec::StubConstant { .. } => unreachable!(),
    })
}

fn plain(policy: TabularPolicy) -> TrainOutcome {
    TrainOutcome {
        policy,
        used_fallback: false,
        round_returns: Vec::new(),
    }
}

/// A stub learner whose fixed policy has expected return `target` in `env`.
///
/// Searches constant-action policies: the no-op first, then by action index.
pub fn make_stub_constant(env: &dyn FiniteMdp, target: f64) -> Result<LearnerSpec> {
    let es = env.spec();
    let noop = env.noop_action();
    std::iter::once(noop)
        .chain((0..es.action_count).filter(|&a| a != noop))
        .find(|&a| {
            let policy = TabularPolicy::constant(es.state_count, es.action_count, a);
            let ret = exact_expected_return(env, &policy);
            (ret - target).abs() <= 1e-9 * target.abs().max(1.0)
        })
        .map(|action| LearnerSpec::StubConstant { action })
        .ok_or_else(|| {
            Error::config(
                "learner_params.return",
                format!("no constant-action policy in {} returns {target}", es.name),
            )
        })
}

/// Expected return of a deterministic tabular policy over the start distribution.
pub(crate) fn exact_expected_return(env: &dyn FiniteMdp, policy: &TabularPolicy) -> f64 {
    use crate::envs::ActionRule;
    env.start_distribution()
        .iter()
        .map(|&(start, prob)| {
            let mut s = start;
            let mut ret = 0.0;
            for _ in 0..env.spec().horizon {
                let ActionRule::Fixed(a) = policy.rule(s) else {
                    return f64::NAN;
                };
                let tr = env.transition(s, a);
                ret += tr.reward;
                s = tr.next_state;
                if tr.done {
                    break;
                }
            }
            prob * ret
        })
        .sum()
}
