use rand::{Rng, RngCore};

/// A behavior handle: picks an action for a state at time step `t`.
pub trait Policy: Send + Sync {
    fn act(&self, state: usize, t: usize, rng: &mut dyn RngCore) -> usize;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionRule {
    Fixed(usize),
    /// Uniformly random action.
    Uniform,
}

/// One rule per state. States beyond the table act uniformly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TabularPolicy {
    action_count: usize,
    rules: Vec<ActionRule>,
}

impl TabularPolicy {
    pub fn new(action_count: usize, rules: Vec<ActionRule>) -> Self {
        Self { action_count, rules }
    }

    pub fn uniform(state_count: usize, action_count: usize) -> Self {
        Self::new(action_count, vec![ActionRule::Uniform; state_count])
    }

    pub fn constant(state_count: usize, action_count: usize, action: usize) -> Self {
        Self::new(action_count, vec![ActionRule::Fixed(action); state_count])
    }

    pub fn rule(&self, state: usize) -> ActionRule {
        self.rules.get(state).copied().unwrap_or(ActionRule::Uniform)
    }

    pub fn rules(&self) -> &[ActionRule] {
        &self.rules
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }
}

impl Policy for TabularPolicy {
    fn act(&self, state: usize, _t: usize, rng: &mut dyn RngCore) -> usize {
        match self.rule(state) {
            ActionRule::Fixed(a) => a,
            ActionRule::Uniform => rng.gen_range(0..self.action_count),
        }
    }
}

impl<F> Policy for F
where
    F: Fn(usize) -> usize + Send + Sync,
{
    fn act(&self, state: usize, _t: usize, _rng: &mut dyn RngCore) -> usize {
        self(state)
    }
}
