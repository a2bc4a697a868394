//! Expert demonstrations as a fixed-shape grid of frames.

use crate::error::{Error, Result};

/// One frame: the state seen, the action taken and the reward received.
///
/// The reward is kept for audit; learners never read it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// `H` trajectories of exactly `T` frames each.
#[derive(Clone, Debug, PartialEq)]
pub struct DemoSet {
    env_name: String,
    frames: usize,
    action_count: usize,
    trajectories: Vec<Trajectory>,
}

impl DemoSet {
    pub fn new(
        env_name: impl Into<String>,
        frames: usize,
        action_count: usize,
        trajectories: Vec<Trajectory>,
    ) -> Result<Self> {
        let env_name = env_name.into();
        if !is_identifier(&env_name) {
            return Err(Error::Validation(format!(
                "environment name `{env_name}` is not an identifier"
            )));
        }
        if trajectories.is_empty() {
            return Err(Error::Validation("demo set has no trajectories".into()));
        }
        if action_count == 0 {
            return Err(Error::Validation("action count must be positive".into()));
        }
        for (i, traj) in trajectories.iter().enumerate() {
            if traj.len() != frames {
                return Err(Error::Validation(format!(
                    "trajectory {i} has {} steps, expected {frames}",
                    traj.len()
                )));
            }
            if let Some((t, step)) = traj
                .steps
                .iter()
                .enumerate()
                .find(|(_, s)| s.action >= action_count)
            {
                return Err(Error::Validation(format!(
                    "trajectory {i} step {t}: action {} >= action count {action_count}",
                    step.action
                )));
            }
        }
        Ok(Self {
            env_name,
            frames,
            action_count,
            trajectories,
        })
    }

    pub fn env_name(&self) -> &str {
        &self.env_name
    }

    /// `T`, frames per trajectory.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// `H`, number of trajectories.
    pub fn rows(&self) -> usize {
        self.trajectories.len()
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn step(&self, row: usize, frame: usize) -> &Step {
        &self.trajectories[row].steps[frame]
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}
