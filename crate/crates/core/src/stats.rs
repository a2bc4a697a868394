use crate::error::{Error, Result};

/// Summary of `J` evaluation rollouts of one policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnStats {
    pub per_rollout: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl ReturnStats {
    pub fn from_returns(per_rollout: Vec<f64>) -> Result<Self> {
        if per_rollout.is_empty() {
            return Err(Error::config("n_rollouts", "need at least one rollout"));
        }
        let n = per_rollout.len() as f64;
        let mean = per_rollout.iter().sum::<f64>() / n;
        let var = per_rollout.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        Ok(Self {
            per_rollout,
            mean,
            std: var.sqrt(),
        })
    }

    pub fn rollouts(&self) -> usize {
        self.per_rollout.len()
    }
}
