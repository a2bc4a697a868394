//! The retrain-and-evaluate loop.
//!
//! For each mask `m_i`: train a fresh learner on `D ⊙ m_i`, evaluate it for
//! `J` rollouts to get `R̄_i`, and add `R̄_i · m_i` to the map. The final map is
//! divided by `E[M] · N`.
//!
//! Mask jobs run on a bounded rayon pool. Each job's seed is derived from the
//! master seed and the mask index only, and contributions are summed in
//! ascending mask order after all jobs finish, so the result is bit-identical
//! for any worker count.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::demo::DemoSet;
use crate::envs::{env_from_config, evaluate, expert_policy, gen_demos, FiniteMdp};
use crate::error::{Error, Result};
use crate::grid::{GridGeometry, MaskGrid};
use crate::learners::{train, LearnerSpec};
use crate::map::ImportanceMap;
use crate::masking::{apply_mask, gen_masks, probe_geometry, segment_probe_masks};
use crate::seed::{derive_seed, stream};
use crate::stats::ReturnStats;

/// A validated configuration bound to its environment, learner and demos.
#[derive(Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub env: Arc<dyn FiniteMdp>,
    pub learner: LearnerSpec,
    pub demos: DemoSet,
    pub geometry: GridGeometry,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment")
            .field("config", &self.config)
            .field("env", self.env.spec())
            .field("learner", &self.learner)
            .field("geometry", &self.geometry)
            .finish_non_exhaustive()
    }
}

impl Experiment {
    /// Validates `config` and generates expert demos from its seed.
    pub fn from_config(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let env = env_from_config(&config)?;
        let demos = gen_demos(env.as_ref(), config.rows, derive_seed(config.seed, stream::DEMOS))?;
        Self::assemble(config, env, demos)
    }

    /// Validates `config` against externally supplied demos.
    pub fn with_demos(config: RunConfig, demos: DemoSet) -> Result<Self> {
        config.validate()?;
        let env = env_from_config(&config)?;
        Self::assemble(config, env, demos)
    }

    fn assemble(config: RunConfig, env: Arc<dyn FiniteMdp>, demos: DemoSet) -> Result<Self> {
        let spec = env.spec();
        if demos.env_name() != spec.name {
            return Err(Error::Validation(format!(
                "demos were recorded in `{}` but the run uses `{}`",
                demos.env_name(),
                spec.name
            )));
        }
        if demos.rows() != config.rows || demos.frames() != config.frames {
            return Err(Error::Validation(format!(
                "demos are {}x{} but the config asks for H={} T={}",
                demos.rows(),
                demos.frames(),
                config.rows,
                config.frames
            )));
        }
        if demos.action_count() != spec.action_count {
            return Err(Error::Validation(format!(
                "demos have {} actions, {} has {}",
                demos.action_count(),
                spec.name,
                spec.action_count
            )));
        }
        for (h, traj) in demos.trajectories().iter().enumerate() {
            if let Some(t) = traj.steps.iter().position(|s| s.state >= spec.state_count) {
                return Err(Error::Validation(format!(
                    "trajectory {h} step {t}: state out of range for {}",
                    spec.name
                )));
            }
        }
        let learner = LearnerSpec::from_config(&config, env.as_ref())?;
        let geometry = config.geometry()?;
        Ok(Self {
            config,
            env,
            learner,
            demos,
            geometry,
        })
    }

    pub fn with_learner(&self, learner: LearnerSpec) -> Self {
        let mut exp = self.clone();
        exp.config.learner = learner.name().to_string();
        exp.learner = learner;
        exp
    }

    /// The expert's evaluation over `J` rollouts.
    pub fn expert_stats(&self) -> Result<ReturnStats> {
        let expert = expert_policy(self.env.as_ref());
        evaluate(
            self.env.as_ref(),
            &expert,
            self.config.n_rollouts,
            self.config.seed,
        )
    }

    /// Trains the configured learner on `D ⊙ mask` and evaluates it.
    ///
    /// Training uses `derive_seed(job_seed, 0)`, evaluation `derive_seed(job_seed, 1)`.
    pub fn retrain_and_evaluate(
        &self,
        mask: &MaskGrid,
        geom: &GridGeometry,
        job_seed: u64,
    ) -> Result<MaskOutcome> {
        let data = apply_mask(&self.demos, mask, geom)?;
        let trained = train(&self.learner, &data, self.env.as_ref(), derive_seed(job_seed, 0))?;
        let stats = evaluate(
            self.env.as_ref(),
            &trained.policy,
            self.config.n_rollouts,
            derive_seed(job_seed, 1),
        )?;
        Ok(MaskOutcome {
            stats,
            empty_trainset: data.is_empty(),
            kept_pairs: data.len(),
            round_returns: trained.round_returns,
        })
    }

    /// Runs `job(i)` for `i in 0..n` on the configured worker pool, in index order.
    pub fn par_jobs<T, F>(&self, n: usize, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers.max(1))
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?;
        pool.install(|| (0..n).into_par_iter().map(&job).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskOutcome {
    pub stats: ReturnStats,
    pub empty_trainset: bool,
    pub kept_pairs: usize,
    pub round_returns: Vec<f64>,
}

/// One retrain-and-evaluate iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLogRecord {
    pub mask_index: usize,
    pub derived_seed: u64,
    pub masked_cell_count: usize,
    pub mean_return: f64,
    pub std_return: f64,
    pub empty_trainset: bool,
    /// Not covered by determinism guarantees.
    pub wall_time: Duration,
    pub mask: MaskGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub learner: String,
    pub keep_fraction: f64,
    pub records: Vec<RunLogRecord>,
}

impl RunLog {
    /// Per-cell count of masks that observed the cell.
    pub fn observation_counts(&self) -> Vec<usize> {
        let cells = self.records.first().map_or(0, |r| r.mask.cells().len());
        let mut counts = vec![0; cells];
        for r in &self.records {
            for (c, &kept) in counts.iter_mut().zip(r.mask.cells()) {
                *c += usize::from(kept);
            }
        }
        counts
    }
}

/// Random masks at the configured degradation level, then [`run_with_masks`].
pub fn run(exp: &Experiment) -> Result<(ImportanceMap, RunLog)> {
    let cfg = &exp.config;
    let masks = gen_masks(
        &exp.geometry,
        cfg.level,
        cfg.n_masks,
        derive_seed(cfg.seed, stream::MASKS),
    )?;
    run_with_masks(exp, &masks)
}

/// The estimator over an explicit mask list. `E[M]` is the mean keep fraction.
pub fn run_with_masks(exp: &Experiment, masks: &[MaskGrid]) -> Result<(ImportanceMap, RunLog)> {
    if masks.is_empty() {
        return Err(Error::config("n_masks", "must be at least 1"));
    }
    let geom = exp.geometry;
    if let Some(m) = masks.iter().find(|m| !m.matches(&geom)) {
        return Err(Error::Contract(format!(
            "mask {}x{} does not match grid {}x{}",
            m.rows(),
            m.cols(),
            geom.rows(),
            geom.snippets()
        )));
    }
    let jobs_root = derive_seed(exp.config.seed, stream::JOBS);
    let records = exp.par_jobs(masks.len(), |i| {
        let started = Instant::now();
        let seed = derive_seed(jobs_root, i as u64);
        let outcome = exp.retrain_and_evaluate(&masks[i], &geom, seed)?;
        Ok(RunLogRecord {
            mask_index: i,
            derived_seed: seed,
            masked_cell_count: masks[i].masked_count(),
            mean_return: outcome.stats.mean,
            std_return: outcome.stats.std,
            empty_trainset: outcome.empty_trainset,
            wall_time: started.elapsed(),
            mask: masks[i].clone(),
        })
    })?;

    let mut sums = vec![0.0; geom.cell_count()];
    for r in &records {
        for (s, &kept) in sums.iter_mut().zip(r.mask.cells()) {
            if kept {
                *s += r.mean_return;
            }
        }
    }
    let keep_fraction = masks.iter().map(MaskGrid::keep_fraction).sum::<f64>() / masks.len() as f64;
    let map = ImportanceMap::from_sums(geom.rows(), geom.snippets(), sums, masks.len(), keep_fraction)?
        .with_provenance(format!(
            "{}:{}:level={}:n_masks={}:seed={}",
            exp.config.env,
            exp.learner.name(),
            exp.config.level,
            masks.len(),
            exp.config.seed
        ));
    let log = RunLog {
        learner: exp.learner.describe(),
        keep_fraction,
        records,
    };
    Ok((map, log))
}

/// Cell-wise mean of the normalized fields.
pub fn combine_maps(maps: &[ImportanceMap]) -> Result<ImportanceMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::Contract("nothing to combine".into()))?;
    if let Some(m) = maps.iter().find(|m| !m.same_shape(first)) {
        return Err(Error::Contract(format!(
            "cannot combine {}x{} with {}x{}",
            first.rows(),
            first.cols(),
            m.rows(),
            m.cols()
        )));
    }
    let n = maps.len() as f64;
    let mean = (0..first.values().len())
        .map(|i| maps.iter().map(|m| m.values()[i]).sum::<f64>() / n)
        .collect();
    let mut out = ImportanceMap::from_values(first.rows(), first.cols(), mean)?;
    for (i, m) in maps.iter().enumerate() {
        if m.provenance().is_empty() {
            out = out.with_provenance(format!("input{i}"));
        }
        for p in m.provenance() {
            out = out.with_provenance(p.clone());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub mask: MaskGrid,
    pub stats: ReturnStats,
    pub empty_trainset: bool,
}

/// Retrains on `n` Bernoulli ten-segment masks and reports each policy's returns.
pub fn variance_probe(exp: &Experiment, n: usize) -> Result<Vec<ProbeResult>> {
    let geom = probe_geometry(exp.config.rows, exp.config.frames)?;
    let root = derive_seed(exp.config.seed, stream::PROBE);
    let masks = segment_probe_masks(&geom, n, derive_seed(root, 0))?;
    let jobs_root = derive_seed(root, 1);
    exp.par_jobs(n, |i| {
        let outcome = exp.retrain_and_evaluate(&masks[i], &geom, derive_seed(jobs_root, i as u64))?;
        Ok(ProbeResult {
            mask: masks[i].clone(),
            stats: outcome.stats,
            empty_trainset: outcome.empty_trainset,
        })
    })
}
