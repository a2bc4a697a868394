//! Run configuration: `key=value` lines plus `--set` overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::GridGeometry;

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub env_params: BTreeMap<String, String>,
    pub learner: String,
    pub learner_params: BTreeMap<String, String>,
    /// `H`, trajectories in the demo set.
    pub rows: usize,
    /// `T`, frames per trajectory and the environment horizon.
    pub frames: usize,
    /// `G`, snippets per trajectory.
    pub snippets: usize,
    /// Percentage of grid cells masked per random mask.
    pub level: f64,
    pub n_masks: usize,
    pub n_rollouts: usize,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: "keydoor".into(),
            env_params: BTreeMap::new(),
            learner: "bc_tabular".into(),
            learner_params: BTreeMap::new(),
            rows: 20,
            frames: 20,
            snippets: 5,
            level: 50.0,
            n_masks: 100,
            n_rollouts: 20,
            seed: 0,
            workers: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Parses `key=value` lines on top of the defaults. `#` starts a comment.
    ///
    /// Does not validate cross-field constraints; see [`RunConfig::validate`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key=value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::UnknownKey(format!("{assignment} (expected key=value)")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "env" => self.env = value.to_string(),
            "learner" => self.learner = value.to_string(),
            "H" => self.rows = parse_num(key, value)?,
            "T" => self.frames = parse_num(key, value)?,
            "G" => self.snippets = parse_num(key, value)?,
            "level" => self.level = parse_num(key, value)?,
            "n_masks" => self.n_masks = parse_num(key, value)?,
            "n_rollouts" => self.n_rollouts = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => {
                if let Some(p) = key.strip_prefix("env_params.").filter(|p| !p.is_empty()) {
                    self.env_params.insert(p.to_string(), value.to_string());
                } else if let Some(p) = key.strip_prefix("learner_params.").filter(|p| !p.is_empty()) {
                    self.learner_params.insert(p.to_string(), value.to_string());
                } else {
                    return Err(Error::UnknownKey(key.to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<GridGeometry> {
        GridGeometry::new(self.rows, self.frames, self.snippets)
    }

    /// `p = 1 - level / 100`.
    pub fn keep_fraction(&self) -> f64 {
        1.0 - self.level / 100.0
    }

    /// Masked cells per random mask, `round(level/100 · H·G)`.
    pub fn masked_cells(&self) -> usize {
        masked_cells_for(self.level, self.rows * self.snippets)
    }

    pub fn validate(&self) -> Result<()> {
        let geom = self.geometry()?;
        if self.frames == 0 {
            return Err(Error::config("T", "must be at least 1"));
        }
        if !(self.level.is_finite() && (0.0..100.0).contains(&self.level)) {
            if self.level >= 100.0 {
                return Err(Error::config("level", "level leaves zero kept cells"));
            }
            return Err(Error::config("level", "must be a percentage in [0, 100)"));
        }
        if self.masked_cells() >= geom.cell_count() {
            return Err(Error::config("level", "level leaves zero kept cells"));
        }
        if self.n_masks == 0 {
            return Err(Error::config("n_masks", "must be at least 1"));
        }
        if self.n_rollouts == 0 {
            return Err(Error::config("n_rollouts", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        Ok(())
    }

    /// Canonical `key=value` rendering, suitable for [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: &dyn std::fmt::Display| out.push_str(&format!("{k}={v}\n"));
        push("env", &self.env);
        push("learner", &self.learner);
        push("H", &self.rows);
        push("T", &self.frames);
        push("G", &self.snippets);
        push("level", &self.level);
        push("n_masks", &self.n_masks);
        push("n_rollouts", &self.n_rollouts);
        push("seed", &self.seed);
        push("workers", &self.workers);
        push("out_dir", &self.out_dir.display());
        for (k, v) in &self.env_params {
            out.push_str(&format!("env_params.{k}={v}\n"));
        }
        for (k, v) in &self.learner_params {
            out.push_str(&format!("learner_params.{k}={v}\n"));
        }
        out
    }
}

pub(crate) fn masked_cells_for(level: f64, cells: usize) -> usize {
    ((level / 100.0) * cells as f64).round() as usize
}

pub(crate) fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("`{value}`: {e}")))
}

/// Typed lookup into a parameter table, tracking which keys were consumed.
pub(crate) struct Params<'a> {
    prefix: &'static str,
    table: &'a BTreeMap<String, String>,
    used: Vec<&'a str>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(prefix: &'static str, table: &'a BTreeMap<String, String>) -> Self {
        Self {
            prefix,
            table,
            used: Vec::new(),
        }
    }

    pub(crate) fn get<T: std::str::FromStr>(&mut self, name: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.table.get_key_value(name) {
            Some((k, v)) => {
                self.used.push(k.as_str());
                parse_num(&format!("{}.{name}", self.prefix), v)
            }
            None => Ok(default),
        }
    }

    pub(crate) fn get_opt<T: std::str::FromStr>(&mut self, name: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.table.get_key_value(name) {
            Some((k, v)) => {
                self.used.push(k.as_str());
                parse_num(&format!("{}.{name}", self.prefix), v).map(Some)
            }
            None => Ok(None),
        }
    }

    /// Errors on the first key nobody asked for.
    pub(crate) fn finish(self) -> Result<()> {
        match self.table.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(k) => Err(Error::UnknownKey(format!("{}.{k}", self.prefix))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_comments_and_overrides() {
        let mut cfg = RunConfig::parse(
            "# keydoor run\nenv = corridor\nH=4\nT=12 # frames\nG=3\nlevel=30\nenv_params.length=12\n\n",
        )
        .unwrap();
        assert_eq!(cfg.env, "corridor");
        assert_eq!((cfg.rows, cfg.frames, cfg.snippets), (4, 12, 3));
        assert_eq!(cfg.env_params["length"], "12");
        cfg.apply_override("level=50").unwrap();
        assert_eq!(cfg.level, 50.0);
        cfg.validate().unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert!(matches!(RunConfig::parse("colour=red"), Err(Error::UnknownKey(k)) if k == "colour"));
        assert!(matches!(
            RunConfig::parse("env_params.=1"),
            Err(Error::UnknownKey(_))
        ));
        assert!(matches!(RunConfig::parse("H"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("H=x"), Err(Error::Config { key, .. }) if key == "H"));
    }

    #[test]
    fn level_validation() {
        let cfg = RunConfig {
            level: 100.0,
            ..RunConfig::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("level leaves zero kept cells"), "{err}");
        // 1x1 grid: any rounding to a full mask is rejected too.
        let cfg = RunConfig {
            rows: 1,
            frames: 2,
            snippets: 1,
            level: 60.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            snippets: 3,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config { key, .. }) if key == "G"));
    }
}
