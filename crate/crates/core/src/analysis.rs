//! Checks on finished maps: threshold retraining curves, map deviation and
//! mask transfer between learners.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;

use crate::engine::Experiment;
use crate::error::{Error, Result};
use crate::grid::MaskGrid;
use crate::learners::LearnerSpec;
use crate::map::ImportanceMap;
use crate::seed::{derive_seed, rng_from, stream};
use crate::stats::ReturnStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveMode {
    /// Keep the most important cells.
    Top,
    /// Keep the least important cells.
    Bottom,
    /// Keep a size-matched uniformly random set of cells.
    Random,
}

impl fmt::Display for CurveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveMode::Top => "top",
            CurveMode::Bottom => "bottom",
            CurveMode::Random => "random",
        })
    }
}

impl FromStr for CurveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top" => Ok(CurveMode::Top),
            "bottom" => Ok(CurveMode::Bottom),
            "random" => Ok(CurveMode::Random),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// Cell indices from most to least important; ties by ascending index.
pub fn importance_ranking(map: &ImportanceMap) -> Vec<usize> {
    let v = map.values();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| match v[b].total_cmp(&v[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order
}

fn top_count(percent: f64, cells: usize) -> usize {
    ((percent / 100.0) * cells as f64).round() as usize
}

/// Binary mask keeping `percent`% of the cells.
///
/// Cells are ranked once by descending importance (ties by ascending
/// index). `Top` keeps the head of the ranking, `Bottom` the tail, so
/// `top(p)` and `bottom(100 - p)` always partition the grid. `Top` keeps
/// `round(p·n/100)` cells; `Bottom` keeps `n - round((100-p)·n/100)`, which is
/// the same number except when `p·n/100` lands exactly on one half.
pub fn threshold_mask(map: &ImportanceMap, percent: f64, mode: CurveMode) -> Result<MaskGrid> {
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(Error::Contract(format!("percent {percent} outside (0, 100]")));
    }
    let ranking = importance_ranking(map);
    let n = ranking.len();
    let kept: &[usize] = match mode {
        CurveMode::Top => &ranking[..top_count(percent, n)],
        CurveMode::Bottom => &ranking[top_count(100.0 - percent, n)..],
        CurveMode::Random => {
            return Err(Error::Contract("random masks are not thresholds".into()));
        }
    };
    MaskGrid::from_kept(map.rows(), map.cols(), kept.iter().copied())
}

/// Uniform mask with exactly `kept` observed cells.
pub fn random_mask(rows: usize, cols: usize, kept: usize, seed: u64) -> Result<MaskGrid> {
    if kept > rows * cols {
        return Err(Error::Contract(format!(
            "cannot keep {kept} of {} cells",
            rows * cols
        )));
    }
    let mut rng = rng_from(seed);
    MaskGrid::from_kept(rows, cols, sample(&mut rng, rows * cols, kept))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub percent_kept: f64,
    pub mode: CurveMode,
    pub seed: u64,
    pub kept_cells: usize,
    pub empty_trainset: bool,
    /// `None` when the point failed; see `error`.
    pub stats: Option<ReturnStats>,
    pub error: Option<String>,
}

fn percent_key(percent: f64) -> u64 {
    (percent * 1000.0).round() as u64
}

/// Retrains on top and bottom threshold masks at each percentage.
///
/// Both modes at one percentage share a seed, so at 100% they coincide.
/// A failing point is recorded with its error and the curve continues.
pub fn validation_curves(map: &ImportanceMap, exp: &Experiment, percents: &[f64]) -> Result<Vec<CurvePoint>> {
    check_map(map, exp)?;
    let root = derive_seed(exp.config.seed, stream::CURVES);
    let jobs: Vec<(f64, CurveMode)> = percents
        .iter()
        .flat_map(|&p| [(p, CurveMode::Top), (p, CurveMode::Bottom)])
        .collect();
    exp.par_jobs(jobs.len(), |i| {
        let (percent, mode) = jobs[i];
        let seed = derive_seed(root, percent_key(percent));
        let mut point = CurvePoint {
            percent_kept: percent,
            mode,
            seed,
            kept_cells: 0,
            empty_trainset: false,
            stats: None,
            error: None,
        };
        let outcome = threshold_mask(map, percent, mode).and_then(|mask| {
            point.kept_cells = mask.kept_count();
            exp.retrain_and_evaluate(&mask, &exp.geometry, seed)
        });
        match outcome {
            Ok(o) => {
                point.empty_trainset = o.empty_trainset;
                point.stats = Some(o.stats);
            }
            Err(e) => point.error = Some(e.to_string()),
        }
        Ok(point)
    })
}

fn check_map(map: &ImportanceMap, exp: &Experiment) -> Result<()> {
    if map.rows() != exp.geometry.rows() || map.cols() != exp.geometry.snippets() {
        return Err(Error::Contract(format!(
            "map is {}x{} but the experiment grid is {}x{}",
            map.rows(),
            map.cols(),
            exp.geometry.rows(),
            exp.geometry.snippets()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapComparison {
    pub rows: usize,
    pub cols: usize,
    /// `|minmax(A) - minmax(B)|` per cell.
    pub deviation: Vec<f64>,
    pub mean: f64,
    pub max: f64,
}

/// Rescales to `[0, 1]`; a constant map becomes all zeros.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range > 0.0 && range.is_finite() {
        values.iter().map(|v| (v - lo) / range).collect()
    } else {
        vec![0.0; values.len()]
    }
}

pub fn compare_maps(a: &ImportanceMap, b: &ImportanceMap) -> Result<MapComparison> {
    if !a.same_shape(b) {
        return Err(Error::Contract(format!(
            "cannot compare {}x{} with {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let deviation: Vec<f64> = min_max(a.values())
        .iter()
        .zip(min_max(b.values()))
        .map(|(x, y)| (x - y).abs())
        .collect();
    let mean = deviation.iter().sum::<f64>() / deviation.len() as f64;
    let max = deviation.iter().copied().fold(0.0, f64::max);
    Ok(MapComparison {
        rows: a.rows(),
        cols: a.cols(),
        deviation,
        mean,
        max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferCondition {
    /// Top cells of the source learner's map.
    SourceTop,
    /// Top cells of the target learner's own map.
    TargetTop,
    /// Size-matched random cells.
    Random,
}

impl fmt::Display for TransferCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransferCondition::SourceTop => "source_top",
            TransferCondition::TargetTop => "target_top",
            TransferCondition::Random => "random",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferPoint {
    pub condition: TransferCondition,
    pub mask: MaskGrid,
    pub stats: ReturnStats,
    pub empty_trainset: bool,
    /// Per-round generator returns for adversarial targets.
    pub round_returns: Vec<f64>,
}

/// Trains `target_learner` on three masks of equal size: the top cells of
/// `source`, the top cells of `target`, and a random draw. All three share
/// one training/evaluation seed.
pub fn transfer_experiment(
    source: &ImportanceMap,
    target: &ImportanceMap,
    target_learner: &LearnerSpec,
    percent: f64,
    exp: &Experiment,
) -> Result<Vec<TransferPoint>> {
    check_map(source, exp)?;
    check_map(target, exp)?;
    let exp = exp.with_learner(target_learner.clone());
    let root = derive_seed(
        derive_seed(exp.config.seed, stream::TRANSFER),
        percent_key(percent),
    );
    let source_mask = threshold_mask(source, percent, CurveMode::Top)?;
    let target_mask = threshold_mask(target, percent, CurveMode::Top)?;
    let random = random_mask(
        source.rows(),
        source.cols(),
        source_mask.kept_count(),
        derive_seed(root, 1),
    )?;
    let conditions = [
        (TransferCondition::SourceTop, source_mask),
        (TransferCondition::TargetTop, target_mask),
        (TransferCondition::Random, random),
    ];
    let job_seed = derive_seed(root, 0);
    exp.par_jobs(conditions.len(), |i| {
        let (condition, mask) = &conditions[i];
        let o = exp.retrain_and_evaluate(mask, &exp.geometry, job_seed)?;
        Ok(TransferPoint {
            condition: *condition,
            mask: mask.clone(),
            stats: o.stats,
            empty_trainset: o.empty_trainset,
            round_returns: o.round_returns,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(rows: usize, cols: usize, v: &[f64]) -> ImportanceMap {
        ImportanceMap::from_values(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn top_and_bottom_thresholds() {
        let m = map(2, 2, &[0.9, 0.1, 0.5, 0.7]);
        let top = threshold_mask(&m, 50.0, CurveMode::Top).unwrap();
        assert_eq!(top.cells(), &[true, false, false, true]);
        let bottom = threshold_mask(&m, 50.0, CurveMode::Bottom).unwrap();
        assert_eq!(bottom.cells(), &[false, true, true, false]);
    }

    #[test]
    fn constant_map_keeps_leading_cells() {
        let m = map(2, 4, &[3.0; 8]);
        let top = threshold_mask(&m, 25.0, CurveMode::Top).unwrap();
        assert_eq!(top.to_bits(), "11000000");
        let bottom = threshold_mask(&m, 75.0, CurveMode::Bottom).unwrap();
        assert_eq!(bottom.to_bits(), "00111111");
    }

    #[test]
    fn full_percent_is_everything() {
        let m = map(1, 3, &[1.0, 2.0, 3.0]);
        for mode in [CurveMode::Top, CurveMode::Bottom] {
            assert_eq!(threshold_mask(&m, 100.0, mode).unwrap().kept_count(), 3);
        }
        assert!(threshold_mask(&m, 0.0, CurveMode::Top).is_err());
        assert!(threshold_mask(&m, 100.5, CurveMode::Top).is_err());
    }

    #[test]
    fn deviation_examples() {
        let x = map(1, 2, &[0.0, 1.0]);
        let y = map(1, 2, &[1.0, 0.0]);
        let c = compare_maps(&x, &y).unwrap();
        assert_eq!(c.deviation, vec![1.0, 1.0]);
        assert_eq!((c.mean, c.max), (1.0, 1.0));
        let same = compare_maps(&x, &x).unwrap();
        assert!(same.deviation.iter().all(|&d| d == 0.0));
        assert!(compare_maps(&x, &map(2, 1, &[0.0, 1.0])).is_err());
        assert_eq!(min_max(&[4.0, 4.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn random_mask_has_requested_size() {
        let m = random_mask(4, 5, 7, 9).unwrap();
        assert_eq!(m.kept_count(), 7);
        assert_eq!(m, random_mask(4, 5, 7, 9).unwrap());
        assert!(random_mask(1, 2, 3, 0).is_err());
    }
}
