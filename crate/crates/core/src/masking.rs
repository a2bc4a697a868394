//! Random snippet masks and `D ⊙ m`.

use rand::seq::index::sample;
use rand::Rng;

use crate::config::masked_cells_for;
use crate::demo::DemoSet;
use crate::error::{Error, Result};
use crate::grid::{GridGeometry, MaskGrid};
use crate::learners::{TrainingPair, TrainingSet};
use crate::seed::{derive_seed, rng_from};

/// Segments per trajectory in the variance probe.
pub const PROBE_SEGMENTS: usize = 10;

/// `n` masks, each with exactly `round(level/100 · H·G)` masked cells chosen
/// uniformly without replacement. Mask `i` draws from `derive_seed(seed, i)`.
pub fn gen_masks(geom: &GridGeometry, level: f64, n: usize, seed: u64) -> Result<Vec<MaskGrid>> {
    if !(level.is_finite() && (0.0..100.0).contains(&level)) {
        return Err(Error::config("level", "must be a percentage in [0, 100)"));
    }
    let cells = geom.cell_count();
    let masked = masked_cells_for(level, cells);
    if masked >= cells {
        return Err(Error::config("level", "level leaves zero kept cells"));
    }
    (0..n)
        .map(|i| {
            let mut rng = rng_from(derive_seed(seed, i as u64));
            let mut grid = vec![true; cells];
            for idx in sample(&mut rng, cells, masked) {
                grid[idx] = false;
            }
            MaskGrid::new(geom.rows(), geom.snippets(), grid)
        })
        .collect()
}

/// Frames of kept snippets, unmodified and in `(row, frame)` order.
pub fn apply_mask(demos: &DemoSet, mask: &MaskGrid, geom: &GridGeometry) -> Result<TrainingSet> {
    if demos.rows() != geom.rows() || demos.frames() != geom.frames() {
        return Err(Error::Contract(format!(
            "geometry {}x{} frames does not match demos {}x{}",
            geom.rows(),
            geom.frames(),
            demos.rows(),
            demos.frames()
        )));
    }
    if !mask.matches(geom) {
        return Err(Error::Contract(format!(
            "mask {}x{} does not match grid {}x{}",
            mask.rows(),
            mask.cols(),
            geom.rows(),
            geom.snippets()
        )));
    }
    let width = geom.frames_per_snippet();
    let mut pairs = Vec::with_capacity(mask.kept_count() * width);
    for (row, traj) in demos.trajectories().iter().enumerate() {
        for (frame, step) in traj.steps.iter().enumerate() {
            if mask.get(row, frame / width) {
                pairs.push(TrainingPair {
                    state: step.state,
                    action: step.action,
                    row,
                    frame,
                });
            }
        }
    }
    Ok(TrainingSet { pairs })
}

/// Grid with [`PROBE_SEGMENTS`] equal segments per trajectory.
pub fn probe_geometry(rows: usize, frames: usize) -> Result<GridGeometry> {
    if !frames.is_multiple_of(PROBE_SEGMENTS) || frames == 0 {
        return Err(Error::config(
            "T",
            format!("the segment probe needs T divisible by {PROBE_SEGMENTS}, got {frames}"),
        ));
    }
    GridGeometry::new(rows, frames, PROBE_SEGMENTS)
}

/// Bernoulli(½) masks over a ten-segment grid. All-zero draws are redrawn.
pub fn segment_probe_masks(geom: &GridGeometry, n: usize, seed: u64) -> Result<Vec<MaskGrid>> {
    if geom.snippets() != PROBE_SEGMENTS {
        return Err(Error::Contract(format!(
            "segment probe expects {PROBE_SEGMENTS} segments, got {}",
            geom.snippets()
        )));
    }
    (0..n)
        .map(|i| {
            let mut rng = rng_from(derive_seed(seed, i as u64));
            loop {
                let cells: Vec<bool> = (0..geom.cell_count()).map(|_| rng.gen_bool(0.5)).collect();
                if cells.iter().any(|&c| c) {
                    return MaskGrid::new(geom.rows(), geom.snippets(), cells);
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo::{Step, Trajectory};

    fn demos(rows: usize, frames: usize) -> DemoSet {
        let trajectories = (0..rows)
            .map(|r| Trajectory {
                steps: (0..frames)
                    .map(|t| Step {
                        state: r * 100 + t,
                        action: t % 3,
                        reward: t as f64 * 0.5,
                    })
                    .collect(),
            })
            .collect();
        DemoSet::new("corridor", frames, 3, trajectories).unwrap()
    }

    #[test]
    fn large_grid_mask_counts() {
        let g = GridGeometry::new(20, 1000, 100).unwrap();
        let masks = gen_masks(&g, 50.0, 100, 3).unwrap();
        assert_eq!(masks.len(), 100);
        assert!(masks.iter().all(|m| m.masked_count() == 1000));
        let masks = gen_masks(&g, 10.0, 5, 3).unwrap();
        assert!(masks.iter().all(|m| m.cell_count() == (1800, 200)));
    }

    #[test]
    fn level_zero_keeps_everything() {
        let g = GridGeometry::new(2, 8, 4).unwrap();
        let masks = gen_masks(&g, 0.0, 3, 9).unwrap();
        assert_eq!(masks.len(), 3);
        assert!(masks.iter().all(|m| m.kept_count() == 8));
    }

    #[test]
    fn full_degradation_rejected() {
        let g = GridGeometry::new(1, 4, 4).unwrap();
        assert!(gen_masks(&g, 100.0, 1, 0).is_err());
        assert!(gen_masks(&g, 90.0, 1, 0).is_err()); // round(3.6) = 4 masked
        assert!(gen_masks(&g, -1.0, 1, 0).is_err());
    }

    #[test]
    fn masks_are_reproducible_and_independent() {
        let g = GridGeometry::new(4, 20, 10).unwrap();
        let a = gen_masks(&g, 50.0, 10, 42).unwrap();
        assert_eq!(a, gen_masks(&g, 50.0, 10, 42).unwrap());
        assert_ne!(a, gen_masks(&g, 50.0, 10, 43).unwrap());
        // Prefix stability: mask i does not depend on how many masks follow.
        assert_eq!(a[..3], gen_masks(&g, 50.0, 3, 42).unwrap()[..]);
    }

    #[test]
    fn apply_mask_selects_frames() {
        let d = demos(1, 8);
        let g = GridGeometry::new(1, 8, 4).unwrap();
        let m = MaskGrid::new(1, 4, vec![true, false, true, false]).unwrap();
        let set = apply_mask(&d, &m, &g).unwrap();
        let frames: Vec<usize> = set.pairs.iter().map(|p| p.frame).collect();
        assert_eq!(frames, vec![0, 1, 4, 5]);
        for p in &set.pairs {
            let src = d.step(p.row, p.frame);
            assert_eq!((p.state, p.action), (src.state, src.action));
        }
    }

    #[test]
    fn apply_mask_identity_and_single_cell() {
        let d = demos(3, 12);
        let g = GridGeometry::new(3, 12, 4).unwrap();
        let all = apply_mask(&d, &MaskGrid::filled(3, 4, true), &g).unwrap();
        assert_eq!(all.len(), 36);
        let one = MaskGrid::from_kept(3, 4, [6]).unwrap();
        let set = apply_mask(&d, &one, &g).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.pairs.iter().all(|p| p.row == 1 && (6..9).contains(&p.frame)));
    }

    #[test]
    fn apply_mask_dimension_mismatch() {
        let d = demos(2, 8);
        let g = GridGeometry::new(2, 8, 4).unwrap();
        assert!(apply_mask(&d, &MaskGrid::filled(2, 2, true), &g).is_err());
        let g2 = GridGeometry::new(3, 8, 4).unwrap();
        assert!(apply_mask(&d, &MaskGrid::filled(3, 4, true), &g2).is_err());
    }

    #[test]
    fn probe_masks() {
        let g = probe_geometry(2, 20).unwrap();
        let masks = segment_probe_masks(&g, 10, 5).unwrap();
        assert_eq!(masks.len(), 10);
        assert!(masks.iter().all(|m| m.kept_count() > 0 && m.cols() == 10));
        assert_eq!(masks, segment_probe_masks(&g, 10, 5).unwrap());
        assert!(probe_geometry(2, 25).is_err());
        let g4 = GridGeometry::new(1, 8, 4).unwrap();
        assert!(segment_probe_masks(&g4, 1, 0).is_err());
    }

    #[test]
    fn probe_kept_fraction_concentrates() {
        // Bernoulli(½) over 10 cells, all-zero redrawn: E[kept] = 5 / (1 - 2^-10).
        let g = probe_geometry(1, 10).unwrap();
        let n = 100_000;
        let masks = segment_probe_masks(&g, n, 17).unwrap();
        let mean = masks.iter().map(|m| m.keep_fraction()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() <= 0.005, "mean kept fraction {mean}");
    }
}
