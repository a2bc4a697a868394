//! Snippet grid geometry and binary masks over it.

use std::ops::Range;

use crate::error::{Error, Result};

/// An `H x G` grid of snippets over `H` trajectories of `T` frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridGeometry {
    rows: usize,
    frames: usize,
    snippets: usize,
}

impl GridGeometry {
    /// Fails unless `snippets` divides `frames` exactly.
    pub fn new(rows: usize, frames: usize, snippets: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::config("H", "must be at least 1"));
        }
        if snippets == 0 {
            return Err(Error::config("G", "must be at least 1"));
        }
        if !frames.is_multiple_of(snippets) {
            return Err(Error::config(
                "G",
                format!("{snippets} snippets do not divide {frames} frames"),
            ));
        }
        Ok(Self {
            rows,
            frames,
            snippets,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn snippets(&self) -> usize {
        self.snippets
    }

    pub fn frames_per_snippet(&self) -> usize {
        self.frames / self.snippets
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.snippets
    }

    /// Half-open frame range covered by one snippet column.
    pub fn snippet_frame_range(&self, snippet: usize) -> Result<Range<usize>> {
        if snippet >= self.snippets {
            return Err(Error::Index {
                index: snippet,
                len: self.snippets,
            });
        }
        let w = self.frames_per_snippet();
        Ok(snippet * w..(snippet + 1) * w)
    }

    pub fn snippet_of_frame(&self, frame: usize) -> usize {
        frame / self.frames_per_snippet()
    }
}

/// Binary `H x G` mask. `true` means the snippet is observed (kept).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaskGrid {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl MaskGrid {
    pub fn new(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Contract("mask must have at least one cell".into()));
        }
        if cells.len() != rows * cols {
            return Err(Error::Contract(format!(
                "mask of {rows}x{cols} needs {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn filled(rows: usize, cols: usize, value: bool) -> Self {
        assert!(rows > 0 && cols > 0, "mask must have at least one cell");
        Self {
            rows,
            cols,
            cells: vec![value; rows * cols],
        }
    }

    /// Mask whose kept cells are exactly `kept` (row-major indices).
    pub fn from_kept(rows: usize, cols: usize, kept: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut cells = vec![false; rows * cols];
        for idx in kept {
            let len = cells.len();
            *cells.get_mut(idx).ok_or(Error::Index { index: idx, len })? = true;
        }
        Self::new(rows, cols, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    /// `(kept, masked)`.
    pub fn cell_count(&self) -> (usize, usize) {
        let kept = self.kept_count();
        (kept, self.cells.len() - kept)
    }

    pub fn kept_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn masked_count(&self) -> usize {
        self.cells.len() - self.kept_count()
    }

    /// Fraction of observed cells. For exact-count masks this is `E[M]`.
    pub fn keep_fraction(&self) -> f64 {
        self.kept_count() as f64 / self.cells.len() as f64
    }

    pub fn matches(&self, geom: &GridGeometry) -> bool {
        self.rows == geom.rows() && self.cols == geom.snippets()
    }

    /// Row-major string of `0`/`1`.
    pub fn to_bits(&self) -> String {
        self.cells.iter().map(|&c| if c { '1' } else { '0' }).collect()
    }

    pub fn from_bits(rows: usize, cols: usize, bits: &str) -> Result<Self> {
        let cells = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Contract(format!("mask bit `{other}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn snippet_ranges() {
        let g = GridGeometry::new(20, 1000, 100).unwrap();
        assert_eq!(g.snippet_frame_range(0).unwrap(), 0..10);
        let g = GridGeometry::new(1, 8, 4).unwrap();
        assert_eq!(g.snippet_frame_range(3).unwrap(), 6..8);
        let g = GridGeometry::new(1, 8, 8).unwrap();
        assert_eq!(g.snippet_frame_range(5).unwrap(), 5..6);
        assert!(matches!(
            g.snippet_frame_range(8),
            Err(Error::Index { index: 8, len: 8 })
        ));
    }

    #[test]
    fn non_dividing_snippets_rejected() {
        let err = GridGeometry::new(2, 10, 3).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "G"));
    }

    #[test]
    fn cell_counts() {
        let m = MaskGrid::from_kept(2, 4, [0, 2, 5, 7]).unwrap();
        assert_eq!(m.cell_count(), (4, 4));
        assert_eq!(MaskGrid::filled(1, 1, true).cell_count(), (1, 0));
        let mut cells = vec![true; 2000];
        cells[..200].iter_mut().for_each(|c| *c = false);
        let m = MaskGrid::new(20, 100, cells).unwrap();
        assert_eq!(m.cell_count(), (1800, 200));
        assert!((m.keep_fraction() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn bits_round_trip() {
        let m = MaskGrid::from_kept(2, 3, [1, 5]).unwrap();
        assert_eq!(m.to_bits(), "010001");
        assert_eq!(MaskGrid::from_bits(2, 3, "010001").unwrap(), m);
        assert!(MaskGrid::from_bits(2, 3, "01000").is_err());
        assert!(MaskGrid::from_bits(1, 2, "0x").is_err());
    }

    proptest! {
        #[test]
        fn ranges_partition_frames(snippets in 1usize..40, width in 1usize..12) {
            let frames = snippets * width;
            let g = GridGeometry::new(1, frames, snippets).unwrap();
            let mut seen = vec![0u32; frames];
            for s in 0..snippets {
                for f in g.snippet_frame_range(s).unwrap() {
                    seen[f] += 1;
                    prop_assert_eq!(g.snippet_of_frame(f), s);
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
