//! Importance maps.

use crate::error::{Error, Result};

/// Raw Monte Carlo sums behind an estimated map.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSums {
    /// Per-cell `Σ_i R̄_i · m_i(λ)`.
    pub weighted_sums: Vec<f64>,
    pub n_masks: usize,
    /// `E[M]`, the probability that a cell is observed.
    pub keep_fraction: f64,
}

/// An `H x G` importance map.
///
/// Maps produced by the engine carry their [`MaskSums`], and
/// `normalized = weighted_sums / (keep_fraction * n_masks)`. Maps loaded from
/// disk or averaged across runs only carry normalized values.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMap {
    rows: usize,
    cols: usize,
    normalized: Vec<f64>,
    sums: Option<MaskSums>,
    provenance: Vec<String>,
}

impl ImportanceMap {
    pub fn from_sums(
        rows: usize,
        cols: usize,
        weighted_sums: Vec<f64>,
        n_masks: usize,
        keep_fraction: f64,
    ) -> Result<Self> {
        check_shape(rows, cols, weighted_sums.len())?;
        if n_masks == 0 {
            return Err(Error::Contract("map needs at least one mask".into()));
        }
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::Contract(format!(
                "keep fraction {keep_fraction} outside (0, 1]"
            )));
        }
        let denom = keep_fraction * n_masks as f64;
        let normalized = weighted_sums.iter().map(|s| s / denom).collect();
        Ok(Self {
            rows,
            cols,
            normalized,
            sums: Some(MaskSums {
                weighted_sums,
                n_masks,
                keep_fraction,
            }),
            provenance: Vec::new(),
        })
    }

    pub fn from_values(rows: usize, cols: usize, normalized: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, normalized.len())?;
        Ok(Self {
            rows,
            cols,
            normalized,
            sums: None,
            provenance: Vec::new(),
        })
    }

    pub fn with_provenance(mut self, label: impl Into<String>) -> Self {
        self.provenance.push(label.into());
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.normalized
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.normalized[row * self.cols + col]
    }

    pub fn sums(&self) -> Option<&MaskSums> {
        self.sums.as_ref()
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn same_shape(&self, other: &ImportanceMap) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Mean of the normalized values over the given row-major cells.
    pub fn mean_over(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&c| self.normalized[c]).sum::<f64>() / cells.len() as f64
    }
}

fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 || rows * cols != len {
        return Err(Error::Contract(format!(
            "{len} values do not fill a {rows}x{cols} map"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_identity() {
        let m = ImportanceMap::from_sums(1, 2, vec![4.0, 2.0], 2, 0.5).unwrap();
        assert_eq!(m.values(), &[4.0, 2.0]);
        let sums = m.sums().unwrap();
        for (n, w) in m.values().iter().zip(&sums.weighted_sums) {
            assert!((n * sums.keep_fraction * sums.n_masks as f64 - w).abs() <= 1e-9 * w.abs());
        }
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(ImportanceMap::from_values(2, 2, vec![0.0; 3]).is_err());
        assert!(ImportanceMap::from_sums(1, 1, vec![1.0], 0, 0.5).is_err());
        assert!(ImportanceMap::from_sums(1, 1, vec![1.0], 1, 0.0).is_err());
    }
}
