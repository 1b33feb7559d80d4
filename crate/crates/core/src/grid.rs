use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic grid of `len` samples with step `delta`, centered so that
/// sample `len / 2` sits at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    len: usize,
    delta: f64,
}

impl SampleGrid {
    pub fn new(len: usize, delta: f64) -> Result<Self> {
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "sample count must be even and at least 2, got {len}"
            )));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "sampling step must be positive, got {delta}"
            )));
        }
        Ok(SampleGrid { len, delta })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Period `T = L * delta`.
    pub fn period(&self) -> f64 {
        self.len as f64 * self.delta
    }

    pub fn origin(&self) -> usize {
        self.len / 2
    }

    /// Physical coordinate of sample `j`.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.origin() as f64) * self.delta
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|j| self.x(j))
    }

    /// The frequency grid: same length, step `1 / T`.
    pub fn dual(&self) -> SampleGrid {
        SampleGrid {
            len: self.len,
            delta: 1.0 / self.period(),
        }
    }

    /// Grids agree when lengths match and steps agree to rounding.
    pub fn matches(&self, other: &SampleGrid) -> bool {
        self.len == other.len && (self.delta - other.delta).abs() <= 1e-12 * self.delta
    }

    /// Number of samples covering a physical length, if it is a whole number.
    pub fn samples_in(&self, length: f64) -> Option<usize> {
        let s = length / self.delta;
        let r = s.round();
        if r >= 1.0 && (s - r).abs() <= 1e-9 * r.max(1.0) {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Number of frequency bins covering a physical frequency span.
    pub fn bins_in(&self, freq: f64) -> Option<usize> {
        self.dual().samples_in(freq)
    }
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            len: 1024,
            delta: 1.0 / 32.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_zero() {
        let g = SampleGrid::new(1024, 1.0 / 32.0).unwrap();
        assert_eq!(g.x(g.origin()), 0.0);
        assert_eq!(g.period(), 32.0);
        assert_eq!(g.x(0), -16.0);
    }

    #[test]
    fn rejects_odd_and_nonpositive() {
        assert!(SampleGrid::new(1023, 0.1).is_err());
        assert!(SampleGrid::new(1024, 0.0).is_err());
        assert!(SampleGrid::new(1024, f64::NAN).is_err());
    }

    #[test]
    fn dual_of_dual_matches() {
        let g = SampleGrid::new(768, 1.0 / 48.0).unwrap();
        assert!(g.dual().dual().matches(&g));
        assert_eq!(g.dual().delta(), 1.0 / 16.0);
    }

    #[test]
    fn counts_samples() {
        let g = SampleGrid::default();
        assert_eq!(g.samples_in(1.0), Some(32));
        assert_eq!(g.samples_in(0.01), None);
        assert_eq!(g.bins_in(0.5), Some(16));
    }
}
