use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampleGrid;

/// A separable lattice `alpha Z x beta Z` on a grid: time step `a` samples,
/// frequency step `b` bins, both dividing `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    grid: SampleGrid,
    a: usize,
    b: usize,
}

impl Lattice {
    pub fn new(grid: SampleGrid, a: usize, b: usize) -> Result<Self> {
        let l = grid.len();
        if a == 0 || b == 0 || !l.is_multiple_of(a) || !l.is_multiple_of(b) {
            return Err(Error::Unrepresentable(format!(
                "lattice steps a = {a}, b = {b} must divide L = {l}"
            )));
        }
        Ok(Lattice { grid, a, b })
    }

    /// Exact lattice for physical steps that are whole numbers of samples/bins.
    pub fn from_physical(grid: SampleGrid, alpha: f64, beta: f64) -> Result<Self> {
        let a = grid
            .samples_in(alpha)
            .ok_or_else(|| Error::Unrepresentable(format!("alpha = {alpha} is not a multiple of delta = {}", grid.delta())))?;
        let b = grid
            .bins_in(beta)
            .ok_or_else(|| Error::Unrepresentable(format!("beta = {beta} is not a multiple of 1/T = {}", 1.0 / grid.period())))?;
        Lattice::new(grid, a, b)
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    /// Time step in samples.
    pub fn a(&self) -> usize {
        self.a
    }

    /// Frequency step in bins.
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.a as f64 * self.grid.delta()
    }

    pub fn beta(&self) -> f64 {
        self.b as f64 / self.grid.period()
    }

    /// `L / (a b)`.
    pub fn redundancy(&self) -> f64 {
        self.grid.len() as f64 / (self.a * self.b) as f64
    }

    /// Number of time positions `L / a`.
    pub fn time_count(&self) -> usize {
        self.grid.len() / self.a
    }

    /// Number of frequency positions `L / b`.
    pub fn freq_count(&self) -> usize {
        self.grid.len() / self.b
    }

    pub fn atom_count(&self) -> usize {
        self.time_count() * self.freq_count()
    }
}

/// A lattice chosen for target `(alpha, beta)` plus the snapping errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnappedLattice {
    pub lattice: Lattice,
    pub alpha_target: f64,
    pub beta_target: f64,
    pub alpha_error: f64,
    pub beta_error: f64,
}

/// Divisors of `n` in increasing order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn nearest_divisor(n: usize, target: f64) -> usize {
    // Ties go to the smaller divisor, which is visited first.
    let mut best = 1;
    let mut best_dist = f64::INFINITY;
    for d in divisors(n) {
        let dist = (d as f64 - target).abs();
        if dist < best_dist {
            best = d;
            best_dist = dist;
        }
    }
    best
}

/// Snaps `(alpha, beta)` to the nearest representable lattice: `a` is the
/// divisor of `L` closest to `alpha / delta`, `b` the divisor closest to
/// `beta T`. With a tolerance, a larger snap error in either is an error.
pub fn make_lattice(grid: SampleGrid, alpha: f64, beta: f64, tolerance: Option<f64>) -> Result<SnappedLattice> {
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lattice parameters must be positive, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let l = grid.len();
    let a = nearest_divisor(l, alpha / grid.delta());
    let b = nearest_divisor(l, beta * grid.period());
    let lattice = Lattice::new(grid, a, b)?;
    let snapped = SnappedLattice {
        lattice,
        alpha_target: alpha,
        beta_target: beta,
        alpha_error: (lattice.alpha() - alpha).abs(),
        beta_error: (lattice.beta() - beta).abs(),
    };
    if let Some(tol) = tolerance {
        if snapped.alpha_error > tol {
            return Err(Error::Unsnappable {
                name: "alpha",
                target: alpha,
                snapped: lattice.alpha(),
                error: snapped.alpha_error,
                tolerance: tol,
            });
        }
        if snapped.beta_error > tol {
            return Err(Error::Unsnappable {
                name: "beta",
                target: beta,
                snapped: lattice.beta(),
                error: snapped.beta_error,
                tolerance: tol,
            });
        }
    }
    Ok(snapped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisors_of_1728() {
        let d = divisors(1728);
        assert_eq!(d.len(), 28);
        assert_eq!(d[..6], [1, 2, 3, 4, 6, 8]);
        assert_eq!(*d.last().unwrap(), 1728);
    }

    #[test]
    fn exact_snaps() {
        let g = SampleGrid::default();
        let s = make_lattice(g, 1.0, 1.0, Some(0.0)).unwrap();
        assert_eq!((s.lattice.a(), s.lattice.b()), (32, 32));
        assert_eq!(s.lattice.redundancy(), 1.0);
        let s = make_lattice(g, 1.0, 0.5, Some(0.0)).unwrap();
        assert_eq!((s.lattice.a(), s.lattice.b()), (32, 16));
        assert_eq!(s.lattice.redundancy(), 2.0);
    }

    #[test]
    fn inexact_snap() {
        let g = SampleGrid::default();
        let target = 2f64.sqrt() - 0.01;
        // alpha/delta = 44.9; divisors 32 and 64 are 12.9 and 19.1 away.
        let s = make_lattice(g, target, 1.0, None).unwrap();
        assert_eq!(s.lattice.a(), 32);
        assert!((s.alpha_error - (target - 1.0)).abs() < 1e-15);
        let e = make_lattice(g, target, 1.0, Some(0.05)).unwrap_err();
        assert!(matches!(e, Error::Unsnappable { name: "alpha", .. }));
    }

    #[test]
    fn tie_goes_to_smaller() {
        let g = SampleGrid::new(16, 1.0).unwrap();
        // 6 is equidistant from 4 and 8.
        assert_eq!(make_lattice(g, 6.0, 1.0 / 16.0, None).unwrap().lattice.a(), 4);
    }
}
