//! Discrete Zak transform.
//!
//! `Z[n, k] = sum_m f[(n + mK) mod L] e^{2 pi i mk/M}` with `M = L/K`, so that
//! `(delta/M) sum |Z|^2 = ||f||^2`. Taking `K` samples per unit length puts
//! the half-redundant lattice `(alpha, beta) = (1, 1/2)` in Zak coordinates:
//! its frame operator acts on `(Z[n,k], Z[n,k+M/2])` pairs, and with
//! `delta K = 1` the eigenvalues are exactly `|Z[n,k]|^2 + |Z[n,k+M/2]|^2`.
//! The continuum form `sqrt2 sum f(2(x-j)) e^{2 pi i j xi}` is this transform
//! after the dilation `x -> 2x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::Signal;

/// Relative flatness below which a Zak profile is called constant.
pub const FLATNESS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ZakMatrix {
    factor: usize,
    m: usize,
    delta: f64,
    values: Vec<Complex64>,
}

impl ZakMatrix {
    /// The factor `K` (rows).
    pub fn factor(&self) -> usize {
        self.factor
    }

    /// `M = L/K` (columns).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.m + k]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `(delta/M) sum |Z|^2`, equal to the signal energy.
    pub fn energy(&self) -> f64 {
        self.delta / self.m as f64 * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `|Z[n,k]|^2 + |Z[n,k+M/2]|^2` for `k < M/2`, row-major. Requires even `M`.
    pub fn half_shift_sums(&self) -> Result<Vec<f64>> {
        if !self.m.is_multiple_of(2) {
            return Err(Error::Unrepresentable(format!("M = {} is odd, no half shift", self.m)));
        }
        let h = self.m / 2;
        Ok((0..self.factor)
            .flat_map(|n| (0..h).map(move |k| (n, k)))
            .map(|(n, k)| self.get(n, k).norm_sqr() + self.get(n, k + h).norm_sqr())
            .collect())
    }
}

pub fn zak(f: &Signal, factor: usize) -> Result<ZakMatrix> {
    let l = f.len();
    if factor == 0 || !l.is_multiple_of(factor) {
        return Err(Error::Unrepresentable(format!("Zak factor {factor} does not divide L = {l}")));
    }
    let m = l / factor;
    let mut values = Vec::with_capacity(l);
    for n in 0..factor {
        let mut row: Vec<Complex64> = (0..m).map(|i| f.values()[n + i * factor]).collect();
        fft::inverse(&mut row);
        values.extend(row);
    }
    Ok(ZakMatrix {
        factor,
        m,
        delta: f.grid().delta(),
        values,
    })
}

/// Extremes of a Zak-domain profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZakProfile {
    pub min: f64,
    pub max: f64,
    /// `max/min - 1`.
    pub flatness: f64,
    pub tight: bool,
}

impl ZakProfile {
    pub(crate) fn from_values(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let flatness = if min > 0.0 { max / min - 1.0 } else { f64::INFINITY };
        ZakProfile {
            min,
            max,
            flatness,
            tight: flatness < FLATNESS_TOLERANCE,
        }
    }
}

/// `|Zg(x, xi)|^2 + |Zg(x, xi - 1/2)|^2` for the lattice `(1, 1/2)`; the
/// system is tight exactly when this is constant, and its extremes are the
/// frame bounds.
pub fn zak_tightness(g: &Signal) -> Result<ZakProfile> {
    let grid = g.grid();
    let k = grid
        .samples_in(1.0)
        .ok_or_else(|| Error::Unrepresentable(format!("1/delta = {} is not an integer", 1.0 / grid.delta())))?;
    if !grid.len().is_multiple_of(2 * k) {
        return Err(Error::Unrepresentable(format!(
            "lattice (1, 1/2) needs an even period, got T = {}",
            grid.period()
        )));
    }
    let z = zak(g, k)?;
    Ok(ZakProfile::from_values(&z.half_shift_sums()?))
}
