use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, cis_turns};
use crate::grid::SampleGrid;

/// A time-frequency point `(a, b)`: shift by `a`, modulate by `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TFPoint {
    pub a: f64,
    pub b: f64,
}

impl TFPoint {
    pub const fn new(a: f64, b: f64) -> Self {
        TFPoint { a, b }
    }
}

impl From<(f64, f64)> for TFPoint {
    fn from((a, b): (f64, f64)) -> Self {
        TFPoint { a, b }
    }
}

/// Complex samples on a [`SampleGrid`], standing in for a function on the line.
///
/// Norms and inner products carry the `delta` weight, so they approximate
/// their continuum counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: SampleGrid,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: SampleGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} samples", grid.len()),
                found: format!("{} samples", values.len()),
            });
        }
        Ok(Signal { grid, values })
    }

    pub fn zeros(grid: SampleGrid) -> Self {
        Signal {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x_j)` at the physical grid coordinates.
    pub fn from_fn(grid: SampleGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.xs().map(f).collect();
        Signal { grid, values }
    }

    pub fn from_real_fn(grid: SampleGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Unit impulse at sample `j`.
    pub fn impulse(grid: SampleGrid, j: usize) -> Self {
        let mut s = Self::zeros(grid);
        s.values[j % grid.len()] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.delta() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `delta * sum f[j] conj(h[j])`.
    pub fn inner(&self, h: &Signal) -> Result<Complex64> {
        self.check_grid(h)?;
        Ok(self.inner_unchecked(h))
    }

    pub(crate) fn inner_unchecked(&self, h: &Signal) -> Complex64 {
        let s: Complex64 = self
            .values
            .iter()
            .zip(&h.values)
            .map(|(f, h)| f * h.conj())
            .sum();
        s * self.grid.delta()
    }

    pub(crate) fn check_grid(&self, other: &Signal) -> Result<()> {
        if self.grid.matches(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Signal {
        let c = c.into();
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// The signal divided by its norm.
    pub fn normalized(&self) -> Result<Signal> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidWindow("cannot normalize a zero signal".into()));
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn conj(&self) -> Signal {
        Signal {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.check_grid(other)?;
        Ok(Signal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.check_grid(other)?;
        Ok(Signal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self + c * other`, in place.
    pub fn axpy(&mut self, c: Complex64, other: &Signal) -> Result<()> {
        self.check_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Largest sample modulus.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `||self - other|| / ||other||`.
    pub fn relative_error(&self, reference: &Signal) -> Result<f64> {
        let d = self.sub(reference)?.norm();
        let r = reference.norm();
        Ok(if r == 0.0 { d } else { d / r })
    }

    /// Circular shift by `k` samples: `out[j] = f[j - k]`.
    pub fn shift_samples(&self, k: isize) -> Signal {
        let n = self.len() as isize;
        let k = k.rem_euclid(n) as usize;
        let mut values = self.values.clone();
        values.rotate_right(k);
        Signal {
            grid: self.grid,
            values,
        }
    }

    /// `T_a f(x) = f(x - a)`. Whole-sample shifts are exact circular shifts;
    /// other shifts apply a phase ramp in the DFT domain.
    pub fn translate(&self, a: f64) -> Signal {
        let s = a / self.grid.delta();
        let k = s.round();
        if (s - k).abs() <= 1e-9 * k.abs().max(1.0) {
            return self.shift_samples(k as isize);
        }
        let n = self.len();
        let t = self.grid.period();
        let mut buf = self.values.clone();
        fft::forward(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            let kc = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            *v *= cis_turns(-a * kc / t) / n as f64;
        }
        fft::inverse(&mut buf);
        Signal {
            grid: self.grid,
            values: buf,
        }
    }

    /// `M_b f(x) = e^{2 pi i b x} f(x)` with `x` the centered coordinate.
    pub fn modulate(&self, b: f64) -> Signal {
        if b == 0.0 {
            return self.clone();
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * cis_turns(b * self.grid.x(j)))
            .collect();
        Signal {
            grid: self.grid,
            values,
        }
    }

    /// `M_b T_a f`: translation first, then modulation.
    pub fn tf_shift(&self, p: TFPoint) -> Signal {
        self.translate(p.a).modulate(p.b)
    }

    /// Centered DFT approximating the continuum Fourier transform.
    ///
    /// `F[k] = delta * sum_j f[j] e^{-2 pi i x_j xi_k}` with `xi_k` on the
    /// dual grid (step `1/T`). The result lives on [`SampleGrid::dual`] and
    /// has the same norm.
    pub fn fourier(&self) -> Signal {
        let n = self.len();
        let half = n / 2;
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| if j % 2 == 0 { *v } else { -v })
            .collect();
        fft::forward(&mut buf);
        let sign = if half.is_multiple_of(2) { 1.0 } else { -1.0 };
        let d = self.grid.delta() * sign;
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= if k % 2 == 0 { d } else { -d };
        }
        Signal {
            grid: self.grid.dual(),
            values: buf,
        }
    }

    /// Inverse of [`Signal::fourier`].
    pub fn inverse_fourier(&self) -> Signal {
        self.conj().fourier().conj()
    }
}

/// `delta * sum f[j] conj(h[j])`.
pub fn inner(f: &Signal, h: &Signal) -> Result<Complex64> {
    f.inner(h)
}
