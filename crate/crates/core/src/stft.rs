use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::signal::Signal;

/// Smallest `|<g, h>|` accepted by [`stft_invert`].
pub const INVERSION_THRESHOLD: f64 = 1e-10;

/// `V[n, k]` on the full `L x L` phase-space grid: time `x_n` (step `delta`)
/// by frequency `xi_k` (step `1/T`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    grid: SampleGrid,
    values: Vec<Complex64>,
}

impl PhaseSpaceField {
    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.grid.len() + k]
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        let l = self.grid.len();
        &self.values[n * l..(n + 1) * l]
    }

    pub fn time(&self, n: usize) -> f64 {
        self.grid.x(n)
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.grid.dual().x(k)
    }

    /// Area of one phase-space cell, `delta / T`.
    pub fn cell_area(&self) -> f64 {
        self.grid.delta() / self.grid.period()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// `V_g f[n, k] = <f, M_{xi_k} T_{x_n} g>`, one FFT per time shift.
pub fn stft(f: &Signal, g: &Signal) -> Result<PhaseSpaceField> {
    f.check_grid(g)?;
    let grid = *f.grid();
    let l = grid.len();
    let j0 = grid.origin();
    let rows: Vec<Vec<Complex64>> = (0..l)
        .into_par_iter()
        .map(|n| {
            let shift = n + l - j0;
            let prod: Vec<Complex64> = (0..l)
                .map(|j| f.values()[j] * g.values()[(j + l - shift % l) % l].conj())
                .collect();
            Signal::new(grid, prod)
                .expect("length matches")
                .fourier()
                .into_values()
        })
        .collect();
    Ok(PhaseSpaceField {
        grid,
        values: rows.concat(),
    })
}

/// Riemann sum of `|V|^2` with cell weight `delta / T`.
pub fn stft_energy(v: &PhaseSpaceField) -> f64 {
    v.cell_area() * v.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Weak-sense inversion `f = 1/<h,g> sum V[n,k] M_{xi_k} T_{x_n} h * cell`.
///
/// On the finite grid the double sum is exact, so the only requirement is
/// that `g` and `h` are not orthogonal.
pub fn stft_invert(v: &PhaseSpaceField, g: &Signal, h: &Signal) -> Result<Signal> {
    let grid = *v.grid();
    if !g.grid().matches(&grid) {
        return Err(Error::GridMismatch);
    }
    let hg = h.inner(g)?;
    if hg.norm() < INVERSION_THRESHOLD {
        return Err(Error::NearOrthogonal(hg.norm()));
    }
    let l = grid.len();
    let j0 = grid.origin();
    let dual = grid.dual();
    let partial: Vec<Vec<Complex64>> = (0..l)
        .into_par_iter()
        .map(|n| {
            let row = Signal::new(dual, v.row(n).to_vec())
                .expect("length matches")
                .inverse_fourier();
            let shift = (n + l - j0) % l;
            (0..l)
                .map(|j| row.values()[j] * h.values()[(j + l - shift) % l])
                .collect()
        })
        .collect();
    let scale = grid.delta() / hg;
    let mut out = vec![Complex64::new(0.0, 0.0); l];
    for row in &partial {
        for (o, r) in out.iter_mut().zip(row) {
            *o += r;
        }
    }
    for o in &mut out {
        *o *= scale;
    }
    Signal::new(grid, out)
}
