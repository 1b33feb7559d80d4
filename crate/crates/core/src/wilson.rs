//! Wilson systems built from Gabor windows.
//!
//! The classical system (`beta = 1/2`) uses the real form
//! `sqrt2 cos(2 pi m x) g(x - j/2)` for `j + m` even and the sine form for
//! `j + m` odd, plus plain translates `g(x - j)` for `m = 0`. The general
//! system for `beta` in `[1/4, 1/2]` uses
//! `sqrt(beta) T_{beta j}(M_m + (-1)^{j+m} M_{-m}) g` and
//! `sqrt(2 beta) T_{2 beta j} g`. On the periodic grid `m` runs up to the
//! Nyquist frequency `N = 1/(2 delta)`, whose atoms keep a single term.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export;
use crate::fft::cis_turns;
use crate::frame::canonical_tight;
use crate::grid::SampleGrid;
use crate::lattice::Lattice;
use crate::signal::Signal;
use crate::window::{sample_window, WindowSpec};
use crate::zak::{zak, ZakProfile};

/// Residual below which a system counts as Parseval or orthonormal.
pub const WILSON_THRESHOLD: f64 = 1e-8;

/// Which lattice constant of the source Gabor system is `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilsonReading {
    /// Source system has time step `beta` and frequency step 1.
    #[default]
    TimeStep,
    /// Source system has time step 1 and frequency step `beta`; the
    /// construction runs on the Fourier transform and is mapped back.
    FrequencyStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilsonVariant {
    Classical,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WilsonIndex {
    pub j: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilsonSystem {
    beta: f64,
    variant: WilsonVariant,
    reading: WilsonReading,
    grid: SampleGrid,
    indices: Vec<WilsonIndex>,
    atoms: Vec<Signal>,
}

impl WilsonSystem {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn variant(&self) -> WilsonVariant {
        self.variant
    }

    pub fn reading(&self) -> WilsonReading {
        self.reading
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn indices(&self) -> &[WilsonIndex] {
        &self.indices
    }

    pub fn atoms(&self) -> &[Signal] {
        &self.atoms
    }

    pub fn atom(&self, j: usize, m: usize) -> Option<&Signal> {
        self.indices
            .iter()
            .position(|ix| ix.j == j && ix.m == m)
            .map(|p| &self.atoms[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (WilsonIndex, &Signal)> {
        self.indices.iter().copied().zip(self.atoms.iter())
    }

    /// Per-atom record for export.
    pub fn manifest(&self) -> WilsonManifest {
        WilsonManifest {
            variant: self.variant,
            reading: self.reading,
            beta: self.beta,
            len: self.grid.len(),
            delta: self.grid.delta(),
            atoms: self
                .iter()
                .map(|(ix, s)| ManifestEntry {
                    j: ix.j,
                    m: ix.m,
                    file: atom_file_name(ix),
                    norm: s.norm(),
                })
                .collect(),
        }
    }

    /// `x,re,im` table of one atom.
    pub fn atom_csv(&self, position: usize) -> String {
        let s = &self.atoms[position];
        let rows = s.values().iter().enumerate().map(|(i, v)| {
            vec![
                export::csv_number(self.grid.x(i)),
                export::csv_number(v.re),
                export::csv_number(v.im),
            ]
        });
        export::csv(&["x", "re", "im"], rows)
    }
}

pub fn atom_file_name(ix: WilsonIndex) -> String {
    format!("atom_j{:05}_m{:05}.csv", ix.j, ix.m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub j: usize,
    pub m: usize,
    pub file: String,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilsonManifest {
    pub variant: WilsonVariant,
    pub reading: WilsonReading,
    pub beta: f64,
    pub len: usize,
    pub delta: f64,
    pub atoms: Vec<ManifestEntry>,
}

fn nyquist(grid: &SampleGrid) -> Result<usize> {
    let n = 0.5 / grid.delta();
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-9 * r {
        return Err(Error::Unrepresentable(format!(
            "Nyquist frequency 1/(2 delta) = {n} is not an integer"
        )));
    }
    Ok(r as usize)
}

/// Checks that `beta` is a whole number of samples and divides the period,
/// returning `(samples per beta, shifts per period)`.
fn beta_steps(grid: &SampleGrid, beta: f64) -> Result<(usize, usize)> {
    if !(beta > 0.0 && beta <= 0.5) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1/2], got {beta}")));
    }
    let s = grid
        .samples_in(beta)
        .ok_or_else(|| Error::Unrepresentable(format!("beta = {beta} is not a whole number of samples")))?;
    if !grid.len().is_multiple_of(s) {
        return Err(Error::Unrepresentable(format!("beta = {beta} does not divide the period {}", grid.period())));
    }
    Ok((s, grid.len() / s))
}

/// Source lattice of the Wilson construction.
pub fn wilson_lattice(grid: SampleGrid, beta: f64, reading: WilsonReading) -> Result<Lattice> {
    match reading {
        WilsonReading::TimeStep => Lattice::from_physical(grid, beta, 1.0),
        WilsonReading::FrequencyStep => Lattice::from_physical(grid, 1.0, beta),
    }
}

/// Canonical tight window of the source Gabor system, scaled to unit norm.
/// The Gabor system is then tight with bound `1/beta`.
pub fn make_wilson_window(spec: &WindowSpec, beta: f64, grid: SampleGrid, reading: WilsonReading) -> Result<Signal> {
    let g = sample_window(spec, &grid)?;
    wilson_window_from(&g, beta, reading)
}

/// [`make_wilson_window`] for an already sampled window.
pub fn wilson_window_from(g: &Signal, beta: f64, reading: WilsonReading) -> Result<Signal> {
    let lat = wilson_lattice(*g.grid(), beta, reading)?;
    canonical_tight(g, &lat)?.normalized()
}

/// Classical Wilson system of `g` (`beta = 1/2`), in the real cosine/sine form.
pub fn build_wilson_classical(g: &Signal) -> Result<WilsonSystem> {
    let grid = *g.grid();
    let half = grid
        .samples_in(0.5)
        .ok_or_else(|| Error::Unrepresentable("shift 1/2 is not a whole number of samples".into()))?;
    let n = nyquist(&grid)?;
    let shifts = grid.len() / half;
    if !grid.len().is_multiple_of(half) || !shifts.is_multiple_of(2) {
        return Err(Error::Unrepresentable(format!("period {} is not an integer", grid.period())));
    }
    let mut indices: Vec<WilsonIndex> = (0..shifts / 2).map(|j| WilsonIndex { j, m: 0 }).collect();
    for m in 1..n {
        indices.extend((0..shifts).map(|j| WilsonIndex { j, m }));
    }
    indices.extend((0..shifts).filter(|j| (j + n) % 2 == 0).map(|j| WilsonIndex { j, m: n }));
    let sqrt2 = std::f64::consts::SQRT_2;
    let atoms = indices
        .par_iter()
        .map(|ix| {
            if ix.m == 0 {
                return g.shift_samples((2 * ix.j * half) as isize);
            }
            let shifted = g.shift_samples((ix.j * half) as isize);
            if ix.m == n {
                return shifted.modulate(n as f64);
            }
            let even = (ix.j + ix.m) % 2 == 0;
            let values = shifted
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let c = cis_turns(ix.m as f64 * grid.x(i));
                    v * sqrt2 * if even { c.re } else { c.im }
                })
                .collect();
            Signal::new(grid, values).expect("same grid")
        })
        .collect();
    Ok(WilsonSystem {
        beta: 0.5,
        variant: WilsonVariant::Classical,
        reading: WilsonReading::TimeStep,
        grid,
        indices,
        atoms,
    })
}

fn general_time_step(g: &Signal, beta: f64) -> Result<(Vec<WilsonIndex>, Vec<Signal>)> {
    let grid = *g.grid();
    let (s, shifts) = beta_steps(&grid, beta)?;
    let n = nyquist(&grid)?;
    let plain = 2 * s;
    if !grid.len().is_multiple_of(plain) {
        return Err(Error::Unrepresentable(format!("2 beta = {} does not divide the period", 2.0 * beta)));
    }
    let mut indices: Vec<WilsonIndex> = (0..grid.len() / plain).map(|j| WilsonIndex { j, m: 0 }).collect();
    for m in 1..n {
        indices.extend((0..shifts).map(|j| WilsonIndex { j, m }));
    }
    indices.extend((0..shifts).filter(|j| (j + n) % 2 == 0).map(|j| WilsonIndex { j, m: n }));

    // (M_m + M_{-m}) g and (M_m - M_{-m}) g, before translation.
    let pairs: Vec<(Signal, Signal)> = (0..n)
        .into_par_iter()
        .map(|m| {
            let p = g.modulate(m as f64);
            let q = g.modulate(-(m as f64));
            (p.add(&q).expect("same grid"), p.sub(&q).expect("same grid"))
        })
        .collect();
    let c0 = (2.0 * beta).sqrt();
    let c1 = beta.sqrt();
    let nyq = g.modulate(n as f64).scale(c0);
    let atoms = indices
        .par_iter()
        .map(|ix| {
            if ix.m == 0 {
                return g.shift_samples((ix.j * plain) as isize).scale(c0);
            }
            if ix.m == n {
                return nyq.shift_samples((ix.j * s) as isize);
            }
            let (sum, diff) = &pairs[ix.m];
            let base = if (ix.j + ix.m) % 2 == 0 { sum } else { diff };
            base.shift_samples((ix.j * s) as isize).scale(c1)
        })
        .collect();
    Ok((indices, atoms))
}

/// General Wilson system of `g` for `beta` in `(0, 1/2]`. With
/// [`WilsonReading::FrequencyStep`] the time-step construction is applied to
/// the Fourier transform of `g` and every atom is transformed back.
pub fn build_wilson_general(g: &Signal, beta: f64, reading: WilsonReading) -> Result<WilsonSystem> {
    let grid = *g.grid();
    let (indices, atoms) = match reading {
        WilsonReading::TimeStep => general_time_step(g, beta)?,
        WilsonReading::FrequencyStep => {
            let (indices, atoms) = general_time_step(&g.fourier(), beta)?;
            (indices, atoms.par_iter().map(Signal::inverse_fourier).collect())
        }
    };
    Ok(WilsonSystem {
        beta,
        variant: WilsonVariant::General,
        reading,
        grid,
        indices,
        atoms,
    })
}

/// Real and imaginary parts of the `L x n` atom matrix.
fn split_atoms(w: &WilsonSystem) -> (DMatrix<f64>, Option<DMatrix<f64>>, Option<DMatrix<f64>>) {
    let l = w.grid.len();
    let k = w.atoms.len();
    let peaks: Vec<(f64, f64)> = w
        .atoms
        .iter()
        .map(|a| {
            let r = a.values().iter().map(|v| v.re.abs()).fold(0.0, f64::max);
            let i = a.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
            (r, i)
        })
        .collect();
    // Columns that are purely real or purely imaginary give a real outer
    // product sum; otherwise keep both parts.
    let mixed = peaks.iter().any(|&(r, i)| r.min(i) > 1e-14 * r.max(i));
    if mixed {
        let re = DMatrix::from_fn(l, k, |i, c| w.atoms[c].values()[i].re);
        let im = DMatrix::from_fn(l, k, |i, c| w.atoms[c].values()[i].im);
        (DMatrix::zeros(0, 0), Some(re), Some(im))
    } else {
        // Rotate imaginary columns onto the real axis; outer products are unchanged.
        let merged = DMatrix::from_fn(l, k, |i, c| {
            let v = w.atoms[c].values()[i];
            if peaks[c].0 >= peaks[c].1 {
                v.re
            } else {
                v.im
            }
        });
        (merged, None, None)
    }
}

fn hermitian_norm(re: DMatrix<f64>, im: Option<DMatrix<f64>>) -> f64 {
    match im {
        None => {
            let e = SymmetricEigen::new(re).eigenvalues;
            e.iter().fold(0.0, |m, v| m.max(v.abs()))
        }
        Some(im) => {
            let n = re.nrows();
            let h = DMatrix::from_fn(n, n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
            let e = SymmetricEigen::new(h).eigenvalues;
            e.iter().fold(0.0, |m, v| m.max(v.abs()))
        }
    }
}

/// `|| delta sum psi psi^* - I ||` in operator norm, from the dense frame
/// operator of the system.
pub fn wilson_parseval_residual(w: &WilsonSystem) -> f64 {
    let d = w.grid.delta();
    let l = w.grid.len();
    let (merged, re, im) = split_atoms(w);
    let (mut kr, ki) = match (re, im) {
        (Some(x), Some(y)) => {
            let kr = (&x * x.transpose() + &y * y.transpose()) * d;
            let ki = (&y * x.transpose() - &x * y.transpose()) * d;
            (kr, Some(ki))
        }
        _ => ((&merged * merged.transpose()) * d, None),
    };
    for i in 0..l {
        kr[(i, i)] -= 1.0;
    }
    hermitian_norm(kr, ki)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonOnbReport {
    pub atoms: usize,
    /// `max |Gram - I|` over all entries.
    pub gram_residual: f64,
    /// `max | ||psi||^2 - 1 |`.
    pub unit_norm_defect: f64,
    /// Largest off-diagonal `|<psi, psi'>|`.
    pub max_cross: f64,
    pub parseval_residual: f64,
    pub is_onb: bool,
    pub is_parseval: bool,
}

/// Gram matrix check of all atoms, together with the Parseval residual.
pub fn wilson_onb_report(w: &WilsonSystem) -> WilsonOnbReport {
    let d = w.grid.delta();
    let (merged, re, im) = split_atoms(w);
    let gram_abs = match (re, im) {
        (Some(x), Some(y)) => {
            let gr = (x.transpose() * &x + y.transpose() * &y) * d;
            let gi = (x.transpose() * &y - y.transpose() * &x) * d;
            DMatrix::from_fn(gr.nrows(), gr.ncols(), |i, j| Complex64::new(gr[(i, j)], gi[(i, j)]))
        }
        _ => ((merged.transpose() * &merged) * d).map(|v| Complex64::new(v, 0.0)),
    };
    let n = gram_abs.nrows();
    let mut gram_residual: f64 = 0.0;
    let mut unit_norm_defect: f64 = 0.0;
    let mut max_cross: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = gram_abs[(i, j)];
            if i == j {
                let e = (v.re - 1.0).abs().max(v.im.abs());
                unit_norm_defect = unit_norm_defect.max(e);
                gram_residual = gram_residual.max(e);
            } else {
                max_cross = max_cross.max(v.norm());
                gram_residual = gram_residual.max(v.norm());
            }
        }
    }
    let parseval_residual = wilson_parseval_residual(w);
    WilsonOnbReport {
        atoms: n,
        gram_residual,
        unit_norm_defect,
        max_cross,
        parseval_residual,
        is_onb: gram_residual < WILSON_THRESHOLD,
        is_parseval: parseval_residual < WILSON_THRESHOLD,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZakOnbReport {
    pub min: f64,
    pub max: f64,
    /// `max |value - 2|`.
    pub deviation: f64,
    pub profile: ZakProfile,
}

/// Evaluates `|Z ghat(x, xi)|^2 + |Z ghat(x, xi + 1/2)|^2` on the discrete
/// Zak grid of the Fourier transform; a unit-norm `g` whose classical Wilson
/// system is orthonormal gives the constant 2.
pub fn zak_onb_criterion(g: &Signal) -> Result<ZakOnbReport> {
    let gh = g.fourier();
    let grid = *gh.grid();
    let k = grid
        .samples_in(1.0)
        .ok_or_else(|| Error::Unrepresentable(format!("the period {} is not an integer", g.grid().period())))?;
    if !grid.len().is_multiple_of(2 * k) {
        return Err(Error::Unrepresentable(format!(
            "1/delta = {} must be even for the half shift",
            1.0 / g.grid().delta()
        )));
    }
    let values = zak(&gh, k)?.half_shift_sums()?;
    let profile = ZakProfile::from_values(&values);
    let deviation = values.iter().fold(0.0_f64, |m, v| m.max((v - 2.0).abs()));
    Ok(ZakOnbReport {
        min: profile.min,
        max: profile.max,
        deviation,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::frame_bounds;

    fn grid() -> SampleGrid {
        SampleGrid::new(256, 1.0 / 16.0).unwrap()
    }

    #[test]
    fn classical_count_and_realness() {
        let g = sample_window(&WindowSpec::gaussian(), &grid()).unwrap();
        let w = build_wilson_classical(&g).unwrap();
        assert_eq!(w.len(), 256);
        for a in w.atoms() {
            assert!(a.values().iter().all(|v| v.im.abs() < 1e-12));
        }
    }

    #[test]
    fn tight_window_gives_onb() {
        let g = make_wilson_window(&WindowSpec::gaussian(), 0.5, grid(), WilsonReading::TimeStep).unwrap();
        let lat = wilson_lattice(grid(), 0.5, WilsonReading::TimeStep).unwrap();
        let r = frame_bounds(&g, &lat).unwrap();
        assert!((r.lower - 2.0).abs() < 1e-10 && (r.upper - 2.0).abs() < 1e-10);
        let rep = wilson_onb_report(&build_wilson_classical(&g).unwrap());
        assert!(rep.is_onb, "{rep:?}");
        assert!(rep.is_parseval);
    }

    #[test]
    fn raw_gaussian_fails() {
        let g = sample_window(&WindowSpec::gaussian(), &grid()).unwrap().normalized().unwrap();
        let w = build_wilson_classical(&g).unwrap();
        assert!(wilson_parseval_residual(&w) > 0.01);
    }

    #[test]
    fn general_half_matches_classical_in_magnitude() {
        let g = make_wilson_window(&WindowSpec::gaussian(), 0.5, grid(), WilsonReading::TimeStep).unwrap();
        let c = build_wilson_classical(&g).unwrap();
        let w = build_wilson_general(&g, 0.5, WilsonReading::TimeStep).unwrap();
        assert_eq!(c.len(), w.len());
        for (ix, a) in c.iter() {
            let b = w.atom(ix.j, ix.m).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x.norm() - y.norm()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zak_criterion_value_two() {
        let g = make_wilson_window(&WindowSpec::gaussian(), 0.5, grid(), WilsonReading::TimeStep).unwrap();
        let z = zak_onb_criterion(&g).unwrap();
        assert!(z.deviation < 1e-6, "{z:?}");
    }
}
