//! Gabor systems on a lattice: analysis, synthesis, the frame operator and
//! everything derived from its spectrum.
//!
//! With `P = L/b`, the frame operator only couples samples `j, j'` with
//! `j = j' (mod P)`, so its matrix splits into `P` Hermitian blocks of size
//! `b`, block `r` acting on the samples `r, r + P, r + 2P, ...`. Translation
//! by `a` samples permutes the blocks, so the spectrum is already carried by
//! the first `gcd(a, P)` of them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::lattice::Lattice;
use crate::signal::Signal;

/// Above this length [`frame_bounds`] switches to Lanczos iteration.
pub const DENSE_LIMIT: usize = 2048;

/// Relative frame threshold: a system is a frame when `A > FRAME_THRESHOLD * B`.
pub const FRAME_THRESHOLD: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients `c[n, k]`, `n < L/a` (time), `k < L/b` (frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CoefficientArray {
    pub fn zeros(lat: &Lattice) -> Self {
        let (rows, cols) = (lat.time_count(), lat.freq_count());
        CoefficientArray {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows} x {cols} coefficients"),
                found: format!("{}", data.len()),
            });
        }
        Ok(CoefficientArray { rows, cols, data })
    }

    /// Unit coefficient at `(n, k)`.
    pub fn delta(lat: &Lattice, n: usize, k: usize) -> Self {
        let mut c = Self::zeros(lat);
        c.set(n, k, Complex64::new(1.0, 0.0));
        c
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.data[n * self.cols + k]
    }

    pub fn set(&mut self, n: usize, k: usize, v: Complex64) {
        self.data[n * self.cols + k] = v;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Plain `l^2` norm squared (no grid weight).
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `sum c conj(d)`.
    pub fn inner(&self, other: &CoefficientArray) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(c, d)| c * d.conj()).sum()
    }

    pub fn sub(&self, other: &CoefficientArray) -> Result<CoefficientArray> {
        self.check_shape(other)?;
        Ok(CoefficientArray {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &CoefficientArray) -> Result<CoefficientArray> {
        self.check_shape(other)?;
        Ok(CoefficientArray {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> CoefficientArray {
        CoefficientArray {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_shape(&self, other: &CoefficientArray) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} x {}", self.rows, self.cols),
                found: format!("{} x {}", other.rows, other.cols),
            });
        }
        Ok(())
    }
}

fn check_window(g: &Signal, lat: &Lattice) -> Result<()> {
    if g.grid().matches(lat.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// The atom `M_{k beta} T_{n alpha} g`.
pub fn gabor_atom(g: &Signal, lat: &Lattice, n: usize, k: usize) -> Signal {
    g.shift_samples((n * lat.a()) as isize).modulate(k as f64 * lat.beta())
}

fn parity(k: usize, b: usize) -> f64 {
    if (k * b).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c[n, k] = <f, M_{k beta} T_{n alpha} g>`, one length-`L/b` FFT per time
/// position.
pub fn analysis(g: &Signal, lat: &Lattice, f: &Signal) -> Result<CoefficientArray> {
    check_window(g, lat)?;
    f.check_grid(g)?;
    let l = lat.grid().len();
    let (a, b) = (lat.a(), lat.b());
    let m = lat.freq_count();
    let delta = lat.grid().delta();
    let gv = g.values();
    let fv = f.values();
    let rows: Vec<Vec<Complex64>> = (0..lat.time_count())
        .into_par_iter()
        .map(|n| {
            let mut folded = vec![ZERO; m];
            let shift = n * a;
            for j in 0..l {
                folded[j % m] += fv[j] * gv[(j + l - shift) % l].conj();
            }
            fft::forward(&mut folded);
            for (k, v) in folded.iter_mut().enumerate() {
                *v *= delta * parity(k, b);
            }
            folded
        })
        .collect();
    CoefficientArray::from_vec(lat.time_count(), m, rows.concat())
}

/// `sum_{n,k} c[n,k] M_{k beta} T_{n alpha} g`, the adjoint of [`analysis`]
/// for the unweighted coefficient pairing.
pub fn synthesis(g: &Signal, lat: &Lattice, c: &CoefficientArray) -> Result<Signal> {
    check_window(g, lat)?;
    if c.rows() != lat.time_count() || c.cols() != lat.freq_count() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} x {}", lat.time_count(), lat.freq_count()),
            found: format!("{} x {}", c.rows(), c.cols()),
        });
    }
    let l = lat.grid().len();
    let (a, b) = (lat.a(), lat.b());
    let m = lat.freq_count();
    let gv = g.values();
    let parts: Vec<Vec<Complex64>> = (0..lat.time_count())
        .into_par_iter()
        .map(|n| {
            let mut s: Vec<Complex64> = (0..m).map(|k| c.get(n, k) * parity(k, b)).collect();
            fft::inverse(&mut s);
            let shift = n * a;
            (0..l).map(|j| gv[(j + l - shift) % l] * s[j % m]).collect()
        })
        .collect();
    let mut out = vec![ZERO; l];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Signal::new(*lat.grid(), out)
}

/// `S f = synthesis(analysis(f))`.
pub fn frame_apply(g: &Signal, lat: &Lattice, f: &Signal) -> Result<Signal> {
    synthesis(g, lat, &analysis(g, lat, f)?)
}

/// Block `r` of the frame operator, on samples `r + p P`, `p < b`.
pub fn frame_operator_block(g: &Signal, lat: &Lattice, r: usize) -> DMatrix<Complex64> {
    let l = lat.grid().len();
    let (a, b) = (lat.a(), lat.b());
    let period = l / b;
    let nt = lat.time_count();
    let gv = g.values();
    let weight = lat.grid().delta() * period as f64;
    let samples = DMatrix::from_fn(b, nt, |p, n| gv[(r + p * period + l - n * a) % l]);
    (&samples * samples.adjoint()) * Complex64::new(weight, 0.0)
}

/// All `L/b` diagonal blocks of the frame operator.
pub fn frame_operator_blocks(g: &Signal, lat: &Lattice) -> Vec<DMatrix<Complex64>> {
    (0..lat.grid().len() / lat.b())
        .into_par_iter()
        .map(|r| frame_operator_block(g, lat, r))
        .collect()
}

/// The full `L x L` matrix assembled atom by atom. Quadratic memory; meant
/// for small grids and cross-checks.
pub fn frame_operator_matrix(g: &Signal, lat: &Lattice) -> Result<DMatrix<Complex64>> {
    check_window(g, lat)?;
    let l = lat.grid().len();
    let delta = lat.grid().delta();
    let mut s = DMatrix::<Complex64>::zeros(l, l);
    for n in 0..lat.time_count() {
        for k in 0..lat.freq_count() {
            let atom = gabor_atom(g, lat, n, k);
            let v = nalgebra::DVector::from_column_slice(atom.values());
            s += &v * v.adjoint() * Complex64::new(delta, 0.0);
        }
    }
    Ok(s)
}

fn is_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if is_real(m) {
        let re = m.map(|z| z.re);
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    }
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    if is_real(m) {
        let e = SymmetricEigen::new(m.map(|z| z.re));
        (
            e.eigenvalues.iter().copied().collect(),
            e.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        )
    } else {
        let e = SymmetricEigen::new(m.clone());
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    /// Dense eigendecomposition of the diagonal blocks.
    BlockDense,
    /// Lanczos iteration on [`frame_apply`].
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenInfo {
    pub method: EigenMethod,
    /// Blocks diagonalized (block method) or Krylov dimension (Lanczos).
    pub blocks: usize,
    pub block_size: usize,
    pub iterations: usize,
}

/// Optimal frame bounds of the finite model and the frame/non-frame call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    #[serde(rename = "A")]
    pub lower: f64,
    #[serde(rename = "B")]
    pub upper: f64,
    pub condition: f64,
    pub is_frame: bool,
    pub a: usize,
    pub b: usize,
    pub alpha: f64,
    pub beta: f64,
    pub redundancy: f64,
    pub eigensolver: EigenInfo,
}

impl FrameReport {
    fn new(lat: &Lattice, lower: f64, upper: f64, eigensolver: EigenInfo) -> Self {
        let lower = lower.max(0.0);
        let upper = upper.max(lower);
        FrameReport {
            lower,
            upper,
            condition: if lower > 0.0 { upper / lower } else { f64::INFINITY },
            is_frame: upper > 0.0 && lower > FRAME_THRESHOLD * upper,
            a: lat.a(),
            b: lat.b(),
            alpha: lat.alpha(),
            beta: lat.beta(),
            redundancy: lat.redundancy(),
            eigensolver,
        }
    }
}

fn gcd(mut x: usize, mut y: usize) -> usize {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

/// Extremal eigenvalues of the frame operator: block-dense up to
/// [`DENSE_LIMIT`] samples, Lanczos above.
pub fn frame_bounds(g: &Signal, lat: &Lattice) -> Result<FrameReport> {
    let method = if lat.grid().len() <= DENSE_LIMIT {
        EigenMethod::BlockDense
    } else {
        EigenMethod::Lanczos
    };
    frame_bounds_with(g, lat, method)
}

pub fn frame_bounds_with(g: &Signal, lat: &Lattice, method: EigenMethod) -> Result<FrameReport> {
    check_window(g, lat)?;
    match method {
        EigenMethod::BlockDense => {
            let period = lat.grid().len() / lat.b();
            let reps = gcd(lat.a(), period);
            let spectra: Vec<Vec<f64>> = (0..reps)
                .into_par_iter()
                .map(|r| hermitian_eigenvalues(&frame_operator_block(g, lat, r)))
                .collect();
            let all = spectra.iter().flatten();
            let lower = all.clone().copied().fold(f64::INFINITY, f64::min);
            let upper = all.copied().fold(f64::NEG_INFINITY, f64::max);
            let info = EigenInfo {
                method,
                blocks: reps,
                block_size: lat.b(),
                iterations: 0,
            };
            Ok(FrameReport::new(lat, lower, upper, info))
        }
        EigenMethod::Lanczos => {
            let (lower, upper, iterations) = lanczos_extremes(
                lat.grid().len(),
                |v| {
                    let f = Signal::new(*lat.grid(), v.to_vec()).expect("length matches");
                    frame_apply(g, lat, &f).expect("same grid").into_values()
                },
                1e-12,
            );
            let info = EigenInfo {
                method,
                blocks: iterations,
                block_size: lat.grid().len(),
                iterations,
            };
            Ok(FrameReport::new(lat, lower, upper, info))
        }
    }
}

/// Smallest and largest eigenvalue of a Hermitian operator by Lanczos with
/// full reorthogonalization. Returns `(min, max, iterations)`.
pub fn lanczos_extremes(n: usize, apply: impl Fn(&[Complex64]) -> Vec<Complex64>, tol: f64) -> (f64, f64, usize) {
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(a, b)| a * b.conj()).sum() };
    let norm = |x: &[Complex64]| dot(x, x).re.sqrt();
    let max_iter = n.min(600);
    // Deterministic start vector with energy in every sample.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let q0n = norm(&q);
    q.iter_mut().for_each(|z| *z /= q0n);
    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut result = (0.0, 0.0);
    for k in 0..max_iter {
        let mut w = apply(&basis[k]);
        let alpha = dot(&w, &basis[k]).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for qv in &basis {
                let c = dot(&w, qv);
                w.iter_mut().zip(qv).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = norm(&w);
        let dim = k + 1;
        let t = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let e = SymmetricEigen::new(t);
        let (mut imin, mut imax) = (0, 0);
        for i in 0..dim {
            if e.eigenvalues[i] < e.eigenvalues[imin] {
                imin = i;
            }
            if e.eigenvalues[i] > e.eigenvalues[imax] {
                imax = i;
            }
        }
        let (lo, hi) = (e.eigenvalues[imin], e.eigenvalues[imax]);
        result = (lo, hi);
        let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
        let res_lo = (beta * e.eigenvectors[(dim - 1, imin)]).abs();
        let res_hi = (beta * e.eigenvectors[(dim - 1, imax)]).abs();
        if beta <= 1e-13 * scale || (res_lo <= tol * scale && res_hi <= tol * scale) {
            return (lo, hi, dim);
        }
        betas.push(beta);
        basis.push(w.into_iter().map(|z| z / beta).collect());
    }
    (result.0, result.1, max_iter)
}

/// Applies `phi(S)` to `g` block by block, where `phi` acts on eigenvalues.
fn apply_spectral(g: &Signal, lat: &Lattice, phi: impl Fn(f64) -> f64 + Sync) -> Result<Signal> {
    check_window(g, lat)?;
    let report = frame_bounds_with(g, lat, EigenMethod::BlockDense)?;
    if !report.is_frame {
        return Err(Error::NotAFrame {
            lower: report.lower,
            threshold: FRAME_THRESHOLD * report.upper,
        });
    }
    let l = lat.grid().len();
    let b = lat.b();
    let period = l / b;
    let pieces: Vec<Vec<Complex64>> = (0..period)
        .into_par_iter()
        .map(|r| {
            let block = frame_operator_block(g, lat, r);
            let (vals, vecs) = hermitian_eigen(&block);
            let rhs = nalgebra::DVector::from_fn(b, |p, _| g.values()[r + p * period]);
            let coeff = vecs.adjoint() * rhs;
            let scaled = nalgebra::DVector::from_fn(b, |i, _| coeff[i] * phi(vals[i].max(report.lower)));
            (vecs * scaled).iter().copied().collect()
        })
        .collect();
    let mut out = vec![ZERO; l];
    for (r, piece) in pieces.iter().enumerate() {
        for (p, v) in piece.iter().enumerate() {
            out[r + p * period] = *v;
        }
    }
    Signal::new(*lat.grid(), out)
}

/// Canonical dual window `S^{-1} g`.
pub fn canonical_dual(g: &Signal, lat: &Lattice) -> Result<Signal> {
    apply_spectral(g, lat, |l| 1.0 / l)
}

/// Canonical tight window `S^{-1/2} g`; its Gabor system is Parseval.
pub fn canonical_tight(g: &Signal, lat: &Lattice) -> Result<Signal> {
    apply_spectral(g, lat, |l| 1.0 / l.sqrt())
}

/// `sum <f, pi h> pi g` over the lattice: reconstruction from `h`-coefficients.
pub fn reconstruct(f: &Signal, g: &Signal, h: &Signal, lat: &Lattice) -> Result<Signal> {
    synthesis(g, lat, &analysis(h, lat, f)?)
}

/// Outcome of [`least_norm_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastNormReport {
    pub trials: usize,
    /// `||c~||^2` for the canonical coefficients.
    pub canonical_norm_sqr: f64,
    /// Relative reconstruction error of the canonical coefficients.
    pub reconstruction_error: f64,
    /// Smallest `||c||^2 - ||c~||^2` over the perturbed trials.
    pub min_excess: f64,
    /// Largest `| (||c||^2 - ||c~||^2) - ||c - c~||^2 |`, relative to `||c~||^2`.
    pub max_pythagoras_defect: f64,
    /// Largest relative error of `synthesis(c)` against `f` over trials.
    pub max_synthesis_error: f64,
    /// Excess for a zero perturbation (exactly 0).
    pub zero_perturbation_excess: f64,
    pub all_strict: bool,
}

/// Checks that the canonical coefficients `c~ = analysis(S^{-1} g, f)` have
/// least norm among all coefficients that synthesize `f`, by adding random
/// vectors from the kernel of the synthesis operator.
pub fn least_norm_check(f: &Signal, g: &Signal, lat: &Lattice, trials: usize, seed: u64) -> Result<LeastNormReport> {
    if lat.redundancy() <= 1.0 {
        return Err(Error::Degenerate(format!(
            "redundancy {} leaves no kernel for the synthesis operator",
            lat.redundancy()
        )));
    }
    let dual = canonical_dual(g, lat)?;
    let canonical = analysis(&dual, lat, f)?;
    let cnorm = canonical.norm_sqr();
    let fnorm = f.norm().max(f64::MIN_POSITIVE);
    let reconstruction_error = synthesis(g, lat, &canonical)?.sub(f)?.norm() / fnorm;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_excess = f64::INFINITY;
    let mut max_defect: f64 = 0.0;
    let mut max_syn: f64 = 0.0;
    let mut all_strict = true;
    for _ in 0..trials {
        let mut d = CoefficientArray::zeros(lat);
        for v in d.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        // Remove the component in the range of the analysis operator.
        let projected = analysis(&dual, lat, &synthesis(g, lat, &d)?)?;
        let kernel = d.sub(&projected)?;
        let c = canonical.add(&kernel)?;
        let excess = c.norm_sqr() - cnorm;
        let dist = c.sub(&canonical)?.norm_sqr();
        min_excess = min_excess.min(excess);
        max_defect = max_defect.max((excess - dist).abs() / cnorm.max(f64::MIN_POSITIVE));
        max_syn = max_syn.max(synthesis(g, lat, &c)?.sub(f)?.norm() / fnorm);
        if excess <= 0.0 {
            all_strict = false;
        }
    }
    Ok(LeastNormReport {
        trials,
        canonical_norm_sqr: cnorm,
        reconstruction_error,
        min_excess,
        max_pythagoras_defect: max_defect,
        max_synthesis_error: max_syn,
        zero_perturbation_excess: canonical.norm_sqr() - cnorm,
        all_strict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampleGrid;
    use crate::window::{sample_window, WindowSpec};

    #[test]
    fn analysis_matches_direct_inner_products() {
        let grid = SampleGrid::new(48, 0.25).unwrap();
        let lat = Lattice::new(grid, 4, 6).unwrap();
        let g = sample_window(&WindowSpec::gaussian(), &grid).unwrap();
        let f = Signal::from_fn(grid, |x| Complex64::new((x * 0.7).cos(), (x * 0.3).sin()) * (-0.1 * x * x).exp());
        let c = analysis(&g, &lat, &f).unwrap();
        for n in 0..lat.time_count() {
            for k in 0..lat.freq_count() {
                let direct = f.inner(&gabor_atom(&g, &lat, n, k)).unwrap();
                assert!((direct - c.get(n, k)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn blocks_match_full_matrix() {
        let grid = SampleGrid::new(48, 0.25).unwrap();
        let lat = Lattice::new(grid, 6, 4).unwrap();
        let g = sample_window(&WindowSpec::sech(), &grid).unwrap_or_else(|_| {
            Signal::from_real_fn(grid, |x| 1.0 / x.cosh())
        });
        let full = frame_operator_matrix(&g, &lat).unwrap();
        let period = 48 / 4;
        for (r, block) in frame_operator_blocks(&g, &lat).iter().enumerate() {
            for p in 0..4 {
                for q in 0..4 {
                    assert!((block[(p, q)] - full[(r + p * period, r + q * period)]).norm() < 1e-13);
                }
            }
        }
        // Off-block entries vanish.
        assert!(full[(0, 1)].norm() < 1e-13);
    }

    #[test]
    fn lanczos_agrees_with_blocks() {
        let grid = SampleGrid::new(256, 1.0 / 8.0).unwrap();
        let lat = Lattice::new(grid, 4, 8).unwrap();
        let g = sample_window(&WindowSpec::gaussian(), &grid).unwrap();
        let dense = frame_bounds_with(&g, &lat, EigenMethod::BlockDense).unwrap();
        let iter = frame_bounds_with(&g, &lat, EigenMethod::Lanczos).unwrap();
        assert!((dense.lower - iter.lower).abs() < 1e-9 * dense.upper);
        assert!((dense.upper - iter.upper).abs() < 1e-9 * dense.upper);
    }
}
