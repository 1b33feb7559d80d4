//! Compactly supported duals of B-spline Gabor frames.
//!
//! Janssen's condition for a real window `g_N` and a dual `h` supported in
//! `[-(2m-1) alpha/2, (2m-1) alpha/2]` becomes, for each `x` in
//! `[-alpha/2, alpha/2)`, a `(2m-1) x (2m-1)` system
//! `sum_k g_N(x + k alpha - l/beta) h(x + k alpha) = beta delta_{l0}`
//! in the unknowns `h(x + k alpha)`, `|k| < m`. The rows with `|l| >= m`
//! must vanish identically for the truncation to be exact.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::compact::{CompactSignal, DEFAULT_POINTS};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::signal::Signal;
use crate::window::WindowSpec;

/// Slices with a larger condition number are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e10;

/// Largest block size attempted; larger ones are beyond the proven regions.
pub const MAX_BLOCK: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSize {
    Auto,
    Fixed(usize),
}

/// Why a block size was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub m: usize,
    pub accepted: bool,
    pub reason: Option<String>,
    pub worst_x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactDual {
    pub dual: CompactSignal,
    pub m: usize,
    /// `[-(2m-1) alpha/2, (2m-1) alpha/2]`.
    pub support: (f64, f64),
    pub max_condition: f64,
    pub attempts: Vec<Attempt>,
}

struct Solved {
    /// `values[k + m - 1][i] = h(x_i + k alpha)`.
    values: Vec<Vec<f64>>,
    max_condition: f64,
}

fn solve_block(g: &WindowSpec, alpha: f64, beta: f64, m: usize, xs: &[f64]) -> std::result::Result<Solved, (String, f64)> {
    let size = 2 * m - 1;
    let mi = m as i64;
    let (_, g_hi) = g.support().expect("B-spline");
    let reach = ((2 * m - 1) as f64 * alpha / 2.0 + g_hi) * beta;
    let l_max = reach.ceil() as i64 + 1;
    let mut values = vec![vec![0.0; xs.len()]; size];
    let mut max_condition: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for l in (-l_max..=l_max).filter(|l| l.abs() >= mi) {
            for k in (1 - mi)..mi {
                let v = g.eval(x + k as f64 * alpha - l as f64 / beta);
                if v.abs() > 1e-14 {
                    return Err((format!("row l = {l} is not empty on the support"), x));
                }
            }
        }
        let mat = DMatrix::from_fn(size, size, |r, c| {
            let l = r as i64 - (mi - 1);
            let k = c as i64 - (mi - 1);
            g.eval(x + k as f64 * alpha - l as f64 / beta)
        });
        let sv = mat.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(cond < CONDITION_LIMIT) {
            return Err((format!("condition number {cond:e} exceeds {CONDITION_LIMIT:e}"), x));
        }
        max_condition = max_condition.max(cond);
        let mut rhs = nalgebra::DVector::zeros(size);
        rhs[m - 1] = beta;
        let sol = mat
            .lu()
            .solve(&rhs)
            .ok_or_else(|| ("LU factorization failed".to_string(), x))?;
        for r in 0..size {
            values[r][i] = sol[r];
        }
    }
    Ok(Solved { values, max_condition })
}

fn check_params(n: u32, alpha: f64, beta: f64) -> Result<WindowSpec> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("compact duals need N >= 2, got {n}")));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha and beta must be positive, got ({alpha}, {beta})")));
    }
    if alpha * beta >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha * beta = {} >= 1 admits no dual frame",
            alpha * beta
        )));
    }
    WindowSpec::bspline(n)
}

fn run(n: u32, alpha: f64, beta: f64, m: BlockSize, xs: &[f64]) -> Result<(usize, Solved, Vec<Attempt>)> {
    let g = check_params(n, alpha, beta)?;
    let candidates: Vec<usize> = match m {
        BlockSize::Auto => (1..=MAX_BLOCK).collect(),
        BlockSize::Fixed(0) => return Err(Error::InvalidArgument("block size m must be at least 1".into())),
        BlockSize::Fixed(m) if m > MAX_BLOCK => return Err(Error::BeyondProvenRegions { alpha, beta }),
        BlockSize::Fixed(m) => vec![m],
    };
    let mut attempts = Vec::new();
    for &mm in &candidates {
        match solve_block(&g, alpha, beta, mm, xs) {
            Ok(solved) => {
                attempts.push(Attempt {
                    m: mm,
                    accepted: true,
                    reason: None,
                    worst_x: None,
                });
                return Ok((mm, solved, attempts));
            }
            Err((reason, x)) => {
                if let BlockSize::Fixed(_) = m {
                    return Err(Error::SingularSlice { x, m: mm, reason });
                }
                attempts.push(Attempt {
                    m: mm,
                    accepted: false,
                    reason: Some(reason),
                    worst_x: Some(x),
                });
            }
        }
    }
    Err(Error::BeyondProvenRegions { alpha, beta })
}

/// Solves for the compactly supported dual of `g_N` on
/// [`DEFAULT_POINTS`] slices per `alpha`.
pub fn bspline_compact_dual(n: u32, alpha: f64, beta: f64, m: BlockSize) -> Result<CompactDual> {
    bspline_compact_dual_with(n, alpha, beta, m, DEFAULT_POINTS)
}

pub fn bspline_compact_dual_with(n: u32, alpha: f64, beta: f64, m: BlockSize, slices: usize) -> Result<CompactDual> {
    if slices == 0 {
        return Err(Error::InvalidArgument("need at least one slice".into()));
    }
    let step = alpha / slices as f64;
    let xs: Vec<f64> = (0..slices).map(|i| -0.5 * alpha + (i as f64 + 0.5) * step).collect();
    let (m, solved, attempts) = run(n, alpha, beta, m, &xs)?;
    let half = (2 * m - 1) as f64 * alpha / 2.0;
    let values: Vec<f64> = solved.values.into_iter().flatten().collect();
    let dual = CompactSignal::sampled(-half, step, values, format!("compact dual of bspline:{n} at ({alpha}, {beta}), m = {m}"))?;
    Ok(CompactDual {
        dual,
        m,
        support: (-half, half),
        max_condition: solved.max_condition,
        attempts,
    })
}

/// Runs the same solver at the sample points of a periodic grid, giving a
/// dual that is exact at every sample (no nearest-cell rounding).
pub fn compact_dual_on_grid(n: u32, lat: &Lattice, m: BlockSize) -> Result<(Signal, usize)> {
    let grid = *lat.grid();
    let a = lat.a() as i64;
    let j0 = grid.origin() as i64;
    let l = grid.len() as i64;
    // Offsets s with s * delta in [-alpha/2, alpha/2).
    let s_lo = -(a / 2);
    let offsets: Vec<i64> = (s_lo..s_lo + a).collect();
    let xs: Vec<f64> = offsets.iter().map(|&s| s as f64 * grid.delta()).collect();
    let (m, solved, _) = run(n, lat.alpha(), lat.beta(), m, &xs)?;
    let reach = (m as i64 - 1) * a + a;
    if 2 * reach > l {
        return Err(Error::Wraparound {
            tail: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let mut values = vec![num_complex::Complex64::new(0.0, 0.0); grid.len()];
    let mi = m as i64;
    for (row, k) in ((1 - mi)..mi).enumerate() {
        for (i, &s) in offsets.iter().enumerate() {
            let j = (j0 + s + k * a).rem_euclid(l) as usize;
            values[j] = num_complex::Complex64::new(solved.values[row][i], 0.0);
        }
    }
    Ok((Signal::new(grid, values)?, m))
}
