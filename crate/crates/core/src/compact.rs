//! Compactly supported functions on the real line and Janssen's duality test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::signal::Signal;
use crate::window::WindowSpec;

/// Default number of `x` points per `alpha`-interval.
pub const DEFAULT_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactKind {
    /// Evaluated from the closed form.
    Window { spec: WindowSpec },
    /// Cell values: sample `i` covers `[origin + i step, origin + (i+1) step)`.
    Sampled { origin: f64, step: f64, values: Vec<f64> },
}

/// A real function with known compact support, not periodized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactSignal {
    lo: f64,
    hi: f64,
    kind: CompactKind,
    provenance: String,
}

impl CompactSignal {
    pub fn from_window(spec: &WindowSpec) -> Result<Self> {
        spec.validate()?;
        let (lo, hi) = spec
            .support()
            .ok_or_else(|| Error::InvalidWindow(format!("{spec} is not compactly supported")))?;
        Ok(CompactSignal {
            lo,
            hi,
            kind: CompactKind::Window { spec: *spec },
            provenance: spec.to_string(),
        })
    }

    pub fn sampled(origin: f64, step: f64, values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if !(step > 0.0) || values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sampled compact signal needs a positive step and finite samples".into()));
        }
        Ok(CompactSignal {
            lo: origin,
            hi: origin + step * values.len() as f64,
            kind: CompactKind::Sampled { origin, step, values },
            provenance: provenance.into(),
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn kind(&self) -> &CompactKind {
        &self.kind
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Value at `x`, by closed form or nearest cell.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            CompactKind::Window { spec } => spec.eval(x),
            CompactKind::Sampled { origin, step, values } => {
                let t = ((x - origin) / step).floor();
                if t >= 0.0 && (t as usize) < values.len() {
                    values[t as usize]
                } else {
                    0.0
                }
            }
        }
    }

    /// Adds `other` pointwise (sampled representation on this signal's cells).
    pub fn perturbed(&self, delta: impl Fn(f64) -> f64) -> Result<Self> {
        match &self.kind {
            CompactKind::Sampled { origin, step, values } => {
                let values = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v + delta(origin + (i as f64 + 0.5) * step))
                    .collect();
                CompactSignal::sampled(*origin, *step, values, format!("{} (perturbed)", self.provenance))
            }
            CompactKind::Window { .. } => Err(Error::InvalidArgument("only sampled signals can be perturbed".into())),
        }
    }

    /// Samples onto a periodic grid; the support must fit in one period.
    pub fn to_signal(&self, grid: &SampleGrid) -> Result<Signal> {
        let half = 0.5 * grid.period();
        if self.lo < -half || self.hi > half {
            return Err(Error::Wraparound {
                tail: f64::INFINITY,
                tolerance: 0.0,
            });
        }
        Ok(Signal::from_real_fn(*grid, |x| self.eval(x)))
    }
}

/// Largest Janssen defect and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JanssenReport {
    pub residual: f64,
    pub worst_n: i64,
    pub worst_x: f64,
}

/// `max_{n, x} | sum_k conj(g(x - n/beta - k alpha)) h(x - k alpha) - beta delta_{n0} |`
/// over [`DEFAULT_POINTS`] points per period in `x`.
pub fn janssen_residual(g: &CompactSignal, h: &CompactSignal, alpha: f64, beta: f64) -> Result<f64> {
    Ok(janssen_report(g, h, alpha, beta, DEFAULT_POINTS)?.residual)
}

/// The sum is `alpha`-periodic in `x`, so it is evaluated at the cell midpoints
/// `-alpha/2 + (i + 1/2) alpha/points`, which line up with the cells of duals
/// produced by the compact dual solver.
pub fn janssen_report(g: &CompactSignal, h: &CompactSignal, alpha: f64, beta: f64, points: usize) -> Result<JanssenReport> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha and beta must be positive, got ({alpha}, {beta})"
        )));
    }
    if points == 0 {
        return Err(Error::InvalidArgument("need at least one x point".into()));
    }
    let (glo, ghi) = g.support();
    let (hlo, hhi) = h.support();
    let n_lo = ((hlo - ghi) * beta).floor() as i64 - 1;
    let n_hi = ((hhi - glo) * beta).ceil() as i64 + 1;
    let mut worst = JanssenReport {
        residual: 0.0,
        worst_n: 0,
        worst_x: 0.0,
    };
    for i in 0..points {
        let x = -0.5 * alpha + (i as f64 + 0.5) * alpha / points as f64;
        let k_lo = ((x - hhi) / alpha).floor() as i64 - 1;
        let k_hi = ((x - hlo) / alpha).ceil() as i64 + 1;
        for n in n_lo..=n_hi {
            let shift = n as f64 / beta;
            let mut s = 0.0;
            for k in k_lo..=k_hi {
                let y = x - k as f64 * alpha;
                let hv = h.eval(y);
                if hv != 0.0 {
                    s += g.eval(y - shift) * hv;
                }
            }
            let target = if n == 0 { beta } else { 0.0 };
            let d = (s - target).abs();
            if d > worst.residual {
                worst = JanssenReport {
                    residual: d,
                    worst_n: n,
                    worst_x: x,
                };
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_cell_lookup() {
        let s = CompactSignal::sampled(-1.0, 0.5, vec![1.0, 2.0, 3.0, 4.0], "t").unwrap();
        assert_eq!(s.eval(-1.0), 1.0);
        assert_eq!(s.eval(-0.26), 2.0);
        assert_eq!(s.eval(0.99), 4.0);
        assert_eq!(s.eval(1.0), 0.0);
        assert_eq!(s.eval(-1.01), 0.0);
        assert_eq!(s.support(), (-1.0, 1.0));
    }

    #[test]
    fn unbounded_windows_are_rejected() {
        assert!(CompactSignal::from_window(&WindowSpec::gaussian()).is_err());
    }
}
