use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SampleGrid;
use crate::signal::Signal;

/// Default bound on the window mass lying beyond `T/2`.
pub const WRAPAROUND_TOLERANCE: f64 = 1e-6;

const MAX_BSPLINE_ORDER: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WindowFamily {
    /// `e^{-pi x^2}`
    Gaussian,
    /// `1 / cosh x`
    Sech,
    /// `e^{-|x|}`
    ExpTwoSided,
    /// `e^{-x}` for `x >= 0`, zero otherwise
    ExpOneSided,
    /// `chi_[0, c)`
    Indicator { c: f64 },
    /// Centered B-spline `g_N = g_1 * g_{N-1}`, `g_1 = chi_[-1/2, 1/2)`
    Bspline { n: u32 },
}

/// A window family together with a width: the window is `g(x / width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub family: WindowFamily,
    pub width: f64,
}

impl WindowSpec {
    pub fn new(family: WindowFamily) -> Result<Self> {
        Self::with_width(family, 1.0)
    }

    pub fn with_width(family: WindowFamily, width: f64) -> Result<Self> {
        let spec = WindowSpec { family, width };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian() -> Self {
        WindowSpec { family: WindowFamily::Gaussian, width: 1.0 }
    }

    pub fn sech() -> Self {
        WindowSpec { family: WindowFamily::Sech, width: 1.0 }
    }

    pub fn exp_two_sided() -> Self {
        WindowSpec { family: WindowFamily::ExpTwoSided, width: 1.0 }
    }

    pub fn exp_one_sided() -> Self {
        WindowSpec { family: WindowFamily::ExpOneSided, width: 1.0 }
    }

    pub fn indicator(c: f64) -> Result<Self> {
        Self::new(WindowFamily::Indicator { c })
    }

    pub fn bspline(n: u32) -> Result<Self> {
        Self::new(WindowFamily::Bspline { n })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidWindow(format!("width must be positive, got {}", self.width)));
        }
        match self.family {
            WindowFamily::Indicator { c } if !(c.is_finite() && c > 0.0) => {
                Err(Error::InvalidWindow(format!("indicator length must be positive, got {c}")))
            }
            WindowFamily::Bspline { n } if n == 0 || n > MAX_BSPLINE_ORDER => Err(
                Error::InvalidWindow(format!("B-spline order must be in 1..={MAX_BSPLINE_ORDER}, got {n}")),
            ),
            _ => Ok(()),
        }
    }

    /// Support `[lo, hi]` for compactly supported families.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self.family {
            WindowFamily::Indicator { c } => Some((0.0, c * self.width)),
            WindowFamily::Bspline { n } => {
                let h = 0.5 * n as f64 * self.width;
                Some((-h, h))
            }
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.family, WindowFamily::Gaussian | WindowFamily::Sech)
    }

    /// Closed-form value `g(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let u = x / self.width;
        match self.family {
            WindowFamily::Gaussian => (-PI * u * u).exp(),
            WindowFamily::Sech => 1.0 / u.cosh(),
            WindowFamily::ExpTwoSided => (-u.abs()).exp(),
            WindowFamily::ExpOneSided => {
                if u >= 0.0 {
                    (-u).exp()
                } else {
                    0.0
                }
            }
            WindowFamily::Indicator { c } => {
                if (0.0..c).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
            WindowFamily::Bspline { n } => bspline(n, u),
        }
    }

    /// Mass `delta * sum |g(x)|` over the continuation of the grid beyond `T/2`.
    pub fn tail_mass(&self, grid: &SampleGrid) -> f64 {
        let d = grid.delta();
        let half = 0.5 * grid.period();
        if let Some((lo, hi)) = self.support() {
            // Half-open sampling: the point x = -T/2 is on the grid.
            return if lo < -half || hi > half { f64::INFINITY } else { 0.0 };
        }
        let mut total = 0.0;
        let mut m = 0usize;
        loop {
            let x = half + m as f64 * d;
            let t = self.eval(x).abs() + self.eval(-x - d).abs();
            total += d * t;
            m += 1;
            if t < 1e-30 * total.max(1e-300) || t == 0.0 || m > 50_000_000 {
                break;
            }
        }
        total
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::gaussian()
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            WindowFamily::Gaussian => write!(f, "gaussian")?,
            WindowFamily::Sech => write!(f, "sech")?,
            WindowFamily::ExpTwoSided => write!(f, "exp2")?,
            WindowFamily::ExpOneSided => write!(f, "exp1")?,
            WindowFamily::Indicator { c } => write!(f, "indicator:{c}")?,
            WindowFamily::Bspline { n } => write!(f, "bspline:{n}")?,
        }
        if self.width != 1.0 {
            write!(f, "@{}", self.width)?;
        }
        Ok(())
    }
}

/// Parses `family[:param][@width]`, e.g. `gaussian`, `indicator:1`,
/// `bspline:4@0.1125`.
impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, width) = match s.split_once('@') {
            Some((b, w)) => (
                b,
                w.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidWindow(format!("bad width in {s:?}")))?,
            ),
            None => (s, 1.0),
        };
        let (name, param) = match body.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (body.trim(), None),
        };
        let need = |what: &str| {
            param.ok_or_else(|| Error::InvalidWindow(format!("{name} needs a {what}, e.g. {name}:2")))
        };
        let family = match name {
            "gaussian" | "gauss" => WindowFamily::Gaussian,
            "sech" => WindowFamily::Sech,
            "exp2" | "exp_two_sided" => WindowFamily::ExpTwoSided,
            "exp1" | "exp_one_sided" => WindowFamily::ExpOneSided,
            "indicator" | "box" => {
                let c = need("length")?
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidWindow(format!("bad indicator length in {s:?}")))?;
                WindowFamily::Indicator { c }
            }
            "bspline" => {
                let n = need("order")?
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidWindow(format!("bad B-spline order in {s:?}")))?;
                WindowFamily::Bspline { n }
            }
            other => return Err(Error::InvalidWindow(format!("unknown window family {other:?}"))),
        };
        if param.is_some() && !matches!(family, WindowFamily::Indicator { .. } | WindowFamily::Bspline { .. }) {
            return Err(Error::InvalidWindow(format!("{name} takes no parameter")));
        }
        WindowSpec::with_width(family, width)
    }
}

/// Samples a window on the grid with the default wraparound tolerance.
pub fn sample_window(spec: &WindowSpec, grid: &SampleGrid) -> Result<Signal> {
    sample_window_with_tolerance(spec, grid, WRAPAROUND_TOLERANCE)
}

/// Samples a window, rejecting it if more than `tolerance` of its mass lies
/// beyond half a period. B-splines of order above 4 are built by iterated
/// numerical convolution.
pub fn sample_window_with_tolerance(spec: &WindowSpec, grid: &SampleGrid, tolerance: f64) -> Result<Signal> {
    spec.validate()?;
    let tail = spec.tail_mass(grid);
    if tail > tolerance {
        return Err(Error::Wraparound { tail, tolerance });
    }
    match spec.family {
        WindowFamily::Bspline { n } if n > 4 => {
            let table = ConvolvedBspline::new(n, grid.delta() / spec.width);
            Ok(Signal::from_real_fn(*grid, |x| table.eval(x / spec.width)))
        }
        _ => Ok(Signal::from_real_fn(*grid, |x| spec.eval(x))),
    }
}

/// Closed forms for orders up to 4, truncated powers above.
fn bspline(n: u32, x: f64) -> f64 {
    let a = x.abs();
    match n {
        1 => {
            if (-0.5..0.5).contains(&x) {
                1.0
            } else {
                0.0
            }
        }
        2 => (1.0 - a).max(0.0),
        3 => {
            if a <= 0.5 {
                0.75 - a * a
            } else if a < 1.5 {
                0.5 * (1.5 - a) * (1.5 - a)
            } else {
                0.0
            }
        }
        4 => {
            if a < 1.0 {
                2.0 / 3.0 - a * a + 0.5 * a * a * a
            } else if a < 2.0 {
                (2.0 - a).powi(3) / 6.0
            } else {
                0.0
            }
        }
        _ => bspline_truncated_powers(n, x),
    }
}

/// `g_N(x) = 1/(N-1)! sum_k (-1)^k C(N,k) (x + N/2 - k)_+^{N-1}`.
pub(crate) fn bspline_truncated_powers(n: u32, x: f64) -> f64 {
    let half = 0.5 * n as f64;
    if x <= -half || x >= half {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for i in 1..n {
        fact *= i as f64;
    }
    for k in 0..=n {
        let t = x + half - k as f64;
        if t > 0.0 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * t.powi(n as i32 - 1);
        }
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    sum / fact
}

/// `g_N` tabulated on a fine grid by repeated convolution with `g_1`.
///
/// Each step integrates `g_{N-1}` over a unit interval using cumulative
/// Simpson sums on a grid whose nodes include all knots (multiples of 1/2),
/// starting from the cubic closed form.
struct ConvolvedBspline {
    n: u32,
    step: f64,
    values: Vec<f64>,
}

impl ConvolvedBspline {
    fn new(n: u32, unit_step: f64) -> Self {
        // Table step h = 1/(2 r), r a power of two, at most a quarter sample.
        let mut r = 32usize;
        while 1.0 / (2.0 * r as f64) > 0.25 * unit_step && r < 1 << 12 {
            r *= 2;
        }
        let step = 1.0 / (2.0 * r as f64);
        let values = Self::table(n, step);
        ConvolvedBspline { n, step, values }
    }

    /// Values at `u_i = -n/2 + i h`, `i = 0..=n/h`.
    fn table(n: u32, h: f64) -> Vec<f64> {
        let count = (n as f64 / h).round() as usize + 1;
        let half = 0.5 * n as f64;
        if n <= 4 {
            return (0..count).map(|i| bspline(n, -half + i as f64 * h)).collect();
        }
        let fine = Self::table(n - 1, 0.5 * h);
        // Cumulative Simpson integral at even indices of the fine table.
        let mut cum = vec![0.0; fine.len()];
        let mut i = 2;
        while i < fine.len() {
            cum[i] = cum[i - 2] + h / 6.0 * (fine[i - 2] + 4.0 * fine[i - 1] + fine[i]);
            cum[i - 1] = cum[i - 2];
            i += 2;
        }
        let last = fine.len() - 1;
        let per_unit = (1.0 / h).round() as isize;
        (0..count)
            .map(|i| {
                // u +- 1/2 map to fine indices 2i and 2i - 2/h.
                let hi = (2 * i as isize).clamp(0, last as isize) as usize;
                let lo = (2 * i as isize - 2 * per_unit).clamp(0, last as isize) as usize;
                cum[hi] - cum[lo]
            })
            .collect()
    }

    /// Four-point Lagrange interpolation in the table.
    fn eval(&self, u: f64) -> f64 {
        let half = 0.5 * self.n as f64;
        if u <= -half || u >= half {
            return 0.0;
        }
        let t = (u + half) / self.step;
        let last = self.values.len() - 1;
        let i = (t.floor() as isize - 1).clamp(0, last as isize - 3) as usize;
        let s = t - i as f64;
        let v = &self.values[i..i + 4];
        let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        v[0] * l0 + v[1] * l1 + v[2] * l2 + v[3] * l3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["gaussian", "sech", "exp2", "exp1", "indicator:1", "bspline:2", "bspline:4@0.1125", "gaussian@2"] {
            let w: WindowSpec = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
        assert!("bspline".parse::<WindowSpec>().is_err());
        assert!("bspline:0".parse::<WindowSpec>().is_err());
        assert!("indicator:-1".parse::<WindowSpec>().is_err());
        assert!("gaussian:3".parse::<WindowSpec>().is_err());
        assert!("hann".parse::<WindowSpec>().is_err());
    }

    #[test]
    fn closed_forms_match_truncated_powers() {
        for n in 2..=4 {
            for i in -300..300 {
                let x = i as f64 / 97.0;
                assert!((bspline(n, x) - bspline_truncated_powers(n, x)).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn convolution_matches_closed_form() {
        for n in 5..=8 {
            let table = ConvolvedBspline::new(n, 1.0 / 32.0);
            for i in -400..400 {
                let x = i as f64 / 101.0;
                let d = (table.eval(x) - bspline_truncated_powers(n, x)).abs();
                assert!(d < 1e-9, "n={n} x={x} d={d}");
            }
        }
    }

    #[test]
    fn bspline_partition_of_unity() {
        for n in 1..=6 {
            for i in 0..20 {
                let x = i as f64 / 20.0;
                let s: f64 = (-10..=10).map(|k| bspline(n, x - k as f64)).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tails() {
        let g = SampleGrid::default();
        assert!(WindowSpec::gaussian().tail_mass(&g) < 1e-12);
        let t = WindowSpec::sech().tail_mass(&g);
        assert!(t > 1e-9 && t < WRAPAROUND_TOLERANCE);
        assert!(sample_window(&"gaussian@10".parse().unwrap(), &g).is_err());
        assert!(sample_window(&WindowSpec::bspline(30).unwrap_or_default(), &g).is_ok());
        assert!(sample_window(&"bspline:8@5".parse().unwrap(), &g).is_err());
        assert!(sample_window(&WindowSpec::indicator(17.0).unwrap(), &g).is_err());
    }
}
