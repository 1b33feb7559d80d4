//! Frame-set maps over a rectangle of `(alpha, beta)` values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export;
use crate::frame::{frame_bounds, FrameReport};
use crate::grid::SampleGrid;
use crate::lattice::make_lattice;
use crate::region::{classify_point_g2, FrameClass, RegionLabel};
use crate::window::{sample_window_with_tolerance, WindowFamily, WindowSpec, WRAPAROUND_TOLERANCE};

/// Absolute lower-bound threshold for cells on degenerate lines.
pub const RED_LINE_THRESHOLD: f64 = 1e-4;

/// A closed interval `[lo, hi]` split into `resolution` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidArgument(format!("range must satisfy 0 <= lo < hi, got {lo}..{hi}")));
        }
        Ok(Range { lo, hi })
    }

    /// Midpoint of cell `i` of `n`.
    pub fn center(&self, i: usize, n: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * (self.hi - self.lo) / n as f64
    }

    pub fn spacing(&self, n: usize) -> f64 {
        (self.hi - self.lo) / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Cells whose snap error exceeds this are marked unsnappable.
    pub snap_tolerance: Option<f64>,
    pub wraparound_tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            snap_tolerance: None,
            wraparound_tolerance: WRAPAROUND_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    /// Column (alpha index).
    pub i: usize,
    /// Row (beta index).
    pub j: usize,
    pub alpha_target: f64,
    pub beta_target: f64,
    pub alpha_snap: f64,
    pub beta_snap: f64,
    pub alpha_error: f64,
    pub beta_error: f64,
    pub report: Option<FrameReport>,
    /// Region of `g_2` at the snapped point, for `bspline:2` scans.
    pub label: Option<RegionLabel>,
    pub unsnappable: Option<String>,
}

impl ScanCell {
    pub fn is_frame(&self) -> Option<bool> {
        self.report.map(|r| r.is_frame)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSetMap {
    pub window: WindowSpec,
    pub grid: SampleGrid,
    pub alpha_range: Range,
    pub beta_range: Range,
    pub resolution: usize,
    /// Row-major in `(j, i)`: `cells[j * resolution + i]`.
    pub cells: Vec<ScanCell>,
}

fn is_hat(spec: &WindowSpec) -> bool {
    spec.family == WindowFamily::Bspline { n: 2 } && spec.width == 1.0
}

pub fn scan_frame_set(spec: &WindowSpec, alpha: Range, beta: Range, resolution: usize, grid: SampleGrid) -> Result<FrameSetMap> {
    scan_frame_set_with(spec, alpha, beta, resolution, grid, ScanOptions::default())
}

/// Snaps every cell center to the grid, computes its frame bounds, and for
/// the hat window attaches the region label of the snapped point. Cells run
/// in parallel; the result does not depend on the thread count.
pub fn scan_frame_set_with(
    spec: &WindowSpec,
    alpha: Range,
    beta: Range,
    resolution: usize,
    grid: SampleGrid,
    options: ScanOptions,
) -> Result<FrameSetMap> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    if alpha.lo <= 0.0 && alpha.center(0, resolution) <= 0.0 {
        return Err(Error::InvalidArgument("alpha range must be positive".into()));
    }
    let g = sample_window_with_tolerance(spec, &grid, options.wraparound_tolerance)?;
    let hat = is_hat(spec);
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (j, i) = (idx / resolution, idx % resolution);
            let at = alpha.center(i, resolution);
            let bt = beta.center(j, resolution);
            match make_lattice(grid, at, bt, options.snap_tolerance) {
                Ok(s) => {
                    let report = frame_bounds(&g, &s.lattice).expect("window and lattice share the grid");
                    ScanCell {
                        i,
                        j,
                        alpha_target: at,
                        beta_target: bt,
                        alpha_snap: s.lattice.alpha(),
                        beta_snap: s.lattice.beta(),
                        alpha_error: s.alpha_error,
                        beta_error: s.beta_error,
                        report: Some(report),
                        label: hat.then(|| classify_point_g2(s.lattice.alpha(), s.lattice.beta())),
                        unsnappable: None,
                    }
                }
                Err(e) => ScanCell {
                    i,
                    j,
                    alpha_target: at,
                    beta_target: bt,
                    alpha_snap: f64::NAN,
                    beta_snap: f64::NAN,
                    alpha_error: f64::NAN,
                    beta_error: f64::NAN,
                    report: None,
                    label: None,
                    unsnappable: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(FrameSetMap {
        window: *spec,
        grid,
        alpha_range: alpha,
        beta_range: beta,
        resolution,
        cells,
    })
}

impl FrameSetMap {
    pub fn cell(&self, i: usize, j: usize) -> &ScanCell {
        &self.cells[j * self.resolution + i]
    }

    /// One row per cell: `alpha_target,beta_target,alpha_snap,beta_snap,A,B,label`.
    pub fn to_csv(&self) -> String {
        let header = ["alpha_target", "beta_target", "alpha_snap", "beta_snap", "A", "B", "label"];
        let rows = self.cells.iter().map(|c| {
            let (a, b) = c.report.map_or((f64::NAN, f64::NAN), |r| (r.lower, r.upper));
            let label = match (&c.unsnappable, c.label, c.report) {
                (Some(_), _, _) => "unsnappable".to_string(),
                (None, Some(l), _) => l.to_string(),
                (None, None, Some(r)) => if r.is_frame { "frame" } else { "not_frame" }.to_string(),
                (None, None, None) => "none".to_string(),
            };
            vec![
                export::csv_number(c.alpha_target),
                export::csv_number(c.beta_target),
                export::csv_number(c.alpha_snap),
                export::csv_number(c.beta_snap),
                export::csv_number(a),
                export::csv_number(b),
                label,
            ]
        });
        export::csv(&header, rows)
    }

    /// Largest lower bound on the map.
    pub fn max_lower_bound(&self) -> f64 {
        self.cells
            .iter()
            .filter_map(|c| c.report.map(|r| r.lower))
            .fold(0.0, f64::max)
    }

    /// Grayscale image of the lower bound: `alpha` left to right, `beta`
    /// bottom to top, pixel `255 min(1, A/A_ref)`. `A_ref` defaults to the
    /// largest lower bound on the map.
    pub fn to_pgm(&self, reference: Option<f64>) -> Vec<u8> {
        let r = reference.unwrap_or_else(|| self.max_lower_bound());
        let n = self.resolution;
        let mut pixels = Vec::with_capacity(n * n);
        for row in 0..n {
            let j = n - 1 - row;
            for i in 0..n {
                let a = self.cell(i, j).report.map_or(0.0, |rep| rep.lower);
                pixels.push(export::intensity(a, r));
            }
        }
        export::pgm(n, n, &pixels)
    }
}

/// Comparison of the numeric frame calls with the `g_2` region labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAgreement {
    /// Cells compared.
    pub checked: usize,
    pub agreeing: usize,
    /// Cells within one cell of a boundary between label classes.
    pub exempt: usize,
    /// Cells whose snapped point has no known label.
    pub unknown: usize,
    pub unsnappable: usize,
    /// `(i, j)` of cells that disagree away from boundaries.
    pub disagreements: Vec<(usize, usize)>,
}

/// Checks a scan against [`classify_point_g2`]. The label is taken at the
/// snapped point; a cell is exempt when the label class changes anywhere on
/// the 3x3 stencil of one cell spacing around it.
pub fn g2_agreement(map: &FrameSetMap) -> RegionAgreement {
    let da = map.alpha_range.spacing(map.resolution);
    let db = map.beta_range.spacing(map.resolution);
    let mut out = RegionAgreement {
        checked: 0,
        agreeing: 0,
        exempt: 0,
        unknown: 0,
        unsnappable: 0,
        disagreements: Vec::new(),
    };
    for c in &map.cells {
        let Some(report) = c.report else {
            out.unsnappable += 1;
            continue;
        };
        let class = classify_point_g2(c.alpha_snap, c.beta_snap).class();
        if class == FrameClass::Unknown {
            out.unknown += 1;
            continue;
        }
        let mut boundary = false;
        for di in -1..=1 {
            for dj in -1..=1 {
                let a = c.alpha_snap + di as f64 * da;
                let b = c.beta_snap + dj as f64 * db;
                if a > 0.0 && b > 0.0 && classify_point_g2(a, b).class() != class {
                    boundary = true;
                }
            }
        }
        if boundary {
            out.exempt += 1;
            continue;
        }
        out.checked += 1;
        if report.is_frame == (class == FrameClass::Frame) {
            out.agreeing += 1;
        } else {
            out.disagreements.push((c.i, c.j));
        }
    }
    out
}

/// Agreement with the law "frame iff alpha beta < 1" away from the critical
/// hyperbola.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityAgreement {
    pub checked: usize,
    pub agreeing: usize,
    pub fraction: f64,
}

/// Cells with snapped `alpha beta <= below` should be frames and cells with
/// `alpha beta >= above` should not.
pub fn density_agreement(map: &FrameSetMap, below: f64, above: f64) -> DensityAgreement {
    let mut checked = 0;
    let mut agreeing = 0;
    for c in &map.cells {
        let Some(r) = c.report else { continue };
        let ab = c.alpha_snap * c.beta_snap;
        let expect = if ab <= below {
            true
        } else if ab >= above {
            false
        } else {
            continue;
        };
        checked += 1;
        if r.is_frame == expect {
            agreeing += 1;
        }
    }
    DensityAgreement {
        checked,
        agreeing,
        fraction: if checked > 0 { agreeing as f64 / checked as f64 } else { 1.0 },
    }
}
