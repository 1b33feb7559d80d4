//! Gramians of finite sets of time-frequency shifts and the extension
//! function `F(a, b) = <A^{-1} u, u>` of a three-point base.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export;
use crate::fft::cis_turns;
use crate::signal::{Signal, TFPoint};

/// Boundary maximum of `F` below which a field covers its support.
pub const COVERAGE_THRESHOLD: f64 = 1e-4;

/// Relative scale of the independence threshold: `lambda_min > 1e-8 trace/N`.
pub const INDEPENDENCE_SCALE: f64 = 1e-8;

const GEOMETRY_TOLERANCE: f64 = 1e-9;

fn key(p: &TFPoint) -> (i64, i64) {
    ((p.a * 1e12).round() as i64, (p.b * 1e12).round() as i64)
}

/// A finite set of distinct time-frequency points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<TFPoint>,
}

impl Configuration {
    pub fn new(points: Vec<TFPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("configuration is empty".into()));
        }
        if points.iter().any(|p| !(p.a.is_finite() && p.b.is_finite())) {
            return Err(Error::InvalidArgument("configuration has non-finite coordinates".into()));
        }
        let mut keys: Vec<_> = points.iter().map(key).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("configuration has repeated points".into()));
        }
        Ok(Configuration { points })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&p| p.into()).collect())
    }

    pub fn points(&self) -> &[TFPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_point(&self, p: TFPoint) -> Result<Self> {
        let mut points = self.points.clone();
        points.push(p);
        Self::new(points)
    }
}

fn hermitian_gram(atoms: &[Signal]) -> DMatrix<Complex64> {
    let n = atoms.len();
    let mut g = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let v = atoms[k].inner_unchecked(&atoms[l]);
            g[(k, l)] = v;
            g[(l, k)] = v.conj();
        }
        g[(k, k)] = Complex64::new(g[(k, k)].re, 0.0);
    }
    g
}

fn shifted_atoms(g: &Signal, points: &[TFPoint]) -> Vec<Signal> {
    points.par_iter().map(|p| g.tf_shift(*p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramianReport {
    /// `G[k][l] = <pi(lambda_k) g, pi(lambda_l) g>`.
    pub gram: Vec<Vec<Complex64>>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub det: f64,
    pub smallest_singular_value: f64,
    pub condition: f64,
    pub threshold: f64,
    pub independent: bool,
}

impl GramianReport {
    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.gram.len();
        DMatrix::from_fn(n, n, |i, j| self.gram[i][j])
    }
}

fn sorted_eigen(g: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let e = SymmetricEigen::new(g.clone());
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(g.nrows(), g.ncols(), |r, c| e.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn report_from(g: DMatrix<Complex64>) -> (GramianReport, DMatrix<Complex64>) {
    let n = g.nrows();
    let (eigenvalues, vectors) = sorted_eigen(&g);
    let trace: f64 = (0..n).map(|i| g[(i, i)].re).sum();
    let threshold = INDEPENDENCE_SCALE * trace / n as f64;
    let smallest = eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let largest = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let report = GramianReport {
        gram: (0..n).map(|i| (0..n).map(|j| g[(i, j)]).collect()).collect(),
        det: eigenvalues.iter().product(),
        smallest_singular_value: smallest,
        condition: if smallest > 0.0 { largest / smallest } else { f64::INFINITY },
        independent: eigenvalues[0] > threshold,
        threshold,
        eigenvalues,
    };
    (report, vectors)
}

fn check_window(g: &Signal) -> Result<()> {
    if g.norm_sqr() == 0.0 {
        return Err(Error::InvalidWindow("window is identically zero".into()));
    }
    Ok(())
}

/// Gramian of `{pi(lambda) g}` with its spectrum and independence call.
pub fn gramian(g: &Signal, config: &Configuration) -> Result<GramianReport> {
    check_window(g)?;
    let atoms = shifted_atoms(g, config.points());
    Ok(report_from(hermitian_gram(&atoms)).0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceProbe {
    pub gramian: GramianReport,
    /// Unit coefficient vector minimising `|| sum c_k pi(lambda_k) g ||`.
    pub coefficients: Vec<Complex64>,
    pub residual: f64,
}

/// Near-dependence witness: the combination along the eigenvector of the
/// smallest Gramian eigenvalue, with its synthesized norm.
pub fn independence_probe(g: &Signal, config: &Configuration) -> Result<IndependenceProbe> {
    check_window(g)?;
    let atoms = shifted_atoms(g, config.points());
    let (report, vectors) = report_from(hermitian_gram(&atoms));
    // ||sum c_k x_k||^2 = c^T G conj(c), so the minimiser is conj(v).
    let coefficients: Vec<Complex64> = vectors.column(0).iter().map(|v| v.conj()).collect();
    let mut sum = Signal::zeros(*g.grid());
    for (c, a) in coefficients.iter().zip(&atoms) {
        sum.axpy(*c, a)?;
    }
    Ok(IndependenceProbe {
        gramian: report,
        coefficients,
        residual: sum.norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigurationLabel {
    /// All points on one line.
    Collinear,
    /// `N - 1` equispaced points on a line and one point off it.
    CollinearEquispacedPlusOne,
    /// Three points on a line, one on a parallel line.
    OneThree,
    /// Two points on each of two parallel lines.
    TwoTwo,
    /// Three points on a line, two on a parallel line.
    ThreeTwo,
    /// A `(3,2)` set whose triple is equispaced and which is mirror
    /// symmetric across the line through the middle point perpendicular to
    /// the triple.
    SymmetricThreeTwo,
    /// Contained in `A Z^2 + z` for the supplied lattice.
    LatticeSubset,
}

/// An affine lattice `A Z^2 + z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineLattice {
    /// Columns are the generators.
    pub matrix: [[f64; 2]; 2],
    pub offset: TFPoint,
}

impl AffineLattice {
    pub fn standard() -> Self {
        AffineLattice {
            matrix: [[1.0, 0.0], [0.0, 1.0]],
            offset: TFPoint::new(0.0, 0.0),
        }
    }

    pub fn contains(&self, p: &TFPoint) -> bool {
        let m = Matrix2::new(self.matrix[0][0], self.matrix[0][1], self.matrix[1][0], self.matrix[1][1]);
        let Some(inv) = m.try_inverse() else {
            return false;
        };
        let c = inv * Vector2::new(p.a - self.offset.a, p.b - self.offset.b);
        c.iter().all(|v| (v - v.round()).abs() < GEOMETRY_TOLERANCE)
    }
}

fn vec2(p: &TFPoint) -> Vector2<f64> {
    Vector2::new(p.a, p.b)
}

fn cross(u: Vector2<f64>, v: Vector2<f64>) -> f64 {
    u.x * v.y - u.y * v.x
}

fn scale_of(points: &[TFPoint]) -> f64 {
    points.iter().map(|p| p.a.abs().max(p.b.abs())).fold(1.0, f64::max)
}

fn collinear(points: &[Vector2<f64>], tol: f64) -> bool {
    if points.len() < 3 {
        return true;
    }
    let p0 = points[0];
    let Some(d) = points.iter().map(|p| p - p0).find(|v| v.norm() > tol) else {
        return true;
    };
    let d = d.normalize();
    points.iter().all(|p| cross(d, p - p0).abs() <= tol)
}

fn parallel(u: Vector2<f64>, v: Vector2<f64>, tol: f64) -> bool {
    cross(u.normalize(), v.normalize()).abs() <= tol
}

/// Equispaced when sorted along their common line.
fn equispaced(points: &[Vector2<f64>], tol: f64) -> bool {
    if points.len() < 3 {
        return true;
    }
    let d = (points[1] - points[0]).normalize();
    let mut t: Vec<f64> = points.iter().map(|p| (p - points[0]).dot(&d)).collect();
    t.sort_by(f64::total_cmp);
    let step = t[1] - t[0];
    t.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= tol)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Splits the points into a collinear part of size `k` and the rest lying on
/// one parallel line, returning the index sets.
fn split_parallel(pts: &[Vector2<f64>], k: usize, tol: f64) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = pts.len();
    for s in subsets(n, k) {
        let part: Vec<_> = s.iter().map(|&i| pts[i]).collect();
        if !collinear(&part, tol) {
            continue;
        }
        let rest_idx: Vec<usize> = (0..n).filter(|i| !s.contains(i)).collect();
        let rest: Vec<_> = rest_idx.iter().map(|&i| pts[i]).collect();
        let d = part[1] - part[0];
        if cross(d.normalize(), rest[0] - part[0]).abs() <= tol {
            continue;
        }
        let ok = if rest.len() == 1 {
            true
        } else {
            collinear(&rest, tol) && parallel(d, rest[1] - rest[0], tol)
        };
        if ok {
            return Some((s, rest_idx));
        }
    }
    None
}

fn symmetric_three_two(pts: &[Vector2<f64>], triple: &[usize], pair: &[usize], tol: f64) -> bool {
    let t: Vec<_> = triple.iter().map(|&i| pts[i]).collect();
    if !equispaced(&t, tol) {
        return false;
    }
    let mid = (t[0] + t[1] + t[2]) / 3.0;
    let d = (t[1] - t[0]).normalize();
    // Reflection across the line through `mid` perpendicular to `d`.
    let reflect = |p: Vector2<f64>| {
        let v = p - mid;
        p - 2.0 * v.dot(&d) * d
    };
    let (p, q) = (pts[pair[0]], pts[pair[1]]);
    (reflect(p) - q).norm() <= tol && t.iter().all(|&x| t.iter().any(|&y| (reflect(x) - y).norm() <= tol))
}

/// All structural labels that apply to the configuration.
pub fn classify_configuration(config: &Configuration, lattice: Option<&AffineLattice>) -> Vec<ConfigurationLabel> {
    let tol = GEOMETRY_TOLERANCE * scale_of(config.points());
    let pts: Vec<_> = config.points().iter().map(vec2).collect();
    let n = pts.len();
    let mut labels = Vec::new();
    if n >= 2 && collinear(&pts, tol) {
        labels.push(ConfigurationLabel::Collinear);
    } else if n >= 3 {
        if let Some((line, _)) = split_parallel(&pts, n - 1, tol) {
            let part: Vec<_> = line.iter().map(|&i| pts[i]).collect();
            if equispaced(&part, tol) {
                labels.push(ConfigurationLabel::CollinearEquispacedPlusOne);
            }
        }
        if n == 4 {
            if split_parallel(&pts, 3, tol).is_some() {
                labels.push(ConfigurationLabel::OneThree);
            }
            if split_parallel(&pts, 2, tol).is_some() {
                labels.push(ConfigurationLabel::TwoTwo);
            }
        }
        if n == 5 {
            if let Some((triple, pair)) = split_parallel(&pts, 3, tol) {
                labels.push(ConfigurationLabel::ThreeTwo);
                if symmetric_three_two(&pts, &triple, &pair, tol) {
                    labels.push(ConfigurationLabel::SymmetricThreeTwo);
                }
            }
        }
    }
    if let Some(l) = lattice {
        if config.points().iter().all(|p| l.contains(p)) {
            labels.push(ConfigurationLabel::LatticeSubset);
        }
    }
    labels
}

/// The area-preserving affine map `x -> M x + offset` of a normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    /// Row-major `M`, `det M = 1`.
    pub matrix: [[f64; 2]; 2],
    /// Length of the first edge, undone by the dilation inside `M`.
    pub scale: f64,
    pub offset: TFPoint,
    /// Indices of the points sent to `(0,0)`, `(0,1)` and `(a,0)`.
    pub base: [usize; 3],
    pub a: f64,
}

impl NormalizationRecord {
    pub fn apply(&self, p: &TFPoint) -> TFPoint {
        let m = &self.matrix;
        TFPoint::new(
            m[0][0] * p.a + m[0][1] * p.b + self.offset.a,
            m[1][0] * p.a + m[1][1] * p.b + self.offset.b,
        )
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == [[1.0, 0.0], [0.0, 1.0]] && self.offset.a == 0.0 && self.offset.b == 0.0
    }
}

fn normal_triple(points: &[TFPoint]) -> Option<[usize; 3]> {
    let o = points.iter().position(|p| p.a == 0.0 && p.b == 0.0)?;
    let e = points.iter().position(|p| p.a == 0.0 && p.b == 1.0)?;
    let x = points.iter().position(|p| p.b == 0.0 && p.a != 0.0)?;
    Some([o, e, x])
}

/// Maps the configuration so that it contains `(0,0)`, `(0,1)` and `(a,0)`
/// with a translation, a rotation, the dilation `diag(s, 1/s)` and a shear.
/// Only coordinates move; windows are not transformed.
pub fn normalize_configuration(config: &Configuration) -> Result<(Configuration, NormalizationRecord)> {
    let pts = config.points();
    if pts.len() < 3 {
        return Err(Error::Degenerate("normalization needs at least three points".into()));
    }
    if let Some(base) = normal_triple(pts) {
        let record = NormalizationRecord {
            matrix: [[1.0, 0.0], [0.0, 1.0]],
            scale: 1.0,
            offset: TFPoint::new(0.0, 0.0),
            base,
            a: pts[base[2]].a,
        };
        return Ok((config.clone(), record));
    }
    let tol = GEOMETRY_TOLERANCE * scale_of(pts);
    let p1 = vec2(&pts[0]);
    let v = vec2(&pts[1]) - p1;
    let s = v.norm();
    let third = (2..pts.len())
        .find(|&i| cross(v / s, vec2(&pts[i]) - p1).abs() > tol)
        .ok_or_else(|| Error::Degenerate("configuration is collinear".into()))?;
    // Rotation taking v to the positive b axis.
    let (c, si) = (v.y / s, v.x / s);
    let rot = Matrix2::new(c, -si, si, c);
    let dil = Matrix2::new(s, 0.0, 0.0, 1.0 / s);
    let w = dil * rot * (vec2(&pts[third]) - p1);
    let shear = Matrix2::new(1.0, 0.0, -w.y / w.x, 1.0);
    let m = shear * dil * rot;
    let off = -(m * p1);
    let record = NormalizationRecord {
        matrix: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
        scale: s,
        offset: TFPoint::new(off.x, off.y),
        base: [0, 1, third],
        a: w.x,
    };
    let mut mapped: Vec<TFPoint> = pts.iter().map(|p| record.apply(p)).collect();
    // Pin the base points to their exact normal form.
    mapped[0] = TFPoint::new(0.0, 0.0);
    mapped[1] = TFPoint::new(0.0, 1.0);
    mapped[third] = TFPoint::new(w.x, 0.0);
    Ok((Configuration::new(mapped)?, record))
}

/// A rectangle of `na x nb` cells; field values sit at cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub a_lo: f64,
    pub a_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
    pub na: usize,
    pub nb: usize,
}

impl FieldGrid {
    pub fn square(half_width: f64, cells: usize) -> Self {
        Self::centered(TFPoint::new(0.0, 0.0), half_width, cells)
    }

    pub fn centered(center: TFPoint, half_width: f64, cells: usize) -> Self {
        FieldGrid {
            a_lo: center.a - half_width,
            a_hi: center.a + half_width,
            b_lo: center.b - half_width,
            b_hi: center.b + half_width,
            na: cells,
            nb: cells,
        }
    }

    pub fn da(&self) -> f64 {
        (self.a_hi - self.a_lo) / self.na as f64
    }

    pub fn db(&self) -> f64 {
        (self.b_hi - self.b_lo) / self.nb as f64
    }

    pub fn a(&self, i: usize) -> f64 {
        self.a_lo + (i as f64 + 0.5) * self.da()
    }

    pub fn b(&self, j: usize) -> f64 {
        self.b_lo + (j as f64 + 0.5) * self.db()
    }

    fn validate(&self) -> Result<()> {
        if self.na == 0 || self.nb == 0 || !(self.a_hi > self.a_lo) || !(self.b_hi > self.b_lo) {
            return Err(Error::InvalidArgument(format!("empty field grid {self:?}")));
        }
        Ok(())
    }
}

/// Base atoms and the Cholesky factor of their Gramian.
#[derive(Debug, Clone)]
pub struct ExtensionBase {
    window: Signal,
    base: Configuration,
    atoms: Vec<Signal>,
    gram: DMatrix<Complex64>,
    chol: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
}

impl ExtensionBase {
    /// Normalizes `g` to unit norm and factors the base Gramian.
    pub fn new(g: &Signal, base: &Configuration) -> Result<Self> {
        check_window(g)?;
        let window = g.normalized()?;
        let atoms = shifted_atoms(&window, base.points());
        let gram = hermitian_gram(&atoms);
        let chol = nalgebra::Cholesky::new(gram.clone())
            .ok_or_else(|| Error::NotPositiveDefinite("base Gramian is not positive definite".into()))?;
        let report = report_from(gram.clone()).0;
        if !report.independent {
            return Err(Error::NotPositiveDefinite(format!(
                "base Gramian smallest eigenvalue {:e} is below {:e}",
                report.eigenvalues[0], report.threshold
            )));
        }
        Ok(ExtensionBase {
            window,
            base: base.clone(),
            atoms,
            gram,
            chol,
        })
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    /// `u_k = <pi(lambda_k) g, M_b T_a g>`.
    pub fn u(&self, p: TFPoint) -> DVector<Complex64> {
        let h = self.window.tf_shift(p);
        DVector::from_iterator(self.atoms.len(), self.atoms.iter().map(|a| a.inner_unchecked(&h)))
    }

    fn f_of(&self, u: &DVector<Complex64>) -> f64 {
        let x = self.chol.solve(u);
        u.dotc(&x).re
    }

    pub fn value(&self, p: TFPoint) -> f64 {
        self.f_of(&self.u(p))
    }

    /// `F` on every cell centre, rows of constant `a` computed in parallel
    /// by one translation and a phasor recurrence in `b`.
    pub fn field(&self, fg: FieldGrid) -> Result<ExtensionField> {
        fg.validate()?;
        let grid = *self.window.grid();
        let d = grid.delta();
        let xs: Vec<f64> = grid.xs().collect();
        let k = self.atoms.len();
        let columns: Vec<Vec<f64>> = (0..fg.na)
            .into_par_iter()
            .map(|i| {
                let h = self.window.translate(fg.a(i));
                // w_k[j] = phi_k[j] conj(h[j]); u_k(b) = delta sum_j w_k[j] e^{-2 pi i b x_j}.
                let w: Vec<Vec<Complex64>> = self
                    .atoms
                    .iter()
                    .map(|a| a.values().iter().zip(h.values()).map(|(p, q)| p * q.conj()).collect())
                    .collect();
                let step: Vec<Complex64> = xs.iter().map(|x| cis_turns(-fg.db() * x)).collect();
                let mut phase: Vec<Complex64> = Vec::new();
                let mut col = Vec::with_capacity(fg.nb);
                for j in 0..fg.nb {
                    if j % 64 == 0 {
                        let b = fg.b(j);
                        phase = xs.iter().map(|x| cis_turns(-b * x)).collect();
                    } else {
                        for (p, s) in phase.iter_mut().zip(&step) {
                            *p *= s;
                        }
                    }
                    let u = DVector::from_iterator(
                        k,
                        w.iter().map(|wk| wk.iter().zip(&phase).map(|(a, b)| a * b).sum::<Complex64>() * d),
                    );
                    col.push(self.f_of(&u));
                }
                col
            })
            .collect();
        let mut values = vec![0.0; fg.na * fg.nb];
        for (i, col) in columns.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                values[j * fg.na + i] = *v;
            }
        }
        Ok(ExtensionField {
            base: self.base.clone(),
            grid: fg,
            gram: (0..k).map(|r| (0..k).map(|c| self.gram[(r, c)]).collect()).collect(),
            values,
        })
    }
}

/// `F` sampled on a [`FieldGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionField {
    pub base: Configuration,
    pub grid: FieldGrid,
    /// Gramian of the base atoms.
    pub gram: Vec<Vec<Complex64>>,
    /// `values[j * na + i]` at `(a_i, b_j)`.
    pub values: Vec<f64>,
}

impl ExtensionField {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.na + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest value on the outermost ring of cells.
    pub fn boundary_max(&self) -> f64 {
        let (na, nb) = (self.grid.na, self.grid.nb);
        let mut m = f64::NEG_INFINITY;
        for i in 0..na {
            m = m.max(self.get(i, 0)).max(self.get(i, nb - 1));
        }
        for j in 0..nb {
            m = m.max(self.get(0, j)).max(self.get(na - 1, j));
        }
        m
    }

    /// Largest value at distance more than `r` from the origin.
    pub fn max_beyond(&self, r: f64) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.grid.nb {
            for i in 0..self.grid.na {
                if self.grid.a(i).hypot(self.grid.b(j)) > r {
                    m = m.max(self.get(i, j));
                }
            }
        }
        m
    }

    /// Cell-centre Riemann sum, without a coverage check.
    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.da() * self.grid.db()
    }

    /// `a,b,F` rows in storage order.
    pub fn to_csv(&self) -> String {
        let rows = (0..self.grid.nb).flat_map(|j| {
            (0..self.grid.na).map(move |i| {
                vec![
                    export::csv_number(self.grid.a(i)),
                    export::csv_number(self.grid.b(j)),
                    export::csv_number(self.get(i, j)),
                ]
            })
        });
        export::csv(&["a", "b", "F"], rows)
    }

    /// `a` left to right, `b` bottom to top, full scale at `F = 1`.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (na, nb) = (self.grid.na, self.grid.nb);
        let mut pixels = Vec::with_capacity(na * nb);
        for row in 0..nb {
            let j = nb - 1 - row;
            for i in 0..na {
                pixels.push(export::intensity(self.get(i, j), 1.0));
            }
        }
        export::pgm(na, nb, &pixels)
    }
}

/// Checks that the base has the normal form `(0,0)`, `(0,1)`, `(a0,0)`.
fn check_normal_base(base: &Configuration) -> Result<()> {
    let p = base.points();
    let ok = p.len() == 3
        && p[0].a == 0.0
        && p[0].b == 0.0
        && p[1].a == 0.0
        && p[1].b == 1.0
        && p[2].b == 0.0
        && p[2].a != 0.0;
    if !ok {
        return Err(Error::InvalidArgument(
            "extension base must be [(0,0), (0,1), (a0,0)]; normalize the configuration first".into(),
        ));
    }
    Ok(())
}

/// `F(a, b) = <A^{-1} u, u>` for a normalized three-point base.
pub fn extension_field(g: &Signal, base: &Configuration, fg: FieldGrid) -> Result<ExtensionField> {
    check_normal_base(base)?;
    ExtensionBase::new(g, base)?.field(fg)
}

/// Riemann sum of `F`, refusing fields whose boundary maximum is at or
/// above [`COVERAGE_THRESHOLD`].
pub fn extension_integral(field: &ExtensionField) -> Result<f64> {
    let edge = field.boundary_max();
    if edge >= COVERAGE_THRESHOLD {
        return Err(Error::InsufficientCoverage(edge));
    }
    Ok(field.riemann_sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOptions {
    pub start_half_width: f64,
    pub cells_per_unit: f64,
    pub growth: f64,
    /// Defaults to 40% of the shorter of the period and the bandwidth.
    pub max_half_width: Option<f64>,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            start_half_width: 3.0,
            cells_per_unit: 20.0,
            growth: 1.5,
            max_half_width: None,
        }
    }
}

/// Grows a square around the base centroid by `growth` until the boundary
/// maximum of `F` falls below [`COVERAGE_THRESHOLD`], then integrates.
pub fn extension_integral_adaptive(
    g: &Signal,
    base: &Configuration,
    options: AdaptiveOptions,
) -> Result<(f64, ExtensionField)> {
    check_normal_base(base)?;
    let eb = ExtensionBase::new(g, base)?;
    let grid = g.grid();
    let cap = options
        .max_half_width
        .unwrap_or(0.4 * grid.period().min(1.0 / grid.delta()));
    let n = base.len() as f64;
    let center = TFPoint::new(
        base.points().iter().map(|p| p.a).sum::<f64>() / n,
        base.points().iter().map(|p| p.b).sum::<f64>() / n,
    );
    let mut r = options.start_half_width;
    loop {
        let cells = ((2.0 * r * options.cells_per_unit).ceil() as usize).max(2);
        let field = eb.field(FieldGrid::centered(center, r, cells))?;
        let edge = field.boundary_max();
        if edge < COVERAGE_THRESHOLD {
            return Ok((field.riemann_sum(), field));
        }
        if r >= cap {
            return Err(Error::InsufficientCoverage(edge));
        }
        r = (r * options.growth).min(cap);
    }
}

fn det(m: &DMatrix<Complex64>) -> Complex64 {
    m.clone().lu().determinant()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurCheck {
    pub det_bordered: f64,
    pub det_base: f64,
    pub f: f64,
    /// `|det G - (1 - F) det A| / |det A|`.
    pub residual: f64,
}

/// Compares the bordered Gramian determinant with `(1 - F) det A` for the
/// unit-normalized window.
pub fn schur_identity_check(g: &Signal, base: &Configuration, p: TFPoint) -> Result<SchurCheck> {
    let eb = ExtensionBase::new(g, base)?;
    let mut atoms = eb.atoms.clone();
    atoms.push(eb.window.tf_shift(p));
    let bordered = hermitian_gram(&atoms);
    let u = DVector::from_iterator(base.len(), (0..base.len()).map(|k| bordered[(k, base.len())]));
    let f = eb.f_of(&u);
    let da = det(&eb.gram);
    let dg = det(&bordered);
    let corner = bordered[(base.len(), base.len())].re;
    let residual = (dg - da * (corner - f)).norm() / da.norm();
    Ok(SchurCheck {
        det_bordered: dg.re,
        det_base: da.re,
        f,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampleGrid;
    use crate::window::{sample_window, WindowSpec};

    fn gauss() -> Signal {
        let grid = SampleGrid::new(1024, 1.0 / 32.0).unwrap();
        sample_window(&WindowSpec::gaussian(), &grid).unwrap()
    }

    #[test]
    fn gaussian_pair_overlap() {
        let g = gauss();
        let r = gramian(&g, &Configuration::from_pairs(&[(0.0, 0.0), (0.0, 1.0)]).unwrap()).unwrap();
        let expect = (-std::f64::consts::PI / 2.0).exp() / 2f64.sqrt();
        assert!((r.gram[0][1].norm() - expect).abs() < 1e-12, "{}", r.gram[0][1].norm());
    }

    #[test]
    fn normalization_translation() {
        let c = Configuration::from_pairs(&[(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)]).unwrap();
        let (n, rec) = normalize_configuration(&c).unwrap();
        assert_eq!(rec.offset, TFPoint::new(-1.0, -1.0));
        assert_eq!(n.points()[2], TFPoint::new(1.0, 0.0));
        let same = normalize_configuration(&n).unwrap().1;
        assert!(same.is_identity());
    }

    #[test]
    fn labels() {
        let sq = Configuration::from_pairs(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]).unwrap();
        let l = classify_configuration(&sq, Some(&AffineLattice::standard()));
        assert!(l.contains(&ConfigurationLabel::TwoTwo));
        assert!(l.contains(&ConfigurationLabel::LatticeSubset));
        let ot = Configuration::from_pairs(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.5, 1.0)]).unwrap();
        let l = classify_configuration(&ot, None);
        assert!(l.contains(&ConfigurationLabel::OneThree));
        assert!(l.contains(&ConfigurationLabel::CollinearEquispacedPlusOne));
        let s = Configuration::from_pairs(&[(0.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.7, 0.3), (0.7, -0.3)]).unwrap();
        let l = classify_configuration(&s, None);
        assert!(l.contains(&ConfigurationLabel::ThreeTwo));
        assert!(l.contains(&ConfigurationLabel::SymmetricThreeTwo));
    }

    #[test]
    fn base_points_have_unit_extension() {
        let g = gauss();
        let base = Configuration::from_pairs(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]).unwrap();
        let eb = ExtensionBase::new(&g, &base).unwrap();
        for p in base.points() {
            assert!((eb.value(*p) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn field_rows_match_pointwise() {
        let g = gauss();
        let base = Configuration::from_pairs(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]).unwrap();
        let eb = ExtensionBase::new(&g, &base).unwrap();
        let fg = FieldGrid::square(2.0, 70);
        let f = eb.field(fg).unwrap();
        for &(i, j) in &[(0, 0), (13, 69), (35, 36), (69, 3)] {
            let v = eb.value(TFPoint::new(fg.a(i), fg.b(j)));
            assert!((f.get(i, j) - v).abs() < 1e-11, "{i} {j}");
        }
    }
}
