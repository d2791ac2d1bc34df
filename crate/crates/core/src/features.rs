//! Interpretable quantities read off trained networks: error against a
//! closed-form kernel, symmetry and constraint checks, spectral
//! decompositions of the learned integral operator, phase portraits and
//! pole detection.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::catalog::OperatorId;
use crate::error::{Error, Result};
use crate::linalg::{svd, sym_eig, DenseMatrix, Grid1D};
use crate::net::{Activation, RationalMLP};
use crate::solver::{ConstraintSpec, ExactGreen};
use crate::trainer::TrainedModel;

/// Points per axis of the default evaluation grid.
pub const DEFAULT_GRID_POINTS: usize = 1000;
/// Eigenvalues and singular values kept by default.
pub const DEFAULT_SPECTRAL_COUNT: usize = 100;
/// Cells per axis of the default pole search.
pub const DEFAULT_POLE_RESOLUTION: usize = 512;
/// Samples per edge when a cell's winding number is recomputed.
const REFINED_EDGE_SAMPLES: usize = 16;
/// Half-height of the default pole search window.
pub const DEFAULT_POLE_HALF_HEIGHT: f64 = 0.6;

/// Kernel values `G(x_i, y_k)` on a tensor-product grid; rows follow `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelGrid {
    x: Grid1D,
    y: Grid1D,
    values: DenseMatrix,
    pole_hits: usize,
}

impl KernelGrid {
    /// Uniform trapezoid grid with `n` points on each axis of `[a, b]²`.
    pub fn axis(domain: (f64, f64), n: usize) -> Result<Grid1D> {
        Grid1D::uniform(domain.0, domain.1, n)
    }

    pub fn from_fn(x: Grid1D, y: Grid1D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = DenseMatrix::from_fn(x.len(), y.len(), |i, k| f(x.points()[i], y.points()[k]));
        Self::from_values(x, y, values)
    }

    /// Values of an already evaluated kernel; non-finite entries are counted
    /// as pole hits and stored as zero.
    pub fn from_values(x: Grid1D, y: Grid1D, mut values: DenseMatrix) -> Result<Self> {
        if values.rows() != x.len() || values.cols() != y.len() {
            return Err(Error::shape(
                format!("{}x{}", x.len(), y.len()),
                format!("{}x{}", values.rows(), values.cols()),
            ));
        }
        let mut pole_hits = 0;
        for v in values.as_mut_slice() {
            if !v.is_finite() {
                *v = 0.0;
                pole_hits += 1;
            }
        }
        Ok(Self { x, y, values, pole_hits })
    }

    pub fn from_exact(g: ExactGreen, n: usize) -> Result<Self> {
        if g.is_two_dimensional() {
            return Err(Error::InvalidGrid("kernel grids are one-dimensional".into()));
        }
        let axis = Self::axis(g.domain(), n)?;
        Self::from_fn(axis.clone(), axis, |x, y| g.kernel(x, y))
    }

    /// Samples a Green's network `(x, y) ↦ N(x, y)` on the grid.
    pub fn from_network(net: &RationalMLP, x: Grid1D, y: Grid1D) -> Result<Self> {
        if net.input_dim() != 2 {
            return Err(Error::shape("network with 2 inputs", net.input_dim()));
        }
        let mut values = Vec::with_capacity(x.len() * y.len());
        let mut inputs = Vec::with_capacity(2 * y.len());
        for &xi in x.points() {
            inputs.clear();
            for &yk in y.points() {
                inputs.extend_from_slice(&[xi, yk]);
            }
            values.extend(net.forward_raw(&inputs)?);
        }
        let values = DenseMatrix::new(x.len(), y.len(), values)?;
        Self::from_values(x, y, values)
    }

    pub fn x(&self) -> &Grid1D {
        &self.x
    }

    pub fn y(&self) -> &Grid1D {
        &self.y
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    /// Grid points where the network was not finite.
    pub fn pole_hits(&self) -> usize {
        self.pole_hits
    }

    fn l2_norm_sq(&self, values: &DenseMatrix) -> f64 {
        let (wx, wy) = (self.x.weights(), self.y.weights());
        let mut s = 0.0;
        for i in 0..values.rows() {
            let row = values.row(i);
            s += wx[i] * row.iter().zip(wy).map(|(v, w)| w * v * v).sum::<f64>();
        }
        s
    }

    /// Kernel values at `x = x0` for every `y`, interpolating linearly
    /// between grid rows.
    fn row_at(&self, x0: f64) -> Result<Vec<f64>> {
        let p = self.x.points();
        let (a, b) = (p[0], p[p.len() - 1]);
        let tol = 1e-12 * (b - a).abs().max(1.0);
        if x0 < a - tol || x0 > b + tol {
            return Err(Error::InvalidGrid(format!("{x0} lies outside the grid")));
        }
        let hi = p.partition_point(|&t| t < x0 - tol).min(p.len() - 1);
        if (p[hi] - x0).abs() <= tol || hi == 0 {
            return Ok(self.values.row(hi).to_vec());
        }
        let lo = hi - 1;
        let t = (x0 - p[lo]) / (p[hi] - p[lo]);
        Ok(self
            .values
            .row(lo)
            .iter()
            .zip(self.values.row(hi))
            .map(|(l, h)| (1.0 - t) * l + t * h)
            .collect())
    }

    fn require_square(&self) -> Result<()> {
        let same = self.x.len() == self.y.len()
            && self
                .x
                .points()
                .iter()
                .zip(self.y.points())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
        if same {
            Ok(())
        } else {
            Err(Error::shape("identical x and y axes", format!("{}x{}", self.x.len(), self.y.len())))
        }
    }
}

/// `100 · ‖G_exact − G_learned‖ / ‖G_exact‖` in `L²(Ω×Ω)`.
pub fn relative_l2_error(learned: &KernelGrid, exact: &KernelGrid) -> Result<f64> {
    if learned.values.rows() != exact.values.rows() || learned.values.cols() != exact.values.cols() {
        return Err(Error::shape(
            format!("{}x{}", exact.values.rows(), exact.values.cols()),
            format!("{}x{}", learned.values.rows(), learned.values.cols()),
        ));
    }
    let den = exact.l2_norm_sq(&exact.values);
    if !(den > 0.0) {
        return Err(Error::InvalidGrid("exact kernel has zero norm".into()));
    }
    let diff = exact.values.sub(&learned.values)?;
    Ok(100.0 * (exact.l2_norm_sq(&diff) / den).sqrt())
}

/// Relative error against a closed-form kernel sampled on the same grid.
pub fn relative_l2_error_exact(learned: &KernelGrid, exact: ExactGreen) -> Result<f64> {
    let grid = KernelGrid::from_fn(learned.x.clone(), learned.y.clone(), |x, y| exact.kernel(x, y))?;
    relative_l2_error(learned, &grid)
}

/// `‖G − Gᵀ‖_F / ‖G‖_F`.
pub fn symmetry_score(grid: &KernelGrid) -> Result<f64> {
    grid.require_square()?;
    let g = &grid.values;
    let norm = g.frobenius_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(g.sub(&g.transpose())?.frobenius_norm() / norm)
}

/// Largest violation over `y` of a homogeneous constraint applied to
/// `G(·, y)`.
pub fn constraint_residual(grid: &KernelGrid, constraint: &ConstraintSpec) -> Result<f64> {
    let p = grid.x.points();
    let (a, b) = (p[0], p[p.len() - 1]);
    let max_abs = |v: Vec<f64>| v.into_iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    match *constraint {
        ConstraintSpec::Dirichlet { x, value } => {
            Ok(max_abs(grid.row_at(x)?.into_iter().map(|v| v - value).collect()))
        }
        ConstraintSpec::Periodic => {
            let (ga, gb) = (grid.row_at(a)?, grid.row_at(b)?);
            Ok(max_abs(ga.iter().zip(&gb).map(|(l, r)| l - r).collect()))
        }
        ConstraintSpec::Integral { target } => {
            let w = grid.x.weights();
            let sums = (0..grid.values.cols())
                .map(|k| (0..grid.values.rows()).map(|i| w[i] * grid.values[(i, k)]).sum::<f64>() - target)
                .collect();
            Ok(max_abs(sums))
        }
        c @ ConstraintSpec::Jump { .. } => Err(Error::UnsupportedConstraint(c.to_string())),
    }
}

/// Violation of a constraint by a one-dimensional network on `domain`,
/// with integrals taken by the trapezoid rule on `points` nodes.
pub fn network_constraint_residual(
    net: &RationalMLP,
    domain: (f64, f64),
    constraint: &ConstraintSpec,
    points: usize,
) -> Result<f64> {
    if net.input_dim() != 1 {
        return Err(Error::shape("network with 1 input", net.input_dim()));
    }
    let eval = |x: f64| -> Result<f64> { Ok(net.forward_raw(&[x])?[0]) };
    match *constraint {
        ConstraintSpec::Dirichlet { x, value } => Ok((eval(x)? - value).abs()),
        ConstraintSpec::Periodic => Ok((eval(domain.0)? - eval(domain.1)?).abs()),
        ConstraintSpec::Integral { target } => {
            let grid = Grid1D::uniform(domain.0, domain.1, points)?;
            let v = net.forward_raw(grid.points())?;
            Ok((grid.integrate(&v) - target).abs())
        }
        ConstraintSpec::Jump { x, left, right } => {
            let h = 1e-9 * (domain.1 - domain.0);
            Ok((eval(x - h)? - left).abs().max((eval(x + h)? - right).abs()))
        }
    }
}

/// Flips `v` so that its first clearly nonzero component is positive.
fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    if let Some(first) = v.iter().find(|t| t.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|t| *t = -*t);
        }
    }
}

fn sqrt_weights(grid: &Grid1D) -> Result<Vec<f64>> {
    grid.weights()
        .iter()
        .map(|&w| {
            if w > 0.0 {
                Ok(w.sqrt())
            } else {
                Err(Error::InvalidGrid("quadrature weights must be positive".into()))
            }
        })
        .collect()
}

/// Leading eigenvalues and eigenfunctions of the integral operator; the
/// functions are columns sampled on the grid, `L²`-normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub functions: DenseMatrix,
}

/// Leading singular values with left (on `x`) and right (on `y`)
/// singular functions as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularTriples {
    pub values: Vec<f64>,
    pub left: DenseMatrix,
    pub right: DenseMatrix,
}

/// Nyström eigendecomposition of `W^{1/2} G W^{1/2}` (symmetrized).
pub fn integral_operator_eig(grid: &KernelGrid, k: usize) -> Result<Eigenpairs> {
    grid.require_square()?;
    let s = sqrt_weights(&grid.x)?;
    let n = s.len();
    let a = DenseMatrix::from_fn(n, n, |i, j| s[i] * grid.values[(i, j)] * s[j]);
    let eig = sym_eig(&a)?;
    let k = k.min(n);
    let mut functions = DenseMatrix::zeros(n, k);
    for j in 0..k {
        let mut f: Vec<f64> = (0..n).map(|i| eig.vectors[(i, j)] / s[i]).collect();
        fix_sign(&mut f);
        for i in 0..n {
            functions[(i, j)] = f[i];
        }
    }
    Ok(Eigenpairs {
        values: eig.values[..k].to_vec(),
        functions,
    })
}

/// Singular value decomposition of `W_x^{1/2} G W_y^{1/2}`.
pub fn integral_operator_svd(grid: &KernelGrid, k: usize) -> Result<SingularTriples> {
    let (sx, sy) = (sqrt_weights(&grid.x)?, sqrt_weights(&grid.y)?);
    let (m, n) = (sx.len(), sy.len());
    let a = DenseMatrix::from_fn(m, n, |i, j| sx[i] * grid.values[(i, j)] * sy[j]);
    let dec = svd(&a)?;
    let k = k.min(dec.singular_values.len());
    let mut left = DenseMatrix::zeros(m, k);
    let mut right = DenseMatrix::zeros(n, k);
    for j in 0..k {
        let mut u: Vec<f64> = (0..m).map(|i| dec.u[(i, j)] / sx[i]).collect();
        let mut v: Vec<f64> = (0..n).map(|i| dec.v[(i, j)] / sy[i]).collect();
        // The pair shares one sign so that u σ vᵀ is unchanged.
        let before = u.clone();
        fix_sign(&mut u);
        if u != before {
            v.iter_mut().for_each(|t| *t = -*t);
        }
        for i in 0..m {
            left[(i, j)] = u[i];
        }
        for i in 0..n {
            right[(i, j)] = v[i];
        }
    }
    Ok(SingularTriples {
        values: dec.singular_values[..k].to_vec(),
        left,
        right,
    })
}

/// Axis-aligned rectangle of the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexWindow {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl ComplexWindow {
    /// `[a, b] × [−0.6, 0.6]i`.
    pub fn around(domain: (f64, f64)) -> Self {
        Self {
            re: domain,
            im: (-DEFAULT_POLE_HALF_HEIGHT, DEFAULT_POLE_HALF_HEIGHT),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.re.0 < self.re.1 && self.im.0 < self.im.1 && self.re.0.is_finite() && self.im.1.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidGrid("empty complex window".into()))
        }
    }

    /// Node `(i, j)` of a `(n+1) × (n+1)` lattice; `i` runs along the real axis.
    fn node(&self, n: usize, i: usize, j: usize) -> Complex64 {
        let t = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / n as f64;
        Complex64::new(t(self.re.0, self.re.1, i), t(self.im.0, self.im.1, j))
    }
}

/// `arg f(z)` on the nodes of a lattice over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePortrait {
    pub window: ComplexWindow,
    /// `args[(j, i)]` is the argument at real index `i`, imaginary index `j`,
    /// in `(−π, π]`; NaN where the function is not finite.
    pub args: DenseMatrix,
    pub pole_hits: usize,
}

fn check_complex_net(net: &RationalMLP) -> Result<()> {
    if net.activation() != Activation::Rational {
        return Err(Error::UnsupportedActivation(net.activation().name().into()));
    }
    if net.input_dim() != 1 {
        return Err(Error::shape("network with 1 input", net.input_dim()));
    }
    Ok(())
}

/// Samples `f` on the `(n+1)²` lattice nodes of the window, row `j` by row.
fn sample_lattice(f: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>, w: &ComplexWindow, n: usize) -> Result<Vec<Complex64>> {
    let z: Vec<Complex64> = (0..=n)
        .flat_map(|j| (0..=n).map(move |i| (i, j)))
        .map(|(i, j)| w.node(n, i, j))
        .collect();
    f(&z)
}

fn principal_arg(v: Complex64) -> f64 {
    let a = v.arg();
    // `arg` returns −π for negative reals with a negative zero imaginary part.
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Phase portrait of an arbitrary complex function with `resolution` cells
/// per axis.
pub fn phase_portrait_fn(
    f: impl Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    window: ComplexWindow,
    resolution: usize,
) -> Result<PhasePortrait> {
    window.validate()?;
    if resolution == 0 {
        return Err(Error::InvalidGrid("resolution must be positive".into()));
    }
    let values = sample_lattice(&f, &window, resolution)?;
    let m = resolution + 1;
    let mut pole_hits = 0;
    let args = DenseMatrix::from_fn(m, m, |j, i| {
        let v = values[j * m + i];
        if v.re.is_finite() && v.im.is_finite() {
            principal_arg(v)
        } else {
            pole_hits += 1;
            f64::NAN
        }
    });
    Ok(PhasePortrait { window, args, pole_hits })
}

/// Phase portrait of a one-dimensional rational network.
pub fn phase_portrait(net: &RationalMLP, window: ComplexWindow, resolution: usize) -> Result<PhasePortrait> {
    check_complex_net(net)?;
    phase_portrait_fn(|z| net.forward_complex(z), window, resolution)
}

/// A pole located by the argument principle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub multiplicity: usize,
    /// False when the enclosing cell also winds for another singularity or
    /// the lattice hit the pole exactly, so the location is only cell-accurate.
    pub isolated: bool,
}

fn wrap(d: f64) -> f64 {
    let mut d = d;
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Winding number of `f` around the boundary of a cell, using `per_edge`
/// samples per side. `None` when `f` is not finite on the boundary.
fn cell_winding(
    f: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    lo: Complex64,
    hi: Complex64,
    per_edge: usize,
) -> Result<Option<i64>> {
    let corners = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
    let mut z = Vec::with_capacity(4 * per_edge);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for s in 0..per_edge {
            z.push(a + (b - a) * (s as f64 / per_edge as f64));
        }
    }
    let v = f(&z)?;
    if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite()) || c.norm() == 0.0) {
        return Ok(None);
    }
    let total: f64 = (0..v.len()).map(|k| wrap(v[(k + 1) % v.len()].arg() - v[k].arg())).sum();
    Ok(Some((total / (2.0 * PI)).round() as i64))
}

/// Poles of an arbitrary complex function inside the window. Cells whose
/// boundary argument winds by `−2πm` are reported; each is halved twice to
/// localize the pole to a quarter cell.
pub fn detect_poles_fn(
    f: impl Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    window: ComplexWindow,
    resolution: usize,
) -> Result<Vec<Pole>> {
    window.validate()?;
    if resolution == 0 {
        return Err(Error::InvalidGrid("resolution must be positive".into()));
    }
    let n = resolution;
    let m = n + 1;
    // Shift the lattice a quarter cell upward so that the real axis, where
    // poles of real functions come in conjugate pairs or sit exactly, never
    // lies on a cell edge.
    let dy = 0.25 * (window.im.1 - window.im.0) / n as f64;
    let window = ComplexWindow {
        re: window.re,
        im: (window.im.0 - dy, window.im.1 - dy),
    };
    let values = sample_lattice(&f, &window, n)?;
    let finite = |c: Complex64| c.re.is_finite() && c.im.is_finite();
    let arg = |i: usize, j: usize| values[j * m + i].arg();
    let mut poles = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let ring = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if ring.iter().any(|&(a, b)| !finite(values[b * m + a])) {
                // The lattice hit a singularity; report it at the cell center
                // once, from the cell whose lower-left corner is the hit.
                if !finite(values[j * m + i]) {
                    poles.push(Pole {
                        location: window.node(n, i, j),
                        multiplicity: 1,
                        isolated: false,
                    });
                }
                continue;
            }
            let diffs: Vec<f64> = (0..4)
                .map(|k| {
                    let (a0, b0) = ring[k];
                    let (a1, b1) = ring[(k + 1) % 4];
                    wrap(arg(a1, b1) - arg(a0, b0))
                })
                .collect();
            let (lo, hi) = (window.node(n, i, j), window.node(n, i + 1, j + 1));
            // Corner samples alias when the argument turns quickly along an
            // edge, as it does next to a pole; such cells are re-sampled.
            let winding = if diffs.iter().any(|d| d.abs() > 0.5 * PI) {
                match cell_winding(&f, lo, hi, REFINED_EDGE_SAMPLES)? {
                    Some(w) => w,
                    None => continue,
                }
            } else {
                (diffs.iter().sum::<f64>() / (2.0 * PI)).round() as i64
            };
            if winding >= 0 {
                continue;
            }
            let mult = (-winding) as usize;
            let (mut lo, mut hi) = (lo, hi);
            let mut isolated = mult == 1;
            for _ in 0..2 {
                let mid = (lo + hi) * 0.5;
                let quads = [
                    (lo, mid),
                    (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
                    (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
                    (mid, hi),
                ];
                let mut found = None;
                for (qlo, qhi) in quads {
                    if let Some(w) = cell_winding(&f, qlo, qhi, REFINED_EDGE_SAMPLES)? {
                        if w < 0 {
                            found = Some((qlo, qhi));
                            break;
                        }
                    }
                }
                match found {
                    Some((qlo, qhi)) => {
                        lo = qlo;
                        hi = qhi;
                    }
                    None => {
                        isolated = false;
                        break;
                    }
                }
            }
            poles.push(Pole {
                location: (lo + hi) * 0.5,
                multiplicity: mult,
                isolated,
            });
        }
    }
    Ok(poles)
}

/// Poles of a one-dimensional rational network.
pub fn detect_poles(net: &RationalMLP, window: ComplexWindow, resolution: usize) -> Result<Vec<Pole>> {
    check_complex_net(net)?;
    detect_poles_fn(|z| net.forward_complex(z), window, resolution)
}

/// Settings of [`extract`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractOptions {
    pub grid_points: usize,
    pub eig_count: usize,
    pub svd_count: usize,
    pub pole_resolution: usize,
    pub pole_window: Option<ComplexWindow>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            eig_count: DEFAULT_SPECTRAL_COUNT,
            svd_count: DEFAULT_SPECTRAL_COUNT,
            pole_resolution: DEFAULT_POLE_RESOLUTION,
            pole_window: None,
        }
    }
}

/// Features of one Green's kernel `G_rc`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub row: usize,
    pub column: usize,
    pub grid: KernelGrid,
    pub relative_error: Option<f64>,
    pub symmetry_score: f64,
    /// `(constraint, residual)` for every constraint of the row that can be
    /// checked on the grid.
    pub constraint_residuals: Vec<(ConstraintSpec, f64)>,
    pub eigenpairs: Eigenpairs,
    pub singular: SingularTriples,
}

/// Features of one homogeneous network.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousReport {
    pub row: usize,
    pub values: Vec<f64>,
    pub constraint_residuals: Vec<(ConstraintSpec, f64)>,
    /// Empty for non-rational activations.
    pub poles: Vec<Pole>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureReport {
    pub operator: String,
    pub kernels: Vec<KernelReport>,
    pub homogeneous: Vec<HomogeneousReport>,
}

/// Evaluates every network of a one-dimensional model and computes all
/// features.
pub fn extract(model: &TrainedModel, opts: &ExtractOptions) -> Result<FeatureReport> {
    if model.dim != 1 {
        return Err(Error::Config("feature extraction supports one-dimensional operators".into()));
    }
    let op = model.operator.parse::<OperatorId>().ok();
    let exact = op.and_then(OperatorId::exact).filter(|e| !e.is_two_dimensional());
    let constraints = op.map(OperatorId::constraints).unwrap_or_default();
    let axis = KernelGrid::axis(model.domain, opts.grid_points)?;
    let mut kernels = Vec::new();
    let mut homogeneous = Vec::new();
    for (r, row) in model.rows.iter().enumerate() {
        let row_constraints = constraints.get(r).cloned().unwrap_or_default();
        for (c, net) in row.green.iter().enumerate() {
            let grid = KernelGrid::from_network(net, axis.clone(), axis.clone())?;
            let relative_error = match exact {
                Some(e) if model.rows.len() == 1 && row.green.len() == 1 => Some(relative_l2_error_exact(&grid, e)?),
                _ => None,
            };
            let constraint_residuals = row_constraints
                .iter()
                .filter_map(|k| constraint_residual(&grid, k).ok().map(|v| (*k, v)))
                .collect();
            kernels.push(KernelReport {
                row: r,
                column: c,
                symmetry_score: symmetry_score(&grid)?,
                eigenpairs: integral_operator_eig(&grid, opts.eig_count)?,
                singular: integral_operator_svd(&grid, opts.svd_count)?,
                relative_error,
                constraint_residuals,
                grid,
            });
        }
        let values = row.hom.forward_raw(axis.points())?;
        let constraint_residuals = row_constraints
            .iter()
            .filter_map(|k| {
                network_constraint_residual(&row.hom, model.domain, k, opts.grid_points)
                    .ok()
                    .map(|v| (*k, v))
            })
            .collect();
        let poles = if row.hom.activation() == Activation::Rational {
            let window = opts.pole_window.unwrap_or_else(|| ComplexWindow::around(model.domain));
            detect_poles(&row.hom, window, opts.pole_resolution)?
        } else {
            Vec::new()
        };
        homogeneous.push(HomogeneousReport {
            row: r,
            values,
            constraint_residuals,
            poles,
        });
    }
    Ok(FeatureReport {
        operator: model.operator.clone(),
        kernels,
        homogeneous,
    })
}

impl FeatureReport {
    /// Plain `key = value` text, one quantity per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|t| format!("{t:.12e}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "operator = {}", self.operator);
        for k in &self.kernels {
            let p = format!("kernel[{}][{}]", k.row, k.column);
            if let Some(e) = k.relative_error {
                let _ = writeln!(s, "{p}.relative_error_percent = {e:.6}");
            }
            let _ = writeln!(s, "{p}.symmetry_score = {:.12e}", k.symmetry_score);
            let _ = writeln!(s, "{p}.pole_hits = {}", k.grid.pole_hits());
            for (c, v) in &k.constraint_residuals {
                let _ = writeln!(s, "{p}.constraint[{c}] = {v:.12e}");
            }
            let _ = writeln!(s, "{p}.eigenvalues = {}", list(&k.eigenpairs.values));
            let _ = writeln!(s, "{p}.singular_values = {}", list(&k.singular.values));
        }
        for h in &self.homogeneous {
            let p = format!("homogeneous[{}]", h.row);
            for (c, v) in &h.constraint_residuals {
                let _ = writeln!(s, "{p}.constraint[{c}] = {v:.12e}");
            }
            let poles = h
                .poles
                .iter()
                .map(|q| format!("{:.9}{:+.9}i:{}{}", q.location.re, q.location.im, q.multiplicity, if q.isolated { "" } else { "?" }))
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(s, "{p}.poles = {poles}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn exact(g: ExactGreen, n: usize) -> KernelGrid {
        KernelGrid::from_exact(g, n).unwrap()
    }

    fn scaled(grid: &KernelGrid, f: impl Fn(usize, usize, f64) -> f64) -> KernelGrid {
        let v = DenseMatrix::from_fn(grid.values.rows(), grid.values.cols(), |i, k| f(i, k, grid.values[(i, k)]));
        KernelGrid::from_values(grid.x.clone(), grid.y.clone(), v).unwrap()
    }

    #[test]
    fn relative_error_of_identical_and_scaled_kernels() {
        let g = exact(ExactGreen::HelmholtzK15, 200);
        assert_eq!(relative_l2_error(&g, &g).unwrap(), 0.0);
        let s = scaled(&g, |_, _, v| 1.01 * v);
        assert!((relative_l2_error(&s, &g).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn relative_error_of_orthogonal_perturbation() {
        // G = sin(πx) sin(πy) and E ∝ sin(2πx) sin(πy) are L²-orthogonal.
        let axis = KernelGrid::axis((0.0, 1.0), 801).unwrap();
        let g = KernelGrid::from_fn(axis.clone(), axis.clone(), |x, y| (PI * x).sin() * (PI * y).sin()).unwrap();
        let p = KernelGrid::from_fn(axis.clone(), axis, |x, y| {
            (PI * x).sin() * (PI * y).sin() + 0.05 * (2.0 * PI * x).sin() * (PI * y).sin()
        })
        .unwrap();
        let e = relative_l2_error(&p, &g).unwrap();
        assert!((e - 5.0).abs() < 1e-6, "{e}");
    }

    #[test]
    fn zero_exact_kernel_is_an_error() {
        let axis = KernelGrid::axis((0.0, 1.0), 10).unwrap();
        let z = KernelGrid::from_fn(axis.clone(), axis, |_, _| 0.0).unwrap();
        assert!(relative_l2_error(&z, &z).is_err());
    }

    #[test]
    fn symmetry_scores() {
        let axis = KernelGrid::axis((0.0, 1.0), 50).unwrap();
        let sym = KernelGrid::from_fn(axis.clone(), axis.clone(), |x, y| (x * y).cos()).unwrap();
        assert_eq!(symmetry_score(&sym).unwrap(), 0.0);
        let anti = KernelGrid::from_fn(axis.clone(), axis, |x, y| x - y).unwrap();
        assert!((symmetry_score(&anti).unwrap() - 2.0).abs() < 1e-12);
        assert!(symmetry_score(&exact(ExactGreen::HelmholtzK15, 300)).unwrap() <= 1e-12);
        let rect = KernelGrid::from_fn(
            KernelGrid::axis((0.0, 1.0), 5).unwrap(),
            KernelGrid::axis((0.0, 1.0), 6).unwrap(),
            |x, y| x + y,
        )
        .unwrap();
        assert!(symmetry_score(&rect).is_err());
    }

    #[test]
    fn exact_kernels_satisfy_their_constraints() {
        let lap = exact(ExactGreen::Laplace, 201);
        let d0 = ConstraintSpec::Dirichlet { x: 0.0, value: 0.0 };
        assert!(constraint_residual(&lap, &d0).unwrap() < 1e-15);
        let per = exact(ExactGreen::PeriodicHelmholtz, 201);
        let r = constraint_residual(&per, &ConstraintSpec::Periodic).unwrap();
        assert!(r < 1e-12 * per.values().max_abs(), "{r}");
        // The Laplace kernel is not periodic in x only at the interior.
        assert!(constraint_residual(&lap, &ConstraintSpec::Integral { target: 0.0 }).unwrap() > 0.01);
        let jump = ConstraintSpec::Jump { x: 0.5, left: 0.0, right: 0.0 };
        assert!(constraint_residual(&lap, &jump).is_err());
    }

    #[test]
    fn dirichlet_between_nodes_interpolates() {
        let axis = KernelGrid::axis((0.0, 1.0), 11).unwrap();
        let g = KernelGrid::from_fn(axis.clone(), axis, |x, _| x - 0.55).unwrap();
        let r = constraint_residual(&g, &ConstraintSpec::Dirichlet { x: 0.55, value: 0.0 }).unwrap();
        assert!(r < 1e-14, "{r}");
    }

    #[test]
    fn laplace_eigenvalues_are_reciprocal_dirichlet_eigenvalues() {
        let g = exact(ExactGreen::Laplace, 1000);
        let eig = integral_operator_eig(&g, 10).unwrap();
        assert!((eig.values[0] - 1.0 / (PI * PI)).abs() < 1e-4);
        for (n, mu) in eig.values.iter().enumerate() {
            let nn = (n + 1) as f64;
            assert!((mu * nn * nn * PI * PI - 1.0).abs() < 1e-3, "n={} {mu}", n + 1);
        }
        let x = g.x().points();
        let w = g.x().weights();
        // L²-normalized sin(πx) is √2 sin(πx).
        let err: f64 = (0..x.len())
            .map(|i| w[i] * (eig.functions[(i, 0)] - 2f64.sqrt() * (PI * x[i]).sin()).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn raw_matrix_eigenvalues_agree_after_rescaling_on_uniform_grids() {
        // With uniform interior weights h, the unweighted matrix eigenvalues
        // are μ/h up to boundary effects.
        let g = exact(ExactGreen::Laplace, 400);
        let weighted = integral_operator_eig(&g, 3).unwrap();
        let raw = sym_eig(g.values()).unwrap();
        let h = 1.0 / 399.0;
        for k in 0..3 {
            assert!((raw.values[k] * h / weighted.values[k] - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn svd_of_psd_kernel_matches_eigenvalues() {
        let g = exact(ExactGreen::Laplace, 300);
        let eig = integral_operator_eig(&g, 8).unwrap();
        let s = integral_operator_svd(&g, 8).unwrap();
        for k in 0..8 {
            assert!((s.values[k] - eig.values[k].abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_one_kernel_has_one_singular_value() {
        let axis = KernelGrid::axis((0.0, 1.0), 301).unwrap();
        let g = KernelGrid::from_fn(axis.clone(), axis.clone(), |x, y| (1.0 + x) * y * y).unwrap();
        let s = integral_operator_svd(&g, 3).unwrap();
        let gx: Vec<f64> = axis.points().iter().map(|x| (1.0 + x).powi(2)).collect();
        let hy: Vec<f64> = axis.points().iter().map(|y| y.powi(4)).collect();
        let expected = (axis.integrate(&gx) * axis.integrate(&hy)).sqrt();
        assert!((s.values[0] - expected).abs() < 1e-10 * expected);
        assert!(s.values[1] < 1e-10 * expected);
        // Singular functions are L²-orthonormal.
        let l: Vec<f64> = (0..axis.len()).map(|i| s.left[(i, 0)].powi(2)).collect();
        assert!((axis.integrate(&l) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn advection_diffusion_singular_values_converge_under_refinement() {
        let coarse = integral_operator_svd(&exact(ExactGreen::AdvectionDiffusion, 500), 15).unwrap();
        let fine = integral_operator_svd(&exact(ExactGreen::AdvectionDiffusion, 1000), 15).unwrap();
        for k in 0..15 {
            let rel = (coarse.values[k] - fine.values[k]).abs() / fine.values[k];
            assert!(rel < 1e-3, "k={k} {rel}");
        }
    }

    fn identity_net() -> impl Fn(&[Complex64]) -> Result<Vec<Complex64>> {
        |z: &[Complex64]| Ok(z.to_vec())
    }

    #[test]
    fn portrait_of_identity_is_arg_z() {
        let w = ComplexWindow { re: (-1.0, 1.0), im: (-1.0, 1.0) };
        let p = phase_portrait_fn(identity_net(), w, 20).unwrap();
        for j in 0..=20 {
            for i in 0..=20 {
                let z = w.node(20, i, j);
                if z.norm() > 0.0 {
                    assert!((p.args[(j, i)] - principal_arg(z)).abs() < 1e-15);
                }
            }
        }
        // The real-axis row of a real function has arguments 0 or π.
        for i in 0..=20 {
            let a = p.args[(10, i)];
            assert!(a == 0.0 || a == PI, "{a}");
        }
    }

    #[test]
    fn trained_network_portrait_is_conjugate_symmetric() {
        let net = RationalMLP::init_with_hidden(1, &[6, 6], Activation::Rational, 5).unwrap();
        let w = ComplexWindow::around((0.0, 1.0));
        let p = phase_portrait(&net, w, 16).unwrap();
        for j in 0..=16 {
            for i in 0..=16 {
                let (a, b) = (p.args[(j, i)], p.args[(16 - j, i)]);
                if a.is_finite() && b.is_finite() && a.abs() < PI - 1e-9 {
                    assert!((a + b).abs() < 1e-9, "{a} {b}");
                }
            }
        }
        let relu = RationalMLP::init_with_hidden(1, &[6], Activation::Relu, 5).unwrap();
        assert!(phase_portrait(&relu, w, 8).is_err());
        assert!(detect_poles(&relu, w, 8).is_err());
    }

    #[test]
    fn simple_pole_is_found_within_one_cell() {
        let f = |z: &[Complex64]| Ok(z.iter().map(|z| 1.0 / (z - 0.7)).collect());
        let w = ComplexWindow::around((0.0, 1.0));
        let res = 64;
        let poles = detect_poles_fn(f, w, res).unwrap();
        assert_eq!(poles.len(), 1);
        let cell = (w.re.1 - w.re.0) / res as f64;
        assert!((poles[0].location - Complex64::new(0.7, 0.0)).norm() < cell);
        assert_eq!(poles[0].multiplicity, 1);
    }

    #[test]
    fn double_pole_and_zero_are_distinguished() {
        let f = |z: &[Complex64]| {
            Ok(z.iter()
                .map(|z| (z - 0.2) / ((z - Complex64::new(0.61, 0.13)) * (z - Complex64::new(0.61, 0.13))))
                .collect())
        };
        let poles = detect_poles_fn(f, ComplexWindow::around((0.0, 1.0)), 50).unwrap();
        assert_eq!(poles.len(), 1, "{poles:?}");
        assert_eq!(poles[0].multiplicity, 2);
        assert!((poles[0].location - Complex64::new(0.61, 0.13)).norm() < 0.02);
    }

    #[test]
    fn polynomial_has_no_poles() {
        let f = |z: &[Complex64]| Ok(z.iter().map(|z| z * z * z - 0.3 * z + 0.1).collect());
        assert!(detect_poles_fn(f, ComplexWindow::around((-1.0, 1.0)), 40).unwrap().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn relative_error_scales_linearly(eps in 1e-3f64..0.5) {
            let g = exact(ExactGreen::Laplace, 60);
            let e1 = relative_l2_error(&scaled(&g, |i, k, v| v + eps * ((i + 2 * k) as f64).sin() * 0.01), &g).unwrap();
            let e2 = relative_l2_error(&scaled(&g, |i, k, v| v + 2.0 * eps * ((i + 2 * k) as f64).sin() * 0.01), &g).unwrap();
            prop_assert!((e2 - 2.0 * e1).abs() <= 1e-9 * e2.max(1e-12));
        }

        #[test]
        fn eigenvalues_sorted_by_magnitude(seed in 0u64..1000) {
            let net = RationalMLP::init_with_hidden(2, &[5], Activation::Tanh, seed).unwrap();
            let axis = KernelGrid::axis((0.0, 1.0), 30).unwrap();
            let g = KernelGrid::from_network(&net, axis.clone(), axis).unwrap();
            let e = integral_operator_eig(&g, 30).unwrap();
            prop_assert!(e.values.windows(2).all(|w| w[0].abs() >= w[1].abs()));
            let s = integral_operator_svd(&g, 30).unwrap();
            prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1] && w[1] >= 0.0));
            prop_assert!(symmetry_score(&g).unwrap() >= 0.0);
        }
    }
}
