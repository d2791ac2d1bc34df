//! Boundary-value solvers that produce training responses.
//!
//! Scalar and coupled second-order problems are discretized by multi-domain
//! Chebyshev collocation: the domain is cut into pieces, each carrying its
//! own Chebyshev grid, and neighbouring pieces are glued by continuity of the
//! solution and its derivative. Jump conditions and discontinuous
//! coefficients simply become piece boundaries, which keeps spectral accuracy
//! on either side.

pub mod cheb;
pub mod disk;
pub mod exact;
pub mod schrodinger;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{CubicSpline, DenseMatrix, LuFactor};
use cheb::ChebPiece;

pub use disk::{solve_poisson_disk, PolarGrid, PoissonDiskSolution};
pub use exact::{exact_green, ExactGreen};
pub use schrodinger::{crank_nicolson_step, CrankNicolson};

/// Coefficient function of `x`.
pub type Coeff = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn constant(c: f64) -> Coeff {
    Arc::new(move |_| c)
}

/// Newton stopping tolerance on the sup-norm of the residual.
pub const NEWTON_TOL: f64 = 1e-8;
pub const NEWTON_MAX_ITERS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstraintSpec {
    /// `u(x) = value`.
    Dirichlet { x: f64, value: f64 },
    /// `u(a) = u(b)` and `u'(a) = u'(b)`.
    Periodic,
    /// `∫ u dx = target` over the whole domain.
    Integral { target: f64 },
    /// `u(x⁻) = left`, `u(x⁺) = right` at an interior point.
    Jump { x: f64, left: f64, right: f64 },
}

impl ConstraintSpec {
    /// Number of scalar conditions this constraint imposes on a piece
    /// boundary that is not an interface.
    fn global_rows(&self) -> usize {
        match self {
            ConstraintSpec::Dirichlet { .. } | ConstraintSpec::Integral { .. } => 1,
            ConstraintSpec::Periodic => 2,
            ConstraintSpec::Jump { .. } => 0,
        }
    }

    /// The same constraint with zero data, as seen by the Green's function.
    pub fn homogeneous(&self) -> Self {
        match *self {
            ConstraintSpec::Dirichlet { x, .. } => ConstraintSpec::Dirichlet { x, value: 0.0 },
            ConstraintSpec::Periodic => ConstraintSpec::Periodic,
            ConstraintSpec::Integral { .. } => ConstraintSpec::Integral { target: 0.0 },
            ConstraintSpec::Jump { x, .. } => ConstraintSpec::Jump {
                x,
                left: 0.0,
                right: 0.0,
            },
        }
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSpec::Dirichlet { x, value } => write!(f, "dirichlet({x}, {value})"),
            ConstraintSpec::Periodic => write!(f, "periodic"),
            ConstraintSpec::Integral { target } => write!(f, "integral({target})"),
            ConstraintSpec::Jump { x, left, right } => write!(f, "jump({x}, {left}, {right})"),
        }
    }
}

/// `a2 u'' + a1 u' + a0 u + c3 u³` on `[a, b]` with its constraints.
#[derive(Clone)]
pub struct OperatorSpec {
    pub domain: (f64, f64),
    pub a2: Coeff,
    pub a1: Coeff,
    pub a0: Coeff,
    /// Coefficient of the cubic term, absent for linear operators.
    pub cubic: Option<Coeff>,
    pub constraints: Vec<ConstraintSpec>,
    /// Points where a coefficient is discontinuous; they become piece ends.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("domain", &self.domain)
            .field("cubic", &self.cubic.is_some())
            .field("constraints", &self.constraints)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl OperatorSpec {
    pub fn second_order(domain: (f64, f64), a2: Coeff, a1: Coeff, a0: Coeff) -> Self {
        Self {
            domain,
            a2,
            a1,
            a0,
            cubic: None,
            constraints: Vec::new(),
            breakpoints: Vec::new(),
        }
    }

    /// Constant-coefficient operator `a2 u'' + a1 u' + a0 u`.
    pub fn constant(domain: (f64, f64), a2: f64, a1: f64, a0: f64) -> Self {
        Self::second_order(domain, constant(a2), constant(a1), constant(a0))
    }

    /// `−(p u')' + q (u + ε u³)`, expanded as `−p u'' − p' u' + q u + ε q u³`.
    pub fn sturm_liouville(domain: (f64, f64), p: Coeff, dp: Coeff, q: Coeff, epsilon: f64) -> Self {
        let a2: Coeff = Arc::new(move |x| -p(x));
        let a1: Coeff = Arc::new(move |x| -dp(x));
        let q2 = q.clone();
        let mut op = Self::second_order(domain, a2, a1, q);
        if epsilon != 0.0 {
            op.cubic = Some(Arc::new(move |x| epsilon * q2(x)));
        }
        op
    }

    pub fn with_constraints(mut self, constraints: Vec<ConstraintSpec>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn with_cubic(mut self, epsilon: f64) -> Self {
        self.cubic = (epsilon != 0.0).then(|| constant(epsilon));
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    /// Linear part of the operator (cubic term dropped).
    pub fn linear_part(&self) -> Self {
        Self {
            cubic: None,
            ..self.clone()
        }
    }

    /// Applies the operator (including any cubic term) to a twice
    /// differentiable function given with its derivatives.
    pub fn apply(&self, x: f64, u: f64, du: f64, d2u: f64) -> f64 {
        let cubic = self.cubic.as_ref().map_or(0.0, |c| c(x) * u * u * u);
        (self.a2)(x) * d2u + (self.a1)(x) * du + (self.a0)(x) * u + cubic
    }

    fn as_system(&self) -> SystemOperatorSpec {
        SystemOperatorSpec {
            domain: self.domain,
            components: 1,
            blocks: vec![Block {
                row: 0,
                col: 0,
                a2: self.a2.clone(),
                a1: self.a1.clone(),
                a0: self.a0.clone(),
            }],
            cubic: vec![self.cubic.clone()],
            constraints: vec![self.constraints.clone()],
            breakpoints: self.breakpoints.clone(),
        }
    }
}

/// One coupling term `a2 u_col'' + a1 u_col' + a0 u_col` in equation `row`.
#[derive(Clone)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub a2: Coeff,
    pub a1: Coeff,
    pub a0: Coeff,
}

impl Block {
    pub fn new(row: usize, col: usize, a2: Coeff, a1: Coeff, a0: Coeff) -> Self {
        Self { row, col, a2, a1, a0 }
    }

    pub fn constant(row: usize, col: usize, a2: f64, a1: f64, a0: f64) -> Self {
        Self::new(row, col, constant(a2), constant(a1), constant(a0))
    }
}

/// Coupled second-order system: equation `i` is the sum of the blocks with
/// `row == i` applied to their components.
#[derive(Clone)]
pub struct SystemOperatorSpec {
    pub domain: (f64, f64),
    pub components: usize,
    pub blocks: Vec<Block>,
    /// Optional cubic self-interaction per component.
    pub cubic: Vec<Option<Coeff>>,
    pub constraints: Vec<Vec<ConstraintSpec>>,
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for SystemOperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemOperatorSpec")
            .field("domain", &self.domain)
            .field("components", &self.components)
            .field("blocks", &self.blocks.len())
            .field("constraints", &self.constraints)
            .finish()
    }
}

impl SystemOperatorSpec {
    pub fn new(domain: (f64, f64), components: usize, blocks: Vec<Block>, constraints: Vec<Vec<ConstraintSpec>>) -> Self {
        Self {
            domain,
            components,
            blocks,
            cubic: vec![None; components],
            constraints,
            breakpoints: Vec::new(),
        }
    }

    /// Residual of equation `row` for component values and derivatives at `x`.
    pub fn apply(&self, row: usize, x: f64, u: &[f64], du: &[f64], d2u: &[f64]) -> f64 {
        let mut s = 0.0;
        for b in self.blocks.iter().filter(|b| b.row == row) {
            s += (b.a2)(x) * d2u[b.col] + (b.a1)(x) * du[b.col] + (b.a0)(x) * u[b.col];
        }
        if let Some(c) = &self.cubic[row] {
            s += c(x) * u[row].powi(3);
        }
        s
    }
}

/// How finely the domain is discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Discretization {
    /// Number of equal pieces before operator breakpoints are inserted.
    pub pieces: usize,
    /// Chebyshev nodes per piece.
    pub nodes: usize,
}

impl Default for Discretization {
    /// 16 pieces of 64 nodes, 1024 nodes in total.
    fn default() -> Self {
        Self {
            pieces: 16,
            nodes: 64,
        }
    }
}

impl Discretization {
    pub fn new(pieces: usize, nodes: usize) -> Result<Self> {
        if pieces == 0 || nodes < 4 {
            return Err(Error::InvalidOperator(format!(
                "discretization needs at least 1 piece and 4 nodes, got {pieces}×{nodes}"
            )));
        }
        Ok(Self { pieces, nodes })
    }

    /// Twice the nodes per piece; used for self-convergence checks.
    pub fn refined(self) -> Self {
        Self {
            pieces: self.pieces,
            nodes: 2 * self.nodes,
        }
    }
}

/// Right-hand side of one equation.
#[derive(Clone, Copy)]
pub enum Forcing<'a> {
    Zero,
    Function(&'a dyn Fn(f64) -> f64),
    /// Values at increasing points, interpolated by a natural cubic spline.
    Samples { points: &'a [f64], values: &'a [f64] },
}

impl<'a> Forcing<'a> {
    fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> f64 + 'a>> {
        Ok(match *self {
            Forcing::Zero => Box::new(|_| 0.0),
            Forcing::Function(f) => Box::new(f),
            Forcing::Samples { points, values } => {
                let spline = CubicSpline::natural(points, values)?;
                Box::new(move |x| spline.eval(x))
            }
        })
    }
}

impl fmt::Debug for Forcing<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => f.write_str("Zero"),
            Forcing::Function(_) => f.write_str("Function"),
            Forcing::Samples { points, .. } => write!(f, "Samples({} points)", points.len()),
        }
    }
}

/// A piecewise Chebyshev solution.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pieces: Vec<ChebPiece>,
    values: Vec<Vec<f64>>,
    /// Sup-norm of the equation residual at the collocation points.
    pub residual: f64,
    /// Largest violation of the constraints.
    pub constraint_residual: f64,
    /// Newton iterations used (0 for linear solves).
    pub iterations: usize,
}

impl SolveResult {
    /// All nodes in increasing order; interface nodes appear twice.
    pub fn nodes(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| p.nodes.iter().copied()).collect()
    }

    /// Values at [`Self::nodes`].
    pub fn values(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    fn piece_index(&self, x: f64) -> usize {
        // Right-continuous: an interface point belongs to the piece on its right.
        self.pieces
            .iter()
            .rposition(|p| x >= p.lo)
            .unwrap_or(0)
    }

    /// Interpolated value; at a jump the right limit is returned.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.piece_index(x);
        self.pieces[k].eval(&self.values[k], x)
    }

    /// Left limit at `x` (differs from [`Self::eval`] only at jumps).
    pub fn eval_left(&self, x: f64) -> f64 {
        let k = self.pieces.iter().position(|p| x <= p.hi).unwrap_or(self.pieces.len() - 1);
        self.pieces[k].eval(&self.values[k], x)
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Derivative at `x` from the piece containing it.
    pub fn derivative(&self, x: f64) -> f64 {
        let k = self.piece_index(x);
        let p = &self.pieces[k];
        let d = p.diff_matrix().matvec(&self.values[k]).expect("matching sizes");
        p.eval(&d, x)
    }

    /// Clenshaw-Curtis integral over the whole domain.
    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .zip(&self.values)
            .map(|(p, v)| p.cc_weights().iter().zip(v).map(|(w, u)| w * u).sum::<f64>())
            .sum()
    }

    /// Sup-norm of `self − other` over the nodes of both.
    pub fn max_difference(&self, other: &SolveResult) -> f64 {
        let a = self
            .nodes()
            .iter()
            .map(|&x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max);
        let b = other
            .nodes()
            .iter()
            .map(|&x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max);
        a.max(b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn build_pieces(domain: (f64, f64), required: &[f64], disc: Discretization) -> Result<Vec<(f64, f64)>> {
    let (a, b) = domain;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidOperator(format!("invalid domain [{a}, {b}]")));
    }
    let h = (b - a) / disc.pieces as f64;
    let mut cuts: Vec<f64> = (1..disc.pieces).map(|k| a + h * k as f64).collect();
    for &r in required {
        if !(r > a && r < b) {
            return Err(Error::InvalidOperator(format!("breakpoint {r} is not interior to [{a}, {b}]")));
        }
        let nearest = cuts
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - r).abs().total_cmp(&(y.1 - r).abs()))
            .map(|(i, c)| (i, (c - r).abs()));
        match nearest {
            Some((i, d)) if d < 0.25 * h => cuts[i] = r,
            _ => cuts.push(r),
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut ends = vec![a];
    ends.extend(cuts);
    ends.push(b);
    Ok(ends.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Discretized system: square collocation matrix plus bookkeeping.
struct Assembly {
    op: SystemOperatorSpec,
    pieces: Vec<ChebPiece>,
    matrix: DenseMatrix,
    /// Scale applied to each row to equilibrate the matrix.
    row_scale: Vec<f64>,
    /// (row, component, piece, node) for every collocation row.
    collocation: Vec<(usize, usize, usize, usize)>,
    /// (row, value) of every constraint and interface row.
    conditions: Vec<(usize, f64)>,
}

impl Assembly {
    fn new(op: &SystemOperatorSpec, disc: Discretization) -> Result<Self> {
        let nc = op.components;
        if nc == 0 || op.constraints.len() != nc || op.cubic.len() != nc {
            return Err(Error::InvalidOperator("component count mismatch".into()));
        }
        if op.blocks.iter().any(|b| b.row >= nc || b.col >= nc) {
            return Err(Error::InvalidOperator("block index out of range".into()));
        }
        let (a, b) = op.domain;
        let mut required = op.breakpoints.clone();
        for cs in &op.constraints {
            let rows: usize = cs.iter().map(ConstraintSpec::global_rows).sum();
            if rows != 2 {
                return Err(Error::InvalidOperator(format!(
                    "each component needs exactly 2 boundary conditions, got {rows}"
                )));
            }
            for c in cs {
                match *c {
                    ConstraintSpec::Jump { x, .. } => required.push(x),
                    ConstraintSpec::Dirichlet { x, .. } if !(x >= a && x <= b) => {
                        return Err(Error::InvalidOperator(format!("constraint point {x} outside [{a}, {b}]")));
                    }
                    _ => {}
                }
            }
        }
        // Each equation's leading coefficient must not vanish.
        for row in 0..nc {
            let lead: Vec<&Block> = op.blocks.iter().filter(|bl| bl.row == row && bl.col == row).collect();
            let probe = [a, 0.5 * (a + b), b];
            if lead.is_empty() || probe.iter().all(|&x| lead.iter().map(|bl| (bl.a2)(x)).sum::<f64>() == 0.0) {
                return Err(Error::InvalidOperator(format!("equation {row} has no second-order term")));
            }
        }

        let spans = build_pieces(op.domain, &required, disc)?;
        let pieces: Vec<ChebPiece> = spans.iter().map(|&(lo, hi)| ChebPiece::new(lo, hi, disc.nodes)).collect();
        let diff: Vec<DenseMatrix> = pieces.iter().map(ChebPiece::diff_matrix).collect();
        let diff2: Vec<DenseMatrix> = diff.iter().map(|d| d.matmul(d).expect("square")).collect();
        let n = disc.nodes;
        let np = pieces.len();
        let size = nc * np * n;
        let col = |c: usize, k: usize, i: usize| (c * np + k) * n + i;

        let mut m = DenseMatrix::zeros(size, size);
        let mut row = 0;
        let mut collocation = Vec::new();
        let mut conditions = Vec::new();

        for c in 0..nc {
            for (k, piece) in pieces.iter().enumerate() {
                for i in 1..n - 1 {
                    let x = piece.nodes[i];
                    for bl in op.blocks.iter().filter(|bl| bl.row == c) {
                        let (a2, a1, a0) = ((bl.a2)(x), (bl.a1)(x), (bl.a0)(x));
                        for j in 0..n {
                            let v = a2 * diff2[k][(i, j)] + a1 * diff[k][(i, j)];
                            m[(row, col(bl.col, k, j))] += v;
                        }
                        m[(row, col(bl.col, k, i))] += a0;
                    }
                    collocation.push((row, c, k, i));
                    row += 1;
                }
            }
            // Interfaces between consecutive pieces.
            for k in 0..np - 1 {
                let xi = pieces[k].hi;
                let jump = op.constraints[c].iter().find_map(|cs| match *cs {
                    ConstraintSpec::Jump { x, left, right } if x == xi => Some((left, right)),
                    _ => None,
                });
                match jump {
                    Some((left, right)) => {
                        m[(row, col(c, k, n - 1))] = 1.0;
                        conditions.push((row, left));
                        row += 1;
                        m[(row, col(c, k + 1, 0))] = 1.0;
                        conditions.push((row, right));
                        row += 1;
                    }
                    None => {
                        m[(row, col(c, k, n - 1))] = 1.0;
                        m[(row, col(c, k + 1, 0))] = -1.0;
                        conditions.push((row, 0.0));
                        row += 1;
                        for j in 0..n {
                            m[(row, col(c, k, j))] += diff[k][(n - 1, j)];
                            m[(row, col(c, k + 1, j))] -= diff[k + 1][(0, j)];
                        }
                        conditions.push((row, 0.0));
                        row += 1;
                    }
                }
            }
            for cs in &op.constraints[c] {
                match *cs {
                    ConstraintSpec::Dirichlet { x, value } => {
                        let k = pieces.iter().rposition(|p| x >= p.lo).unwrap_or(0);
                        for (j, v) in pieces[k].interp_row(x).into_iter().enumerate() {
                            m[(row, col(c, k, j))] = v;
                        }
                        conditions.push((row, value));
                        row += 1;
                    }
                    ConstraintSpec::Integral { target } => {
                        for (k, p) in pieces.iter().enumerate() {
                            for (j, w) in p.cc_weights().into_iter().enumerate() {
                                m[(row, col(c, k, j))] += w;
                            }
                        }
                        conditions.push((row, target));
                        row += 1;
                    }
                    ConstraintSpec::Periodic => {
                        let last = np - 1;
                        m[(row, col(c, 0, 0))] += 1.0;
                        m[(row, col(c, last, n - 1))] -= 1.0;
                        conditions.push((row, 0.0));
                        row += 1;
                        for j in 0..n {
                            m[(row, col(c, 0, j))] += diff[0][(0, j)];
                            m[(row, col(c, last, j))] -= diff[last][(n - 1, j)];
                        }
                        conditions.push((row, 0.0));
                        row += 1;
                    }
                    ConstraintSpec::Jump { .. } => {}
                }
            }
        }
        debug_assert_eq!(row, size);

        let mut row_scale = vec![1.0; size];
        for (r, s) in row_scale.iter_mut().enumerate() {
            let max = m.row(r).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if max > 0.0 {
                *s = 1.0 / max;
            }
        }
        Ok(Self {
            op: op.clone(),
            pieces,
            matrix: m,
            row_scale,
            collocation,
            conditions,
        })
    }

    fn size(&self) -> usize {
        self.matrix.rows()
    }

    fn nodes_per_piece(&self) -> usize {
        self.pieces[0].len()
    }

    fn offset(&self, c: usize, k: usize) -> usize {
        (c * self.pieces.len() + k) * self.nodes_per_piece()
    }

    fn scaled_matrix(&self) -> DenseMatrix {
        let mut m = self.matrix.clone();
        for (r, s) in self.row_scale.iter().enumerate() {
            for v in m.row_mut(r) {
                *v *= s;
            }
        }
        m
    }

    /// Unscaled right-hand side for the given forcings.
    fn rhs(&self, forcings: &[Box<dyn Fn(f64) -> f64 + '_>]) -> Vec<f64> {
        let mut rhs = vec![0.0; self.size()];
        for &(row, c, k, i) in &self.collocation {
            rhs[row] = forcings[c](self.pieces[k].nodes[i]);
        }
        for &(row, v) in &self.conditions {
            rhs[row] = v;
        }
        rhs
    }

    /// Full nonlinear residual `M u + c3 u³ − rhs` (unscaled).
    fn residual(&self, u: &[f64], rhs: &[f64]) -> Vec<f64> {
        let mut r = self.matrix.matvec(u).expect("square");
        for (ri, b) in r.iter_mut().zip(rhs) {
            *ri -= b;
        }
        for &(row, c, k, i) in &self.collocation {
            if let Some(cubic) = &self.op.cubic[c] {
                let v = u[self.offset(c, k) + i];
                r[row] += cubic(self.pieces[k].nodes[i]) * v * v * v;
            }
        }
        r
    }

    fn split(&self, u: &[f64], residual: &[f64], iterations: usize) -> Vec<SolveResult> {
        let n = self.nodes_per_piece();
        let colloc_res = |c: usize| {
            self.collocation
                .iter()
                .filter(|e| e.1 == c)
                .map(|e| residual[e.0].abs())
                .fold(0.0, f64::max)
        };
        let cond_res = self.conditions.iter().map(|&(r, _)| residual[r].abs()).fold(0.0, f64::max);
        (0..self.op.components)
            .map(|c| SolveResult {
                pieces: self.pieces.clone(),
                values: (0..self.pieces.len())
                    .map(|k| u[self.offset(c, k)..self.offset(c, k) + n].to_vec())
                    .collect(),
                residual: colloc_res(c),
                constraint_residual: cond_res,
                iterations,
            })
            .collect()
    }
}

/// Factored linear system, reusable across many forcings.
pub struct LinearSolver {
    assembly: Assembly,
    lu: LuFactor,
}

impl LinearSolver {
    pub fn new(op: &OperatorSpec, disc: Discretization) -> Result<Self> {
        Self::for_system(&op.linear_part().as_system(), disc)
    }

    pub fn for_system(op: &SystemOperatorSpec, disc: Discretization) -> Result<Self> {
        let mut linear = op.clone();
        linear.cubic = vec![None; op.components];
        let assembly = Assembly::new(&linear, disc)?;
        let lu = LuFactor::new(&assembly.scaled_matrix()).map_err(|e| match e {
            Error::Singular(_) => Error::Singular("ill-posed constraints: collocation matrix is singular".into()),
            other => other,
        })?;
        Ok(Self { assembly, lu })
    }

    /// Solves a scalar problem.
    pub fn solve(&self, f: Forcing<'_>) -> Result<SolveResult> {
        Ok(self.solve_system(&[f])?.remove(0))
    }

    pub fn solve_homogeneous(&self) -> Result<SolveResult> {
        self.solve(Forcing::Zero)
    }

    pub fn solve_system(&self, f: &[Forcing<'_>]) -> Result<Vec<SolveResult>> {
        let asm = &self.assembly;
        if f.len() != asm.op.components {
            return Err(Error::shape(asm.op.components, f.len()));
        }
        let evals = f.iter().map(Forcing::evaluator).collect::<Result<Vec<_>>>()?;
        let rhs = asm.rhs(&evals);
        let scaled: Vec<f64> = rhs.iter().zip(&asm.row_scale).map(|(b, s)| b * s).collect();
        let u = self.lu.solve(&scaled)?;
        let res = asm.residual(&u, &rhs);
        Ok(asm.split(&u, &res, 0))
    }
}

pub fn solve_linear_bvp(op: &OperatorSpec, f: Forcing<'_>, disc: Discretization) -> Result<SolveResult> {
    LinearSolver::new(op, disc)?.solve(f)
}

pub fn solve_homogeneous(op: &OperatorSpec, disc: Discretization) -> Result<SolveResult> {
    LinearSolver::new(op, disc)?.solve_homogeneous()
}

pub fn solve_system_bvp(op: &SystemOperatorSpec, f: &[Forcing<'_>], disc: Discretization) -> Result<Vec<SolveResult>> {
    LinearSolver::for_system(op, disc)?.solve_system(f)
}

/// Newton solver for operators with a cubic term; the assembly is shared
/// across forcings, only the Jacobian is refactored per iteration.
pub struct NonlinearSolver {
    linear: LinearSolver,
    full: Assembly,
}

impl NonlinearSolver {
    pub fn new(op: &OperatorSpec, disc: Discretization) -> Result<Self> {
        let system = op.as_system();
        let linear = LinearSolver::for_system(&system, disc)?;
        let full = Assembly::new(&system, disc)?;
        Ok(Self { linear, full })
    }

    pub fn solve(&self, f: Forcing<'_>) -> Result<SolveResult> {
        let asm = &self.full;
        if asm.op.cubic[0].is_none() {
            return self.linear.solve(f);
        }
        let eval = f.evaluator()?;
        let rhs = asm.rhs(&[eval]);
        let scaled: Vec<f64> = rhs.iter().zip(&asm.row_scale).map(|(b, s)| b * s).collect();
        let mut u = self.linear.lu.solve(&scaled)?;
        let cubic = asm.op.cubic[0].as_ref().expect("checked above");
        let cubic_at: Vec<f64> = asm
            .collocation
            .iter()
            .map(|&(_, _, k, i)| cubic(asm.pieces[k].nodes[i]))
            .collect();
        let base = asm.scaled_matrix();
        let mut res = asm.residual(&u, &rhs);
        let mut norm = sup(&res);
        for it in 1..=NEWTON_MAX_ITERS {
            let mut jac = base.clone();
            for (e, &(row, c, k, i)) in asm.collocation.iter().enumerate() {
                let col = asm.offset(c, k) + i;
                let v = u[col];
                jac[(row, col)] += 3.0 * cubic_at[e] * v * v * asm.row_scale[row];
            }
            let step_rhs: Vec<f64> = res.iter().zip(&asm.row_scale).map(|(r, s)| -r * s).collect();
            let step = LuFactor::new(&jac)?.solve(&step_rhs)?;
            for (ui, di) in u.iter_mut().zip(&step) {
                *ui += di;
            }
            res = asm.residual(&u, &rhs);
            norm = sup(&res);
            if !norm.is_finite() {
                break;
            }
            let step_norm = sup(&step);
            if norm <= NEWTON_TOL || step_norm <= 1e-15 * sup(&u).max(1.0) {
                if norm <= NEWTON_TOL {
                    return Ok(asm.split(&u, &res, it).remove(0));
                }
                break;
            }
        }
        Err(Error::NewtonDivergence {
            iterations: NEWTON_MAX_ITERS,
            residual: norm,
        })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn solve_nonlinear_bvp(op: &OperatorSpec, f: Forcing<'_>, disc: Discretization) -> Result<SolveResult> {
    NonlinearSolver::new(op, disc)?.solve(f)
}
