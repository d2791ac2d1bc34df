//! Dense linear algebra and quadrature primitives.
//!
//! Everything here is double precision and single-threaded, so reductions run
//! in a fixed order and results are reproducible bit for bit.

use std::ops::{Add, Div, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major dense matrix of finite doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::shape(
                format!("{} values for {rows}x{cols}", rows * cols),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("rows of equal length", "ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self * other` through a blocked GEMM kernel.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::shape(
                format!("inner dimension {}", self.cols),
                format!("{}", other.rows),
            ));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        gemm(
            self.rows,
            self.cols,
            other.cols,
            1.0,
            &self.data,
            (self.cols, 1),
            &other.data,
            (other.cols, 1),
            0.0,
            &mut out.data,
        );
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::shape(self.cols, x.len()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::shape("square matrix", format!("{}x{}", self.rows, self.cols)));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        }))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `c = alpha * a * b + beta * c` for an `m x k` by `k x n` product with
/// arbitrary (row, column) strides on `a` and `b`; `c` is row-major `m x n`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    a_strides: (usize, usize),
    b: &[f64],
    b_strides: (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k > 0 {
        let max_a = (m - 1) * a_strides.0 + (k - 1) * a_strides.1;
        let max_b = (k - 1) * b_strides.0 + (n - 1) * b_strides.1;
        assert!(max_a < a.len() && max_b < b.len());
    }
    // SAFETY: the bounds of every operand were checked above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            a_strides.0 as isize,
            a_strides.1 as isize,
            b.as_ptr(),
            b_strides.0 as isize,
            b_strides.1 as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Which rule produced the weights of a [`Grid1D`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrature {
    Trapezoid,
    MonteCarlo,
}

impl Quadrature {
    pub fn name(self) -> &'static str {
        match self {
            Quadrature::Trapezoid => "trapezoid",
            Quadrature::MonteCarlo => "montecarlo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trapezoid" => Some(Quadrature::Trapezoid),
            "montecarlo" | "monte-carlo" => Some(Quadrature::MonteCarlo),
            _ => None,
        }
    }
}

/// Ordered nodes on an interval together with quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid1D {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::shape(points.len(), weights.len()));
        }
        check_increasing(&points, 1)?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidGrid("weights must be finite and nonnegative".into()));
        }
        Ok(Self { points, weights })
    }

    /// `n` equispaced points on `[a, b]` with trapezoid weights.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        let points = linspace(a, b, n);
        let weights = trapezoid_weights(&points)?;
        Ok(Self { points, weights })
    }

    pub fn with_rule(points: Vec<f64>, rule: Quadrature, measure: f64) -> Result<Self> {
        let weights = match rule {
            Quadrature::Trapezoid => trapezoid_weights(&points)?,
            Quadrature::MonteCarlo => {
                check_increasing(&points, 1)?;
                montecarlo_weights(&points, measure)?
            }
        };
        Ok(Self { points, weights })
    }

    #[inline]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

fn check_increasing(points: &[f64], min_len: usize) -> Result<()> {
    if points.len() < min_len {
        return Err(Error::InvalidGrid(format!(
            "need at least {min_len} point(s), got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGrid("non-finite point".into()));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("points must be strictly increasing".into()));
    }
    Ok(())
}

/// Composite trapezoid weights for strictly increasing nodes.
pub fn trapezoid_weights(points: &[f64]) -> Result<Vec<f64>> {
    check_increasing(points, 2)?;
    let n = points.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (points[i] - points[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    Ok(w)
}

/// Uniform Monte-Carlo weights `measure / n`.
pub fn montecarlo_weights(points: &[f64], domain_measure: f64) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::InvalidGrid("empty point set".into()));
    }
    if !(domain_measure > 0.0 && domain_measure.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "domain measure must be positive, got {domain_measure}"
        )));
    }
    Ok(vec![domain_measure / points.len() as f64; points.len()])
}

/// Lower Cholesky factor together with the diagonal shift that made it succeed.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    pub lower: DenseMatrix,
    pub jitter: f64,
}

/// Relative jitter ladder tried in order, scaled by the mean of the diagonal.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

/// Cholesky factorization of a symmetric matrix, shifting the diagonal by the
/// smallest rung of [`JITTER_LADDER`] that makes it succeed.
pub fn cholesky_jittered(a: &DenseMatrix) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(Error::shape("square matrix", format!("{}x{}", a.rows, a.cols)));
    }
    let n = a.rows;
    let mean_diag = (0..n).map(|i| a[(i, i)]).sum::<f64>() / n.max(1) as f64;
    let base = a.to_nalgebra();
    let mut last = 0.0;
    for rung in JITTER_LADDER {
        let jitter = rung * mean_diag.abs();
        let mut m = base.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        last = jitter;
        if let Some(chol) = nalgebra::Cholesky::new(m) {
            let l = chol.l();
            if l.iter().all(|v| v.is_finite()) {
                return Ok(CholeskyFactor {
                    lower: DenseMatrix::from_nalgebra(&l),
                    jitter,
                });
            }
        }
    }
    Err(Error::NotPositiveDefinite { jitter: last })
}

/// Eigenvalues sorted by descending magnitude; eigenvectors are the columns
/// of `vectors` in the same order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

pub fn sym_eig(a: &DenseMatrix) -> Result<EigenDecomposition> {
    let sym = a.symmetrized()?;
    let n = sym.rows;
    if !sym.is_finite() {
        return Err(Error::InvalidGrid("matrix has non-finite entries".into()));
    }
    let eig = nalgebra::SymmetricEigen::try_new(sym.to_nalgebra(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence("symmetric eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .abs()
            .total_cmp(&eig.eigenvalues[i].abs())
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`, values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::InvalidGrid("matrix has non-finite entries".into()));
    }
    let dec = nalgebra::SVD::try_new(a.to_nalgebra(), true, true, f64::EPSILON, 0)
        .ok_or(Error::NoConvergence("svd"))?;
    let (u, vt) = match (dec.u, dec.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::NoConvergence("svd")),
    };
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        dec.singular_values[j]
            .total_cmp(&dec.singular_values[i])
            .then(i.cmp(&j))
    });
    Ok(Svd {
        u: DenseMatrix::from_fn(a.rows, k, |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&j| dec.singular_values[j]).collect(),
        v: DenseMatrix::from_fn(a.cols, k, |i, j| vt[(order[j], i)]),
    })
}

/// LU factorization with partial pivoting, kept for repeated solves.
pub struct LuFactor {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl LuFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::shape("square matrix", format!("{}x{}", a.rows, a.cols)));
        }
        let lu = a.to_nalgebra().lu();
        // Reject exactly singular and numerically hopeless pivots.
        let u = lu.u();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let min_pivot = (0..a.rows).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if !(min_pivot > scale * 1e-14 * a.rows as f64) {
            return Err(Error::Singular(format!(
                "smallest pivot {min_pivot:e} relative to scale {scale:e}"
            )));
        }
        Ok(Self { lu, n: a.rows })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::shape(self.n, b.len()));
        }
        let rhs = nalgebra::DVector::from_column_slice(b);
        let x = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("lu solve".into()))?;
        Ok(x.iter().copied().collect())
    }
}

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal<T>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Result<Vec<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T> + PartialEq + Default,
{
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::shape(n, format!("{}/{}/{}", sub.len(), sup.len(), rhs.len())));
    }
    let zero = T::default();
    let mut c = vec![zero; n];
    let mut d = vec![zero; n];
    let mut x = vec![zero; n];
    if n == 0 {
        return Ok(x);
    }
    if diag[0] == zero {
        return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
    }
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        if m == zero {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { sup[i] / m } else { zero };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Natural cubic spline through `(x_i, y_i)`, used to turn sampled forcing
/// values into functions the solvers can evaluate anywhere.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        check_increasing(x, 2)?;
        if x.len() != y.len() {
            return Err(Error::shape(x.len(), y.len()));
        }
        let n = x.len();
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        let second = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            second,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h / 6.0
    }
}
