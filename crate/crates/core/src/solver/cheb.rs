//! Chebyshev points of the second kind on an interval, with differentiation
//! matrices, Clenshaw-Curtis weights and barycentric interpolation.

use std::f64::consts::PI;

use crate::linalg::DenseMatrix;

/// One Chebyshev piece `[lo, hi]` with `n` ascending nodes including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebPiece {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    /// Barycentric weights (scale free).
    pub bary: Vec<f64>,
}

impl ChebPiece {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2 && hi > lo);
        let m = (n - 1) as f64;
        let nodes = (0..n)
            .map(|i| {
                // sin form is symmetric about the midpoint to the last bit.
                let t = (PI * (2.0 * i as f64 - m) / (2.0 * m)).sin();
                if i == 0 {
                    lo
                } else if i == n - 1 {
                    hi
                } else {
                    0.5 * (lo + hi) + 0.5 * (hi - lo) * t
                }
            })
            .collect();
        let bary = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { lo, hi, nodes, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// First-derivative matrix on the nodes.
    pub fn diff_matrix(&self) -> DenseMatrix {
        let n = self.len();
        let m = (n - 1) as f64;
        // Node differences in reference coordinates, computed with the
        // product formula to avoid cancellation.
        let scale = 2.0 / (self.hi - self.lo);
        let theta = |i: usize| PI * i as f64 / m;
        let mut d = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                // t_i − t_j with t_k = −cos(θ_k) equals 2 sin((θ_i+θ_j)/2) sin((θ_i−θ_j)/2).
                let diff = 2.0 * ((theta(i) + theta(j)) / 2.0).sin() * ((theta(i) - theta(j)) / 2.0).sin();
                let v = self.bary[j] / self.bary[i] / diff * scale;
                d[(i, j)] = v;
                diag -= v;
            }
            d[(i, i)] = diag;
        }
        d
    }

    /// Clenshaw-Curtis quadrature weights on the nodes.
    pub fn cc_weights(&self) -> Vec<f64> {
        let n = self.len() - 1;
        let mut w = vec![0.0; n + 1];
        let half = 0.5 * (self.hi - self.lo);
        if n == 1 {
            return vec![half, half];
        }
        let theta = |k: usize| PI * k as f64 / n as f64;
        for (k, wk) in w.iter_mut().enumerate() {
            let mut v = 1.0;
            let upper = if n.is_multiple_of(2) { n / 2 - 1 } else { (n - 1) / 2 };
            for j in 1..=upper {
                v -= 2.0 * (2.0 * j as f64 * theta(k)).cos() / (4.0 * (j * j) as f64 - 1.0);
            }
            if n.is_multiple_of(2) {
                v -= (n as f64 * theta(k)).cos() / ((n * n) as f64 - 1.0);
            }
            let c = if k == 0 || k == n { 1.0 } else { 2.0 };
            *wk = c * v / n as f64;
        }
        if n.is_multiple_of(2) {
            let e = 1.0 / ((n * n) as f64 - 1.0);
            w[0] = e;
            w[n] = e;
        } else {
            let e = 1.0 / (n * n) as f64;
            w[0] = e;
            w[n] = e;
        }
        // Nodes ascend as t = −cos θ; the rule is symmetric so order is moot.
        w.iter().map(|v| v * half).collect()
    }

    /// Row vector `r` with `r · values` equal to the interpolant at `x`.
    pub fn interp_row(&self, x: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        if let Some(k) = self.nodes.iter().position(|&xn| xn == x) {
            row[k] = 1.0;
            return row;
        }
        let mut den = 0.0;
        for (j, r) in row.iter_mut().enumerate() {
            let t = self.bary[j] / (x - self.nodes[j]);
            *r = t;
            den += t;
        }
        for r in &mut row {
            *r /= den;
        }
        row
    }

    /// Barycentric interpolation of `values` at `x`.
    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.len() {
            let dx = x - self.nodes[j];
            if dx == 0.0 {
                return values[j];
            }
            let t = self.bary[j] / dx;
            num += t * values[j];
            den += t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_polynomial_is_exact() {
        let p = ChebPiece::new(-0.3, 1.7, 12);
        let d = p.diff_matrix();
        let f: Vec<f64> = p.nodes.iter().map(|x| x.powi(5) - 2.0 * x).collect();
        let df = d.matvec(&f).unwrap();
        for (x, v) in p.nodes.iter().zip(&df) {
            assert!((v - (5.0 * x.powi(4) - 2.0)).abs() < 1e-11, "{v}");
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        for n in [2usize, 3, 8, 9, 33] {
            let p = ChebPiece::new(0.5, 2.0, n);
            let w = p.cc_weights();
            let deg = (n - 1).min(6) as i32;
            let s: f64 = p.nodes.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = (2.0f64.powi(deg + 1) - 0.5f64.powi(deg + 1)) / (deg + 1) as f64;
            assert!((s - exact).abs() < 1e-12, "n={n}: {s} vs {exact}");
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let p = ChebPiece::new(0.0, 1.0, 30);
        let f: Vec<f64> = p.nodes.iter().map(|x| (3.0 * x).sin()).collect();
        for x in [0.0, 0.123, 0.5, 0.999, 1.0] {
            assert!((p.eval(&f, x) - (3.0 * x).sin()).abs() < 1e-13);
            let row = p.interp_row(x);
            let v: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((v - (3.0 * x).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn nodes_are_ascending_and_symmetric() {
        let p = ChebPiece::new(-1.0, 1.0, 17);
        assert!(p.nodes.windows(2).all(|w| w[0] < w[1]));
        for i in 0..17 {
            assert_eq!(p.nodes[i], -p.nodes[16 - i]);
        }
    }
}
