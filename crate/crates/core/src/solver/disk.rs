//! Second-order finite differences for `∇²u = f` on the unit disk with
//! `u = 0` on the boundary.
//!
//! Radii sit at half-shifted nodes `r_i = (i − ½)Δr` with `Δr = 2/(2M+1)`, so
//! the origin is never a grid point and the flux through `r = 0` vanishes by
//! construction. A discrete Fourier transform in θ decouples the angular
//! modes into one tridiagonal radial system each.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

/// Polar grid with `radial` half-shifted radii and `angular` equispaced angles.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
}

impl PolarGrid {
    pub fn new(radial: usize, angular: usize) -> Result<Self> {
        if radial < 4 || angular < 8 {
            return Err(Error::InvalidGrid(format!(
                "polar grid too coarse: {radial} radii × {angular} angles (need ≥4 × ≥8)"
            )));
        }
        Ok(Self { radial, angular })
    }

    pub fn dr(&self) -> f64 {
        2.0 / (2 * self.radial + 1) as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angular as f64
    }

    pub fn len(&self) -> usize {
        self.radial * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian coordinates of node `(i, j)`, stored at index `i·angular + j`.
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let (r, t) = (self.radius(i), self.angle(j));
        [r * t.cos(), r * t.sin()]
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.radial)
            .flat_map(|i| (0..self.angular).map(move |j| (i, j)))
            .map(|(i, j)| self.point(i, j))
            .collect()
    }

    /// Area weights `r Δr Δθ` of the midpoint rule.
    pub fn weights(&self) -> Vec<f64> {
        let dth = 2.0 * PI / self.angular as f64;
        (0..self.radial)
            .flat_map(|i| std::iter::repeat_n(self.radius(i) * self.dr() * dth, self.angular))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonDiskSolution {
    pub grid: PolarGrid,
    /// Values at the grid nodes, radius-major.
    pub values: Vec<f64>,
    /// Forcing at the grid nodes, kept for the value at the origin.
    forcing: Vec<f64>,
}

impl PoissonDiskSolution {
    fn ring_mean(values: &[f64], grid: &PolarGrid, i: usize) -> f64 {
        values[i * grid.angular..(i + 1) * grid.angular].iter().sum::<f64>() / grid.angular as f64
    }

    /// Value at the origin from the innermost ring and the local forcing.
    pub fn center_value(&self) -> f64 {
        let r1 = self.grid.radius(0);
        Self::ring_mean(&self.values, &self.grid, 0) - Self::ring_mean(&self.forcing, &self.grid, 0) * r1 * r1 / 4.0
    }

    /// Bilinear interpolation in `(r, θ)`; zero outside the disk.
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let g = &self.grid;
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if r >= 1.0 {
            return 0.0;
        }
        let theta = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
        let s = theta / (2.0 * PI) * g.angular as f64;
        let j0 = (s.floor() as usize) % g.angular;
        let j1 = (j0 + 1) % g.angular;
        let ft = s - s.floor();
        let at = |i: usize| {
            let row = &self.values[i * g.angular..(i + 1) * g.angular];
            (1.0 - ft) * row[j0] + ft * row[j1]
        };
        let r_first = g.radius(0);
        let r_last = g.radius(g.radial - 1);
        if r <= r_first {
            let c = self.center_value();
            let w = r / r_first;
            return (1.0 - w) * c + w * at(0);
        }
        if r >= r_last {
            let w = (r - r_last) / (1.0 - r_last);
            return (1.0 - w) * at(g.radial - 1);
        }
        let x = r / g.dr() - 0.5;
        let i0 = x.floor() as usize;
        let fr = x - x.floor();
        (1.0 - fr) * at(i0) + fr * at(i0 + 1)
    }
}

/// Solves `∇²u = f` with `f` given at the nodes of `grid` (radius-major).
pub fn solve_poisson_disk(grid: &PolarGrid, f: &[f64]) -> Result<PoissonDiskSolution> {
    let (m, nt) = (grid.radial, grid.angular);
    if f.len() != grid.len() {
        return Err(Error::shape(grid.len(), f.len()));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid("non-finite forcing value".into()));
    }
    let dr = grid.dr();
    // Forward DFT of each ring.
    let twiddle: Vec<Complex64> = (0..nt)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / nt as f64))
        .collect();
    let mut modes = vec![Complex64::new(0.0, 0.0); m * nt];
    for i in 0..m {
        let ring = &f[i * nt..(i + 1) * nt];
        for k in 0..nt {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &v) in ring.iter().enumerate() {
                acc += twiddle[(j * k) % nt] * v;
            }
            modes[i * nt + k] = acc;
        }
    }
    // One radial system per mode.
    let mut solved = vec![Complex64::new(0.0, 0.0); m * nt];
    for k in 0..nt {
        let wave = k.min(nt - k) as f64;
        let mut sub = vec![Complex64::new(0.0, 0.0); m];
        let mut diag = vec![Complex64::new(0.0, 0.0); m];
        let mut sup = vec![Complex64::new(0.0, 0.0); m];
        let mut rhs = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let r = grid.radius(i);
            let r_minus = r - 0.5 * dr;
            let r_plus = r + 0.5 * dr;
            let c = 1.0 / (r * dr * dr);
            sub[i] = Complex64::new(c * r_minus, 0.0);
            sup[i] = Complex64::new(c * r_plus, 0.0);
            diag[i] = Complex64::new(-c * (r_minus + r_plus) - wave * wave / (r * r), 0.0);
            rhs[i] = modes[i * nt + k];
        }
        let u = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        for i in 0..m {
            solved[i * nt + k] = u[i];
        }
    }
    // Inverse DFT back to ring values.
    let mut values = vec![0.0; m * nt];
    for i in 0..m {
        for j in 0..nt {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..nt {
                acc += solved[i * nt + k] * twiddle[(j * k) % nt].conj();
            }
            values[i * nt + j] = acc.re / nt as f64;
        }
    }
    Ok(PoissonDiskSolution {
        grid: grid.clone(),
        values,
        forcing: f.to_vec(),
    })
}
