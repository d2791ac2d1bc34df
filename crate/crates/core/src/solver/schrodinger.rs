//! Crank-Nicolson stepping for `i ψ_t = −½ ψ'' + V ψ` with zero Dirichlet data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{linspace, solve_tridiagonal, CubicSpline};

/// Step operator on a uniform grid of `[a, b]`; endpoint values are held at
/// zero and only interior nodes evolve.
#[derive(Clone, Debug)]
pub struct CrankNicolson {
    points: Vec<f64>,
    potential: Vec<f64>,
    h: f64,
    dt: f64,
}

impl CrankNicolson {
    /// `n` grid points (including both ends) on `[a, b]`.
    pub fn new(a: f64, b: f64, n: usize, dt: f64, potential: &dyn Fn(f64) -> f64) -> Result<Self> {
        if n < 3 || !(b > a) {
            return Err(Error::InvalidGrid(format!("need at least 3 points on a nonempty interval, got {n}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let points = linspace(a, b, n);
        let potential = points.iter().map(|&x| potential(x)).collect();
        let h = (b - a) / (n - 1) as f64;
        Ok(Self { points, potential, h, dt })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `H ψ` at interior node `i` with the three-point Laplacian.
    fn apply_h(&self, psi: &[Complex64], i: usize) -> Complex64 {
        let lap = (psi[i - 1] - 2.0 * psi[i] + psi[i + 1]) / (self.h * self.h);
        -0.5 * lap + self.potential[i] * psi[i]
    }

    /// Solves `(I + iΔt/2 H) ψ_{n+1} = (I − iΔt/2 H) ψ_n`.
    pub fn step(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.points.len();
        if psi.len() != n {
            return Err(Error::shape(n, psi.len()));
        }
        let mut boundary = psi.to_vec();
        boundary[0] = Complex64::new(0.0, 0.0);
        boundary[n - 1] = Complex64::new(0.0, 0.0);
        let half = Complex64::new(0.0, 0.5 * self.dt);
        let m = n - 2;
        let off = half * (-0.5 / (self.h * self.h));
        let mut sub = vec![off; m];
        let mut sup = vec![off; m];
        sub[0] = Complex64::new(0.0, 0.0);
        sup[m - 1] = Complex64::new(0.0, 0.0);
        let diag: Vec<Complex64> = (1..n - 1)
            .map(|i| 1.0 + half * (1.0 / (self.h * self.h) + self.potential[i]))
            .collect();
        let rhs: Vec<Complex64> = (1..n - 1)
            .map(|i| boundary[i] - half * self.apply_h(&boundary, i))
            .collect();
        let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut out = Vec::with_capacity(n);
        out.push(Complex64::new(0.0, 0.0));
        out.extend(interior);
        out.push(Complex64::new(0.0, 0.0));
        Ok(out)
    }

    /// Discrete L² norm `sqrt(h Σ |ψ_i|²)`.
    pub fn norm(&self, psi: &[Complex64]) -> f64 {
        (self.h * psi.iter().map(Complex64::norm_sqr).sum::<f64>()).sqrt()
    }

    /// Propagates a state given by samples at increasing `points` (real and
    /// imaginary parts interpolated by natural cubic splines) and returns the
    /// next state at `targets`, also through spline interpolation.
    pub fn propagate_samples(
        &self,
        points: &[f64],
        real: &[f64],
        imag: &[f64],
        targets: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let sr = CubicSpline::natural(points, real)?;
        let si = CubicSpline::natural(points, imag)?;
        let psi: Vec<Complex64> = self
            .points
            .iter()
            .map(|&x| Complex64::new(sr.eval(x), si.eval(x)))
            .collect();
        let next = self.step(&psi)?;
        let re: Vec<f64> = next.iter().map(|z| z.re).collect();
        let im: Vec<f64> = next.iter().map(|z| z.im).collect();
        let tr = CubicSpline::natural(&self.points, &re)?;
        let ti = CubicSpline::natural(&self.points, &im)?;
        Ok((
            targets.iter().map(|&x| tr.eval(x)).collect(),
            targets.iter().map(|&x| ti.eval(x)).collect(),
        ))
    }
}

/// One step on a uniform grid with spacing `h` starting at `−(n−1)h/2`.
pub fn crank_nicolson_step(
    potential: &dyn Fn(f64) -> f64,
    h: f64,
    dt: f64,
    psi: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = psi.len();
    let half_width = 0.5 * h * (n.max(1) - 1) as f64;
    CrankNicolson::new(-half_width, half_width, n, dt, potential)?.step(psi)
}
