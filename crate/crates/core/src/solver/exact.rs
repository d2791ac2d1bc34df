//! Closed-form Green's functions and homogeneous solutions used as oracles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExactGreen {
    /// `u'' + 225 u` on `[0, 1]` with `u(0) = u(1) = 0`.
    HelmholtzK15,
    /// `−u''` on `[0, 1]` with `u(0) = u(1) = 0`.
    Laplace,
    /// `u''/4 + u' + u` on `[0, 1]` with `u(0) = 1`, `u(1) = −2`.
    AdvectionDiffusion,
    /// `u'' + 225 u` on `[0, 1]` with periodic conditions.
    PeriodicHelmholtz,
    /// `∇²u` on the unit disk with zero boundary values.
    PoissonDisk,
}

const K: f64 = 15.0;

impl ExactGreen {
    pub const ALL: [ExactGreen; 5] = [
        ExactGreen::HelmholtzK15,
        ExactGreen::Laplace,
        ExactGreen::AdvectionDiffusion,
        ExactGreen::PeriodicHelmholtz,
        ExactGreen::PoissonDisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExactGreen::HelmholtzK15 => "helmholtz_K15",
            ExactGreen::Laplace => "laplace",
            ExactGreen::AdvectionDiffusion => "advection_diffusion",
            ExactGreen::PeriodicHelmholtz => "periodic_helmholtz",
            ExactGreen::PoissonDisk => "poisson_disk",
        }
    }

    /// Interval of the one-dimensional kernels; the disk kernel reports
    /// `[-1, 1]` for each coordinate.
    pub fn domain(self) -> (f64, f64) {
        match self {
            ExactGreen::PoissonDisk => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn is_two_dimensional(self) -> bool {
        self == ExactGreen::PoissonDisk
    }

    /// `G(x, y)` of a one-dimensional kernel.
    pub fn kernel(self, x: f64, y: f64) -> f64 {
        match self {
            ExactGreen::HelmholtzK15 => {
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                (K * lo).sin() * (K * (hi - 1.0)).sin() / (K * K.sin())
            }
            ExactGreen::Laplace => {
                if x <= y {
                    x * (1.0 - y)
                } else {
                    y * (1.0 - x)
                }
            }
            ExactGreen::AdvectionDiffusion => {
                let e = (-2.0 * (x - y)).exp();
                if x <= y {
                    4.0 * x * (y - 1.0) * e
                } else {
                    4.0 * (x - 1.0) * y * e
                }
            }
            ExactGreen::PeriodicHelmholtz => {
                let d = (x - y).abs();
                (K * (d - 0.5)).cos() / (2.0 * K * (K / 2.0).sin())
            }
            ExactGreen::PoissonDisk => f64::NAN,
        }
    }

    /// `G((x, y), (x̃, ỹ))` of the disk kernel.
    pub fn kernel_2d(self, p: [f64; 2], q: [f64; 2]) -> f64 {
        if self != ExactGreen::PoissonDisk {
            return f64::NAN;
        }
        let [x, y] = p;
        let [xt, yt] = q;
        let num = (x - xt).powi(2) + (y - yt).powi(2);
        let den = (x * yt - xt * y).powi(2) + (x * xt + y * yt - 1.0).powi(2);
        (num / den).ln() / (4.0 * PI)
    }

    /// Evaluates the kernel on a point of dimension 1 or 2 per argument.
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match (x, y) {
            ([x], [y]) => self.kernel(*x, *y),
            ([x0, x1], [y0, y1]) => self.kernel_2d([*x0, *x1], [*y0, *y1]),
            _ => f64::NAN,
        }
    }

    /// Homogeneous solution (zero for problems with zero constraint data).
    pub fn homogeneous(self, x: f64) -> f64 {
        match self {
            ExactGreen::AdvectionDiffusion => {
                let b = -2.0 * (2.0f64).exp() - 1.0;
                (1.0 + b * x) * (-2.0 * x).exp()
            }
            _ => 0.0,
        }
    }
}

impl fmt::Display for ExactGreen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExactGreen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExactGreen::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

/// Looks up a closed-form kernel by catalog name.
pub fn exact_green(name: &str) -> Result<ExactGreen> {
    name.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{
        solve_linear_bvp, solve_homogeneous, ConstraintSpec, Discretization, Forcing, OperatorSpec,
    };
    use proptest::prelude::*;

    #[test]
    fn laplace_values() {
        let g = exact_green("laplace").unwrap();
        assert_eq!(g.kernel(0.5, 0.5), 0.25);
        for y in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(g.kernel(0.0, y), 0.0);
            assert_eq!(g.kernel(1.0, y), 0.0);
        }
        assert!(exact_green("stokes").is_err());
    }

    fn solve_with_kernel(g: ExactGreen, op: &OperatorSpec, f: &dyn Fn(f64) -> f64, x: f64) -> (f64, f64) {
        // Composite Simpson on both sides of the kink at y = x.
        let simpson = |a: f64, b: f64| {
            let n = 2000;
            let h = (b - a) / n as f64;
            let mut s = g.kernel(x, a) * f(a) + g.kernel(x, b) * f(b);
            for i in 1..n {
                let y = a + h * i as f64;
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * g.kernel(x, y) * f(y);
            }
            s * h / 3.0
        };
        let integral = simpson(0.0, x) + simpson(x, 1.0) + g.homogeneous(x);
        let s = solve_linear_bvp(op, Forcing::Function(f), Discretization::default()).unwrap();
        (integral, s.eval(x))
    }

    #[test]
    fn kernels_agree_with_solver() {
        let f = |y: f64| (4.0 * y).cos() + y;
        let dir = |ua, ub| {
            vec![
                ConstraintSpec::Dirichlet { x: 0.0, value: ua },
                ConstraintSpec::Dirichlet { x: 1.0, value: ub },
            ]
        };
        let cases = [
            (ExactGreen::HelmholtzK15, OperatorSpec::constant((0.0, 1.0), 1.0, 0.0, 225.0).with_constraints(dir(0.0, 0.0))),
            (ExactGreen::Laplace, OperatorSpec::constant((0.0, 1.0), -1.0, 0.0, 0.0).with_constraints(dir(0.0, 0.0))),
            (ExactGreen::AdvectionDiffusion, OperatorSpec::constant((0.0, 1.0), 0.25, 1.0, 1.0).with_constraints(dir(1.0, -2.0))),
            (
                ExactGreen::PeriodicHelmholtz,
                OperatorSpec::constant((0.0, 1.0), 1.0, 0.0, 225.0).with_constraints(vec![ConstraintSpec::Periodic]),
            ),
        ];
        for (g, op) in cases {
            for x in [0.13, 0.5, 0.91] {
                let (a, b) = solve_with_kernel(g, &op, &f, x);
                assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn advection_diffusion_homogeneous_matches_solver() {
        let op = OperatorSpec::constant((0.0, 1.0), 0.25, 1.0, 1.0).with_constraints(vec![
            ConstraintSpec::Dirichlet { x: 0.0, value: 1.0 },
            ConstraintSpec::Dirichlet { x: 1.0, value: -2.0 },
        ]);
        let s = solve_homogeneous(&op, Discretization::default()).unwrap();
        for x in [0.0, 0.25, 0.6, 1.0] {
            let d = (s.eval(x) - ExactGreen::AdvectionDiffusion.homogeneous(x)).abs();
            assert!(d < 1e-9, "{x}: {d}");
        }
    }

    #[test]
    fn periodic_kernel_is_periodic() {
        let g = ExactGreen::PeriodicHelmholtz;
        for y in [0.0, 0.2, 0.77] {
            assert!((g.kernel(0.0, y) - g.kernel(1.0, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn disk_kernel_vanishes_on_boundary() {
        let g = ExactGreen::PoissonDisk;
        for t in [0.0f64, 1.0, 2.5] {
            let p = [t.cos(), t.sin()];
            assert!(g.kernel_2d(p, [0.2, -0.3]).abs() < 1e-14);
        }
        assert!(g.kernel_2d([0.1, 0.2], [0.3, 0.1]) < 0.0);
    }

    proptest! {
        #[test]
        fn helmholtz_symmetric(x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let g = ExactGreen::HelmholtzK15;
            prop_assert_eq!(g.kernel(x, y), g.kernel(y, x));
        }

        #[test]
        fn disk_symmetric(a in 0.0..0.95f64, b in 0.0..6.3f64, c in 0.0..0.95f64, d in 0.0..6.3f64) {
            let g = ExactGreen::PoissonDisk;
            let p = [a * b.cos(), a * b.sin()];
            let q = [c * d.cos(), c * d.sin()];
            let (u, v) = (g.kernel_2d(p, q), g.kernel_2d(q, p));
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }
}
