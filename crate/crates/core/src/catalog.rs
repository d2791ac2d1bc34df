//! The operators shipped with the library: each id knows its domain, its
//! differential problem, the Gaussian process that drives it and, where one
//! exists, its closed-form Green's function.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gp::{KernelFamily, KernelSpec, DEFAULT_LAMBDA};
use crate::solver::{
    Block, Coeff, ConstraintSpec, Discretization, ExactGreen, OperatorSpec, SystemOperatorSpec,
};

/// Time step of the Schrödinger propagator.
pub const SCHRODINGER_DT: f64 = 2e-2;
/// Normalized length-scale of the periodic process behind the Schrödinger states.
pub const SCHRODINGER_LAMBDA: f64 = 0.5;
/// Length-scale of the planar process that drives the disk problem.
pub const DISK_LENGTH_SCALE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorId {
    HelmholtzK15,
    Laplace,
    AdvectionDiffusion,
    PeriodicHelmholtz,
    ViscousShock,
    AdvectionRight,
    IntegralConstraint,
    Jump,
    BoundaryLayer,
    DoubleWell,
    CubicHelmholtz,
    SturmLiouville,
    OdeSystem,
    SchrodingerPropagator,
    PoissonDisk,
}

/// What has to be solved to turn forcings into responses.
pub enum Problem {
    /// One second-order equation; `nonlinear` marks a cubic term.
    Scalar {
        op: OperatorSpec,
        disc: Discretization,
        nonlinear: bool,
    },
    /// Coupled second-order equations.
    System {
        op: SystemOperatorSpec,
        disc: Discretization,
    },
    /// One Crank–Nicolson step of `i ψ_t = −½ψ'' + x²ψ`.
    Propagator { fine_points: usize, dt: f64 },
    /// `∇²u = f` on the unit disk.
    Disk,
}

impl OperatorId {
    pub const ALL: [OperatorId; 15] = [
        OperatorId::HelmholtzK15,
        OperatorId::Laplace,
        OperatorId::AdvectionDiffusion,
        OperatorId::PeriodicHelmholtz,
        OperatorId::ViscousShock,
        OperatorId::AdvectionRight,
        OperatorId::IntegralConstraint,
        OperatorId::Jump,
        OperatorId::BoundaryLayer,
        OperatorId::DoubleWell,
        OperatorId::CubicHelmholtz,
        OperatorId::SturmLiouville,
        OperatorId::OdeSystem,
        OperatorId::SchrodingerPropagator,
        OperatorId::PoissonDisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorId::HelmholtzK15 => "helmholtz_K15",
            OperatorId::Laplace => "laplace",
            OperatorId::AdvectionDiffusion => "advection_diffusion",
            OperatorId::PeriodicHelmholtz => "periodic_helmholtz",
            OperatorId::ViscousShock => "viscous_shock",
            OperatorId::AdvectionRight => "advection_right",
            OperatorId::IntegralConstraint => "integral_constraint",
            OperatorId::Jump => "jump",
            OperatorId::BoundaryLayer => "boundary_layer",
            OperatorId::DoubleWell => "double_well",
            OperatorId::CubicHelmholtz => "cubic_helmholtz",
            OperatorId::SturmLiouville => "sturm_liouville",
            OperatorId::OdeSystem => "ode_system",
            OperatorId::SchrodingerPropagator => "schrodinger_propagator",
            OperatorId::PoissonDisk => "poisson_disk",
        }
    }

    /// One-line statement of the problem, shown by the command-line help.
    pub fn description(self) -> &'static str {
        match self {
            OperatorId::HelmholtzK15 => "u'' + 225u = f on [0,1], u(0) = u(1) = 0",
            OperatorId::Laplace => "-u'' = f on [0,1], u(0) = u(1) = 0",
            OperatorId::AdvectionDiffusion => "u''/4 + u' + u = f on [0,1], u(0) = 1, u(1) = -2",
            OperatorId::PeriodicHelmholtz => "u'' + 225u = f on [0,1], periodic",
            OperatorId::ViscousShock => "1e-3 u'' + 2x u' = f on [-1,1], u(-1) = -1, u(1) = 1",
            OperatorId::AdvectionRight => {
                "0.1u'' + 1(x>=0) u' = f on [-1,1], u(-1) = 2, u(1) = -1"
            }
            OperatorId::IntegralConstraint => {
                "u'' + x^2 u = f on [-1,1], u(-1) = 1, integral of u = 2"
            }
            OperatorId::Jump => {
                "0.2u'' + u' = f on [0,1], u(0) = u(1) = 0, u(0.7-) = 2, u(0.7+) = 1"
            }
            OperatorId::BoundaryLayer => "-1e-2 u'' - u' = f on [0,1], u(0) = u(1) = 0",
            OperatorId::DoubleWell => {
                "-0.01u'' + (x^2 + 1.5exp(-(4x)^4))u = f on [-3,3], u(-3) = u(3) = 0"
            }
            OperatorId::CubicHelmholtz => "u'' - u + 0.4u^3 = f on [0,2pi], u(0) = u(2pi) = 0",
            OperatorId::SturmLiouville => {
                "-(p u')' + q(u + 0.4u^3) = f, p = 0.4sin x - 3, q = 0.6sin x - 2 on [0,2pi]"
            }
            OperatorId::OdeSystem => {
                "u'' - v = f1, -v'' + xu = f2 on [-1,1], u(-1) = 1, u(1) = -1, v(+-1) = -2"
            }
            OperatorId::SchrodingerPropagator => {
                "one Crank-Nicolson step (dt = 0.02) of i psi_t = -psi''/2 + x^2 psi on [-3,3]"
            }
            OperatorId::PoissonDisk => "laplacian u = f on the unit disk, u = 0 on the circle",
        }
    }

    /// Interval of one-dimensional problems; the disk reports `[-1, 1]`.
    pub fn domain(self) -> (f64, f64) {
        match self {
            OperatorId::HelmholtzK15
            | OperatorId::Laplace
            | OperatorId::AdvectionDiffusion
            | OperatorId::PeriodicHelmholtz
            | OperatorId::Jump
            | OperatorId::BoundaryLayer => (0.0, 1.0),
            OperatorId::ViscousShock
            | OperatorId::AdvectionRight
            | OperatorId::IntegralConstraint
            | OperatorId::OdeSystem
            | OperatorId::PoissonDisk => (-1.0, 1.0),
            OperatorId::DoubleWell | OperatorId::SchrodingerPropagator => (-3.0, 3.0),
            OperatorId::CubicHelmholtz | OperatorId::SturmLiouville => (0.0, 2.0 * PI),
        }
    }

    /// Spatial dimension of the domain.
    pub fn dimension(self) -> usize {
        if self == OperatorId::PoissonDisk {
            2
        } else {
            1
        }
    }

    /// `(n_u, n_f)`: response and forcing components.
    pub fn components(self) -> (usize, usize) {
        match self {
            OperatorId::OdeSystem | OperatorId::SchrodingerPropagator => (2, 2),
            _ => (1, 1),
        }
    }

    /// Gaussian process the forcings are drawn from.
    pub fn default_kernel(self) -> KernelSpec {
        let (a, b) = self.domain();
        let spec = match self {
            OperatorId::PeriodicHelmholtz => {
                KernelSpec::from_normalized(KernelFamily::Periodic, DEFAULT_LAMBDA, a, b)
            }
            OperatorId::SchrodingerPropagator => {
                KernelSpec::from_normalized(KernelFamily::Periodic, SCHRODINGER_LAMBDA, a, b)
            }
            OperatorId::PoissonDisk => KernelSpec::new(KernelFamily::SquaredExponential, DISK_LENGTH_SCALE),
            _ => KernelSpec::from_normalized(KernelFamily::SquaredExponential, DEFAULT_LAMBDA, a, b),
        };
        spec.expect("catalog length-scales are positive")
    }

    /// True when all constraint data vanish, so responses may be rescaled
    /// without changing the homogeneous solution.
    pub fn homogeneous_is_zero(self) -> bool {
        !matches!(
            self,
            OperatorId::AdvectionDiffusion
                | OperatorId::ViscousShock
                | OperatorId::AdvectionRight
                | OperatorId::IntegralConstraint
                | OperatorId::Jump
                | OperatorId::OdeSystem
        )
    }

    /// Closed-form Green's function, when one is known.
    pub fn exact(self) -> Option<ExactGreen> {
        match self {
            OperatorId::HelmholtzK15 => Some(ExactGreen::HelmholtzK15),
            OperatorId::Laplace => Some(ExactGreen::Laplace),
            OperatorId::AdvectionDiffusion => Some(ExactGreen::AdvectionDiffusion),
            OperatorId::PeriodicHelmholtz => Some(ExactGreen::PeriodicHelmholtz),
            OperatorId::PoissonDisk => Some(ExactGreen::PoissonDisk),
            _ => None,
        }
    }

    /// Constraints the Green's function inherits (data set to zero), per
    /// response component.
    pub fn constraints(self) -> Vec<Vec<ConstraintSpec>> {
        match self.problem() {
            Problem::Scalar { op, .. } => vec![op.constraints.iter().map(ConstraintSpec::homogeneous).collect()],
            Problem::System { op, .. } => op
                .constraints
                .iter()
                .map(|c| c.iter().map(ConstraintSpec::homogeneous).collect())
                .collect(),
            Problem::Propagator { .. } => {
                let (a, b) = self.domain();
                vec![dirichlet(a, 0.0, b, 0.0); 2]
            }
            Problem::Disk => Vec::new(),
        }
    }

    /// Builds the differential problem.
    pub fn problem(self) -> Problem {
        let (a, b) = self.domain();
        let linear = |op: OperatorSpec| Problem::Scalar {
            op,
            disc: Discretization::default(),
            nonlinear: false,
        };
        match self {
            OperatorId::HelmholtzK15 => {
                linear(OperatorSpec::constant((a, b), 1.0, 0.0, 225.0).with_constraints(dirichlet(a, 0.0, b, 0.0)))
            }
            OperatorId::Laplace => {
                linear(OperatorSpec::constant((a, b), -1.0, 0.0, 0.0).with_constraints(dirichlet(a, 0.0, b, 0.0)))
            }
            OperatorId::AdvectionDiffusion => {
                linear(OperatorSpec::constant((a, b), 0.25, 1.0, 1.0).with_constraints(dirichlet(a, 1.0, b, -2.0)))
            }
            OperatorId::PeriodicHelmholtz => linear(
                OperatorSpec::constant((a, b), 1.0, 0.0, 225.0).with_constraints(vec![ConstraintSpec::Periodic]),
            ),
            OperatorId::ViscousShock => linear(
                OperatorSpec::second_order((a, b), coeff(|_| 1e-3), coeff(|x| 2.0 * x), coeff(|_| 0.0))
                    .with_constraints(dirichlet(a, -1.0, b, 1.0)),
            ),
            OperatorId::AdvectionRight => linear(
                OperatorSpec::second_order(
                    (a, b),
                    coeff(|_| 0.1),
                    coeff(|x| if x >= 0.0 { 1.0 } else { 0.0 }),
                    coeff(|_| 0.0),
                )
                .with_constraints(dirichlet(a, 2.0, b, -1.0))
                .with_breakpoints(vec![0.0]),
            ),
            OperatorId::IntegralConstraint => linear(
                OperatorSpec::second_order((a, b), coeff(|_| 1.0), coeff(|_| 0.0), coeff(|x| x * x)).with_constraints(
                    vec![
                        ConstraintSpec::Dirichlet { x: a, value: 1.0 },
                        ConstraintSpec::Integral { target: 2.0 },
                    ],
                ),
            ),
            OperatorId::Jump => linear(OperatorSpec::constant((a, b), 0.2, 1.0, 0.0).with_constraints(vec![
                ConstraintSpec::Dirichlet { x: a, value: 0.0 },
                ConstraintSpec::Dirichlet { x: b, value: 0.0 },
                ConstraintSpec::Jump {
                    x: 0.7,
                    left: 2.0,
                    right: 1.0,
                },
            ])),
            OperatorId::BoundaryLayer => {
                linear(OperatorSpec::constant((a, b), -1e-2, -1.0, 0.0).with_constraints(dirichlet(a, 0.0, b, 0.0)))
            }
            OperatorId::DoubleWell => linear(
                OperatorSpec::second_order(
                    (a, b),
                    coeff(|_| -0.01),
                    coeff(|_| 0.0),
                    coeff(|x| x * x + 1.5 * (-(4.0 * x).powi(4)).exp()),
                )
                .with_constraints(dirichlet(a, 0.0, b, 0.0)),
            ),
            OperatorId::CubicHelmholtz => Problem::Scalar {
                op: OperatorSpec::constant((a, b), 1.0, 0.0, -1.0)
                    .with_cubic(0.4)
                    .with_constraints(dirichlet(a, 0.0, b, 0.0)),
                disc: NONLINEAR_DISC,
                nonlinear: true,
            },
            OperatorId::SturmLiouville => Problem::Scalar {
                op: OperatorSpec::sturm_liouville(
                    (a, b),
                    coeff(|x| 0.4 * x.sin() - 3.0),
                    coeff(|x| 0.4 * x.cos()),
                    coeff(|x| 0.6 * x.sin() - 2.0),
                    0.4,
                )
                .with_constraints(dirichlet(a, 0.0, b, 0.0)),
                disc: NONLINEAR_DISC,
                nonlinear: true,
            },
            OperatorId::OdeSystem => Problem::System {
                op: SystemOperatorSpec::new(
                    (a, b),
                    2,
                    vec![
                        Block::constant(0, 0, 1.0, 0.0, 0.0),
                        Block::constant(0, 1, 0.0, 0.0, -1.0),
                        Block::new(1, 0, coeff(|_| 0.0), coeff(|_| 0.0), coeff(|x| x)),
                        Block::constant(1, 1, -1.0, 0.0, 0.0),
                    ],
                    vec![dirichlet(a, 1.0, b, -1.0), dirichlet(a, -2.0, b, -2.0)],
                ),
                disc: Discretization::default(),
            },
            OperatorId::SchrodingerPropagator => Problem::Propagator {
                fine_points: 1201,
                dt: SCHRODINGER_DT,
            },
            OperatorId::PoissonDisk => Problem::Disk,
        }
    }
}

/// Newton solves refactor the full Jacobian every iteration, so the cubic
/// problems use a coarser (still spectrally accurate) discretization.
const NONLINEAR_DISC: Discretization = Discretization { pieces: 8, nodes: 64 };

fn coeff(f: fn(f64) -> f64) -> Coeff {
    Arc::new(f)
}

fn dirichlet(a: f64, ua: f64, b: f64, ub: f64) -> Vec<ConstraintSpec> {
    vec![
        ConstraintSpec::Dirichlet { x: a, value: ua },
        ConstraintSpec::Dirichlet { x: b, value: ub },
    ]
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorId::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}
