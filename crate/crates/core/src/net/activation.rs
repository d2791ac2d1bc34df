//! Per-layer activation functions.
//!
//! Rational activations are `p(x) / q(x)` with a cubic numerator and a
//! quadratic denominator; all seven coefficients are trainable and shared by
//! every neuron of a layer.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::Error;

/// Number of trainable coefficients of one rational activation.
pub const RATIONAL_COEFFS: usize = 7;

/// Numerator coefficients `p0..p3` (ascending powers) of the least-squares
/// `(3,2)` rational fit to `max(0, x)` on `[-1, 1]`. Produced by
/// [`fit_relu_rational`]; the denominator is normalized so that `q0 = 1`.
/// Stored with 18 significant digits so the fit is reproduced exactly.
#[allow(clippy::excessive_precision)]
pub const RELU_FIT_P: [f64; 4] = [
    4.12937642486075757e-2,
    4.99999999222928981e-1,
    1.29094536487268408e0,
    8.87586370772625477e-1,
];

/// Denominator coefficients `q0..q2` matching [`RELU_FIT_P`].
#[allow(clippy::excessive_precision)]
pub const RELU_FIT_Q: [f64; 3] = [1.0, -5.65356254012765569e-9, 1.77517274604351960e0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Rational,
    Relu,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Rational => "rational",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    /// Trainable coefficients carried by one layer of this activation.
    pub fn coefficient_count(self) -> usize {
        match self {
            Activation::Rational => RATIONAL_COEFFS,
            Activation::Relu | Activation::Tanh => 0,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "rational" => Ok(Activation::Rational),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Evaluates a rational activation given `[p0, p1, p2, p3, q0, q1, q2]`.
#[inline]
pub fn rational(c: &[f64], x: f64) -> f64 {
    let p = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
    let q = c[4] + x * (c[5] + x * c[6]);
    p / q
}

/// Value and derivative in `x`.
#[inline]
pub fn rational_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let p = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
    let dp = c[1] + x * (2.0 * c[2] + 3.0 * x * c[3]);
    let q = c[4] + x * (c[5] + x * c[6]);
    let dq = c[5] + 2.0 * x * c[6];
    let r = 1.0 / q;
    (p * r, (dp * q - p * dq) * r * r)
}

pub fn rational_complex(c: &[f64], z: Complex64) -> Complex64 {
    let p = c[0] + z * (c[1] + z * (c[2] + z * c[3]));
    let q = c[4] + z * (c[5] + z * c[6]);
    p / q
}

/// Real roots of the denominator `q0 + q1 x + q2 x²`.
pub fn denominator_real_roots(c: &[f64]) -> Vec<f64> {
    let (q0, q1, q2) = (c[4], c[5], c[6]);
    if q2 == 0.0 {
        return if q1 == 0.0 { vec![] } else { vec![-q0 / q1] };
    }
    let disc = q1 * q1 - 4.0 * q2 * q0;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    let mut r = vec![(-q1 - s) / (2.0 * q2), (-q1 + s) / (2.0 * q2)];
    r.sort_by(f64::total_cmp);
    r
}

/// Initial coefficients `[p0..p3, q0..q2]` for a fresh rational layer.
pub fn relu_fit_coefficients() -> [f64; RATIONAL_COEFFS] {
    [
        RELU_FIT_P[0],
        RELU_FIT_P[1],
        RELU_FIT_P[2],
        RELU_FIT_P[3],
        RELU_FIT_Q[0],
        RELU_FIT_Q[1],
        RELU_FIT_Q[2],
    ]
}

/// Least-squares fit of a `(3,2)` rational function to `max(0, x)` on
/// `samples` equispaced points of `[-1, 1]`, with `q0` pinned to 1.
///
/// Starts from the linearized problem `min Σ (p - relu·q)²` and refines with
/// Levenberg-Marquardt on the true residual.
pub fn fit_relu_rational(samples: usize) -> [f64; RATIONAL_COEFFS] {
    use nalgebra::{DMatrix, DVector};

    let xs = crate::linalg::linspace(-1.0, 1.0, samples);
    let ys: Vec<f64> = xs.iter().map(|x| x.max(0.0)).collect();

    // Linearized start: unknowns [p0, p1, p2, p3, q1, q2].
    let mut a = DMatrix::zeros(samples, 6);
    let mut b = DVector::zeros(samples);
    for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
        a[(i, 0)] = 1.0;
        a[(i, 1)] = x;
        a[(i, 2)] = x * x;
        a[(i, 3)] = x * x * x;
        a[(i, 4)] = -y * x;
        a[(i, 5)] = -y * x * x;
        b[i] = y;
    }
    let mut theta = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .expect("linearized fit");

    let coeffs = |t: &DVector<f64>| [t[0], t[1], t[2], t[3], 1.0, t[4], t[5]];
    let cost = |t: &DVector<f64>| -> f64 {
        let c = coeffs(t);
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| (rational(&c, x) - y).powi(2))
            .sum()
    };

    let mut mu = 1e-3;
    let mut current = cost(&theta);
    for _ in 0..500 {
        let c = coeffs(&theta);
        let mut jac = DMatrix::zeros(samples, 6);
        let mut res = DVector::zeros(samples);
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let p = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
            let q = 1.0 + x * (c[5] + x * c[6]);
            res[i] = p / q - y;
            let mut xk = 1.0;
            for k in 0..4 {
                jac[(i, k)] = xk / q;
                xk *= x;
            }
            jac[(i, 4)] = -x * p / (q * q);
            jac[(i, 5)] = -x * x * p / (q * q);
        }
        let jt = jac.transpose();
        let mut lhs = &jt * &jac;
        for k in 0..6 {
            lhs[(k, k)] *= 1.0 + mu;
        }
        let step = match lhs.lu().solve(&(-(&jt * &res))) {
            Some(s) => s,
            None => break,
        };
        let trial = &theta + &step;
        let trial_cost = cost(&trial);
        if trial_cost < current {
            let gain = current - trial_cost;
            theta = trial;
            current = trial_cost;
            mu = (mu * 0.3).max(1e-12);
            if gain < 1e-16 * current.max(1e-300) {
                break;
            }
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                break;
            }
        }
    }
    coeffs(&theta)
}
