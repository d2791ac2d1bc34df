//! Full-batch Adam and limited-memory BFGS with a strong Wolfe line search.
//!
//! Objectives are closures `f(x, g) -> loss` that fill `g` with the gradient.
//! A non-finite loss is treated as `+∞`, so steps across a pole of a
//! rational activation are rejected instead of poisoning the iterate.

use std::collections::VecDeque;

/// Moment estimates of Adam.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Number of updates taken.
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

/// One Adam update of `x` from the gradient `g` evaluated at `x`.
/// Returns the step taken so that it can be shrunk if it lands on a pole.
pub fn adam_step(x: &mut [f64], g: &[f64], state: &mut AdamState, p: &AdamParams) -> Vec<f64> {
    state.t += 1;
    let t = state.t as i32;
    let b1 = 1.0 - p.beta1.powi(t);
    let b2 = 1.0 - p.beta2.powi(t);
    let mut step = vec![0.0; x.len()];
    for i in 0..x.len() {
        state.m[i] = p.beta1 * state.m[i] + (1.0 - p.beta1) * g[i];
        state.v[i] = p.beta2 * state.v[i] + (1.0 - p.beta2) * g[i] * g[i];
        let mhat = state.m[i] / b1;
        let vhat = state.v[i] / b2;
        step[i] = -p.lr * mhat / (vhat.sqrt() + p.eps);
        x[i] += step[i];
    }
    step
}

/// Curvature pairs of L-BFGS, oldest first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LbfgsMemory {
    pub s: VecDeque<Vec<f64>>,
    pub y: VecDeque<Vec<f64>>,
}

impl LbfgsMemory {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    /// Adds a pair if it has positive curvature, dropping the oldest beyond
    /// `capacity`.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>, capacity: usize) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE)) {
            return false;
        }
        if self.s.len() == capacity {
            self.s.pop_front();
            self.y.pop_front();
        }
        self.s.push_back(s);
        self.y.push_back(y);
        true
    }

    /// Two-loop recursion: returns `−H g`.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let k = self.s.len();
        let mut q = g.to_vec();
        let mut alpha = vec![0.0; k];
        let rho: Vec<f64> = (0..k).map(|i| 1.0 / dot(&self.s[i], &self.y[i])).collect();
        for i in (0..k).rev() {
            alpha[i] = rho[i] * dot(&self.s[i], &q);
            axpy(-alpha[i], &self.y[i], &mut q);
        }
        if k > 0 {
            let gamma = dot(&self.s[k - 1], &self.y[k - 1]) / dot(&self.y[k - 1], &self.y[k - 1]);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let beta = rho[i] * dot(&self.y[i], &q);
            axpy(alpha[i] - beta, &self.s[i], &mut q);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WolfeParams {
    pub c1: f64,
    pub c2: f64,
    pub max_evals: usize,
}

/// Accepted point of a line search.
#[derive(Clone, Debug)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub loss: f64,
    pub grad: Vec<f64>,
    pub evals: usize,
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`, or `None`
/// when it is not well defined.
fn cubic_min(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    t.is_finite().then_some(t)
}

/// Strong Wolfe line search along `d` from `x0` (Nocedal and Wright,
/// algorithms 3.5 and 3.6, with safeguarded cubic interpolation).
pub fn strong_wolfe<F>(
    f: &mut F,
    x0: &[f64],
    f0: f64,
    g0: &[f64],
    d: &[f64],
    alpha0: f64,
    p: &WolfeParams,
) -> Option<LineSearchResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let dphi0 = dot(g0, d);
    if !(dphi0 < 0.0) {
        return None;
    }
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |alpha: f64, evals: &mut usize| {
        let x: Vec<f64> = x0.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let mut g = vec![0.0; n];
        let mut v = f(&x, &mut g);
        if !v.is_finite() {
            v = f64::INFINITY;
        }
        *evals += 1;
        let dphi = if v.is_finite() { dot(&g, d) } else { f64::NAN };
        (x, v, g, dphi)
    };

    let accept = |x, loss, grad, alpha, evals| {
        Some(LineSearchResult {
            alpha,
            x,
            loss,
            grad,
            evals,
        })
    };

    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut d_prev = dphi0;
    let mut alpha = alpha0;
    let mut first = true;
    loop {
        if evals >= p.max_evals {
            return None;
        }
        let (x, fa, g, da) = eval(alpha, &mut evals);
        if fa > f0 + p.c1 * alpha * dphi0 || (!first && fa >= f_prev) || !fa.is_finite() {
            return zoom(&mut eval, &mut evals, a_prev, f_prev, d_prev, alpha, fa, da, f0, dphi0, p)
                .and_then(|(x, l, g, a)| accept(x, l, g, a, evals));
        }
        if da.abs() <= -p.c2 * dphi0 {
            return accept(x, fa, g, alpha, evals);
        }
        if da >= 0.0 {
            return zoom(&mut eval, &mut evals, alpha, fa, da, a_prev, f_prev, d_prev, f0, dphi0, p)
                .and_then(|(x, l, g, a)| accept(x, l, g, a, evals));
        }
        // Extrapolate: between 2× and 10× the current step.
        let next = cubic_min(a_prev, f_prev, d_prev, alpha, fa, da)
            .filter(|t| *t > 2.0 * alpha)
            .map_or(4.0 * alpha, |t| t.min(10.0 * alpha));
        a_prev = alpha;
        f_prev = fa;
        d_prev = da;
        alpha = next;
        first = false;
    }
}

#[allow(clippy::too_many_arguments)]
fn zoom<E>(
    eval: &mut E,
    evals: &mut usize,
    mut lo: f64,
    mut f_lo: f64,
    mut d_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    mut d_hi: f64,
    f0: f64,
    dphi0: f64,
    p: &WolfeParams,
) -> Option<(Vec<f64>, f64, Vec<f64>, f64)>
where
    E: FnMut(f64, &mut usize) -> (Vec<f64>, f64, Vec<f64>, f64),
{
    loop {
        if *evals >= p.max_evals {
            return None;
        }
        let (left, right) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let width = right - left;
        if !(width > 1e-16 * right.abs().max(1e-300)) {
            return None;
        }
        // Interpolate when both ends are finite, keeping the trial point
        // away from the bracket ends; bisect otherwise.
        let trial = if f_hi.is_finite() && d_hi.is_finite() {
            cubic_min(lo, f_lo, d_lo, hi, f_hi, d_hi)
        } else {
            None
        };
        let guard = 0.1 * width;
        let alpha = match trial {
            Some(t) if t > left + guard && t < right - guard => t,
            _ => 0.5 * (lo + hi),
        };
        let (x, fa, g, da) = eval(alpha, evals);
        if fa > f0 + p.c1 * alpha * dphi0 || fa >= f_lo || !fa.is_finite() {
            hi = alpha;
            f_hi = fa;
            d_hi = da;
        } else {
            if da.abs() <= -p.c2 * dphi0 {
                return Some((x, fa, g, alpha));
            }
            if da * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
                d_hi = d_lo;
            }
            lo = alpha;
            f_lo = fa;
            d_lo = da;
        }
    }
}
