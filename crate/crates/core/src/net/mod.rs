//! Fully connected networks with per-layer trainable rational activations.
//!
//! Parameters live in one flat vector so the optimizers can treat several
//! networks as a single point in parameter space. The layout is, for every
//! affine layer in order, the row-major weight matrix followed by its bias,
//! and then `7` activation coefficients per hidden layer (rational only).

pub mod activation;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use activation::Activation;
use activation::{rational, rational_complex, RATIONAL_COEFFS};

use crate::error::{Error, Result};

/// Hidden-layer widths used throughout: four layers of fifty neurons.
pub const DEFAULT_HIDDEN: [usize; 4] = [50; 4];

/// Rows evaluated at once when no gradient is needed.
const EVAL_CHUNK: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Affine {
    weights: usize,
    bias: usize,
    fan_in: usize,
    fan_out: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMLP {
    d_in: usize,
    hidden: Vec<usize>,
    activation: Activation,
    train_activation: bool,
    layers: Vec<Affine>,
    coeff_offset: usize,
    params: Vec<f64>,
}

/// Gradient of a scalar with respect to every parameter, in parameter order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGradient(pub Vec<f64>);

impl ParameterGradient {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Intermediate values of a forward pass, needed by [`RationalMLP::backward`].
#[derive(Clone, Debug, Default)]
pub struct ForwardCache {
    batch: usize,
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    output: Vec<f64>,
    scratch: (Vec<f64>, Vec<f64>),
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

fn layout(d_in: usize, hidden: &[usize]) -> (Vec<Affine>, usize) {
    let mut layers = Vec::with_capacity(hidden.len() + 1);
    let mut offset = 0;
    let mut fan_in = d_in;
    for &fan_out in hidden.iter().chain(std::iter::once(&1)) {
        layers.push(Affine {
            weights: offset,
            bias: offset + fan_in * fan_out,
            fan_in,
            fan_out,
        });
        offset += fan_in * fan_out + fan_out;
        fan_in = fan_out;
    }
    (layers, offset)
}

impl RationalMLP {
    /// Network with the standard four hidden layers of width fifty.
    pub fn init(d_in: usize, activation: Activation, seed: u64) -> Result<Self> {
        Self::init_with_hidden(d_in, &DEFAULT_HIDDEN, activation, seed)
    }

    /// Glorot-normal weights, zero biases, and ReLU-fitted rational coefficients.
    pub fn init_with_hidden(
        d_in: usize,
        hidden: &[usize],
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        if d_in == 0 || hidden.is_empty() || hidden.contains(&0) {
            return Err(Error::Config(format!(
                "invalid network shape: d_in={d_in}, hidden={hidden:?}"
            )));
        }
        let (layers, coeff_offset) = layout(d_in, hidden);
        let total = coeff_offset + hidden.len() * activation.coefficient_count();
        let mut params = vec![0.0; total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &layers {
            let std = (2.0 / (layer.fan_in + layer.fan_out) as f64).sqrt();
            let normal = Normal::new(0.0, std).expect("positive std");
            for w in &mut params[layer.weights..layer.bias] {
                *w = normal.sample(&mut rng);
            }
        }
        if activation == Activation::Rational {
            let init = activation::relu_fit_coefficients();
            for chunk in params[coeff_offset..].chunks_mut(RATIONAL_COEFFS) {
                chunk.copy_from_slice(&init);
            }
        }
        Ok(Self {
            d_in,
            hidden: hidden.to_vec(),
            activation,
            train_activation: true,
            layers,
            coeff_offset,
            params,
        })
    }

    /// Rebuilds a network from its shape and a flat parameter vector.
    pub fn from_parts(
        d_in: usize,
        hidden: &[usize],
        activation: Activation,
        params: Vec<f64>,
    ) -> Result<Self> {
        let mut net = Self::init_with_hidden(d_in, hidden, activation, 0)?;
        if params.len() != net.params.len() {
            return Err(Error::shape(net.params.len(), params.len()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("non-finite network parameter".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.d_in
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::shape(self.params.len(), params.len()));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Freezes or unfreezes the activation coefficients; frozen coefficients
    /// receive zero gradient.
    pub fn set_activation_trainable(&mut self, trainable: bool) {
        self.train_activation = trainable;
    }

    pub fn activation_trainable(&self) -> bool {
        self.train_activation
    }

    /// Coefficients `[p0..p3, q0..q2]` of hidden layer `layer`.
    pub fn activation_coefficients(&self, layer: usize) -> Option<&[f64]> {
        if self.activation != Activation::Rational || layer >= self.hidden.len() {
            return None;
        }
        let start = self.coeff_offset + layer * RATIONAL_COEFFS;
        Some(&self.params[start..start + RATIONAL_COEFFS])
    }

    pub fn activation_coefficients_mut(&mut self, layer: usize) -> Option<&mut [f64]> {
        if self.activation != Activation::Rational || layer >= self.hidden.len() {
            return None;
        }
        let start = self.coeff_offset + layer * RATIONAL_COEFFS;
        Some(&mut self.params[start..start + RATIONAL_COEFFS])
    }

    /// Index range of the activation coefficients inside [`Self::params`].
    pub fn activation_param_range(&self) -> std::ops::Range<usize> {
        self.coeff_offset..self.params.len()
    }

    fn coeffs(&self, layer: usize) -> &[f64] {
        let start = self.coeff_offset + layer * RATIONAL_COEFFS;
        &self.params[start..start + RATIONAL_COEFFS]
    }

    fn check_input(&self, x: &[f64]) -> Result<usize> {
        if !x.len().is_multiple_of(self.d_in) {
            return Err(Error::shape(
                format!("multiple of input width {}", self.d_in),
                x.len(),
            ));
        }
        Ok(x.len() / self.d_in)
    }

    fn affine_into(&self, layer: &Affine, input: &[f64], batch: usize, out: &mut Vec<f64>) {
        let bias = &self.params[layer.bias..layer.bias + layer.fan_out];
        out.clear();
        out.reserve(batch * layer.fan_out);
        for _ in 0..batch {
            out.extend_from_slice(bias);
        }
        crate::linalg::gemm(
            batch,
            layer.fan_in,
            layer.fan_out,
            1.0,
            input,
            (layer.fan_in, 1),
            &self.params[layer.weights..layer.bias],
            (1, layer.fan_in),
            1.0,
            out,
        );
    }

    fn activate_into(&self, layer: usize, z: &[f64], out: &mut Vec<f64>) {
        out.clear();
        match self.activation {
            Activation::Rational => {
                let c = self.coeffs(layer);
                out.extend(z.iter().map(|&v| rational(c, v)));
            }
            Activation::Relu => out.extend(z.iter().map(|&v| v.max(0.0))),
            Activation::Tanh => out.extend(z.iter().map(|&v| v.tanh())),
        }
    }

    /// Evaluates a batch of inputs (row-major, `d_in` values per point) and
    /// keeps everything the backward pass needs. Outputs may be non-finite if
    /// a rational activation hits a pole.
    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        let mut cache = ForwardCache::default();
        self.forward_into(x, &mut cache)?;
        Ok(cache)
    }

    /// Same as [`Self::forward_cached`] but reuses the buffers of `cache`.
    pub fn forward_into(&self, x: &[f64], cache: &mut ForwardCache) -> Result<()> {
        let batch = self.check_input(x)?;
        let n_hidden = self.hidden.len();
        cache.batch = batch;
        cache.input.clear();
        cache.input.extend_from_slice(x);
        cache.pre.resize_with(n_hidden, Vec::new);
        cache.post.resize_with(n_hidden, Vec::new);
        for l in 0..n_hidden {
            let layer = self.layers[l];
            let (before, rest) = cache.post.split_at_mut(l);
            let input = if l == 0 { x } else { before[l - 1].as_slice() };
            self.affine_into(&layer, input, batch, &mut cache.pre[l]);
            self.activate_into(l, &cache.pre[l], &mut rest[0]);
        }
        let last = self.layers[n_hidden];
        let input = cache.post.last().map_or(x, Vec::as_slice);
        self.affine_into(&last, input, batch, &mut cache.output);
        Ok(())
    }

    /// Outputs for a batch without error checking; pole hits show up as
    /// non-finite values.
    pub fn forward_raw(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = self.check_input(x)?;
        let mut out = Vec::with_capacity(batch);
        for chunk in x.chunks(EVAL_CHUNK * self.d_in) {
            let rows = chunk.len() / self.d_in;
            let mut h = chunk.to_vec();
            let mut z = Vec::new();
            for (l, layer) in self.layers[..self.hidden.len()].iter().enumerate() {
                self.affine_into(layer, &h, rows, &mut z);
                self.activate_into(l, &z, &mut h);
            }
            self.affine_into(&self.layers[self.hidden.len()], &h, rows, &mut z);
            out.extend_from_slice(&z);
        }
        Ok(out)
    }

    /// Outputs for a batch; a non-finite output is reported as a pole hit.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = self.forward_raw(x)?;
        let count = out.iter().filter(|v| !v.is_finite()).count();
        if count > 0 {
            return Err(Error::PoleHit { count });
        }
        Ok(out)
    }

    /// Single-point convenience wrapper around [`Self::forward`].
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d_in {
            return Err(Error::shape(self.d_in, x.len()));
        }
        Ok(self.forward(x)?[0])
    }

    /// Same composition in complex arithmetic; only rational activations
    /// extend to the complex plane.
    pub fn forward_complex(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.activation != Activation::Rational {
            return Err(Error::UnsupportedActivation(self.activation.name().into()));
        }
        if !z.len().is_multiple_of(self.d_in) {
            return Err(Error::shape(
                format!("multiple of input width {}", self.d_in),
                z.len(),
            ));
        }
        let n_hidden = self.hidden.len();
        let mut out = Vec::with_capacity(z.len() / self.d_in);
        let mut h: Vec<Complex64> = Vec::new();
        let mut next: Vec<Complex64> = Vec::new();
        for point in z.chunks(self.d_in) {
            h.clear();
            h.extend_from_slice(point);
            for (l, layer) in self.layers.iter().enumerate() {
                next.clear();
                let w = &self.params[layer.weights..layer.bias];
                let b = &self.params[layer.bias..layer.bias + layer.fan_out];
                for o in 0..layer.fan_out {
                    let row = &w[o * layer.fan_in..(o + 1) * layer.fan_in];
                    let mut acc = Complex64::new(b[o], 0.0);
                    for (wi, hi) in row.iter().zip(&h) {
                        acc += hi * *wi;
                    }
                    next.push(if l < n_hidden {
                        rational_complex(self.coeffs(l), acc)
                    } else {
                        acc
                    });
                }
                std::mem::swap(&mut h, &mut next);
            }
            out.push(h[0]);
        }
        Ok(out)
    }

    /// Reverse-mode gradient of `Σ_b dout[b] · output[b]` with respect to
    /// every parameter.
    pub fn backward(&self, cache: &ForwardCache, dout: &[f64]) -> Result<ParameterGradient> {
        let mut grad = vec![0.0; self.params.len()];
        self.backward_into(cache, dout, &mut grad)?;
        Ok(ParameterGradient(grad))
    }

    /// Accumulates the gradient into `grad` (same layout as the parameters).
    pub fn backward_into(&self, cache: &ForwardCache, dout: &[f64], grad: &mut [f64]) -> Result<()> {
        let mut scratch = (Vec::new(), Vec::new());
        self.backward_with(cache, dout, grad, &mut scratch)
    }

    /// Same as [`Self::backward_into`] but keeps its scratch buffers in
    /// `cache`, which stays valid for further backward passes.
    pub fn backward_reusing(&self, cache: &mut ForwardCache, dout: &[f64], grad: &mut [f64]) -> Result<()> {
        let mut scratch = std::mem::take(&mut cache.scratch);
        let r = self.backward_with(cache, dout, grad, &mut scratch);
        cache.scratch = scratch;
        r
    }

    fn backward_with(
        &self,
        cache: &ForwardCache,
        dout: &[f64],
        grad: &mut [f64],
        scratch: &mut (Vec<f64>, Vec<f64>),
    ) -> Result<()> {
        let batch = cache.batch;
        let n_hidden = self.hidden.len();
        if dout.len() != batch
            || cache.pre.len() != n_hidden
            || cache.input.len() != batch * self.d_in
            || cache.pre.iter().zip(&self.hidden).any(|(z, w)| z.len() != batch * w)
        {
            return Err(Error::MissingCache);
        }
        if grad.len() != self.params.len() {
            return Err(Error::shape(self.params.len(), grad.len()));
        }

        let (delta, upstream) = scratch;
        delta.clear();
        delta.extend_from_slice(dout);
        for l in (0..=n_hidden).rev() {
            let layer = self.layers[l];
            let input: &[f64] = if l == 0 { &cache.input } else { &cache.post[l - 1] };
            // Weight gradient: deltaᵀ · input.
            crate::linalg::gemm(
                layer.fan_out,
                batch,
                layer.fan_in,
                1.0,
                delta,
                (1, layer.fan_out),
                input,
                (layer.fan_in, 1),
                1.0,
                &mut grad[layer.weights..layer.bias],
            );
            let gb = &mut grad[layer.bias..layer.bias + layer.fan_out];
            for row in delta.chunks(layer.fan_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 {
                break;
            }
            // Gradient with respect to the previous layer's activations.
            upstream.clear();
            upstream.resize(batch * layer.fan_in, 0.0);
            crate::linalg::gemm(
                batch,
                layer.fan_out,
                layer.fan_in,
                1.0,
                delta,
                (layer.fan_out, 1),
                &self.params[layer.weights..layer.bias],
                (layer.fan_in, 1),
                0.0,
                upstream,
            );
            self.activation_backward(l - 1, &cache.pre[l - 1], upstream, grad);
            std::mem::swap(delta, upstream);
        }
        Ok(())
    }

    /// Turns `dL/da` into `dL/dz` for hidden layer `layer` in place and adds
    /// the activation-coefficient gradient.
    fn activation_backward(&self, layer: usize, z: &[f64], da: &mut [f64], grad: &mut [f64]) {
        match self.activation {
            Activation::Relu => {
                for (d, &v) in da.iter_mut().zip(z) {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Tanh => {
                for (d, &v) in da.iter_mut().zip(z) {
                    let t = v.tanh();
                    *d *= 1.0 - t * t;
                }
            }
            Activation::Rational => {
                let c: [f64; RATIONAL_COEFFS] = self.coeffs(layer).try_into().expect("seven coefficients");
                let mut g = [0.0; RATIONAL_COEFFS];
                for (d, &x) in da.iter_mut().zip(z) {
                    let p = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
                    let dp = c[1] + x * (2.0 * c[2] + 3.0 * x * c[3]);
                    let q = c[4] + x * (c[5] + x * c[6]);
                    let dq = c[5] + 2.0 * x * c[6];
                    let r = 1.0 / q;
                    let gr = *d * r;
                    let gs = -gr * p * r;
                    let x2 = x * x;
                    g[0] += gr;
                    g[1] += gr * x;
                    g[2] += gr * x2;
                    g[3] += gr * x2 * x;
                    g[4] += gs;
                    g[5] += gs * x;
                    g[6] += gs * x2;
                    *d = gr * (dp - p * dq * r);
                }
                if self.train_activation {
                    let start = self.coeff_offset + layer * RATIONAL_COEFFS;
                    for (acc, gk) in grad[start..start + RATIONAL_COEFFS].iter_mut().zip(g) {
                        *acc += gk;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_inputs(n: usize, d: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn parameter_counts() {
        let g = RationalMLP::init(2, Activation::Rational, 0).unwrap();
        assert_eq!(g.param_count(), (2 * 50 + 50) + 3 * (50 * 50 + 50) + (50 + 1) + 28);
        assert_eq!(g.activation_param_range().len(), 28);
        let h = RationalMLP::init(1, Activation::Relu, 0).unwrap();
        assert_eq!(h.param_count(), (50 + 50) + 3 * (50 * 50 + 50) + 51);
    }

    #[test]
    fn init_is_deterministic_with_zero_bias() {
        let a = RationalMLP::init(2, Activation::Rational, 11).unwrap();
        let b = RationalMLP::init(2, Activation::Rational, 11).unwrap();
        assert_eq!(a, b);
        let c = RationalMLP::init(2, Activation::Rational, 12).unwrap();
        assert_ne!(a.params(), c.params());
        for layer in &a.layers {
            assert!(a.params[layer.bias..layer.bias + layer.fan_out].iter().all(|b| *b == 0.0));
        }
        for l in 0..4 {
            assert_eq!(a.activation_coefficients(l).unwrap(), &activation::relu_fit_coefficients());
        }
    }

    #[test]
    fn glorot_variance() {
        let net = RationalMLP::init(2, Activation::Rational, 3).unwrap();
        let layer = net.layers[1];
        let w = &net.params[layer.weights..layer.bias];
        let var = w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
        let expect = 2.0 / 100.0;
        assert!((var - expect).abs() < 0.1 * expect, "{var}");
    }

    /// One-neuron-wide network whose weights are all one and whose
    /// activations are the identity.
    fn identity_chain() -> RationalMLP {
        let mut net = RationalMLP::init_with_hidden(1, &[1, 1, 1], Activation::Rational, 0).unwrap();
        for layer in net.layers.clone() {
            net.params[layer.weights] = 1.0;
        }
        for l in 0..3 {
            net.activation_coefficients_mut(l)
                .unwrap()
                .copy_from_slice(&[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        }
        net
    }

    #[test]
    fn identity_composition() {
        let net = identity_chain();
        let xs = [-2.0, -0.5, 0.0, 0.25, 3.0];
        assert_eq!(net.forward(&xs).unwrap(), xs.to_vec());
    }

    #[test]
    fn batch_equals_pointwise() {
        let net = RationalMLP::init(2, Activation::Rational, 5).unwrap();
        let x = random_inputs(37, 2, 1);
        let batch = net.forward(&x).unwrap();
        for (i, p) in x.chunks(2).enumerate() {
            assert_eq!(net.eval(p).unwrap(), batch[i]);
        }
        let cached = net.forward_cached(&x).unwrap();
        assert_eq!(cached.output(), batch.as_slice());
    }

    #[test]
    fn chunked_evaluation_matches_cached_on_large_grid() {
        let net = RationalMLP::init(2, Activation::Rational, 9).unwrap();
        let x = random_inputs(20_000, 2, 2);
        let a = net.forward(&x).unwrap();
        let b = net.forward_cached(&x).unwrap();
        assert_eq!(a.as_slice(), b.output());
    }

    #[test]
    fn pole_hit_is_reported() {
        let mut net = identity_chain();
        // q(x) = x vanishes at the origin.
        net.activation_coefficients_mut(0)
            .unwrap()
            .copy_from_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(net.forward(&[0.0, 1.0]), Err(Error::PoleHit { count: 1 })));
        assert!(net.forward(&[0.5]).is_ok());
    }

    #[test]
    fn complex_restricted_to_real_axis() {
        let net = RationalMLP::init(1, Activation::Rational, 4).unwrap();
        let xs = random_inputs(50, 1, 3);
        let zs: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let real = net.forward(&xs).unwrap();
        let cplx = net.forward_complex(&zs).unwrap();
        for (r, c) in real.iter().zip(&cplx) {
            assert!(c.im.abs() <= 1e-12);
            assert!((c.re - r).abs() <= 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn complex_conjugation_symmetry() {
        let net = RationalMLP::init(1, Activation::Rational, 8).unwrap();
        let zs = [Complex64::new(0.3, 0.2), Complex64::new(-0.7, 0.45), Complex64::new(1.1, -0.3)];
        let conj: Vec<Complex64> = zs.iter().map(|z| z.conj()).collect();
        let a = net.forward_complex(&zs).unwrap();
        let b = net.forward_complex(&conj).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.conj() - y).norm() <= 1e-12 * x.norm().max(1.0));
        }
        let relu = RationalMLP::init(1, Activation::Relu, 0).unwrap();
        assert!(matches!(relu.forward_complex(&zs), Err(Error::UnsupportedActivation(_))));
    }

    #[test]
    fn constant_output_has_zero_gradient() {
        let net = RationalMLP::init(2, Activation::Rational, 1).unwrap();
        let x = random_inputs(10, 2, 5);
        let cache = net.forward_cached(&x).unwrap();
        let g = net.backward(&cache, &[0.0; 10]).unwrap();
        assert!(g.0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn backward_requires_matching_cache() {
        let net = RationalMLP::init(2, Activation::Rational, 1).unwrap();
        let cache = net.forward_cached(&random_inputs(4, 2, 5)).unwrap();
        assert!(matches!(net.backward(&cache, &[1.0; 3]), Err(Error::MissingCache)));
        let other = RationalMLP::init_with_hidden(2, &[10, 10], Activation::Rational, 1).unwrap();
        assert!(matches!(other.backward(&cache, &[1.0; 4]), Err(Error::MissingCache)));
    }

    /// Central-difference check of `Σ_b c_b · N(x_b)` on the given parameter indices.
    fn gradient_check(net: &RationalMLP, indices: &[usize]) -> f64 {
        let x = random_inputs(16, net.input_dim(), 77);
        let weights: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3 + 0.1).collect();
        let cache = net.forward_cached(&x).unwrap();
        let g = net.backward(&cache, &weights).unwrap();
        let objective = |n: &RationalMLP| -> f64 {
            n.forward(&x).unwrap().iter().zip(&weights).map(|(o, w)| o * w).sum()
        };
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for &i in indices {
            let mut plus = net.clone();
            plus.params[i] += h;
            let mut minus = net.clone();
            minus.params[i] -= h;
            let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
            let rel = (fd - g.0[i]).abs() / fd.abs().max(g.0[i].abs()).max(1e-3);
            worst = worst.max(rel);
        }
        worst
    }

    #[test]
    fn gradient_check_every_parameter_class() {
        let mut net = RationalMLP::init(2, Activation::Rational, 21).unwrap();
        // Move biases and coefficients away from their initial values.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in net.params.iter_mut() {
            *p += 0.05 * rng.random_range(-1.0..1.0);
        }
        let mut indices = Vec::new();
        for layer in &net.layers {
            indices.push(layer.weights + 3);
            indices.push(layer.bias);
        }
        indices.extend(net.activation_param_range());
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            indices.push(rng.random_range(0..net.param_count()));
        }
        let worst = gradient_check(&net, &indices);
        assert!(worst <= 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn gradient_check_baselines() {
        for act in [Activation::Tanh, Activation::Relu] {
            let net = RationalMLP::init(1, act, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let idx: Vec<usize> = (0..20).map(|_| rng.random_range(0..net.param_count())).collect();
            assert!(gradient_check(&net, &idx) <= 1e-5);
        }
    }

    #[test]
    fn frozen_activation_matches_fixed_activation_gradient() {
        let net = RationalMLP::init(1, Activation::Rational, 6).unwrap();
        let mut frozen = net.clone();
        frozen.set_activation_trainable(false);
        let x = random_inputs(12, 1, 8);
        let dout = vec![0.5; 12];
        let full = net.backward(&net.forward_cached(&x).unwrap(), &dout).unwrap();
        let part = frozen.backward(&frozen.forward_cached(&x).unwrap(), &dout).unwrap();
        let range = net.activation_param_range();
        for (i, (a, b)) in full.0.iter().zip(&part.0).enumerate() {
            if range.contains(&i) {
                assert_eq!(*b, 0.0);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    proptest! {
        #[test]
        fn from_parts_roundtrip(seed in 0u64..500) {
            let net = RationalMLP::init(2, Activation::Rational, seed).unwrap();
            let back = RationalMLP::from_parts(2, net.hidden(), net.activation(), net.params().to_vec()).unwrap();
            prop_assert_eq!(back, net);
        }
    }
}
