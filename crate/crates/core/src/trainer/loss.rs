//! Discretized mean relative squared error of the integral representation
//!
//! `u_j(x) ≈ N_hom(x) + Σ_c ∫ N_G,c(x, y) f_j^c(y) dy`
//!
//! for one response component, with both integrals replaced by the
//! dataset's quadrature weights.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{gemm, DenseMatrix};
use crate::net::{ForwardCache, RationalMLP};

/// Loss of one response component (one row of the Green's matrix).
pub struct RowLoss {
    n_u: usize,
    n_f: usize,
    samples: usize,
    /// Inputs `(x_i, y_k)` of the Green's networks, `i` major.
    product: Vec<f64>,
    /// Response coordinates, the inputs of the homogeneous network.
    response_coords: Vec<f64>,
    response_weights: Vec<f64>,
    /// `F_c diag(w_y)`, one per forcing component (`N × N_f`).
    weighted_forcing: Vec<DenseMatrix>,
    /// Transposes of the above (`N_f × N`).
    weighted_forcing_t: Vec<DenseMatrix>,
    /// Responses transposed (`N_u × N`).
    response_t: DenseMatrix,
    /// `1 / (N ‖u_j‖²)`.
    sample_scale: Vec<f64>,
    green_caches: Vec<ForwardCache>,
    hom_cache: ForwardCache,
}

/// Values of the loss ingredients and the loss gradient with respect to them.
pub struct ValueGradient {
    pub loss: f64,
    /// `∂loss/∂G_c(x_i, y_k)`, laid out like the product grid.
    pub green: Vec<Vec<f64>>,
    /// `∂loss/∂N_hom(x_i)`.
    pub hom: Vec<f64>,
}

impl RowLoss {
    pub fn new(ds: &Dataset, row: usize) -> Result<Self> {
        if row >= ds.response_components() {
            return Err(Error::InvalidDataset(format!("no response component {row}")));
        }
        let fg = ds.forcing_grid();
        let rg = ds.response_grid();
        let dim = ds.dim();
        let (n_u, n_f, samples) = (rg.len(), fg.len(), ds.samples());
        let mut product = Vec::with_capacity(n_u * n_f * 2 * dim);
        for i in 0..n_u {
            for k in 0..n_f {
                product.extend_from_slice(rg.point(i));
                product.extend_from_slice(fg.point(k));
            }
        }
        let weighted_forcing: Vec<DenseMatrix> = (0..ds.forcing_components())
            .map(|c| {
                let f = ds.forcing(c);
                DenseMatrix::from_fn(samples, n_f, |j, k| f[(j, k)] * fg.weights()[k])
            })
            .collect();
        let weighted_forcing_t = weighted_forcing.iter().map(DenseMatrix::transpose).collect();
        let norms = ds.response_norms(row);
        Ok(Self {
            n_u,
            n_f,
            samples,
            product,
            response_coords: rg.coords().to_vec(),
            response_weights: rg.weights().to_vec(),
            weighted_forcing,
            weighted_forcing_t,
            response_t: ds.response(row).transpose(),
            sample_scale: norms.iter().map(|n| 1.0 / (samples as f64 * n)).collect(),
            green_caches: (0..ds.forcing_components()).map(|_| ForwardCache::default()).collect(),
            hom_cache: ForwardCache::default(),
        })
    }

    pub fn forcing_components(&self) -> usize {
        self.weighted_forcing.len()
    }

    /// Product-grid inputs of the Green's networks.
    pub fn product_inputs(&self) -> &[f64] {
        &self.product
    }

    pub fn response_inputs(&self) -> &[f64] {
        &self.response_coords
    }

    /// Loss for given kernel values on the product grid and homogeneous
    /// values on the response grid. The gradient parts are filled when
    /// `with_gradient` is set. Non-finite inputs give an infinite loss.
    pub fn from_values(&self, green: &[&[f64]], hom: &[f64], with_gradient: bool) -> Result<ValueGradient> {
        if green.len() != self.forcing_components() {
            return Err(Error::shape(self.forcing_components(), green.len()));
        }
        if hom.len() != self.n_u || green.iter().any(|g| g.len() != self.n_u * self.n_f) {
            return Err(Error::shape(self.n_u * self.n_f, green.first().map_or(0, |g| g.len())));
        }
        let infinite = || ValueGradient {
            loss: f64::INFINITY,
            green: Vec::new(),
            hom: Vec::new(),
        };
        if hom.iter().chain(green.iter().flat_map(|g| g.iter())).any(|v| !v.is_finite()) {
            return Ok(infinite());
        }
        // Residual R = Uᵀ − h 1ᵀ − Σ_c G_c (F_c W)ᵀ, size N_u × N.
        let mut resid = self.response_t.clone();
        for (c, g) in green.iter().enumerate() {
            let wt = &self.weighted_forcing_t[c];
            let (n_f, n) = (self.n_f, self.samples);
            gemm(self.n_u, n_f, n, -1.0, g, (n_f, 1), wt.as_slice(), (n, 1), 1.0, resid.as_mut_slice());
        }
        for i in 0..self.n_u {
            for r in resid.row_mut(i) {
                *r -= hom[i];
            }
        }
        let mut loss = 0.0;
        let mut s = DenseMatrix::zeros(self.n_u, self.samples);
        for i in 0..self.n_u {
            let w = self.response_weights[i];
            let row = resid.row(i);
            let srow = s.row_mut(i);
            for j in 0..self.samples {
                let r = row[j];
                loss += w * r * r * self.sample_scale[j];
                srow[j] = 2.0 * w * r * self.sample_scale[j];
            }
        }
        if !loss.is_finite() {
            return Ok(infinite());
        }
        if !with_gradient {
            return Ok(ValueGradient {
                loss,
                green: Vec::new(),
                hom: Vec::new(),
            });
        }
        let hom_grad: Vec<f64> = (0..self.n_u).map(|i| -s.row(i).iter().sum::<f64>()).collect();
        let mut green_grad = Vec::with_capacity(green.len());
        for wf in &self.weighted_forcing {
            let mut dg = vec![0.0; self.n_u * self.n_f];
            let (n_f, n) = (self.n_f, self.samples);
            gemm(self.n_u, n, n_f, -1.0, s.as_slice(), (n, 1), wf.as_slice(), (n_f, 1), 0.0, &mut dg);
            green_grad.push(dg);
        }
        Ok(ValueGradient {
            loss,
            green: green_grad,
            hom: hom_grad,
        })
    }

    /// Loss of the networks and, when `grad` is given, its gradient with
    /// respect to the concatenated parameters `[G_1, …, G_nf, hom]`
    /// (overwritten).
    pub fn evaluate(&mut self, green: &[RationalMLP], hom: &RationalMLP, grad: Option<&mut [f64]>) -> Result<f64> {
        if green.len() != self.forcing_components() {
            return Err(Error::shape(self.forcing_components(), green.len()));
        }
        for (net, cache) in green.iter().zip(self.green_caches.iter_mut()) {
            net.forward_into(&self.product, cache)?;
        }
        hom.forward_into(&self.response_coords, &mut self.hom_cache)?;
        let values: Vec<&[f64]> = self.green_caches.iter().map(ForwardCache::output).collect();
        let vg = self.from_values(&values, self.hom_cache.output(), grad.is_some())?;
        let Some(grad) = grad else {
            return Ok(vg.loss);
        };
        grad.fill(0.0);
        if !vg.loss.is_finite() {
            return Ok(vg.loss);
        }
        let mut offset = 0;
        for ((net, cache), dg) in green.iter().zip(self.green_caches.iter_mut()).zip(&vg.green) {
            let n = net.param_count();
            net.backward_reusing(cache, dg, &mut grad[offset..offset + n])?;
            offset += n;
        }
        let n = hom.param_count();
        hom.backward_reusing(&mut self.hom_cache, &vg.hom, &mut grad[offset..offset + n])?;
        Ok(vg.loss)
    }
}
