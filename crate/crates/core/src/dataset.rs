//! Forcing/response pairs sampled on fixed grids, and the transforms applied
//! to them before training (normalization, measurement noise, gaps).

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gp::KernelSpec;
use crate::linalg::{trapezoid_weights, DenseMatrix, Grid1D, Quadrature};

/// How the measurement locations were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Sampling {
    #[default]
    Uniform,
    /// Independent uniform draws on the domain, sorted.
    Random,
}

impl Sampling {
    pub fn name(self) -> &'static str {
        match self {
            Sampling::Uniform => "uniform",
            Sampling::Random => "random",
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Sampling::Uniform),
            "random" => Ok(Sampling::Random),
            _ => Err(Error::Config(format!("unknown sampling `{s}` (uniform|random)"))),
        }
    }
}

/// Points in `dim` dimensions (row-major) with quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PointGrid {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PointGrid {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidGrid(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.len() / dim != weights.len() {
            return Err(Error::shape(coords.len() / dim, weights.len()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidGrid("empty point set".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidGrid("non-finite coordinate or negative weight".into()));
        }
        if dim == 1 && coords.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        Ok(Self { dim, coords, weights })
    }

    pub fn from_grid(grid: &Grid1D) -> Self {
        Self {
            dim: 1,
            coords: grid.points().to_vec(),
            weights: grid.weights().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// The one-dimensional grid, if this is one.
    pub fn as_grid1d(&self) -> Option<Grid1D> {
        (self.dim == 1).then(|| Grid1D::new(self.coords.clone(), self.weights.clone()).ok())?
    }
}

/// Weights of `rule` on increasing points of `[a, b]`. The trapezoid rule
/// assigns the uncovered end pieces `[a, x₁]` and `[x_n, b]` to the end
/// points, so the weights always sum to `b − a`.
pub fn domain_weights(points: &[f64], rule: Quadrature, (a, b): (f64, f64)) -> Result<Vec<f64>> {
    match rule {
        Quadrature::MonteCarlo => crate::linalg::montecarlo_weights(points, b - a),
        Quadrature::Trapezoid => {
            if points.len() == 1 {
                return Ok(vec![b - a]);
            }
            let mut w = trapezoid_weights(points)?;
            let n = w.len();
            w[0] += (points[0] - a).max(0.0);
            w[n - 1] += (b - points[n - 1]).max(0.0);
            Ok(w)
        }
    }
}

/// Where a dataset came from and what was done to it.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetMeta {
    pub operator: String,
    pub kernel: Option<KernelSpec>,
    pub seed: u64,
    /// Multiplicative noise level in percent.
    pub noise_percent: f64,
    /// Excluded response interval.
    pub mask: Option<(f64, f64)>,
    /// Factor the raw forcings and responses were multiplied by.
    pub normalization: f64,
    pub quadrature: Quadrature,
    pub sampling: Sampling,
    /// Bounding interval of each coordinate.
    pub domain: (f64, f64),
    /// Free-form provenance remarks.
    pub notes: Vec<String>,
}

impl DatasetMeta {
    pub fn new(operator: impl Into<String>, domain: (f64, f64)) -> Self {
        Self {
            operator: operator.into(),
            kernel: None,
            seed: 0,
            noise_percent: 0.0,
            mask: None,
            normalization: 1.0,
            quadrature: Quadrature::Trapezoid,
            sampling: Sampling::Uniform,
            domain,
            notes: Vec::new(),
        }
    }
}

/// `N` pairs of `n_f` forcing components sampled on the forcing grid and
/// `n_u` response components sampled on the response grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    forcing_grid: PointGrid,
    response_grid: PointGrid,
    forcing: Vec<DenseMatrix>,
    response: Vec<DenseMatrix>,
    norms: Vec<Vec<f64>>,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// `forcing[c]` is `N × N_f` and `response[c]` is `N × N_u`.
    pub fn new(
        forcing_grid: PointGrid,
        response_grid: PointGrid,
        forcing: Vec<DenseMatrix>,
        response: Vec<DenseMatrix>,
        meta: DatasetMeta,
    ) -> Result<Self> {
        if forcing.is_empty() || response.is_empty() {
            return Err(Error::InvalidDataset("need at least one forcing and one response component".into()));
        }
        if forcing_grid.dim() != response_grid.dim() {
            return Err(Error::InvalidDataset("forcing and response grids differ in dimension".into()));
        }
        let n = forcing[0].rows();
        if n == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        for (c, f) in forcing.iter().enumerate() {
            if f.rows() != n || f.cols() != forcing_grid.len() {
                return Err(Error::InvalidDataset(format!(
                    "forcing component {c} is {}×{}, expected {n}×{}",
                    f.rows(),
                    f.cols(),
                    forcing_grid.len()
                )));
            }
        }
        for (c, u) in response.iter().enumerate() {
            if u.rows() != n || u.cols() != response_grid.len() {
                return Err(Error::InvalidDataset(format!(
                    "response component {c} is {}×{}, expected {n}×{}",
                    u.rows(),
                    u.cols(),
                    response_grid.len()
                )));
            }
        }
        if forcing.iter().chain(&response).any(|m| !m.is_finite()) {
            return Err(Error::InvalidDataset("non-finite sample value".into()));
        }
        let norms: Vec<Vec<f64>> = response
            .iter()
            .map(|u| {
                (0..n)
                    .map(|j| {
                        let sq: Vec<f64> = u.row(j).iter().map(|v| v * v).collect();
                        response_grid.integrate(&sq)
                    })
                    .collect()
            })
            .collect();
        for (c, nc) in norms.iter().enumerate() {
            if let Some(j) = nc.iter().position(|v| !(*v > 0.0)) {
                return Err(Error::InvalidDataset(format!(
                    "response {j} of component {c} has zero norm"
                )));
            }
        }
        Ok(Self {
            forcing_grid,
            response_grid,
            forcing,
            response,
            norms,
            meta,
        })
    }

    pub fn samples(&self) -> usize {
        self.forcing[0].rows()
    }

    pub fn forcing_grid(&self) -> &PointGrid {
        &self.forcing_grid
    }

    pub fn response_grid(&self) -> &PointGrid {
        &self.response_grid
    }

    /// Forcing component `c`, one sample per row.
    pub fn forcing(&self, c: usize) -> &DenseMatrix {
        &self.forcing[c]
    }

    /// Response component `c`, one sample per row.
    pub fn response(&self, c: usize) -> &DenseMatrix {
        &self.response[c]
    }

    pub fn forcing_components(&self) -> usize {
        self.forcing.len()
    }

    pub fn response_components(&self) -> usize {
        self.response.len()
    }

    /// `‖u_j‖²` of response component `c` under the response quadrature.
    pub fn response_norms(&self, c: usize) -> &[f64] {
        &self.norms[c]
    }

    pub fn dim(&self) -> usize {
        self.forcing_grid.dim()
    }

    fn rebuild(&self, forcing: Vec<DenseMatrix>, response: Vec<DenseMatrix>, meta: DatasetMeta) -> Result<Self> {
        Self::new(self.forcing_grid.clone(), self.response_grid.clone(), forcing, response, meta)
    }

    /// Keeps samples `indices` (in the given order).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.iter().any(|&j| j >= self.samples()) {
            return Err(Error::InvalidDataset("sample selection out of range or empty".into()));
        }
        let pick = |m: &DenseMatrix| DenseMatrix::from_fn(indices.len(), m.cols(), |r, c| m[(indices[r], c)]);
        self.rebuild(
            self.forcing.iter().map(pick).collect(),
            self.response.iter().map(pick).collect(),
            self.meta.clone(),
        )
    }
}

/// Rescales forcings and responses by one common factor so the largest
/// response magnitude becomes 1.
pub fn normalize_dataset(ds: &Dataset) -> Result<Dataset> {
    let max = ds.response.iter().map(DenseMatrix::max_abs).fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::InvalidDataset("all responses are zero".into()));
    }
    let s = 1.0 / max;
    let mut meta = ds.meta.clone();
    meta.normalization *= s;
    ds.rebuild(
        ds.forcing.iter().map(|m| m.scale(s)).collect(),
        ds.response.iter().map(|m| m.scale(s)).collect(),
        meta,
    )
}

/// Multiplicative measurement noise `u (1 + δ c)` with `c` standard normal
/// and `δ` given in percent.
pub fn add_noise(ds: &Dataset, delta_percent: f64, seed: u64) -> Result<Dataset> {
    if !(delta_percent >= 0.0 && delta_percent.is_finite()) {
        return Err(Error::Config(format!("noise level must be nonnegative, got {delta_percent}")));
    }
    if delta_percent == 0.0 {
        return Ok(ds.clone());
    }
    let delta = delta_percent / 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let response = ds
        .response
        .iter()
        .map(|u| {
            let mut noisy = u.clone();
            for v in noisy.as_mut_slice() {
                let c: f64 = StandardNormal.sample(&mut rng);
                *v *= 1.0 + delta * c;
            }
            noisy
        })
        .collect();
    let mut meta = ds.meta.clone();
    meta.noise_percent = delta_percent;
    ds.rebuild(ds.forcing.clone(), response, meta)
}

/// Drops response measurements inside the closed interval `[lo, hi]`
/// (one-dimensional datasets) and rebuilds the response quadrature on the
/// points that remain. The forcing grid is untouched.
pub fn mask_measurements(ds: &Dataset, lo: f64, hi: f64) -> Result<Dataset> {
    if ds.dim() != 1 {
        return Err(Error::InvalidDataset("interval masks apply to one-dimensional data".into()));
    }
    let keep: Vec<usize> = ds
        .response_grid
        .coords()
        .iter()
        .enumerate()
        .filter(|(_, &x)| !(x >= lo && x <= hi))
        .map(|(i, _)| i)
        .collect();
    if keep.len() == ds.response_grid.len() {
        return Ok(ds.clone());
    }
    mask_indices(ds, &keep, Some((lo, hi)))
}

/// Keeps the response measurements at `keep` (increasing indices).
pub fn mask_indices(ds: &Dataset, keep: &[usize], interval: Option<(f64, f64)>) -> Result<Dataset> {
    if keep.len() < 2 || keep.windows(2).any(|w| w[1] <= w[0]) || keep.iter().any(|&i| i >= ds.response_grid.len()) {
        return Err(Error::InvalidDataset("need at least two retained, increasing, valid indices".into()));
    }
    let dim = ds.dim();
    let coords: Vec<f64> = keep.iter().flat_map(|&i| ds.response_grid.point(i).to_vec()).collect();
    let weights = if dim == 1 {
        domain_weights(&coords, ds.meta.quadrature, ds.meta.domain)?
    } else {
        // Scattered points: redistribute the total measure uniformly.
        let total: f64 = ds.response_grid.weights().iter().sum();
        vec![total / keep.len() as f64; keep.len()]
    };
    let grid = PointGrid::new(dim, coords, weights)?;
    let response = ds
        .response
        .iter()
        .map(|u| DenseMatrix::from_fn(u.rows(), keep.len(), |r, c| u[(r, keep[c])]))
        .collect();
    let mut meta = ds.meta.clone();
    meta.mask = interval.or(meta.mask);
    Dataset::new(ds.forcing_grid.clone(), grid, ds.forcing.clone(), response, meta)
}
