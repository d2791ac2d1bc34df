//! Random forcing functions drawn from Gaussian processes.
//!
//! Draws are `L z` with `L` the jittered Cholesky factor of the covariance
//! matrix and `z` standard normal. Normal variates come from `rand_distr`'s
//! ziggurat sampler driven by a `ChaCha8Rng`, so a seed fixes every draw on
//! every platform.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{cholesky_jittered, DenseMatrix, Grid1D};

/// Normalized length-scale used for every one-dimensional example unless a
/// configuration overrides it.
pub const DEFAULT_LAMBDA: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    SquaredExponential,
    Periodic,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "squared_exponential",
            KernelFamily::Periodic => "periodic",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared_exponential" | "se" => Ok(KernelFamily::SquaredExponential),
            "periodic" => Ok(KernelFamily::Periodic),
            other => Err(Error::InvalidKernel(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Covariance kernel together with its length-scale in the units of `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub length_scale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, length_scale: f64) -> Result<Self> {
        if !(length_scale.is_finite() && length_scale > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "length-scale must be positive, got {length_scale}"
            )));
        }
        Ok(Self {
            family,
            length_scale,
        })
    }

    /// Kernel whose length-scale is `lambda · (b − a)`.
    pub fn from_normalized(family: KernelFamily, lambda: f64, a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidGrid(format!("empty interval [{a}, {b}]")));
        }
        Self::new(family, lambda * (b - a))
    }

    pub fn normalized_length_scale(&self, a: f64, b: f64) -> f64 {
        self.length_scale / (b - a)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(length_scale={})", self.family, self.length_scale)
    }
}

/// Covariance between `x` and `y`. The periodic kernel has unit period.
pub fn kernel_eval(spec: &KernelSpec, x: f64, y: f64) -> Result<f64> {
    if !(spec.length_scale > 0.0) {
        return Err(Error::InvalidKernel("length-scale must be positive".into()));
    }
    Ok(raw_kernel(spec.family, spec.length_scale, x - y))
}

fn raw_kernel(family: KernelFamily, ell: f64, d: f64) -> f64 {
    match family {
        KernelFamily::SquaredExponential => (-d * d / (2.0 * ell * ell)).exp(),
        KernelFamily::Periodic => {
            let s = (std::f64::consts::PI * d.abs()).sin();
            (-2.0 * s * s / (ell * ell)).exp()
        }
    }
}

/// What to do when the length-scale is finer than the forcing grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResolutionPolicy {
    Strict,
    #[default]
    Warn,
}

/// `n` forcing functions sampled on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcingSample {
    pub grid: Grid1D,
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    /// Set when the resolution bound was violated under [`ResolutionPolicy::Warn`].
    pub warning: Option<String>,
}

/// Covariance matrix used for sampling on `grid`.
///
/// Coordinates are first mapped to `t = (x − a)/(b − a)` with `[a, b]` the
/// span of the grid and the kernel is evaluated with length-scale
/// `λ = ℓ/(b − a)`. For the squared-exponential kernel this is the same as
/// evaluating it in `x`; for the periodic kernel it makes the period equal
/// to the domain length, so draws on any interval satisfy `f(a) = f(b)`.
pub fn covariance_matrix(spec: &KernelSpec, grid: &Grid1D) -> Result<DenseMatrix> {
    let (a, b) = span(grid)?;
    let lambda = spec.normalized_length_scale(a, b);
    let t: Vec<f64> = grid.points().iter().map(|x| (x - a) / (b - a)).collect();
    let n = t.len();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        raw_kernel(spec.family, lambda, t[i] - t[j])
    }))
}

fn span(grid: &Grid1D) -> Result<(f64, f64)> {
    let p = grid.points();
    if p.len() < 2 {
        return Err(Error::InvalidGrid("sampling needs at least 2 points".into()));
    }
    Ok((p[0], p[p.len() - 1]))
}

/// Checks `λ ≥ 1/N_f`; returns a warning message under the lenient policy.
pub fn check_resolution(
    spec: &KernelSpec,
    grid: &Grid1D,
    policy: ResolutionPolicy,
) -> Result<Option<String>> {
    let (a, b) = span(grid)?;
    let lambda = spec.normalized_length_scale(a, b);
    let bound = 1.0 / grid.len() as f64;
    if lambda >= bound {
        return Ok(None);
    }
    match policy {
        ResolutionPolicy::Strict => Err(Error::ResolutionBound { lambda, bound }),
        ResolutionPolicy::Warn => Ok(Some(format!(
            "normalized length-scale {lambda} is below the grid resolution bound {bound}"
        ))),
    }
}

/// Draws `n` independent zero-mean samples with covariance
/// [`covariance_matrix`]. Identical arguments give identical output.
pub fn sample_gp(
    spec: &KernelSpec,
    grid: &Grid1D,
    n: usize,
    seed: u64,
    policy: ResolutionPolicy,
) -> Result<ForcingSample> {
    let warning = check_resolution(spec, grid, policy)?;
    let cov = covariance_matrix(spec, grid)?;
    let values = match spec.family {
        KernelFamily::SquaredExponential => draw(&cov, n, seed)?,
        KernelFamily::Periodic => draw_periodic(&cov, grid, n, seed)?,
    };
    Ok(ForcingSample {
        grid: grid.clone(),
        values,
        seed,
        warning,
    })
}

/// Draws columns of `L Z` where `Z` is filled sample by sample from the
/// seeded generator.
fn draw(cov: &DenseMatrix, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let m = cov.rows();
    let chol = cholesky_jittered(cov)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Z stored as n × m so that each sample's normals are contiguous.
    let z = DenseMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng));
    // Samples = Z Lᵀ, one row per draw.
    let draws = z.matmul(&chol.lower.transpose())?;
    Ok((0..n).map(|j| draws.row(j).to_vec()).collect())
}

/// Points one period apart have identical covariance rows, which would make
/// the matrix singular and let jitter break the exact periodicity. Sample on
/// the distinct points modulo the period and copy values to the repeats.
fn draw_periodic(cov: &DenseMatrix, grid: &Grid1D, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (a, b) = span(grid)?;
    let mut representative = Vec::with_capacity(grid.len());
    let mut unique: Vec<usize> = Vec::new();
    for &x in grid.points() {
        let t = ((x - a) / (b - a)).rem_euclid(1.0);
        let t = if (1.0 - t) < 1e-12 { 0.0 } else { t };
        let slot = unique.iter().position(|&u| {
            let tu = ((grid.points()[u] - a) / (b - a)).rem_euclid(1.0);
            let tu = if (1.0 - tu) < 1e-12 { 0.0 } else { tu };
            (tu - t).abs() < 1e-12
        });
        match slot {
            Some(k) => representative.push(k),
            None => {
                representative.push(unique.len());
                unique.push(representative.len() - 1);
            }
        }
    }
    let reduced = DenseMatrix::from_fn(unique.len(), unique.len(), |i, j| cov[(unique[i], unique[j])]);
    let draws = draw(&reduced, n, seed)?;
    Ok(draws
        .into_iter()
        .map(|d| representative.iter().map(|&k| d[k]).collect())
        .collect())
}

/// Forcing functions sampled at scattered points of the unit disk.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskForcingSample {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Squared-exponential draws on points of the closed unit disk, with
/// Euclidean distance in the plane. The length-scale is used as given.
pub fn sample_gp_disk(
    spec: &KernelSpec,
    points: &[[f64; 2]],
    n: usize,
    seed: u64,
) -> Result<DiskForcingSample> {
    if spec.family != KernelFamily::SquaredExponential {
        return Err(Error::InvalidKernel(
            "disk sampling supports the squared-exponential kernel only".into(),
        ));
    }
    if points.is_empty() {
        return Err(Error::InvalidGrid("no sample points".into()));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p[0].is_finite() && p[1].is_finite()) || p[0] * p[0] + p[1] * p[1] > 1.0 + 1e-12)
    {
        return Err(Error::InvalidGrid(format!(
            "point ({}, {}) lies outside the unit disk",
            p[0], p[1]
        )));
    }
    let ell = spec.length_scale;
    let m = points.len();
    let cov = DenseMatrix::from_fn(m, m, |i, j| {
        let dx = points[i][0] - points[j][0];
        let dy = points[i][1] - points[j][1];
        (-(dx * dx + dy * dy) / (2.0 * ell * ell)).exp()
    });
    let values = draw(&cov, n, seed)?;
    Ok(DiskForcingSample {
        points: points.to_vec(),
        values,
        seed,
    })
}
