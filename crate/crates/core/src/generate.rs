//! Training data synthesis: draw forcings from a Gaussian process, solve the
//! catalog problem for each, and sample both on fixed grids.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{OperatorId, Problem};
use crate::dataset::{domain_weights, normalize_dataset, Dataset, DatasetMeta, PointGrid, Sampling};
use crate::error::{Error, Result};
use crate::gp::{sample_gp, sample_gp_disk, KernelSpec, ResolutionPolicy};
use crate::linalg::{linspace, DenseMatrix, Grid1D, Quadrature};
use crate::solver::{
    solve_poisson_disk, CrankNicolson, Forcing, LinearSolver, NonlinearSolver, PolarGrid, SolveResult,
};

/// Radii and angles of the polar grid the disk problem is solved on.
pub const DISK_SOLVER_GRID: (usize, usize) = (32, 64);

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateConfig {
    pub operator: OperatorId,
    /// Forcing process; the operator's default when `None`.
    pub kernel: Option<KernelSpec>,
    /// Number of forcing/response pairs `N`.
    pub samples: usize,
    /// Forcing grid size `N_f` (one-dimensional problems).
    pub forcing_points: usize,
    /// Response grid size `N_u` (one-dimensional problems).
    pub response_points: usize,
    pub seed: u64,
    pub policy: ResolutionPolicy,
    pub quadrature: Quadrature,
    pub sampling: Sampling,
    /// Rescale to unit maximum response; defaults to "when the homogeneous
    /// solution vanishes".
    pub normalize: Option<bool>,
}

impl GenerateConfig {
    /// `N = 100`, `N_f = 200`, `N_u = 100`, uniform grids, trapezoid weights.
    pub fn new(operator: OperatorId) -> Self {
        Self {
            operator,
            kernel: None,
            samples: 100,
            forcing_points: 200,
            response_points: 100,
            seed: 0,
            policy: ResolutionPolicy::default(),
            quadrature: Quadrature::Trapezoid,
            sampling: Sampling::Uniform,
            normalize: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }
}

/// Builds the dataset described by `cfg`; identical configurations give
/// identical datasets.
pub fn generate(cfg: &GenerateConfig) -> Result<Dataset> {
    if cfg.samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    let op = cfg.operator;
    let kernel = cfg.kernel.unwrap_or_else(|| op.default_kernel());
    let mut meta = DatasetMeta::new(op.name(), op.domain());
    meta.kernel = Some(kernel);
    meta.seed = cfg.seed;
    meta.quadrature = cfg.quadrature;
    meta.sampling = cfg.sampling;
    let ds = match op.problem() {
        Problem::Disk => generate_disk(cfg, &kernel, meta)?,
        problem => generate_interval(cfg, &kernel, problem, meta)?,
    };
    if cfg.normalize.unwrap_or(op.homogeneous_is_zero()) {
        normalize_dataset(&ds)
    } else {
        Ok(ds)
    }
}

/// Response locations on `[a, b]`: equispaced or sorted uniform draws from a
/// stream of the seeded generator that the forcing draws do not use.
fn response_points(cfg: &GenerateConfig, (a, b): (f64, f64)) -> Result<Vec<f64>> {
    if cfg.response_points < 2 {
        return Err(Error::Config("need at least two response points".into()));
    }
    Ok(match cfg.sampling {
        Sampling::Uniform => linspace(a, b, cfg.response_points),
        Sampling::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(1);
            let mut pts: Vec<f64> = (0..cfg.response_points).map(|_| rng.random_range(a..b)).collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts
        }
    })
}

fn generate_interval(
    cfg: &GenerateConfig,
    kernel: &KernelSpec,
    problem: Problem,
    mut meta: DatasetMeta,
) -> Result<Dataset> {
    let domain = cfg.operator.domain();
    let (a, b) = domain;
    if cfg.forcing_points < 2 {
        return Err(Error::Config("need at least two forcing points".into()));
    }
    let fgrid = Grid1D::uniform(a, b, cfg.forcing_points)?;
    let xs = response_points(cfg, domain)?;
    let rweights = domain_weights(&xs, cfg.quadrature, domain)?;
    let fweights = domain_weights(fgrid.points(), cfg.quadrature, domain)?;
    let forcing_grid = PointGrid::new(1, fgrid.points().to_vec(), fweights)?;
    let response_grid = PointGrid::new(1, xs.clone(), rweights)?;
    let (_, n_f) = cfg.operator.components();
    let n = cfg.samples;
    let draws = sample_gp(kernel, &fgrid, n * n_f, cfg.seed, cfg.policy)?;
    if let Some(w) = &draws.warning {
        meta.notes.push(w.clone());
    }
    let y = fgrid.points();
    let mut forcing: Vec<Vec<Vec<f64>>> = (0..n_f)
        .map(|c| draws.values[c * n..(c + 1) * n].to_vec())
        .collect();
    let responses: Vec<Vec<Vec<f64>>> = match problem {
        Problem::Scalar { op, disc, nonlinear } => {
            let rows = if nonlinear {
                let solver = NonlinearSolver::new(&op, disc)?;
                parallel_map(&forcing[0], |f| solver.solve(Forcing::Samples { points: y, values: f }))?
            } else {
                let solver = LinearSolver::new(&op, disc)?;
                forcing[0]
                    .iter()
                    .map(|f| solver.solve(Forcing::Samples { points: y, values: f }))
                    .collect::<Result<Vec<_>>>()?
            };
            vec![rows.iter().map(|s: &SolveResult| s.eval_many(&xs)).collect()]
        }
        Problem::System { op, disc } => {
            let solver = LinearSolver::for_system(&op, disc)?;
            let mut out = vec![Vec::with_capacity(n); op.components];
            for j in 0..n {
                let fs: Vec<Forcing<'_>> = forcing
                    .iter()
                    .map(|comp| Forcing::Samples {
                        points: y,
                        values: &comp[j],
                    })
                    .collect();
                for (c, s) in solver.solve_system(&fs)?.iter().enumerate() {
                    out[c].push(s.eval_many(&xs));
                }
            }
            out
        }
        Problem::Propagator { fine_points, dt } => {
            // Damped states vanish well before the walls.
            for comp in &mut forcing {
                for f in comp.iter_mut() {
                    for (v, &x) in f.iter_mut().zip(y) {
                        *v *= (-x.powi(6) / 20.0).exp();
                    }
                }
            }
            let cn = CrankNicolson::new(a, b, fine_points, dt, &|x| x * x)?;
            let mut re = Vec::with_capacity(n);
            let mut im = Vec::with_capacity(n);
            for j in 0..n {
                let (r, i) = cn.propagate_samples(y, &forcing[0][j], &forcing[1][j], &xs)?;
                re.push(r);
                im.push(i);
            }
            meta.notes.push(format!(
                "Crank-Nicolson step dt={dt} on {fine_points} points; states damped by exp(-x^6/20)"
            ));
            vec![re, im]
        }
        Problem::Disk => unreachable!("handled by generate_disk"),
    };
    let to_matrix = |rows: &[Vec<f64>]| DenseMatrix::from_rows(rows);
    Dataset::new(
        forcing_grid,
        response_grid,
        forcing.iter().map(|c| to_matrix(c)).collect::<Result<_>>()?,
        responses.iter().map(|c| to_matrix(c)).collect::<Result<_>>()?,
        meta,
    )
}

/// Runs `f` over `items` on the available cores, keeping the input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(threads.max(1)).max(1);
    let f = &f;
    let parts: Vec<Result<Vec<R>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(f).collect::<Result<Vec<R>>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Every second radius and angle of the solver grid, with the area of the
/// annular sector around each node as its weight (total `π`).
pub fn disk_sample_points(grid: &PolarGrid) -> (Vec<(usize, usize)>, Vec<f64>) {
    let dr = grid.dr();
    let rings: Vec<usize> = (0..grid.radial).step_by(2).collect();
    let angles: Vec<usize> = (0..grid.angular).step_by(2).collect();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (k, &i) in rings.iter().enumerate() {
        let r = grid.radius(i);
        let lo = if k == 0 { 0.0 } else { r - dr };
        let hi = if k + 1 == rings.len() { 1.0 } else { r + dr };
        let w = PI * (hi * hi - lo * lo) / angles.len() as f64;
        for &j in &angles {
            nodes.push((i, j));
            weights.push(w);
        }
    }
    (nodes, weights)
}

fn generate_disk(cfg: &GenerateConfig, kernel: &KernelSpec, mut meta: DatasetMeta) -> Result<Dataset> {
    let grid = PolarGrid::new(DISK_SOLVER_GRID.0, DISK_SOLVER_GRID.1)?;
    let draws = sample_gp_disk(kernel, &grid.points(), cfg.samples, cfg.seed)?;
    let (nodes, weights) = disk_sample_points(&grid);
    let coords: Vec<f64> = nodes.iter().flat_map(|&(i, j)| grid.point(i, j)).collect();
    let points = PointGrid::new(2, coords, weights)?;
    let mut f_rows = Vec::with_capacity(cfg.samples);
    let mut u_rows = Vec::with_capacity(cfg.samples);
    for f in &draws.values {
        let sol = solve_poisson_disk(&grid, f)?;
        f_rows.push(nodes.iter().map(|&(i, j)| f[i * grid.angular + j]).collect::<Vec<_>>());
        u_rows.push(nodes.iter().map(|&(i, j)| sol.values[i * grid.angular + j]).collect::<Vec<_>>());
    }
    meta.quadrature = Quadrature::Trapezoid;
    meta.sampling = Sampling::Uniform;
    meta.notes.push(format!(
        "forcing: squared-exponential process with length-scale {} on the {}x{} polar solver grid; \
         samples on every second radius and angle, weighted by sector area",
        kernel.length_scale, grid.radial, grid.angular
    ));
    Dataset::new(
        points.clone(),
        points,
        vec![DenseMatrix::from_rows(&f_rows)?],
        vec![DenseMatrix::from_rows(&u_rows)?],
        meta,
    )
}
