//! Browser bindings for three interactive operations:
//!
//! * [`sample_pair`] draws one random forcing and solves for its response,
//! * [`exact_kernel`] tabulates a closed-form Green's function together with
//!   the leading eigenvalues of its integral operator,
//! * [`train_small`] trains a small rational network on a reduced dataset
//!   and returns the learned kernel next to the exact one.
//!
//! Each export wraps a plain function (`*_impl`) so the logic is testable
//! on the host.

use greenlearn::catalog::OperatorId;
use greenlearn::features::{integral_operator_eig, relative_l2_error, KernelGrid};
use greenlearn::generate::{generate, GenerateConfig};
use greenlearn::gp::{KernelFamily, KernelSpec};
use greenlearn::trainer::{train, TrainConfig};
use wasm_bindgen::prelude::*;

/// Operators with a closed-form one-dimensional kernel.
pub const KERNEL_OPERATORS: [OperatorId; 4] = [
    OperatorId::HelmholtzK15,
    OperatorId::Laplace,
    OperatorId::AdvectionDiffusion,
    OperatorId::PeriodicHelmholtz,
];

fn operator(name: &str) -> Result<OperatorId, String> {
    name.parse::<OperatorId>().map_err(|e| e.to_string())
}

fn kernel_operator(name: &str) -> Result<OperatorId, String> {
    let op = operator(name)?;
    if KERNEL_OPERATORS.contains(&op) {
        Ok(op)
    } else {
        Err(format!("`{name}` has no closed-form one-dimensional kernel"))
    }
}

/// Names accepted by [`exact_kernel`] and [`train_small`].
#[wasm_bindgen]
pub fn kernel_operators() -> Vec<String> {
    KERNEL_OPERATORS.iter().map(|op| op.name().to_string()).collect()
}

/// Names accepted by [`sample_pair`]: every one-dimensional scalar operator.
#[wasm_bindgen]
pub fn pair_operators() -> Vec<String> {
    OperatorId::ALL
        .iter()
        .filter(|op| op.dimension() == 1 && op.components() == (1, 1))
        .map(|op| op.name().to_string())
        .collect()
}

/// A forcing and its response on their sampling grids.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug)]
pub struct Pair {
    pub forcing_x: Vec<f64>,
    pub forcing: Vec<f64>,
    pub response_x: Vec<f64>,
    pub response: Vec<f64>,
}

pub fn sample_pair_impl(name: &str, seed: u32, length_scale: f64) -> Result<Pair, String> {
    let op = operator(name)?;
    if op.dimension() != 1 || op.components() != (1, 1) {
        return Err(format!("`{name}` is not a one-dimensional scalar problem"));
    }
    let (a, b) = op.domain();
    let mut cfg = GenerateConfig::new(op).with_seed(seed.into()).with_samples(1);
    let family = op.default_kernel().family;
    cfg.kernel = Some(KernelSpec::from_normalized(family, length_scale, a, b).map_err(|e| e.to_string())?);
    cfg.normalize = Some(false);
    let ds = generate(&cfg).map_err(|e| e.to_string())?;
    Ok(Pair {
        forcing_x: ds.forcing_grid().coords().to_vec(),
        forcing: ds.forcing(0).row(0).to_vec(),
        response_x: ds.response_grid().coords().to_vec(),
        response: ds.response(0).row(0).to_vec(),
    })
}

/// Draws a forcing from the operator's Gaussian process (normalized
/// length-scale `length_scale`) and solves for the response.
#[wasm_bindgen]
pub fn sample_pair(name: &str, seed: u32, length_scale: f64) -> Result<Pair, JsError> {
    sample_pair_impl(name, seed, length_scale).map_err(|e| JsError::new(&e))
}

/// A kernel tabulated on an `n × n` grid, row-major with `x` along rows.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug)]
pub struct KernelView {
    pub n: usize,
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    /// Leading eigenvalues of the integral operator, largest first.
    pub eigenvalues: Vec<f64>,
}

fn view(grid: &KernelGrid, eigen_count: usize) -> Result<KernelView, String> {
    let eig = integral_operator_eig(grid, eigen_count).map_err(|e| e.to_string())?;
    Ok(KernelView {
        n: grid.x().len(),
        axis: grid.x().points().to_vec(),
        values: grid.values().as_slice().to_vec(),
        eigenvalues: eig.values,
    })
}

pub fn exact_kernel_impl(name: &str, n: usize) -> Result<KernelView, String> {
    let op = kernel_operator(name)?;
    let exact = op.exact().ok_or("no exact kernel")?;
    let grid = KernelGrid::from_exact(exact, n).map_err(|e| e.to_string())?;
    view(&grid, 10)
}

#[wasm_bindgen]
pub fn exact_kernel(name: &str, n: usize) -> Result<KernelView, JsError> {
    exact_kernel_impl(name, n).map_err(|e| JsError::new(&e))
}

/// Outcome of [`train_small`].
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug)]
pub struct TrainView {
    pub learned: KernelView,
    pub exact: KernelView,
    /// Relative L² error of the learned kernel in percent.
    pub error_percent: f64,
    pub losses: Vec<f64>,
    /// Index in `losses` where Adam hands over to L-BFGS.
    pub phase_boundary: usize,
}

/// Dataset and network sizes small enough to train interactively.
pub fn small_configs(op: OperatorId, seed: u64, iterations: usize) -> (GenerateConfig, TrainConfig) {
    let (a, b) = op.domain();
    let mut data = GenerateConfig::new(op).with_seed(seed).with_samples(40);
    data.forcing_points = 80;
    data.response_points = 40;
    data.kernel = KernelSpec::from_normalized(op.default_kernel().family, 0.05, a, b).ok();
    if op.default_kernel().family == KernelFamily::Periodic {
        data.kernel = KernelSpec::from_normalized(KernelFamily::Periodic, 0.2, a, b).ok();
    }
    let train = TrainConfig {
        seed,
        adam_epochs: 200,
        lbfgs_max_iters: iterations,
        hidden: vec![16, 16],
        ..TrainConfig::default()
    };
    (data, train)
}

pub fn train_small_impl(name: &str, seed: u32, iterations: usize, n: usize) -> Result<TrainView, String> {
    let op = kernel_operator(name)?;
    let (data, cfg) = small_configs(op, seed.into(), iterations);
    let ds = generate(&data).map_err(|e| e.to_string())?;
    let model = train(&ds, &cfg).map_err(|e| e.to_string())?;
    let axis = KernelGrid::axis(op.domain(), n).map_err(|e| e.to_string())?;
    let learned = KernelGrid::from_network(model.green(0, 0), axis.clone(), axis).map_err(|e| e.to_string())?;
    let exact = KernelGrid::from_exact(op.exact().ok_or("no exact kernel")?, n).map_err(|e| e.to_string())?;
    let log = &model.rows[0].log;
    Ok(TrainView {
        error_percent: relative_l2_error(&learned, &exact).map_err(|e| e.to_string())?,
        learned: view(&learned, 10)?,
        exact: view(&exact, 10)?,
        losses: log.losses(),
        phase_boundary: log.phase_boundary(),
    })
}

/// Trains Green's and homogeneous networks (two hidden layers of 16) on
/// 40 random pairs and compares the learned kernel with the exact one on
/// an `n × n` grid.
#[wasm_bindgen]
pub fn train_small(name: &str, seed: u32, iterations: usize, n: usize) -> Result<TrainView, JsError> {
    train_small_impl(name, seed, iterations, n).map_err(|e| JsError::new(&e))
}
