//! Two-phase training of the Green's and homogeneous networks: full-batch
//! Adam followed by L-BFGS with a strong Wolfe line search.
//!
//! Every response component (row of the Green's matrix) is trained on its
//! own, with one Green's network per forcing component and one homogeneous
//! network. The parameters of a row form a single optimization vector.

pub mod loss;
pub mod optim;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use loss::RowLoss;
use optim::{adam_step, dot, inf_norm, strong_wolfe, AdamParams, AdamState, LbfgsMemory, WolfeParams};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::net::{Activation, RationalMLP, DEFAULT_HIDDEN};

/// Iteration cap of the second phase used for publication-scale runs.
pub const FULL_LBFGS_MAX_ITERS: usize = 50_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub adam_epochs: usize,
    pub adam_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub lbfgs_max_iters: usize,
    pub lbfgs_memory: usize,
    /// Phase two stops once `max |∂loss/∂θ|` falls below this.
    pub grad_tol: f64,
    pub c1: f64,
    pub c2: f64,
    /// Evaluations allowed per line search.
    pub max_line_search_evals: usize,
    pub seed: u64,
    pub activation: Activation,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam_epochs: 1000,
            adam_lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            lbfgs_max_iters: 10_000,
            lbfgs_memory: 10,
            grad_tol: 1e-9,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evals: 25,
            seed: 0,
            activation: Activation::Rational,
            hidden: DEFAULT_HIDDEN.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.adam_lr > 0.0 && self.adam_lr.is_finite()) {
            return bad("adam_lr must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam_eps must be positive");
        }
        if self.lbfgs_memory == 0 {
            return bad("lbfgs_memory must be positive");
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return bad("Wolfe constants must satisfy 0 < c1 < c2 < 1");
        }
        if !(self.grad_tol >= 0.0) {
            return bad("grad_tol must be nonnegative");
        }
        if self.max_line_search_evals == 0 {
            return bad("max_line_search_evals must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    fn adam(&self) -> AdamParams {
        AdamParams {
            lr: self.adam_lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }

    fn wolfe(&self) -> WolfeParams {
        WolfeParams {
            c1: self.c1,
            c2: self.c2,
            max_evals: self.max_line_search_evals,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Init,
    Adam,
    Lbfgs,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Adam => "adam",
            Phase::Lbfgs => "lbfgs",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "init" => Ok(Phase::Init),
            "adam" => Ok(Phase::Adam),
            "lbfgs" => Ok(Phase::Lbfgs),
            _ => Err(Error::Config(format!("unknown phase `{s}`"))),
        }
    }
}

/// Why the second phase ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// Still running (partial training).
    Running,
    GradientTolerance,
    IterationCap,
    LineSearchFailure,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Running => "running",
            StopReason::GradientTolerance => "gradient_tolerance",
            StopReason::IterationCap => "iteration_cap",
            StopReason::LineSearchFailure => "line_search_failure",
        }
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            StopReason::Running,
            StopReason::GradientTolerance,
            StopReason::IterationCap,
            StopReason::LineSearchFailure,
        ]
        .into_iter()
        .find(|r| r.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown stop reason `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogEntry {
    pub iteration: usize,
    pub phase: Phase,
    pub loss: f64,
    pub grad_norm: f64,
    /// Seconds since the start of training.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingLog {
    pub entries: Vec<LogEntry>,
    pub stop: StopReason,
}

impl TrainingLog {
    /// Index of the first L-BFGS entry (or the length when there is none).
    pub fn phase_boundary(&self) -> usize {
        self.entries
            .iter()
            .position(|e| e.phase == Phase::Lbfgs)
            .unwrap_or(self.entries.len())
    }

    /// Loss when the second phase started.
    pub fn boundary_loss(&self) -> f64 {
        let b = self.phase_boundary();
        self.entries[b.saturating_sub(1)].loss
    }

    pub fn final_loss(&self) -> f64 {
        self.entries.last().map_or(f64::NAN, |e| e.loss)
    }

    pub fn losses(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.loss).collect()
    }

    /// CSV with columns `iteration,phase,loss,grad_norm,wall_time`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "iteration,phase,loss,grad_norm,wall_time")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e}",
                e.iteration, e.phase, e.loss, e.grad_norm, e.wall_time
            )?;
        }
        Ok(())
    }
}

/// Optimizer state needed to continue an interrupted run exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub adam: AdamState,
    pub memory: LbfgsMemory,
    pub adam_done: usize,
    pub lbfgs_done: usize,
}

/// Networks of one response component.
#[derive(Clone, Debug, PartialEq)]
pub struct RowModel {
    /// One Green's network per forcing component.
    pub green: Vec<RationalMLP>,
    pub hom: RationalMLP,
    pub log: TrainingLog,
    /// Present while training can still continue.
    pub state: Option<OptimizerState>,
}

impl RowModel {
    fn params(&self) -> Vec<f64> {
        self.green
            .iter()
            .flat_map(|n| n.params().iter().copied())
            .chain(self.hom.params().iter().copied())
            .collect()
    }

    fn set_params(&mut self, x: &[f64]) -> Result<()> {
        let mut off = 0;
        for n in self.green.iter_mut().chain(std::iter::once(&mut self.hom)) {
            let k = n.param_count();
            n.set_params(&x[off..off + k])?;
            off += k;
        }
        Ok(())
    }
}

/// Learned Green's matrix and homogeneous solution of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub operator: String,
    pub domain: (f64, f64),
    pub dim: usize,
    pub seed: u64,
    pub rows: Vec<RowModel>,
    /// Seconds spent training, summed over resumed sessions.
    pub wall_time: f64,
}

impl TrainedModel {
    /// Green's network of row `r` and forcing component `c`.
    pub fn green(&self, r: usize, c: usize) -> &RationalMLP {
        &self.rows[r].green[c]
    }

    pub fn hom(&self, r: usize) -> &RationalMLP {
        &self.rows[r].hom
    }

    pub fn is_finished(&self) -> bool {
        self.rows.iter().all(|r| r.log.stop != StopReason::Running)
    }

    /// Final losses of all rows.
    pub fn final_losses(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.log.final_loss()).collect()
    }

    /// Predicted responses `N_hom + Σ_c ∫ N_G,c f^c` for every sample of `ds`
    /// on its response grid, one matrix per response component.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<DenseMatrix>> {
        if ds.response_components() != self.rows.len() || ds.dim() != self.dim {
            return Err(Error::InvalidDataset("dataset does not match the model".into()));
        }
        let mut out = Vec::with_capacity(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            if row.green.len() != ds.forcing_components() {
                return Err(Error::InvalidDataset("forcing components do not match the model".into()));
            }
            let loss = RowLoss::new(ds, r)?;
            let (n_u, n_f, n) = (ds.response_grid().len(), ds.forcing_grid().len(), ds.samples());
            let hom = row.hom.forward(loss.response_inputs())?;
            let mut pred = DenseMatrix::from_fn(n, n_u, |_, i| hom[i]);
            for (c, net) in row.green.iter().enumerate() {
                let g = net.forward(loss.product_inputs())?;
                let w = ds.forcing_grid().weights();
                let f = ds.forcing(c);
                let fw = DenseMatrix::from_fn(n_f, n, |k, j| f[(j, k)] * w[k]);
                // pred (N × N_u) += (G (N_u × N_f) · FWᵀ (N_f × N))ᵀ
                let gm = DenseMatrix::new(n_u, n_f, g)?;
                let prod = gm.matmul(&fw)?;
                for j in 0..n {
                    for i in 0..n_u {
                        pred[(j, i)] += prod[(i, j)];
                    }
                }
            }
            out.push(pred);
        }
        Ok(out)
    }

    /// Mean over samples of `‖u − u_pred‖ / ‖u‖`, with all response
    /// components stacked into one vector function.
    pub fn mean_relative_error(&self, ds: &Dataset) -> Result<f64> {
        let pred = self.predict(ds)?;
        let w = ds.response_grid().weights();
        let mut total = 0.0;
        for j in 0..ds.samples() {
            let (mut num, mut den) = (0.0, 0.0);
            for (c, p) in pred.iter().enumerate() {
                let u = ds.response(c).row(j);
                for i in 0..u.len() {
                    num += w[i] * (u[i] - p[(j, i)]).powi(2);
                    den += w[i] * u[i] * u[i];
                }
            }
            total += (num / den).sqrt();
        }
        Ok(total / ds.samples() as f64)
    }
}

/// Seed of network `k` derived from the run seed.
fn net_seed(seed: u64, k: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k + 1);
    rng.next_u64()
}

/// Freshly initialized networks for every row of `ds`.
pub fn init_model(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    let d = ds.dim();
    let (n_u, n_f) = (ds.response_components(), ds.forcing_components());
    let rows = (0..n_u)
        .map(|r| {
            let green = (0..n_f)
                .map(|c| {
                    let k = (r * (n_f + 1) + c) as u64;
                    RationalMLP::init_with_hidden(2 * d, &cfg.hidden, cfg.activation, net_seed(cfg.seed, k))
                })
                .collect::<Result<Vec<_>>>()?;
            let k = (r * (n_f + 1) + n_f) as u64;
            let hom = RationalMLP::init_with_hidden(d, &cfg.hidden, cfg.activation, net_seed(cfg.seed, k))?;
            let n: usize = green.iter().map(RationalMLP::param_count).sum::<usize>() + hom.param_count();
            Ok(RowModel {
                green,
                hom,
                log: TrainingLog {
                    entries: Vec::new(),
                    stop: StopReason::Running,
                },
                state: Some(OptimizerState {
                    adam: AdamState::new(n),
                    memory: LbfgsMemory::default(),
                    adam_done: 0,
                    lbfgs_done: 0,
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedModel {
        operator: ds.meta.operator.clone(),
        domain: ds.meta.domain,
        dim: d,
        seed: cfg.seed,
        rows,
        wall_time: 0.0,
    })
}

/// Trains all rows to completion.
pub fn train(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    let mut model = init_model(ds, cfg)?;
    run(ds, cfg, &mut model, None)?;
    Ok(model)
}

/// Trains for at most `steps` optimizer iterations in total; the returned
/// model carries the optimizer state so that [`resume`] can finish the run
/// with the same result as an uninterrupted [`train`].
pub fn train_partial(ds: &Dataset, cfg: &TrainConfig, steps: usize) -> Result<TrainedModel> {
    let mut model = init_model(ds, cfg)?;
    run(ds, cfg, &mut model, Some(steps))?;
    Ok(model)
}

/// Continues an unfinished model.
pub fn resume(ds: &Dataset, cfg: &TrainConfig, mut model: TrainedModel) -> Result<TrainedModel> {
    cfg.validate()?;
    if model.rows.len() != ds.response_components() {
        return Err(Error::InvalidDataset("model and dataset disagree on components".into()));
    }
    run(ds, cfg, &mut model, None)?;
    Ok(model)
}

/// Wall-clock timer. Targets without a system clock (browser wasm) read
/// zero elapsed time instead of panicking.
#[derive(Clone, Copy, Debug)]
pub struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

fn run(ds: &Dataset, cfg: &TrainConfig, model: &mut TrainedModel, mut budget: Option<usize>) -> Result<()> {
    let start = Stopwatch::start();
    let offset = model.wall_time;
    for r in 0..model.rows.len() {
        if model.rows[r].state.is_none() {
            continue;
        }
        let mut loss = RowLoss::new(ds, r)?;
        train_row(&mut loss, &mut model.rows[r], cfg, &mut budget, start, offset)?;
        if budget == Some(0) {
            break;
        }
    }
    model.wall_time = offset + start.seconds();
    Ok(())
}

fn train_row(
    loss: &mut RowLoss,
    row: &mut RowModel,
    cfg: &TrainConfig,
    budget: &mut Option<usize>,
    start: Stopwatch,
    offset: f64,
) -> Result<()> {
    let mut state = row.state.take().expect("unfinished row");
    let mut x = row.params();
    let n = x.len();
    if state.adam.m.len() != n {
        return Err(Error::Config("optimizer state does not match the networks".into()));
    }
    let mut nets = row.clone();
    let mut objective = |x: &[f64], g: &mut [f64]| -> f64 {
        if nets.set_params(x).is_err() {
            return f64::INFINITY;
        }
        match loss.evaluate(&nets.green, &nets.hom, Some(g)) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };
    let mut g = vec![0.0; n];
    let mut f = objective(&x, &mut g);
    let elapsed = |start: &Stopwatch| offset + start.seconds();
    if row.log.entries.is_empty() {
        if !f.is_finite() {
            return Err(Error::NonFiniteLoss);
        }
        row.log.entries.push(LogEntry {
            iteration: 0,
            phase: Phase::Init,
            loss: f,
            grad_norm: norm2(&g),
            wall_time: elapsed(&start),
        });
    }
    let take = |budget: &mut Option<usize>| match budget {
        Some(0) => false,
        Some(b) => {
            *b -= 1;
            true
        }
        None => true,
    };
    let adam = cfg.adam();
    while state.adam_done < cfg.adam_epochs {
        if !take(budget) {
            break;
        }
        let x_prev = x.clone();
        let step = adam_step(&mut x, &g, &mut state.adam, &adam);
        let mut g_new = vec![0.0; n];
        let mut f_new = objective(&x, &mut g_new);
        // A step that lands on a pole is halved until the loss is finite.
        let mut scale = 1.0;
        while !f_new.is_finite() && scale > 1e-12 {
            scale *= 0.5;
            for i in 0..n {
                x[i] = x_prev[i] + scale * step[i];
            }
            f_new = objective(&x, &mut g_new);
        }
        if !f_new.is_finite() {
            x = x_prev;
            f_new = objective(&x, &mut g_new);
        }
        f = f_new;
        g = g_new;
        state.adam_done += 1;
        row.log.entries.push(LogEntry {
            iteration: row.log.entries.len(),
            phase: Phase::Adam,
            loss: f,
            grad_norm: norm2(&g),
            wall_time: elapsed(&start),
        });
    }
    let wolfe = cfg.wolfe();
    let mut stop = StopReason::Running;
    if state.adam_done == cfg.adam_epochs {
        loop {
            if state.lbfgs_done >= cfg.lbfgs_max_iters {
                stop = StopReason::IterationCap;
                break;
            }
            if inf_norm(&g) <= cfg.grad_tol {
                stop = StopReason::GradientTolerance;
                break;
            }
            if !take(budget) {
                break;
            }
            let mut d = state.memory.direction(&g);
            if !(dot(&g, &d) < 0.0) {
                state.memory.clear();
                d = g.iter().map(|v| -v).collect();
            }
            let first_step = |mem: &LbfgsMemory, g: &[f64]| {
                if mem.is_empty() {
                    (1.0 / norm2(g)).min(1.0)
                } else {
                    1.0
                }
            };
            let mut result = strong_wolfe(&mut objective, &x, f, &g, &d, first_step(&state.memory, &g), &wolfe);
            if result.is_none() && !state.memory.is_empty() {
                // Retry from steepest descent with a fresh memory.
                state.memory.clear();
                d = g.iter().map(|v| -v).collect();
                result = strong_wolfe(&mut objective, &x, f, &g, &d, first_step(&state.memory, &g), &wolfe);
            }
            let Some(ls) = result else {
                stop = StopReason::LineSearchFailure;
                break;
            };
            let s: Vec<f64> = ls.x.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = ls.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
            state.memory.push(s, y, cfg.lbfgs_memory);
            x = ls.x;
            f = ls.loss;
            g = ls.grad;
            state.lbfgs_done += 1;
            row.log.entries.push(LogEntry {
                iteration: row.log.entries.len(),
                phase: Phase::Lbfgs,
                loss: f,
                grad_norm: norm2(&g),
                wall_time: elapsed(&start),
            });
        }
    }
    row.set_params(&x)?;
    row.log.stop = stop;
    // The state survives an iteration cap so that a larger cap can extend the run.
    row.state = matches!(stop, StopReason::Running | StopReason::IterationCap).then_some(state);
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::OperatorId;
    use crate::generate::{generate, GenerateConfig};

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            adam_epochs: 20,
            lbfgs_max_iters: 30,
            hidden: vec![8, 8],
            ..TrainConfig::default()
        }
    }

    fn small_data(op: OperatorId) -> Dataset {
        let mut g = GenerateConfig::new(op).with_samples(8);
        g.forcing_points = 40;
        g.response_points = 20;
        g.kernel = Some(crate::gp::KernelSpec::from_normalized(crate::gp::KernelFamily::SquaredExponential, 0.1, -1.0, 1.0).unwrap());
        generate(&g).unwrap()
    }

    #[test]
    fn zero_iterations_return_initial_networks() {
        let ds = small_data(OperatorId::Laplace);
        let cfg = TrainConfig {
            adam_epochs: 0,
            lbfgs_max_iters: 0,
            ..small_cfg()
        };
        let model = train(&ds, &cfg).unwrap();
        let init = init_model(&ds, &cfg).unwrap();
        assert_eq!(model.rows[0].log.entries.len(), 1);
        assert_eq!(model.rows[0].green, init.rows[0].green);
        assert_eq!(model.rows[0].hom, init.rows[0].hom);
        assert!(model.is_finished());
    }

    #[test]
    fn training_decreases_loss_and_is_deterministic() {
        let ds = small_data(OperatorId::AdvectionDiffusion);
        let cfg = small_cfg();
        let a = train(&ds, &cfg).unwrap();
        let b = train(&ds, &cfg).unwrap();
        assert_eq!(a.rows[0].green, b.rows[0].green);
        assert_eq!(a.final_losses(), b.final_losses());
        let log = &a.rows[0].log;
        assert!(log.final_loss() < log.entries[0].loss);
        assert!(log.final_loss() <= log.boundary_loss());
        assert_eq!(log.phase_boundary(), 21);
        assert!(log.entries.iter().all(|e| e.loss.is_finite()));
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let ds = small_data(OperatorId::HelmholtzK15);
        let cfg = small_cfg();
        let full = train(&ds, &cfg).unwrap();
        for cut in [5, 20, 33] {
            let part = train_partial(&ds, &cfg, cut).unwrap();
            assert!(!part.is_finished());
            let done = resume(&ds, &cfg, part).unwrap();
            assert_eq!(done.final_losses(), full.final_losses(), "cut {cut}");
            assert_eq!(done.rows[0].green, full.rows[0].green);
        }
    }

    #[test]
    fn systems_train_one_row_per_component() {
        let mut g = GenerateConfig::new(OperatorId::OdeSystem).with_samples(6);
        g.forcing_points = 30;
        g.response_points = 15;
        let ds = generate(&g).unwrap();
        let model = train(&ds, &small_cfg()).unwrap();
        assert_eq!(model.rows.len(), 2);
        assert_eq!(model.rows[1].green.len(), 2);
        let err = model.mean_relative_error(&ds).unwrap();
        assert!(err.is_finite());
    }

    #[test]
    fn prediction_matches_loss() {
        let ds = small_data(OperatorId::Laplace);
        let model = train(&ds, &small_cfg()).unwrap();
        let pred = model.predict(&ds).unwrap();
        let w = ds.response_grid().weights();
        let mut loss = 0.0;
        for j in 0..ds.samples() {
            let u = ds.response(0).row(j);
            let num: f64 = (0..u.len()).map(|i| w[i] * (u[i] - pred[0][(j, i)]).powi(2)).sum();
            loss += num / ds.response_norms(0)[j];
        }
        loss /= ds.samples() as f64;
        let logged = model.rows[0].log.final_loss();
        assert!((loss - logged).abs() <= 1e-10 * logged.max(1e-12), "{loss} vs {logged}");
    }

    #[test]
    fn invalid_wolfe_constants_rejected() {
        let cfg = TrainConfig {
            c1: 0.95,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn log_csv_has_header_and_rows() {
        let ds = small_data(OperatorId::Laplace);
        let cfg = TrainConfig {
            adam_epochs: 2,
            lbfgs_max_iters: 1,
            ..small_cfg()
        };
        let model = train(&ds, &cfg).unwrap();
        let mut buf = Vec::new();
        model.rows[0].log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,phase,loss,grad_norm,wall_time");
        assert_eq!(lines.len(), 1 + model.rows[0].log.entries.len());
        assert!(lines[1].starts_with("0,init,"));
    }
}
