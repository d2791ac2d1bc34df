//! Experiment suites that vary one ingredient of the pipeline at a time and
//! record the resulting error and runtime.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::catalog::OperatorId;
use crate::dataset::{add_noise, mask_measurements, Dataset, Sampling};
use crate::error::{Error, Result};
use crate::features::{relative_l2_error_exact, KernelGrid};
use crate::generate::{generate, GenerateConfig};
use crate::linalg::Quadrature;
use crate::net::Activation;
use crate::trainer::{train, Stopwatch, TrainConfig, TrainedModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    PairsSweep,
    PointsSweep,
    NoiseSweep,
    ActivationCompare,
    QuadratureCompare,
    GapStudy,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::PairsSweep,
        Suite::PointsSweep,
        Suite::NoiseSweep,
        Suite::ActivationCompare,
        Suite::QuadratureCompare,
        Suite::GapStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PairsSweep => "pairs_sweep",
            Suite::PointsSweep => "points_sweep",
            Suite::NoiseSweep => "noise_sweep",
            Suite::ActivationCompare => "activation_compare",
            Suite::QuadratureCompare => "quadrature_compare",
            Suite::GapStudy => "gap_study",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown benchmark suite `{s}`")))
    }
}

/// Parameters shared by all suites.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub operator: OperatorId,
    /// Training-set sizes of the pairs sweep (nested subsets of one dataset).
    pub pairs: Vec<usize>,
    /// Response grid sizes of the points sweep.
    pub points: Vec<usize>,
    /// Noise levels in percent.
    pub noise: Vec<f64>,
    pub seeds: Vec<u64>,
    pub gap: (f64, f64),
    /// Held-out pairs used to score operators without a closed-form kernel.
    pub test_samples: usize,
    /// Points per axis of the grid on which kernel errors are measured.
    pub eval_points: usize,
    pub train: TrainConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            operator: OperatorId::HelmholtzK15,
            pairs: vec![1, 2, 3, 5, 8, 12, 20, 30, 50, 100],
            points: vec![3, 5, 8, 12, 20, 30, 50, 100],
            noise: vec![0.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            seeds: vec![0],
            gap: (0.5, 0.7),
            test_samples: 100,
            eval_points: 1000,
            train: TrainConfig::default(),
        }
    }
}

/// One trained configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub suite: Suite,
    /// Name of the varied quantity.
    pub parameter: String,
    pub value: String,
    pub seed: u64,
    /// Relative error in percent; `None` when the cell failed.
    pub error_percent: Option<f64>,
    pub final_loss: Option<f64>,
    pub runtime_seconds: f64,
    /// `ok` or the failure message.
    pub status: String,
}

/// Relative error of a trained model in percent: against the closed-form
/// kernel when the operator has one, otherwise the mean relative response
/// error on `test`.
pub fn model_error(model: &TrainedModel, op: OperatorId, test: Option<&Dataset>, eval_points: usize) -> Result<f64> {
    match op.exact().filter(|e| !e.is_two_dimensional()) {
        Some(exact) if model.rows.len() == 1 && model.rows[0].green.len() == 1 => {
            let axis = KernelGrid::axis(op.domain(), eval_points)?;
            let grid = KernelGrid::from_network(model.green(0, 0), axis.clone(), axis)?;
            relative_l2_error_exact(&grid, exact)
        }
        _ => {
            let test = test.ok_or_else(|| Error::Config("a held-out dataset is required".into()))?;
            Ok(100.0 * model.mean_relative_error(test)?)
        }
    }
}

/// Offset between the seed of a training set and its held-out test set.
pub const TEST_SEED_OFFSET: u64 = 1_000_003;

struct Cell {
    parameter: &'static str,
    value: String,
    seed: u64,
    make: Box<dyn Fn() -> Result<(Dataset, TrainConfig)>>,
}

fn base_generate(cfg: &BenchmarkConfig, seed: u64) -> GenerateConfig {
    GenerateConfig::new(cfg.operator).with_seed(seed)
}

fn cells(suite: Suite, cfg: &BenchmarkConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let train = TrainConfig { seed, ..cfg.train.clone() };
        let gen = base_generate(cfg, seed);
        match suite {
            Suite::PairsSweep => {
                let max = cfg.pairs.iter().copied().max().unwrap_or(1);
                for &n in &cfg.pairs {
                    let (gen, train) = (gen.clone().with_samples(max), train.clone());
                    out.push(Cell {
                        parameter: "pairs",
                        value: n.to_string(),
                        seed,
                        make: Box::new(move || {
                            let ds = generate(&gen)?;
                            Ok((ds.select(&(0..n).collect::<Vec<_>>())?, train.clone()))
                        }),
                    });
                }
            }
            Suite::PointsSweep => {
                for &n in &cfg.points {
                    let (mut gen, train) = (gen.clone(), train.clone());
                    gen.response_points = n;
                    out.push(Cell {
                        parameter: "response_points",
                        value: n.to_string(),
                        seed,
                        make: Box::new(move || Ok((generate(&gen)?, train.clone()))),
                    });
                }
            }
            Suite::NoiseSweep => {
                for &d in &cfg.noise {
                    let (gen, train) = (gen.clone(), train.clone());
                    out.push(Cell {
                        parameter: "noise_percent",
                        value: d.to_string(),
                        seed,
                        make: Box::new(move || Ok((add_noise(&generate(&gen)?, d, seed)?, train.clone()))),
                    });
                }
            }
            Suite::ActivationCompare => {
                for act in [Activation::Rational, Activation::Relu, Activation::Tanh] {
                    let gen = gen.clone();
                    let train = TrainConfig {
                        activation: act,
                        ..train.clone()
                    };
                    out.push(Cell {
                        parameter: "activation",
                        value: act.to_string(),
                        seed,
                        make: Box::new(move || Ok((generate(&gen)?, train.clone()))),
                    });
                }
            }
            Suite::QuadratureCompare => {
                for q in [Quadrature::Trapezoid, Quadrature::MonteCarlo] {
                    for s in [Sampling::Uniform, Sampling::Random] {
                        let (mut gen, train) = (gen.clone(), train.clone());
                        gen.quadrature = q;
                        gen.sampling = s;
                        out.push(Cell {
                            parameter: "quadrature/sampling",
                            value: format!("{}/{}", q.name(), s),
                            seed,
                            make: Box::new(move || Ok((generate(&gen)?, train.clone()))),
                        });
                    }
                }
            }
            Suite::GapStudy => {
                for masked in [false, true] {
                    let (gen, train, gap) = (gen.clone(), train.clone(), cfg.gap);
                    out.push(Cell {
                        parameter: "gap",
                        value: if masked { format!("{}-{}", gap.0, gap.1) } else { "none".into() },
                        seed,
                        make: Box::new(move || {
                            let ds = generate(&gen)?;
                            let ds = if masked { mask_measurements(&ds, gap.0, gap.1)? } else { ds };
                            Ok((ds, train.clone()))
                        }),
                    });
                }
            }
        }
    }
    out
}

/// Runs every cell of a suite, calling `progress` after each one. A failing
/// cell is recorded and the suite continues.
pub fn run_suite(
    suite: Suite,
    cfg: &BenchmarkConfig,
    mut progress: impl FnMut(&BenchmarkRow),
) -> Result<Vec<BenchmarkRow>> {
    cfg.train.validate()?;
    let needs_test = cfg.operator.exact().is_none_or(|e| e.is_two_dimensional())
        || cfg.operator.components() != (1, 1);
    let mut rows = Vec::new();
    for cell in cells(suite, cfg) {
        let start = Stopwatch::start();
        let outcome = (|| -> Result<(f64, f64)> {
            let (ds, train_cfg) = (cell.make)()?;
            let model = train(&ds, &train_cfg)?;
            let test = if needs_test {
                let g = base_generate(cfg, cell.seed + TEST_SEED_OFFSET).with_samples(cfg.test_samples);
                Some(generate(&g)?)
            } else {
                None
            };
            let err = model_error(&model, cfg.operator, test.as_ref(), cfg.eval_points)?;
            let loss = model.final_losses().iter().sum::<f64>() / model.rows.len() as f64;
            Ok((err, loss))
        })();
        let (error_percent, final_loss, status) = match outcome {
            Ok((e, l)) => (Some(e), Some(l), "ok".to_string()),
            Err(e) => (None, None, e.to_string()),
        };
        let row = BenchmarkRow {
            suite,
            parameter: cell.parameter.to_string(),
            value: cell.value,
            seed: cell.seed,
            error_percent,
            final_loss,
            runtime_seconds: start.seconds(),
            status,
        };
        progress(&row);
        rows.push(row);
    }
    Ok(rows)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Results table with columns
/// `suite,parameter,value,seed,error_percent,final_loss,runtime_seconds,status`.
pub fn write_results_csv(rows: &[BenchmarkRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "suite,parameter,value,seed,error_percent,final_loss,runtime_seconds,status")?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.16e}"));
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:.3},{}",
            r.suite,
            csv_field(&r.parameter),
            csv_field(&r.value),
            r.seed,
            opt(r.error_percent),
            opt(r.final_loss),
            r.runtime_seconds,
            csv_field(&r.status)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchmarkConfig {
        BenchmarkConfig {
            operator: OperatorId::Laplace,
            pairs: vec![2, 4],
            points: vec![10, 20],
            noise: vec![0.0, 10.0],
            test_samples: 5,
            eval_points: 50,
            train: TrainConfig {
                adam_epochs: 2,
                lbfgs_max_iters: 2,
                hidden: vec![4],
                ..TrainConfig::default()
            },
            ..BenchmarkConfig::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn every_suite_produces_one_row_per_cell() {
        let cfg = BenchmarkConfig {
            pairs: vec![2],
            points: vec![10],
            noise: vec![5.0],
            ..tiny()
        };
        let expected = [1, 1, 1, 3, 4, 2];
        for (s, n) in Suite::ALL.into_iter().zip(expected) {
            let mut calls = 0;
            let rows = run_suite(s, &cfg, |_| calls += 1).unwrap();
            assert_eq!(rows.len(), n, "{s}");
            assert_eq!(calls, n);
            assert!(rows.iter().all(|r| r.status == "ok" && r.error_percent.unwrap().is_finite()), "{rows:?}");
        }
    }

    #[test]
    fn failures_are_recorded_and_the_suite_continues() {
        let cfg = BenchmarkConfig {
            points: vec![1, 10],
            ..tiny()
        };
        let rows = run_suite(Suite::PointsSweep, &cfg, |_| {}).unwrap();
        assert_eq!(rows.len(), 2);
        assert_ne!(rows[0].status, "ok");
        assert!(rows[0].error_percent.is_none());
        assert_eq!(rows[1].status, "ok");
    }

    #[test]
    fn operators_without_closed_form_use_held_out_pairs() {
        let cfg = BenchmarkConfig {
            operator: OperatorId::OdeSystem,
            ..tiny()
        };
        let rows = run_suite(Suite::ActivationCompare, &cfg, |_| {}).unwrap();
        assert!(rows.iter().all(|r| r.error_percent.is_some()), "{rows:?}");
    }

    #[test]
    fn results_csv_has_one_line_per_row() {
        let rows = run_suite(Suite::GapStudy, &tiny(), |_| {}).unwrap();
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("gap_study,gap,0.5-0.7,0,"));
    }
}
