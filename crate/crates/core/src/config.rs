//! INI-style experiment configuration: `[section]` headers followed by
//! `key = value` lines, `#` or `;` comments (whole-line, or after
//! whitespace at the end of a line). Unknown sections and keys are
//! rejected so that a typo never silently falls back to a default.

use std::fs;
use std::path::Path;

use crate::bench::BenchmarkConfig;
use crate::catalog::OperatorId;
use crate::dataset::{add_noise, mask_measurements, Dataset, Sampling};
use crate::error::{Error, Result};
use crate::features::{ComplexWindow, ExtractOptions};
use crate::generate::GenerateConfig;
use crate::gp::{KernelFamily, KernelSpec, ResolutionPolicy};
use crate::linalg::Quadrature;
use crate::trainer::TrainConfig;

/// Settings that refine [`GenerateConfig::new`] for a chosen operator, plus
/// the transforms applied after generation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenerateOverrides {
    pub samples: Option<usize>,
    pub forcing_points: Option<usize>,
    pub response_points: Option<usize>,
    pub kernel: Option<KernelFamily>,
    /// Length-scale relative to the domain length.
    pub length_scale: Option<f64>,
    pub quadrature: Option<Quadrature>,
    pub sampling: Option<Sampling>,
    pub normalize: Option<bool>,
    pub strict_resolution: Option<bool>,
    pub noise_percent: Option<f64>,
    pub mask: Option<(f64, f64)>,
}

impl GenerateOverrides {
    pub fn apply(&self, cfg: &mut GenerateConfig) -> Result<()> {
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.forcing_points {
            cfg.forcing_points = v;
        }
        if let Some(v) = self.response_points {
            cfg.response_points = v;
        }
        if self.kernel.is_some() || self.length_scale.is_some() {
            let base = cfg.kernel.unwrap_or_else(|| cfg.operator.default_kernel());
            let (a, b) = cfg.operator.domain();
            let family = self.kernel.unwrap_or(base.family);
            let lambda = self.length_scale.unwrap_or_else(|| base.normalized_length_scale(a, b));
            cfg.kernel = Some(KernelSpec::from_normalized(family, lambda, a, b)?);
        }
        if let Some(v) = self.quadrature {
            cfg.quadrature = v;
        }
        if let Some(v) = self.sampling {
            cfg.sampling = v;
        }
        if self.normalize.is_some() {
            cfg.normalize = self.normalize;
        }
        if let Some(strict) = self.strict_resolution {
            cfg.policy = if strict { ResolutionPolicy::Strict } else { ResolutionPolicy::Warn };
        }
        Ok(())
    }

    /// Noise and measurement gap, in that order.
    pub fn transform(&self, ds: Dataset, seed: u64) -> Result<Dataset> {
        let ds = match self.noise_percent {
            Some(d) if d > 0.0 => add_noise(&ds, d, seed)?,
            _ => ds,
        };
        match self.mask {
            Some((lo, hi)) => mask_measurements(&ds, lo, hi),
            None => Ok(ds),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    pub operator: Option<OperatorId>,
    pub seed: Option<u64>,
    pub generate: GenerateOverrides,
    pub train: TrainConfig,
    pub extract: ExtractOptions,
    pub benchmark: BenchmarkConfig,
}

/// Drops a trailing comment introduced by whitespace followed by `#` or `;`.
fn strip_comment(raw: &str) -> &str {
    let bytes = raw.as_bytes();
    let cut = (1..bytes.len()).find(|&i| matches!(bytes[i], b'#' | b';') && bytes[i - 1].is_ascii_whitespace());
    match cut {
        Some(i) => &raw[..i],
        None => raw,
    }
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(v: &str, line: usize) -> Result<T> {
    v.parse::<T>().map_err(|_| bad(line, format!("`{v}` is not a valid value")))
}

fn list<T: std::str::FromStr>(v: &str, line: usize) -> Result<Vec<T>> {
    v.split(',').map(|t| num(t.trim(), line)).collect()
}

fn boolean(v: &str, line: usize) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(line, format!("`{v}` is not a boolean"))),
    }
}

fn pair(v: &str, line: usize) -> Result<(f64, f64)> {
    match list::<f64>(v, line)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(bad(line, format!("`{v}` is not `a, b`"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = strip_comment(raw).trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(name) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["generate", "train", "extract", "benchmark"].contains(&section.as_str()) {
                    return Err(bad(line, format!("unknown section [{section}]")));
                }
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| bad(line, "expected `key = value`"))?;
            cfg.set(&section, k.trim(), v.trim(), line)?;
        }
        cfg.train.validate()?;
        cfg.benchmark.train = cfg.train.clone();
        if let Some(op) = cfg.operator {
            cfg.benchmark.operator = op;
        }
        if let Some(seed) = cfg.seed {
            if cfg.benchmark.seeds == BenchmarkConfig::default().seeds {
                cfg.benchmark.seeds = vec![seed];
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn set(&mut self, section: &str, key: &str, v: &str, line: usize) -> Result<()> {
        let unknown = || bad(line, format!("unknown key `{key}` in [{section}]"));
        match section {
            "" => match key {
                "operator" => self.operator = Some(v.parse()?),
                "seed" => self.seed = Some(num(v, line)?),
                _ => return Err(unknown()),
            },
            "generate" => {
                let g = &mut self.generate;
                match key {
                    "samples" => g.samples = Some(num(v, line)?),
                    "forcing_points" => g.forcing_points = Some(num(v, line)?),
                    "response_points" => g.response_points = Some(num(v, line)?),
                    "kernel" => g.kernel = Some(v.parse()?),
                    "length_scale" => g.length_scale = Some(num(v, line)?),
                    "quadrature" => {
                        g.quadrature = Some(Quadrature::parse(v).ok_or_else(|| bad(line, format!("unknown quadrature `{v}`")))?)
                    }
                    "sampling" => g.sampling = Some(v.parse()?),
                    "normalize" => g.normalize = Some(boolean(v, line)?),
                    "strict_resolution" => g.strict_resolution = Some(boolean(v, line)?),
                    "noise_percent" => g.noise_percent = Some(num(v, line)?),
                    "mask" => g.mask = Some(pair(v, line)?),
                    _ => return Err(unknown()),
                }
            }
            "train" => {
                let t = &mut self.train;
                match key {
                    "adam_epochs" => t.adam_epochs = num(v, line)?,
                    "adam_lr" => t.adam_lr = num(v, line)?,
                    "beta1" => t.beta1 = num(v, line)?,
                    "beta2" => t.beta2 = num(v, line)?,
                    "adam_eps" => t.adam_eps = num(v, line)?,
                    "lbfgs_max_iters" => t.lbfgs_max_iters = num(v, line)?,
                    "lbfgs_memory" => t.lbfgs_memory = num(v, line)?,
                    "grad_tol" => t.grad_tol = num(v, line)?,
                    "c1" => t.c1 = num(v, line)?,
                    "c2" => t.c2 = num(v, line)?,
                    "max_line_search_evals" => t.max_line_search_evals = num(v, line)?,
                    "activation" => t.activation = v.parse()?,
                    "hidden" => t.hidden = list(v, line)?,
                    _ => return Err(unknown()),
                }
            }
            "extract" => {
                let e = &mut self.extract;
                match key {
                    "grid_points" => e.grid_points = num(v, line)?,
                    "eig_count" => e.eig_count = num(v, line)?,
                    "svd_count" => e.svd_count = num(v, line)?,
                    "pole_resolution" => e.pole_resolution = num(v, line)?,
                    "pole_window" => match list::<f64>(v, line)?.as_slice() {
                        [a, b, c, d] => {
                            e.pole_window = Some(ComplexWindow {
                                re: (*a, *b),
                                im: (*c, *d),
                            })
                        }
                        _ => return Err(bad(line, "pole_window needs re_min, re_max, im_min, im_max")),
                    },
                    _ => return Err(unknown()),
                }
            }
            "benchmark" => {
                let b = &mut self.benchmark;
                match key {
                    "pairs" => b.pairs = list(v, line)?,
                    "points" => b.points = list(v, line)?,
                    "noise" => b.noise = list(v, line)?,
                    "seeds" => b.seeds = list(v, line)?,
                    "gap" => b.gap = pair(v, line)?,
                    "test_samples" => b.test_samples = num(v, line)?,
                    "eval_points" => b.eval_points = num(v, line)?,
                    _ => return Err(unknown()),
                }
            }
            _ => unreachable!("sections are checked when opened"),
        }
        Ok(())
    }
}
