//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The oracle checks need no training and always run. The training
//! criteria need seventeen full-size runs and are enabled with
//! `GREENLEARN_ACCEPTANCE=full`; otherwise they are reported as SKIP.
//! `GREENLEARN_ACCEPTANCE_LBFGS` overrides the L-BFGS iteration budget
//! (default 10 000). Trained models are checkpointed every 1000 L-BFGS
//! iterations under `GREENLEARN_ACCEPTANCE_CACHE` (default: a directory in
//! the cargo target tree), so an interrupted run picks up where it stopped
//! and reproduces the uninterrupted result exactly.
//!
//! The process exits with status 1 when any evaluated criterion fails.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use greenlearn::bench::{model_error, TEST_SEED_OFFSET};
use greenlearn::catalog::OperatorId;
use greenlearn::dataset::{add_noise, mask_measurements, Dataset, Sampling};
use greenlearn::features::{
    constraint_residual, detect_poles_fn, integral_operator_eig, symmetry_score, ComplexWindow, KernelGrid,
};
use greenlearn::generate::{generate, GenerateConfig};
use greenlearn::gp::{covariance_matrix, sample_gp, KernelFamily, KernelSpec, ResolutionPolicy};
use greenlearn::io::{read_checkpoint, read_dataset, write_checkpoint, write_dataset};
use greenlearn::linalg::{trapezoid_weights, Grid1D, Quadrature};
use greenlearn::net::{Activation, RationalMLP};
use greenlearn::solver::exact::ExactGreen;
use greenlearn::solver::schrodinger::CrankNicolson;
use greenlearn::solver::ConstraintSpec;
use greenlearn::trainer::loss::RowLoss;
use greenlearn::trainer::{resume, train, Phase, StopReason, TrainConfig, TrainedModel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Check = (&'static str, fn() -> Outcome);

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, outcome: Outcome) {
        match outcome {
            Ok((true, detail)) => println!("PASS  {name}: {detail}"),
            Ok((false, detail)) => {
                self.failures += 1;
                println!("FAIL  {name}: {detail}");
            }
            Err(e) => {
                self.failures += 1;
                println!("FAIL  {name}: error: {e}");
            }
        }
    }

    fn skip(&self, name: &str) {
        println!("SKIP  {name}: training criterion, run with GREENLEARN_ACCEPTANCE=full");
    }
}

fn main() {
    let full = env::var("GREENLEARN_ACCEPTANCE").is_ok_and(|v| v == "full");
    let budget: usize = env::var("GREENLEARN_ACCEPTANCE_LBFGS")
        .ok()
        .map(|v| v.parse().expect("GREENLEARN_ACCEPTANCE_LBFGS must be an integer"))
        .unwrap_or(10_000);
    let cache = env::var_os("GREENLEARN_ACCEPTANCE_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance"));

    let mut report = Report { failures: 0 };
    let start = Instant::now();
    let oracle = oracle_suite();
    let elapsed = start.elapsed().as_secs_f64();
    report.line(
        "oracle property suite",
        oracle.map(|(ok, detail)| {
            let fast = elapsed < 60.0;
            (ok && fast, format!("{detail}; {elapsed:.1}s (limit 60s)"))
        }),
    );

    let names = [
        "Helmholtz K=15, 3 seeds, mean error <= 3%",
        "activation ordering, rational beats ReLU and tanh in >= 2 of 3 seeds",
        "noise 20% error <= 3x noiseless",
        "Laplace eigenvalues within 10%, first eigenfunction correlation >= 0.99",
        "measurement gap [0.5, 0.7] error <= 15%",
        "Schrodinger propagator held-out error <= 3%",
        "quadrature/measurement cells <= 3% with spread <= 2 points",
        "symmetry <= 0.1 and periodic residual <= 0.1 max|G|",
    ];
    if !full {
        for name in names {
            report.skip(name);
        }
    } else {
        println!("# training budget: {budget} L-BFGS iterations, cache {}", cache.display());
        let mut runs = Runs { budget, cache, done: BTreeMap::new() };
        report.line(names[0], helmholtz(&mut runs));
        report.line(names[1], activation_ordering(&mut runs));
        report.line(names[2], noise(&mut runs));
        report.line(names[3], laplace_eigen(&mut runs));
        report.line(names[4], gap(&mut runs));
        report.line(names[5], schrodinger(&mut runs));
        report.line(names[6], quadrature(&mut runs));
        report.line(names[7], symmetry_constraint(&mut runs));
    }
    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Oracle property suite.

fn oracle_suite() -> Outcome {
    let checks: [Check; 8] = [
        ("exact-kernel loss", exact_kernel_loss),
        ("gradients", gradient_check),
        ("trapezoid order", trapezoid_order),
        ("GP covariance", gp_covariance),
        ("Crank-Nicolson norm", crank_nicolson_norm),
        ("round trips", round_trips),
        ("exact symmetry", exact_symmetry),
        ("pole detection", pole_detection),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, check) in checks {
        match check() {
            Ok((pass, detail)) => {
                ok &= pass;
                parts.push(format!("{name} {} ({detail})", if pass { "ok" } else { "FAILED" }));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name} FAILED ({e})"));
            }
        }
    }
    Ok((ok, parts.join(", ")))
}

fn exact_values(loss: &RowLoss, g: ExactGreen) -> Vec<f64> {
    loss.product_inputs().chunks(2).map(|p| g.kernel(p[0], p[1])).collect()
}

fn exact_kernel_loss() -> Outcome {
    let ds = generate(&GenerateConfig::new(OperatorId::Laplace)).map_err(|e| e.to_string())?;
    let loss = RowLoss::new(&ds, 0).map_err(|e| e.to_string())?;
    let g = exact_values(&loss, ExactGreen::Laplace);
    let hom = vec![0.0; ds.response_grid().len()];
    let v = loss.from_values(&[&g], &hom, false).map_err(|e| e.to_string())?.loss;
    Ok((v <= 1e-4, format!("{v:.2e} <= 1e-4")))
}

/// Central differences against reverse mode for a scalar function of the
/// network output, split into activation coefficients and weights/biases.
fn gradient_check() -> Outcome {
    let mut worst = 0.0_f64;
    for (activation, d_in) in [(Activation::Rational, 2), (Activation::Rational, 1), (Activation::Tanh, 2)] {
        let mut net = RationalMLP::init_with_hidden(d_in, &[6, 5], activation, 11).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coeffs = net.activation_param_range();
        for (k, p) in net.params_mut().iter_mut().enumerate() {
            if !coeffs.contains(&k) {
                *p += 0.1 * rng.random_range(-1.0..1.0);
            }
        }
        let x: Vec<f64> = (0..8 * d_in).map(|_| rng.random_range(-1.0..1.0)).collect();
        let objective = |net: &RationalMLP| -> f64 {
            let out = net.forward(&x).expect("forward");
            out.iter().enumerate().map(|(i, v)| (1.0 + i as f64) * v * v).sum::<f64>() * 0.5
        };
        let cache = net.forward_cached(&x).map_err(|e| e.to_string())?;
        let dout: Vec<f64> = cache.output().iter().enumerate().map(|(i, v)| (1.0 + i as f64) * v).collect();
        let grad = net.backward(&cache, &dout).map_err(|e| e.to_string())?.0;
        let classes: [Vec<usize>; 2] = [
            coeffs.clone().collect(),
            (0..net.param_count()).filter(|k| !coeffs.contains(k)).collect(),
        ];
        for class in classes.iter().filter(|c| !c.is_empty()) {
            let (mut diff, mut scale) = (0.0_f64, 0.0_f64);
            for &k in class {
                let h = 1e-6 * (1.0 + net.params()[k].abs());
                let base = net.params()[k];
                net.params_mut()[k] = base + h;
                let up = objective(&net);
                net.params_mut()[k] = base - h;
                let down = objective(&net);
                net.params_mut()[k] = base;
                let fd = (up - down) / (2.0 * h);
                diff = diff.max((fd - grad[k]).abs());
                scale = scale.max(grad[k].abs());
            }
            worst = worst.max(diff / scale);
        }
    }
    Ok((worst <= 1e-5, format!("max relative {worst:.1e} <= 1e-5")))
}

fn trapezoid_order() -> Outcome {
    let exact = std::f64::consts::E - 1.0;
    let errs: Vec<f64> = [11, 21, 41, 81]
        .iter()
        .map(|&n| {
            let g = Grid1D::uniform(0.0, 1.0, n).unwrap();
            let v: Vec<f64> = g.points().iter().map(|x| x.exp()).collect();
            (g.integrate(&v) - exact).abs()
        })
        .collect();
    let w = trapezoid_weights(&[0.0, 0.5, 1.0]).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = errs.windows(2).map(|p| p[0] / p[1]).collect();
    let ok = ratios.iter().all(|r| (3.5..=4.5).contains(r)) && w == [0.25, 0.5, 0.25];
    Ok((ok, format!("ratios {}", ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join("/"))))
}

fn gp_covariance() -> Outcome {
    let grid = Grid1D::uniform(0.0, 1.0, 15).map_err(|e| e.to_string())?;
    let spec = KernelSpec::new(KernelFamily::SquaredExponential, 0.2).map_err(|e| e.to_string())?;
    let draws = 10_000;
    let s = sample_gp(&spec, &grid, draws, 3, ResolutionPolicy::Warn).map_err(|e| e.to_string())?;
    let k = covariance_matrix(&spec, &grid).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let emp = s.values.iter().map(|v| v[i] * v[j]).sum::<f64>() / draws as f64;
            worst = worst.max((emp - k[(i, j)]).abs());
        }
    }
    let rel = worst / k.max_abs();
    Ok((rel <= 0.05, format!("max deviation {:.1}% <= 5%", 100.0 * rel)))
}

fn crank_nicolson_norm() -> Outcome {
    let cn = CrankNicolson::new(-8.0, 8.0, 400, 2e-2, &|x| x * x / 2.0).map_err(|e| e.to_string())?;
    let mut psi: Vec<Complex64> = cn
        .points()
        .iter()
        .map(|&x| Complex64::new(0.0, 2.0 * x).exp() * (-(x - 1.0) * (x - 1.0)).exp())
        .collect();
    let n0 = cn.norm(&psi);
    let steps = 200;
    let mut worst = 0.0_f64;
    let mut prev = n0;
    for _ in 0..steps {
        psi = cn.step(&psi).map_err(|e| e.to_string())?;
        let n = cn.norm(&psi);
        worst = worst.max((n - prev).abs() / n0);
        prev = n;
    }
    Ok((worst <= 1e-10, format!("max drift {worst:.1e}/step")))
}

fn dir_bytes(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).map_err(|e| e.to_string())? {
            let p = e.map_err(|e| e.to_string())?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn round_trips() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let e = |x: greenlearn::Error| x.to_string();
    let ds = generate(&GenerateConfig::new(OperatorId::OdeSystem).with_samples(5)).map_err(e)?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    write_dataset(&ds, &a).map_err(e)?;
    let back = read_dataset(&a).map_err(e)?;
    write_dataset(&back, &b).map_err(e)?;
    let datasets = dir_bytes(&a)? == dir_bytes(&b)? && back == ds;

    let cfg = TrainConfig { adam_epochs: 3, lbfgs_max_iters: 3, hidden: vec![6, 6], ..TrainConfig::default() };
    let model = train(&ds, &cfg).map_err(e)?;
    let (c, d) = (tmp.path().join("c"), tmp.path().join("d"));
    write_checkpoint(&model, &c).map_err(e)?;
    let loaded = read_checkpoint(&c).map_err(e)?;
    write_checkpoint(&loaded, &d).map_err(e)?;
    let checkpoints = dir_bytes(&c)? == dir_bytes(&d)? && loaded.rows == model.rows;
    Ok((datasets && checkpoints, format!("dataset {datasets}, checkpoint {checkpoints}")))
}

fn exact_symmetry() -> Outcome {
    let grid = KernelGrid::from_exact(ExactGreen::HelmholtzK15, 300).map_err(|e| e.to_string())?;
    let s = symmetry_score(&grid).map_err(|e| e.to_string())?;
    Ok((s <= 1e-12, format!("{s:.1e}")))
}

fn pole_detection() -> Outcome {
    let window = ComplexWindow { re: (0.0, 1.0), im: (-0.5, 0.5) };
    let resolution = 64;
    let poles = detect_poles_fn(
        |z: &[Complex64]| Ok(z.iter().map(|z| 1.0 / (z - 0.7)).collect()),
        window,
        resolution,
    )
    .map_err(|e| e.to_string())?;
    let cell = 1.0 / resolution as f64;
    let ok = poles.len() == 1 && (poles[0].location - Complex64::new(0.7, 0.0)).norm() <= cell;
    let found: Vec<String> = poles.iter().map(|p| format!("{:.4}", p.location)).collect();
    Ok((ok, format!("found [{}]", found.join(", "))))
}

// ---------------------------------------------------------------------------
// Training criteria.

struct Run {
    model: TrainedModel,
    data: Dataset,
    seconds: f64,
}

struct Runs {
    budget: usize,
    cache: PathBuf,
    done: BTreeMap<String, (f64, f64)>,
}

fn lbfgs_iterations(model: &TrainedModel) -> usize {
    model
        .rows
        .iter()
        .map(|r| r.log.entries.iter().filter(|e| e.phase == Phase::Lbfgs).count())
        .max()
        .unwrap_or(0)
}

fn still_capped(model: &TrainedModel) -> bool {
    model.rows.iter().any(|r| r.log.stop == StopReason::IterationCap)
}

impl Runs {
    /// Trains (or reloads) a model in 1000-iteration chunks, reporting
    /// progress on stderr.
    fn train(&mut self, name: &str, data: Dataset, activation: Activation, seed: u64) -> Result<Run, String> {
        let e = |x: greenlearn::Error| x.to_string();
        let dir = self.cache.join(format!("{name}-{}", self.budget));
        let base = TrainConfig { seed, activation, ..TrainConfig::default() };
        let mut model = match read_checkpoint(&dir) {
            Ok(m) => m,
            Err(_) => train(&data, &TrainConfig { lbfgs_max_iters: 0, ..base.clone() }).map_err(e)?,
        };
        let mut done = lbfgs_iterations(&model);
        while still_capped(&model) && done < self.budget {
            let cap = (done + 1000).min(self.budget);
            model = resume(&data, &TrainConfig { lbfgs_max_iters: cap, ..base.clone() }, model).map_err(e)?;
            done = cap;
            write_checkpoint(&model, &dir).map_err(e)?;
            eprintln!("  {name}: {done} L-BFGS iterations, loss {:?}, {:.0}s", model.final_losses(), model.wall_time);
        }
        if !dir.exists() {
            write_checkpoint(&model, &dir).map_err(e)?;
        }
        let seconds = model.wall_time;
        Ok(Run { model, data, seconds })
    }

    /// Kernel error in percent of a run against the exact kernel (or the
    /// held-out responses), memoized by name.
    fn error(&mut self, name: &str, op: OperatorId, data: Dataset, activation: Activation, seed: u64) -> Result<f64, String> {
        if let Some((err, _)) = self.done.get(name) {
            return Ok(*err);
        }
        let run = self.train(name, data, activation, seed)?;
        let err = model_error(&run.model, op, None, 1000).map_err(|e| e.to_string())?;
        eprintln!("  {name}: error {err:.3}% after {:.0}s", run.seconds);
        self.done.insert(name.to_string(), (err, run.seconds));
        Ok(err)
    }
}

fn helmholtz_data(seed: u64) -> Result<Dataset, String> {
    generate(&GenerateConfig::new(OperatorId::HelmholtzK15).with_seed(seed)).map_err(|e| e.to_string())
}

fn helmholtz_error(runs: &mut Runs, activation: Activation, seed: u64) -> Result<f64, String> {
    let name = format!("helmholtz-{activation}-s{seed}");
    runs.error(&name, OperatorId::HelmholtzK15, helmholtz_data(seed)?, activation, seed)
}

fn helmholtz(runs: &mut Runs) -> Outcome {
    let errs = (0..3).map(|s| helmholtz_error(runs, Activation::Rational, s)).collect::<Result<Vec<_>, _>>()?;
    let mean = errs.iter().sum::<f64>() / 3.0;
    let secs: Vec<f64> = (0..3).map(|s| runs.done[&format!("helmholtz-rational-s{s}")].1).collect();
    let slowest = secs.iter().cloned().fold(0.0, f64::max) / 60.0;
    Ok((
        mean <= 3.0,
        format!("errors {} -> mean {mean:.2}% (<= 3%), slowest run {slowest:.1} min", fmt_list(&errs)),
    ))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.2}%")).collect::<Vec<_>>().join(", ")
}

fn activation_ordering(runs: &mut Runs) -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for s in 0..3 {
        let r = helmholtz_error(runs, Activation::Rational, s)?;
        let relu = helmholtz_error(runs, Activation::Relu, s)?;
        let tanh = helmholtz_error(runs, Activation::Tanh, s)?;
        if r < relu && r < tanh {
            wins += 1;
        }
        parts.push(format!("seed {s}: rational {r:.2}% relu {relu:.2}% tanh {tanh:.2}%"));
    }
    Ok((wins >= 2, format!("{wins}/3 seeds; {}", parts.join("; "))))
}

fn noise(runs: &mut Runs) -> Outcome {
    let clean = helmholtz_error(runs, Activation::Rational, 0)?;
    let noisy_data = add_noise(&helmholtz_data(0)?, 20.0, 0).map_err(|e| e.to_string())?;
    let noisy = runs.error("helmholtz-noise20-s0", OperatorId::HelmholtzK15, noisy_data, Activation::Rational, 0)?;
    Ok((noisy <= 3.0 * clean, format!("noisy {noisy:.2}% vs noiseless {clean:.2}% (ratio {:.2} <= 3)", noisy / clean)))
}

fn gap(runs: &mut Runs) -> Outcome {
    let data = mask_measurements(&helmholtz_data(0)?, 0.5, 0.7).map_err(|e| e.to_string())?;
    let err = runs.error("helmholtz-gap-s0", OperatorId::HelmholtzK15, data, Activation::Rational, 0)?;
    Ok((err <= 15.0, format!("{err:.2}% <= 15%")))
}

fn laplace_run(runs: &mut Runs) -> Result<Run, String> {
    let data = generate(&GenerateConfig::new(OperatorId::Laplace)).map_err(|e| e.to_string())?;
    runs.train("laplace-s0", data, Activation::Rational, 0)
}

fn laplace_eigen(runs: &mut Runs) -> Outcome {
    let run = laplace_run(runs)?;
    let axis = KernelGrid::axis((0.0, 1.0), 500).map_err(|e| e.to_string())?;
    let grid = KernelGrid::from_network(run.model.green(0, 0), axis.clone(), axis).map_err(|e| e.to_string())?;
    let eig = integral_operator_eig(&grid, 10).map_err(|e| e.to_string())?;
    let pi2 = std::f64::consts::PI.powi(2);
    let rel: Vec<f64> = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let n = (k + 1) as f64;
            let exact = 1.0 / (n * n * pi2);
            (v - exact).abs() / exact
        })
        .collect();
    let worst = rel.iter().cloned().fold(0.0, f64::max);
    let x = grid.x();
    let w = x.weights();
    let v = eig.functions.column(0);
    let s: Vec<f64> = x.points().iter().map(|t| (std::f64::consts::PI * t).sin()).collect();
    let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w).map(|((p, q), w)| p * q * w).sum::<f64>();
    let corr = ip(&v, &s) / (ip(&v, &v) * ip(&s, &s)).sqrt();
    Ok((
        worst <= 0.10 && corr >= 0.99,
        format!("worst eigenvalue deviation {:.2}% (<= 10%), correlation {corr:.5} (>= 0.99)", 100.0 * worst),
    ))
}

fn schrodinger(runs: &mut Runs) -> Outcome {
    let op = OperatorId::SchrodingerPropagator;
    let data = generate(&GenerateConfig::new(op)).map_err(|e| e.to_string())?;
    let test = generate(&GenerateConfig::new(op).with_seed(TEST_SEED_OFFSET)).map_err(|e| e.to_string())?;
    let run = runs.train("schrodinger-s0", data, Activation::Rational, 0)?;
    let err = model_error(&run.model, op, Some(&test), 1000).map_err(|e| e.to_string())?;
    let train_err = 100.0 * run.model.mean_relative_error(&run.data).map_err(|e| e.to_string())?;
    Ok((
        err <= 3.0,
        format!("held-out {err:.2}% over {} states (<= 3%), training {train_err:.2}%", test.samples()),
    ))
}

fn quadrature(runs: &mut Runs) -> Outcome {
    let mut errs = Vec::new();
    let mut parts = Vec::new();
    for sampling in [Sampling::Uniform, Sampling::Random] {
        for rule in [Quadrature::Trapezoid, Quadrature::MonteCarlo] {
            let err = if sampling == Sampling::Uniform && rule == Quadrature::Trapezoid {
                helmholtz_error(runs, Activation::Rational, 0)?
            } else {
                let mut cfg = GenerateConfig::new(OperatorId::HelmholtzK15);
                cfg.quadrature = rule;
                cfg.sampling = sampling;
                let data = generate(&cfg).map_err(|e| e.to_string())?;
                let name = format!("helmholtz-{}-{}-s0", rule.name(), sampling.name());
                runs.error(&name, OperatorId::HelmholtzK15, data, Activation::Rational, 0)?
            };
            parts.push(format!("{}/{} {err:.2}%", rule.name(), sampling.name()));
            errs.push(err);
        }
    }
    let max = errs.iter().cloned().fold(0.0, f64::max);
    let min = errs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        max <= 3.0 && max - min <= 2.0,
        format!("{}; max {max:.2}% (<= 3%), spread {:.2} points (<= 2)", parts.join(", "), max - min),
    ))
}

fn symmetry_constraint(runs: &mut Runs) -> Outcome {
    let e = |x: greenlearn::Error| x.to_string();
    let axis = KernelGrid::axis((0.0, 1.0), 500).map_err(e)?;
    let laplace = laplace_run(runs)?;
    let lg = KernelGrid::from_network(laplace.model.green(0, 0), axis.clone(), axis.clone()).map_err(e)?;
    let helm = runs.train("helmholtz-rational-s0", helmholtz_data(0)?, Activation::Rational, 0)?;
    let hg = KernelGrid::from_network(helm.model.green(0, 0), axis.clone(), axis.clone()).map_err(e)?;
    let data = generate(&GenerateConfig::new(OperatorId::PeriodicHelmholtz)).map_err(e)?;
    let periodic = runs.train("periodic-helmholtz-s0", data, Activation::Rational, 0)?;
    let pg = KernelGrid::from_network(periodic.model.green(0, 0), axis.clone(), axis).map_err(e)?;
    let (sl, sh) = (symmetry_score(&lg).map_err(e)?, symmetry_score(&hg).map_err(e)?);
    let residual = constraint_residual(&pg, &ConstraintSpec::Periodic).map_err(e)? / pg.values().max_abs();
    Ok((
        sl <= 0.1 && sh <= 0.1 && residual <= 0.1,
        format!("symmetry Laplace {sl:.4}, Helmholtz {sh:.4} (<= 0.1); periodic residual {residual:.4} max|G| (<= 0.1)"),
    ))
}
