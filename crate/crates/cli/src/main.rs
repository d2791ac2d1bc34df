//! `greenlearn` command-line driver.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 I/O or integrity failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};

use greenlearn::bench::{run_suite, write_results_csv, Suite};
use greenlearn::catalog::OperatorId;
use greenlearn::config::ExperimentConfig;
use greenlearn::features::{extract, phase_portrait, ComplexWindow, FeatureReport};
use greenlearn::generate::{generate, GenerateConfig};
use greenlearn::gp::KernelFamily;
use greenlearn::io::{
    read_checkpoint, read_dataset, write_checkpoint, write_dataset, write_matrix, Manifest, MANIFEST_FILE,
};
use greenlearn::linalg::DenseMatrix;
use greenlearn::net::Activation;
use greenlearn::trainer::{resume, train, train_partial};
use greenlearn::Error;

fn catalog_help() -> &'static str {
    static HELP: OnceLock<String> = OnceLock::new();
    HELP.get_or_init(|| {
        let mut s = String::from("Operators:\n");
        for op in OperatorId::ALL {
            s.push_str(&format!("  {:<24} {}\n", op.name(), op.description()));
        }
        s.push_str("\nBenchmark suites: ");
        s.push_str(&Suite::ALL.map(|x| x.name()).join(", "));
        s.push_str("\n\nExit codes: 0 ok, 1 usage, 2 numeric failure, 3 I/O");
        s
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "greenlearn",
    version,
    about = "Learn Green's functions of linear differential operators from forcing/response pairs",
    after_help = catalog_help()
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Random seed for data generation, initialization and noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// INI experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Activation of the networks: rational, relu or tanh.
    #[arg(long, global = true)]
    activation: Option<Activation>,
    /// Operator id from the catalog below.
    #[arg(long, global = true)]
    operator: Option<OperatorId>,
    /// Iteration cap of the L-BFGS phase.
    #[arg(long, global = true)]
    lbfgs_max_iters: Option<usize>,
    /// Fail instead of warning when the forcing length-scale is below the grid resolution.
    #[arg(long, global = true)]
    strict_resolution: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample random forcings, solve the hidden problem and write a dataset.
    Generate(GenerateArgs),
    /// Train Green's and homogeneous networks on a dataset and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint and write its features.
    Extract(ExtractArgs),
    /// Run one experiment suite and write a results table.
    Benchmark(BenchmarkArgs),
    /// Print the manifest of a dataset or checkpoint and verify its checksums.
    RenderManifest(RenderArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Number of forcing/response pairs.
    #[arg(long)]
    samples: Option<usize>,
    /// Forcing grid size.
    #[arg(long)]
    forcing_points: Option<usize>,
    /// Response grid size.
    #[arg(long)]
    response_points: Option<usize>,
    /// Covariance family: squared_exponential or periodic.
    #[arg(long)]
    kernel: Option<KernelFamily>,
    /// Length-scale relative to the domain length.
    #[arg(long)]
    length_scale: Option<f64>,
    /// Multiplicative measurement noise in percent.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Dataset directory.
    dataset: PathBuf,
    /// Adam epochs before L-BFGS.
    #[arg(long)]
    adam_epochs: Option<usize>,
    /// Continue an unfinished checkpoint instead of starting afresh.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Stop after this many optimizer iterations and keep the optimizer state.
    #[arg(long)]
    stop_after: Option<usize>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Checkpoint directory.
    checkpoint: PathBuf,
    /// Points per axis of the evaluation grid.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Cells per axis of the pole search and phase portrait.
    #[arg(long)]
    pole_resolution: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Suite name.
    suite: Suite,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Dataset or checkpoint directory.
    dir: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Checksum(_) | Error::Version(_) | Error::Format { .. } => 3,
        e if e.is_numeric() => 2,
        _ => 1,
    }
}

fn require_out(g: &GlobalArgs) -> Result<&Path, Error> {
    g.out
        .as_deref()
        .ok_or_else(|| Error::Config("--out is required".into()))
}

fn load_config(g: &GlobalArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(op) = g.operator {
        cfg.operator = Some(op);
        cfg.benchmark.operator = op;
    }
    if let Some(seed) = g.seed {
        cfg.seed = Some(seed);
        cfg.benchmark.seeds = vec![seed];
    }
    let train = &mut cfg.train;
    if let Some(a) = g.activation {
        train.activation = a;
    }
    if let Some(n) = g.lbfgs_max_iters {
        train.lbfgs_max_iters = n;
    }
    train.seed = cfg.seed.unwrap_or(train.seed);
    if g.strict_resolution {
        cfg.generate.strict_resolution = Some(true);
    }
    cfg.benchmark.train = cfg.train.clone();
    Ok(cfg)
}

fn cmd_generate(g: &GlobalArgs, a: &GenerateArgs) -> Result<(), Error> {
    let out = require_out(g)?;
    let mut cfg = load_config(g)?;
    let op = cfg
        .operator
        .ok_or_else(|| Error::Config("--operator is required".into()))?;
    let o = &mut cfg.generate;
    o.samples = a.samples.or(o.samples);
    o.forcing_points = a.forcing_points.or(o.forcing_points);
    o.response_points = a.response_points.or(o.response_points);
    o.kernel = a.kernel.or(o.kernel);
    o.length_scale = a.length_scale.or(o.length_scale);
    o.noise_percent = a.noise.or(o.noise_percent);
    let seed = cfg.seed.unwrap_or(0);
    let mut gen = GenerateConfig::new(op).with_seed(seed);
    cfg.generate.apply(&mut gen)?;
    let ds = cfg.generate.transform(generate(&gen)?, seed)?;
    let manifest = write_dataset(&ds, out)?;
    println!(
        "wrote {} pairs of {} ({} files) to {}",
        ds.samples(),
        op,
        manifest.files.len(),
        out.display()
    );
    Ok(())
}

fn cmd_train(g: &GlobalArgs, a: &TrainArgs) -> Result<(), Error> {
    let out = require_out(g)?;
    let mut cfg = load_config(g)?;
    if let Some(n) = a.adam_epochs {
        cfg.train.adam_epochs = n;
    }
    let ds = read_dataset(&a.dataset)?;
    let model = match (&a.resume, a.stop_after) {
        (Some(ckpt), _) => {
            let model = read_checkpoint(ckpt)?;
            cfg.train.seed = model.seed;
            resume(&ds, &cfg.train, model)?
        }
        (None, Some(steps)) => train_partial(&ds, &cfg.train, steps)?,
        (None, None) => train(&ds, &cfg.train)?,
    };
    write_checkpoint(&model, out)?;
    for (r, row) in model.rows.iter().enumerate() {
        println!(
            "row {r}: {} iterations, final loss {:.6e}, stop {}",
            row.log.entries.len().saturating_sub(1),
            row.log.final_loss(),
            row.log.stop.name()
        );
    }
    println!("checkpoint written to {} ({:.1} s)", out.display(), model.wall_time);
    Ok(())
}

fn write_report(report: &FeatureReport, out: &Path) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.txt"), report.to_text())?;
    let col = |v: &[f64]| DenseMatrix::from_fn(v.len(), 1, |i, _| v[i]);
    if let Some(k) = report.kernels.first() {
        write_matrix(&out.join("grid_x.csv"), &col(k.grid.x().points()))?;
    }
    for k in &report.kernels {
        let tag = format!("{}_{}", k.row, k.column);
        write_matrix(&out.join(format!("kernel_{tag}.csv")), k.grid.values())?;
        write_matrix(&out.join(format!("eigenvalues_{tag}.csv")), &col(&k.eigenpairs.values))?;
        write_matrix(&out.join(format!("eigenfunctions_{tag}.csv")), &k.eigenpairs.functions)?;
        write_matrix(&out.join(format!("singular_values_{tag}.csv")), &col(&k.singular.values))?;
        write_matrix(&out.join(format!("left_singular_{tag}.csv")), &k.singular.left)?;
        write_matrix(&out.join(format!("right_singular_{tag}.csv")), &k.singular.right)?;
    }
    for h in &report.homogeneous {
        let r = h.row;
        write_matrix(&out.join(format!("homogeneous_{r}.csv")), &col(&h.values))?;
        let poles = DenseMatrix::from_fn(h.poles.len(), 4, |i, j| {
            let p = &h.poles[i];
            [p.location.re, p.location.im, p.multiplicity as f64, f64::from(u8::from(p.isolated))][j]
        });
        write_matrix(&out.join(format!("poles_{r}.csv")), &poles)?;
    }
    Ok(())
}

fn cmd_extract(g: &GlobalArgs, a: &ExtractArgs) -> Result<(), Error> {
    let out = require_out(g)?;
    let mut cfg = load_config(g)?;
    if let Some(n) = a.grid_points {
        cfg.extract.grid_points = n;
    }
    if let Some(n) = a.pole_resolution {
        cfg.extract.pole_resolution = n;
    }
    let model = read_checkpoint(&a.checkpoint)?;
    let report = extract(&model, &cfg.extract)?;
    write_report(&report, out)?;
    let window = cfg
        .extract
        .pole_window
        .unwrap_or_else(|| ComplexWindow::around(model.domain));
    for (r, row) in model.rows.iter().enumerate() {
        if row.hom.activation() != Activation::Rational {
            continue;
        }
        let portrait = phase_portrait(&row.hom, window, cfg.extract.pole_resolution)?;
        // Lattice nodes that hit a pole are stored as zero and counted in the report.
        let args = DenseMatrix::from_fn(portrait.args.rows(), portrait.args.cols(), |i, j| {
            let v = portrait.args[(i, j)];
            if v.is_finite() {
                v
            } else {
                0.0
            }
        });
        write_matrix(&out.join(format!("phase_{r}.csv")), &args)?;
        if portrait.pole_hits > 0 {
            eprintln!("warning: phase portrait {r} hit a pole at {} nodes", portrait.pole_hits);
        }
    }
    for k in &report.kernels {
        if k.grid.pole_hits() > 0 {
            eprintln!(
                "warning: kernel ({}, {}) hit a pole at {} grid points",
                k.row,
                k.column,
                k.grid.pole_hits()
            );
        }
    }
    print!("{}", report.to_text().lines().filter(|l| !l.contains("values =")).map(|l| format!("{l}\n")).collect::<String>());
    Ok(())
}

fn cmd_benchmark(g: &GlobalArgs, a: &BenchmarkArgs) -> Result<(), Error> {
    let out = require_out(g)?;
    let cfg = load_config(g)?;
    fs::create_dir_all(out)?;
    let rows = run_suite(a.suite, &cfg.benchmark, |r| {
        eprintln!(
            "{} {}={} seed={} error={} ({:.1} s) {}",
            r.suite,
            r.parameter,
            r.value,
            r.seed,
            r.error_percent.map_or("-".into(), |e| format!("{e:.3}%")),
            r.runtime_seconds,
            r.status
        );
    })?;
    let mut buf = Vec::new();
    write_results_csv(&rows, &mut buf)?;
    fs::write(out.join("results.csv"), buf)?;
    println!("{} rows written to {}", rows.len(), out.join("results.csv").display());
    Ok(())
}

fn cmd_render(a: &RenderArgs) -> Result<(), Error> {
    let manifest = Manifest::read(&a.dir)?;
    print!("{}", manifest.to_text());
    let bad = manifest.verify(&a.dir)?;
    if let Some(first) = bad.first() {
        for f in &bad {
            eprintln!("checksum mismatch: {f}");
        }
        return Err(Error::Checksum(a.dir.join(first)));
    }
    println!("# {} files verified against {}", manifest.files.len(), MANIFEST_FILE);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(&cli.global, a),
        Command::Train(a) => cmd_train(&cli.global, a),
        Command::Extract(a) => cmd_extract(&cli.global, a),
        Command::Benchmark(a) => cmd_benchmark(&cli.global, a),
        Command::RenderManifest(a) => cmd_render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
