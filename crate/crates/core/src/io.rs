//! Plain-text persistence of matrices, datasets and training checkpoints.
//!
//! Every directory carries a `manifest.txt` with `key = value` metadata and a
//! `[files]` inventory of SHA-256 checksums. Matrices are CSV files whose
//! first line is `rows,cols`, followed by row-major values printed with 17
//! significant digits so that doubles round-trip exactly.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::dataset::{domain_weights, Dataset, DatasetMeta, PointGrid, Sampling};
use crate::error::{Error, Result};
use crate::gp::{KernelFamily, KernelSpec};
use crate::linalg::{DenseMatrix, Quadrature};
use crate::net::{Activation, RationalMLP};
use crate::trainer::optim::{AdamState, LbfgsMemory};
use crate::trainer::{LogEntry, OptimizerState, Phase, RowModel, StopReason, TrainedModel, TrainingLog};

pub const DATASET_FORMAT: &str = "greenlearn-dataset";
pub const CHECKPOINT_FORMAT: &str = "greenlearn-checkpoint";
pub const FORMAT_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Formats a double with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::format(path, format!("`{s}` is not a number")))
}

fn parse_usize(s: &str, path: &Path) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::format(path, format!("`{s}` is not a count")))
}

/// CSV bytes of a matrix.
pub fn matrix_to_csv(m: &DenseMatrix) -> Result<String> {
    if !m.is_finite() {
        return Err(Error::InvalidDataset("cannot store non-finite values".into()));
    }
    let mut s = format!("{},{}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format_f64(*v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

/// Parses the CSV produced by [`matrix_to_csv`]; `path` only labels errors.
pub fn matrix_from_csv(text: &str, path: &Path) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::format(path, "empty file"))?;
    let (r, c) = header
        .split_once(',')
        .ok_or_else(|| Error::format(path, "header must be `rows,cols`"))?;
    let (rows, cols) = (parse_usize(r, path)?, parse_usize(c, path)?);
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        seen += 1;
        let before = data.len();
        for v in line.split(',') {
            data.push(parse_f64(v, path)?);
        }
        if data.len() - before != cols {
            return Err(Error::format(path, format!("row {seen} has {} values, expected {cols}", data.len() - before)));
        }
    }
    if seen != rows {
        return Err(Error::format(path, format!("found {seen} rows, expected {rows}")));
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    fs::write(path, matrix_to_csv(m)?)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    matrix_from_csv(&fs::read_to_string(path)?, path)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Ordered metadata plus a checksum inventory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    /// `key = value` pairs; keys may repeat (for example `note`).
    pub entries: Vec<(String, String)>,
    /// `(relative path, SHA-256 hex)` of every data file.
    pub files: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(format: &str) -> Self {
        let mut m = Self::default();
        m.set("format", format);
        m.set("version", FORMAT_VERSION);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str, path: &Path) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::format(path, format!("missing key `{key}`")))
    }

    pub fn checksum(&self, file: &str) -> Option<&str> {
        self.files.iter().find(|(f, _)| f == file).map(|(_, c)| c.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s.push_str("[files]\n");
        for (f, c) in &self.files {
            let _ = writeln!(s, "{f} = {c}");
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut m = Self::default();
        let mut in_files = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "[files]" {
                in_files = true;
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(path, format!("line {} is not `key = value`", n + 1)))?;
            let pair = (k.trim().to_string(), v.trim().to_string());
            if in_files {
                m.files.push(pair);
            } else {
                m.entries.push(pair);
            }
        }
        Ok(m)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        Self::parse(&fs::read_to_string(&path)?, &path)
    }

    /// Checks format and version.
    fn expect_format(&self, format: &str, path: &Path) -> Result<()> {
        let found = self.require("format", path)?;
        if found != format {
            return Err(Error::format(path, format!("expected format `{format}`, found `{found}`")));
        }
        match self.get("version") {
            Some(FORMAT_VERSION) => Ok(()),
            Some(v) => Err(Error::Version(v.to_string())),
            None => Err(Error::format(path, "missing key `version`")),
        }
    }

    /// Recomputes every listed checksum; returns the files that disagree.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (f, c) in &self.files {
            let bytes = fs::read(dir.join(f))?;
            if sha256_hex(&bytes) != *c {
                bad.push(f.clone());
            }
        }
        Ok(bad)
    }
}

/// Collects files for a directory and writes the manifest last.
struct DirWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl DirWriter {
    fn new(dir: &Path, format: &str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest::new(format),
        })
    }

    fn file(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.manifest.files.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    fn matrix(&mut self, name: &str, m: &DenseMatrix) -> Result<()> {
        self.file(name, &matrix_to_csv(m)?)
    }

    fn finish(self) -> Result<Manifest> {
        fs::write(self.dir.join(MANIFEST_FILE), self.manifest.to_text())?;
        Ok(self.manifest)
    }
}

/// Reads files of a directory, checking them against the manifest.
struct DirReader<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
    /// Files without a checksum are accepted (external data).
    lenient: bool,
}

impl DirReader<'_> {
    fn exists(&self, name: &str) -> bool {
        self.dir.join(name).is_file()
    }

    fn text(&self, name: &str) -> Result<String> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path)?;
        match self.manifest.checksum(name) {
            Some(c) if sha256_hex(&bytes) != c => return Err(Error::Checksum(path)),
            None if !self.lenient => {
                return Err(Error::format(path, "file is not listed in the manifest"));
            }
            _ => {}
        }
        String::from_utf8(bytes).map_err(|_| Error::format(path, "not UTF-8"))
    }

    fn matrix(&self, name: &str) -> Result<DenseMatrix> {
        let path = self.dir.join(name);
        matrix_from_csv(&self.text(name)?, &path)
    }
}

fn column(values: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(values.len(), 1, |i, _| values[i])
}

fn grid_matrix(g: &PointGrid) -> DenseMatrix {
    let d = g.dim();
    DenseMatrix::from_fn(g.len(), d, |i, k| g.coords()[i * d + k])
}

fn component_file(kind: &str, c: usize) -> String {
    if c == 0 {
        format!("{kind}.csv")
    } else {
        format!("components/{kind}_{c}.csv")
    }
}

fn format_kernel(k: &Option<KernelSpec>) -> String {
    match k {
        Some(k) => format!("{}:{}", k.family, format_f64(k.length_scale)),
        None => "none".into(),
    }
}

fn parse_kernel(s: &str, path: &Path) -> Result<Option<KernelSpec>> {
    if s == "none" {
        return Ok(None);
    }
    let (f, l) = s
        .split_once(':')
        .ok_or_else(|| Error::format(path, format!("kernel `{s}` is not `family:length_scale`")))?;
    Ok(Some(KernelSpec::new(f.parse::<KernelFamily>()?, parse_f64(l, path)?)?))
}

fn format_pair(p: (f64, f64)) -> String {
    format!("{},{}", format_f64(p.0), format_f64(p.1))
}

fn parse_pair(s: &str, path: &Path) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::format(path, format!("`{s}` is not `a,b`")))?;
    Ok((parse_f64(a, path)?, parse_f64(b, path)?))
}

/// Writes `ds` to `dir` and returns the manifest.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<Manifest> {
    let mut w = DirWriter::new(dir, DATASET_FORMAT)?;
    let meta = &ds.meta;
    let m = &mut w.manifest;
    m.set("operator", &meta.operator);
    m.set("kernel", format_kernel(&meta.kernel));
    m.set("samples", ds.samples());
    m.set("forcing_points", ds.forcing_grid().len());
    m.set("response_points", ds.response_grid().len());
    m.set("dim", ds.dim());
    m.set("forcing_components", ds.forcing_components());
    m.set("response_components", ds.response_components());
    m.set("seed", meta.seed);
    m.set("noise_percent", format_f64(meta.noise_percent));
    m.set("mask", meta.mask.map_or("none".into(), format_pair));
    m.set("normalization", format_f64(meta.normalization));
    m.set("quadrature", meta.quadrature.name());
    m.set("sampling", meta.sampling);
    m.set("domain", format_pair(meta.domain));
    for note in &meta.notes {
        m.set("note", note.replace('\n', " "));
    }
    w.matrix("forcing_grid.csv", &grid_matrix(ds.forcing_grid()))?;
    w.matrix("response_grid.csv", &grid_matrix(ds.response_grid()))?;
    w.matrix("weights_forcing.csv", &column(ds.forcing_grid().weights()))?;
    w.matrix("weights_response.csv", &column(ds.response_grid().weights()))?;
    for c in 0..ds.forcing_components() {
        w.matrix(&component_file("F", c), ds.forcing(c))?;
    }
    for c in 0..ds.response_components() {
        w.matrix(&component_file("U", c), ds.response(c))?;
    }
    w.finish()
}

/// Reads a dataset written by [`write_dataset`], verifying every checksum.
pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = Manifest::read(dir)?;
    load_dataset(dir, &manifest, false)
}

/// Reads a dataset produced by other tools. The manifest needs `format`,
/// `version`, `operator` and `domain`; component counts default to one,
/// checksums are verified only when listed, and missing weight files of
/// one-dimensional grids are filled in with the trapezoid rule.
pub fn import_external_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = Manifest::read(dir)?;
    load_dataset(dir, &manifest, true)
}

fn load_dataset(dir: &Path, manifest: &Manifest, lenient: bool) -> Result<Dataset> {
    let mpath = dir.join(MANIFEST_FILE);
    manifest.expect_format(DATASET_FORMAT, &mpath)?;
    let r = DirReader { dir, manifest, lenient };
    let count = |key: &str| -> Result<usize> {
        match manifest.get(key) {
            Some(v) => parse_usize(v, &mpath),
            None if lenient => Ok(1),
            None => Err(Error::format(&mpath, format!("missing key `{key}`"))),
        }
    };
    let domain = parse_pair(manifest.require("domain", &mpath)?, &mpath)?;
    let quadrature = match manifest.get("quadrature") {
        Some(q) => Quadrature::parse(q).ok_or_else(|| Error::format(&mpath, format!("unknown quadrature `{q}`")))?,
        None if lenient => Quadrature::Trapezoid,
        None => return Err(Error::format(&mpath, "missing key `quadrature`")),
    };
    let grid = |points: &str, weights: &str| -> Result<PointGrid> {
        let p = r.matrix(points)?;
        let d = p.cols();
        let w = if r.exists(weights) || !lenient {
            r.matrix(weights)?.into_vec()
        } else if d == 1 {
            domain_weights(p.as_slice(), quadrature, domain)?
        } else {
            return Err(Error::InvalidDataset(format!("{weights} is required for {d}-dimensional grids")));
        };
        PointGrid::new(d, p.into_vec(), w)
    };
    let fgrid = grid("forcing_grid.csv", "weights_forcing.csv")?;
    let rgrid = grid("response_grid.csv", "weights_response.csv")?;
    let n_f = count("forcing_components")?;
    let n_u = count("response_components")?;
    let load = |kind: &str, n: usize| -> Result<Vec<DenseMatrix>> {
        (0..n)
            .map(|c| {
                let name = component_file(kind, c);
                if !r.exists(&name) {
                    return Err(Error::InvalidDataset(format!("missing component file {name}")));
                }
                r.matrix(&name)
            })
            .collect()
    };
    let forcing = load("F", n_f)?;
    let response = load("U", n_u)?;
    let mut meta = DatasetMeta::new(manifest.require("operator", &mpath)?, domain);
    if let Some(k) = manifest.get("kernel") {
        meta.kernel = parse_kernel(k, &mpath)?;
    }
    if let Some(s) = manifest.get("seed") {
        meta.seed = s
            .parse()
            .map_err(|_| Error::format(&mpath, format!("`{s}` is not a seed")))?;
    }
    if let Some(v) = manifest.get("noise_percent") {
        meta.noise_percent = parse_f64(v, &mpath)?;
    }
    if let Some(v) = manifest.get("mask") {
        meta.mask = if v == "none" { None } else { Some(parse_pair(v, &mpath)?) };
    }
    if let Some(v) = manifest.get("normalization") {
        meta.normalization = parse_f64(v, &mpath)?;
    }
    meta.quadrature = quadrature;
    if let Some(v) = manifest.get("sampling") {
        meta.sampling = v.parse::<Sampling>()?;
    }
    meta.notes = manifest.get_all("note").map(str::to_string).collect();
    let ds = Dataset::new(fgrid, rgrid, forcing, response, meta)?;
    if !lenient {
        let expect = [
            ("samples", ds.samples()),
            ("forcing_points", ds.forcing_grid().len()),
            ("response_points", ds.response_grid().len()),
            ("dim", ds.dim()),
        ];
        for (key, found) in expect {
            if parse_usize(manifest.require(key, &mpath)?, &mpath)? != found {
                return Err(Error::InvalidDataset(format!("manifest `{key}` disagrees with the data files")));
            }
        }
    }
    Ok(ds)
}

fn params_matrix(net: &RationalMLP) -> DenseMatrix {
    column(net.params())
}

fn stacked(rows: &[Vec<f64>], width: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), width, |i, j| rows[i][j])
}

fn log_csv(log: &TrainingLog) -> Result<String> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Config("log is not UTF-8".into()))
}

fn parse_log(text: &str, path: &Path, stop: StopReason) -> Result<TrainingLog> {
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::format(path, format!("line {} has {} fields", n + 1, f.len())));
        }
        entries.push(LogEntry {
            iteration: parse_usize(f[0], path)?,
            phase: f[1].parse::<Phase>()?,
            loss: parse_f64(f[2], path)?,
            grad_norm: parse_f64(f[3], path)?,
            wall_time: parse_f64(f[4], path)?,
        });
    }
    Ok(TrainingLog { entries, stop })
}

fn hidden_text(h: &[usize]) -> String {
    h.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Writes every network, training log and unfinished optimizer state.
pub fn write_checkpoint(model: &TrainedModel, dir: &Path) -> Result<Manifest> {
    let mut w = DirWriter::new(dir, CHECKPOINT_FORMAT)?;
    let first = model
        .rows
        .first()
        .ok_or_else(|| Error::Config("model has no rows".into()))?;
    let m = &mut w.manifest;
    m.set("operator", &model.operator);
    m.set("domain", format_pair(model.domain));
    m.set("dim", model.dim);
    m.set("seed", model.seed);
    m.set("wall_time", format_f64(model.wall_time));
    m.set("rows", model.rows.len());
    m.set("columns", first.green.len());
    m.set("activation", first.hom.activation());
    m.set("activation_trainable", first.hom.activation_trainable());
    m.set("hidden", hidden_text(first.hom.hidden()));
    for (r, row) in model.rows.iter().enumerate() {
        w.manifest.set(&format!("row{r}.stop"), row.log.stop.name());
        if let Some(s) = &row.state {
            let m = &mut w.manifest;
            m.set(&format!("row{r}.adam_t"), s.adam.t);
            m.set(&format!("row{r}.adam_done"), s.adam_done);
            m.set(&format!("row{r}.lbfgs_done"), s.lbfgs_done);
            m.set(&format!("row{r}.lbfgs_pairs"), s.memory.len());
        }
        for (c, net) in row.green.iter().enumerate() {
            w.matrix(&format!("row{r}_green{c}.csv"), &params_matrix(net))?;
        }
        w.matrix(&format!("row{r}_hom.csv"), &params_matrix(&row.hom))?;
        w.file(&format!("row{r}_log.csv"), &log_csv(&row.log)?)?;
        if let Some(s) = &row.state {
            let n = s.adam.m.len();
            w.matrix(&format!("row{r}_adam.csv"), &stacked(&[s.adam.m.clone(), s.adam.v.clone()], n))?;
            if !s.memory.is_empty() {
                let sv: Vec<Vec<f64>> = s.memory.s.iter().cloned().collect();
                let yv: Vec<Vec<f64>> = s.memory.y.iter().cloned().collect();
                w.matrix(&format!("row{r}_lbfgs_s.csv"), &stacked(&sv, n))?;
                w.matrix(&format!("row{r}_lbfgs_y.csv"), &stacked(&yv, n))?;
            }
        }
    }
    w.finish()
}

/// Reads a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint(dir: &Path) -> Result<TrainedModel> {
    let manifest = Manifest::read(dir)?;
    let mpath = dir.join(MANIFEST_FILE);
    manifest.expect_format(CHECKPOINT_FORMAT, &mpath)?;
    let r = DirReader {
        dir,
        manifest: &manifest,
        lenient: false,
    };
    let get = |k: &str| manifest.require(k, &mpath);
    let num = |k: &str| -> Result<usize> { parse_usize(get(k)?, &mpath) };
    let dim = num("dim")?;
    let (rows, cols) = (num("rows")?, num("columns")?);
    let activation: Activation = get("activation")?.parse()?;
    let trainable = match get("activation_trainable")? {
        "true" => true,
        "false" => false,
        v => return Err(Error::format(&mpath, format!("`{v}` is not a boolean"))),
    };
    let hidden = get("hidden")?
        .split(',')
        .map(|h| parse_usize(h, &mpath))
        .collect::<Result<Vec<_>>>()?;
    let net = |name: &str, d_in: usize| -> Result<RationalMLP> {
        let mut n = RationalMLP::from_parts(d_in, &hidden, activation, r.matrix(name)?.into_vec())?;
        n.set_activation_trainable(trainable);
        Ok(n)
    };
    let mut out = Vec::with_capacity(rows);
    for row in 0..rows {
        let green = (0..cols)
            .map(|c| net(&format!("row{row}_green{c}.csv"), 2 * dim))
            .collect::<Result<Vec<_>>>()?;
        let hom = net(&format!("row{row}_hom.csv"), dim)?;
        let stop: StopReason = get(&format!("row{row}.stop"))?.parse()?;
        let log_name = format!("row{row}_log.csv");
        let log = parse_log(&r.text(&log_name)?, &dir.join(&log_name), stop)?;
        let state = match manifest.get(&format!("row{row}.adam_t")) {
            None => None,
            Some(t) => {
                let adam = r.matrix(&format!("row{row}_adam.csv"))?;
                if adam.rows() != 2 {
                    return Err(Error::format(dir.join(format!("row{row}_adam.csv")), "expected two rows"));
                }
                let pairs = num(&format!("row{row}.lbfgs_pairs"))?;
                let mut memory = LbfgsMemory::default();
                if pairs > 0 {
                    let s = r.matrix(&format!("row{row}_lbfgs_s.csv"))?;
                    let y = r.matrix(&format!("row{row}_lbfgs_y.csv"))?;
                    if s.rows() != pairs || y.rows() != pairs {
                        return Err(Error::InvalidDataset("L-BFGS memory size mismatch".into()));
                    }
                    memory.s = (0..pairs).map(|i| s.row(i).to_vec()).collect::<VecDeque<_>>();
                    memory.y = (0..pairs).map(|i| y.row(i).to_vec()).collect::<VecDeque<_>>();
                }
                Some(OptimizerState {
                    adam: AdamState {
                        m: adam.row(0).to_vec(),
                        v: adam.row(1).to_vec(),
                        t: t.parse().map_err(|_| Error::format(&mpath, "bad adam_t"))?,
                    },
                    memory,
                    adam_done: num(&format!("row{row}.adam_done"))?,
                    lbfgs_done: num(&format!("row{row}.lbfgs_done"))?,
                })
            }
        };
        out.push(RowModel { green, hom, log, state });
    }
    Ok(TrainedModel {
        operator: get("operator")?.to_string(),
        domain: parse_pair(get("domain")?, &mpath)?,
        dim,
        seed: get("seed")?
            .parse()
            .map_err(|_| Error::format(&mpath, "bad seed"))?,
        rows: out,
        wall_time: parse_f64(get("wall_time")?, &mpath)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::OperatorId;
    use crate::generate::{generate, GenerateConfig};
    use crate::trainer::{train_partial, TrainConfig};
    use proptest::prelude::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn small(op: OperatorId) -> Dataset {
        let mut g = GenerateConfig::new(op).with_samples(5);
        g.forcing_points = 30;
        g.response_points = 20;
        generate(&g).unwrap()
    }

    proptest! {
        #[test]
        fn matrix_csv_round_trips_every_double(bits in proptest::collection::vec(any::<u64>(), 1..40)) {
            let vals: Vec<f64> = bits.iter().map(|b| f64::from_bits(*b)).filter(|v| v.is_finite()).collect();
            prop_assume!(!vals.is_empty());
            let m = DenseMatrix::new(1, vals.len(), vals.clone()).unwrap();
            let back = matrix_from_csv(&matrix_to_csv(&m).unwrap(), Path::new("m.csv")).unwrap();
            for (a, b) in back.as_slice().iter().zip(&vals) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn matrix_header_and_shape_errors() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let text = matrix_to_csv(&m).unwrap();
        assert!(text.starts_with("2,2\n"));
        let p = Path::new("x.csv");
        assert!(matrix_from_csv("2,2\n1,2\n", p).is_err());
        assert!(matrix_from_csv("1,2\n1,2,3\n", p).is_err());
        assert!(matrix_from_csv("1,1\nabc\n", p).is_err());
        assert!(matrix_from_csv("", p).is_err());
        let bad = DenseMatrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(matrix_to_csv(&bad).is_err());
    }

    #[test]
    fn dataset_round_trip_is_exact_and_deterministic() {
        let mut ds = small(OperatorId::AdvectionDiffusion);
        ds.meta.notes.push("hello = world".into());
        ds.meta.mask = Some((0.5, 0.7));
        let (a, b) = (tmp(), tmp());
        let ma = write_dataset(&ds, a.path()).unwrap();
        write_dataset(&ds, b.path()).unwrap();
        let back = read_dataset(a.path()).unwrap();
        assert_eq!(back, ds);
        for (f, _) in &ma.files {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
        assert_eq!(
            fs::read(a.path().join(MANIFEST_FILE)).unwrap(),
            fs::read(b.path().join(MANIFEST_FILE)).unwrap()
        );
    }

    #[test]
    fn system_dataset_uses_component_files() {
        let ds = small(OperatorId::OdeSystem);
        let d = tmp();
        write_dataset(&ds, d.path()).unwrap();
        assert!(d.path().join("F.csv").is_file());
        assert!(d.path().join("components/U_1.csv").is_file());
        assert_eq!(read_dataset(d.path()).unwrap(), ds);
    }

    #[test]
    fn tampering_is_detected() {
        let ds = small(OperatorId::Laplace);
        let d = tmp();
        write_dataset(&ds, d.path()).unwrap();
        let f = d.path().join("U.csv");
        let mut text = fs::read_to_string(&f).unwrap();
        text.push('\n');
        fs::write(&f, text).unwrap();
        assert!(matches!(read_dataset(d.path()), Err(Error::Checksum(_))));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let ds = small(OperatorId::Laplace);
        let d = tmp();
        write_dataset(&ds, d.path()).unwrap();
        let mp = d.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&mp).unwrap().replace("version = 1", "version = 9");
        fs::write(&mp, text).unwrap();
        assert!(matches!(read_dataset(d.path()), Err(Error::Version(_))));
    }

    #[test]
    fn external_import_matches_original_and_fills_weights() {
        let ds = small(OperatorId::OdeSystem);
        let d = tmp();
        write_dataset(&ds, d.path()).unwrap();
        // Strip checksums and weights as an external tool might.
        let mp = d.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&mp).unwrap();
        let head = text.split("[files]").next().unwrap();
        fs::write(&mp, head).unwrap();
        let imported = import_external_dataset(d.path()).unwrap();
        assert_eq!(imported.forcing(1), ds.forcing(1));
        assert_eq!(imported.response(1), ds.response(1));
        assert_eq!(imported.forcing_grid(), ds.forcing_grid());
        fs::remove_file(d.path().join("weights_forcing.csv")).unwrap();
        let filled = import_external_dataset(d.path()).unwrap();
        let w = filled.forcing_grid().weights();
        let (a, b) = ds.meta.domain;
        assert!((w.iter().sum::<f64>() - (b - a)).abs() < 1e-12);
        fs::remove_file(d.path().join("components/F_1.csv")).unwrap();
        assert!(import_external_dataset(d.path()).is_err());
        // The strict reader refuses files without checksums.
        assert!(read_dataset(d.path()).is_err());
    }

    #[test]
    fn checkpoint_round_trip_preserves_networks_and_state() {
        let ds = small(OperatorId::Laplace);
        let cfg = TrainConfig {
            adam_epochs: 3,
            lbfgs_max_iters: 5,
            hidden: vec![6, 6],
            ..TrainConfig::default()
        };
        let model = train_partial(&ds, &cfg, 6).unwrap();
        let d = tmp();
        write_checkpoint(&model, d.path()).unwrap();
        let back = read_checkpoint(d.path()).unwrap();
        assert_eq!(back, model);
        let probe: Vec<f64> = (0..50).flat_map(|i| [i as f64 / 49.0, 0.3]).collect();
        let (a, b) = (model.green(0, 0).forward_raw(&probe).unwrap(), back.green(0, 0).forward_raw(&probe).unwrap());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn truncated_checkpoint_is_a_structured_error() {
        let ds = small(OperatorId::Laplace);
        let cfg = TrainConfig {
            adam_epochs: 1,
            lbfgs_max_iters: 0,
            hidden: vec![4],
            ..TrainConfig::default()
        };
        let model = crate::trainer::train(&ds, &cfg).unwrap();
        let d = tmp();
        write_checkpoint(&model, d.path()).unwrap();
        let f = d.path().join("row0_hom.csv");
        let text = fs::read_to_string(&f).unwrap();
        fs::write(&f, &text[..text.len() / 2]).unwrap();
        assert!(matches!(read_checkpoint(d.path()), Err(Error::Checksum(_))));
        fs::remove_file(d.path().join("row0_green0.csv")).unwrap();
        assert!(read_checkpoint(d.path()).is_err());
    }
}
