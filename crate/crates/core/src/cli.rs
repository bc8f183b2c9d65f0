//! Command-line front end: configuration, subcommands and file outputs.
//!
//! Settings come from built-in defaults, then an optional `key = value`
//! file (`--config`), then command-line flags. Every command computes all
//! of its outputs before writing any file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::condensed::{cosine_similarity, estimate_condensed, extract_modes, EstimateMode, EstimatorConfig, GridSpec};
use crate::error::{Error, Result};
use crate::io;
use crate::laguerre::{
    expansion_coefficients, expected_log, fit_gamma, EmpiricalMoments, Histogram, LaguerreExpansion,
};
use crate::measure::{exact_moments, sample_realizations, AtomicMeasure, MomentSequence, NoiseModel};
use crate::pencil::{default_zero_order, pencil_from_moments, qr_diagonal, PencilKind};
use crate::transform::phi;

/// The five-atom benchmark measure shipped with the tool.
pub const BUNDLED_MEASURE: &str = include_str!("../data/benchmark.measure");

#[derive(Debug, Parser)]
#[command(name = "zerodensity", version, about = "Condensed densities of zeros and poles from noisy moments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the exact moments and N noisy realizations.
    Simulate,
    /// Apply the moment involution to `--input`.
    Transform,
    /// Fit Gamma-Laguerre densities to the QR diagonal at the probe point.
    FitDensity,
    /// Lattice estimate of the zero density.
    EstimateZeros,
    /// Lattice estimate of the pole density.
    EstimatePoles,
    /// Monte Carlo lattice estimate over N realizations.
    Montecarlo,
    /// Compare 1-term and M-term expected logarithms from an expansion dump.
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Single,
    Montecarlo,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    #[arg(long, global = true)]
    pub grid_size: Option<usize>,
    #[arg(long, global = true)]
    pub beta_smooth: Option<f64>,
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub measure: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Pencil kind for `fit-density` and `montecarlo`: pole or zero.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true)]
    pub laguerre_order: Option<usize>,
    /// Noise level used inside the estimator; defaults to `--sigma`.
    #[arg(long, global = true)]
    pub estimator_sigma: Option<f64>,
    /// Number of modes to extract; defaults to the number of zeros or poles.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` selects [`BUNDLED_MEASURE`].
    pub measure: Option<PathBuf>,
    pub n: usize,
    pub sigma: f64,
    pub seed: u64,
    pub order: Option<usize>,
    pub kind: Option<PencilKind>,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grid_size: usize,
    /// `None` means `5 n`.
    pub beta_smooth: Option<f64>,
    pub realizations: usize,
    pub laguerre_order: usize,
    pub z_probe: Complex64,
    pub out: PathBuf,
    pub input: Option<PathBuf>,
    pub mode: Option<EstimateMode>,
    pub estimator_sigma: Option<f64>,
    pub modes: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            measure: None,
            n: 74,
            sigma: 0.2,
            seed: 1,
            order: None,
            kind: None,
            x_min: -1.2,
            x_max: 1.2,
            y_min: -1.2,
            y_max: 1.2,
            grid_size: 100,
            beta_smooth: None,
            realizations: 100,
            laguerre_order: 10,
            z_probe: Complex64::new(1f64.cos(), 0.8),
            out: PathBuf::from("."),
            input: None,
            mode: None,
            estimator_sigma: None,
            modes: None,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_mode(value: &str) -> Result<EstimateMode> {
    match value.to_ascii_lowercase().as_str() {
        "single" => Ok(EstimateMode::Single),
        "montecarlo" | "monte-carlo" => Ok(EstimateMode::MonteCarlo),
        _ => Err(Error::Config(format!("unknown mode {value:?}"))),
    }
}

impl RunConfig {
    /// Sets one `key = value` entry; hyphens and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "measure" => self.measure = Some(PathBuf::from(value)),
            "n" => self.n = parse_value(&key, value)?,
            "sigma" => self.sigma = parse_value(&key, value)?,
            "seed" => self.seed = parse_value(&key, value)?,
            "order" => self.order = Some(parse_value(&key, value)?),
            "kind" => self.kind = Some(value.parse()?),
            "x_min" => self.x_min = parse_value(&key, value)?,
            "x_max" => self.x_max = parse_value(&key, value)?,
            "y_min" => self.y_min = parse_value(&key, value)?,
            "y_max" => self.y_max = parse_value(&key, value)?,
            "grid_size" => self.grid_size = parse_value(&key, value)?,
            "beta_smooth" => self.beta_smooth = Some(parse_value(&key, value)?),
            "realizations" => self.realizations = parse_value(&key, value)?,
            "laguerre_order" => self.laguerre_order = parse_value(&key, value)?,
            "z_probe_re" => self.z_probe.re = parse_value(&key, value)?,
            "z_probe_im" => self.z_probe.im = parse_value(&key, value)?,
            "out" => self.out = PathBuf::from(value),
            "input" => self.input = Some(PathBuf::from(value)),
            "mode" => self.mode = Some(parse_mode(value)?),
            "estimator_sigma" => self.estimator_sigma = Some(parse_value(&key, value)?),
            "modes" => self.modes = Some(parse_value(&key, value)?),
            _ => return Err(Error::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected key = value".into(),
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    /// Defaults, then the `--config` file, then the remaining flags.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = flags.n {
            cfg.n = v;
        }
        if let Some(v) = flags.realizations {
            cfg.realizations = v;
        }
        if let Some(v) = flags.grid_size {
            cfg.grid_size = v;
        }
        if let Some(v) = flags.beta_smooth {
            cfg.beta_smooth = Some(v);
        }
        if let Some(v) = flags.order {
            cfg.order = Some(v);
        }
        if let Some(v) = &flags.out {
            cfg.out = v.clone();
        }
        if let Some(v) = &flags.measure {
            cfg.measure = Some(v.clone());
        }
        if let Some(v) = &flags.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &flags.kind {
            cfg.kind = Some(v.parse()?);
        }
        if let Some(v) = flags.mode {
            cfg.mode = Some(match v {
                ModeArg::Single => EstimateMode::Single,
                ModeArg::Montecarlo => EstimateMode::MonteCarlo,
            });
        }
        if let Some(v) = flags.laguerre_order {
            cfg.laguerre_order = v;
        }
        if let Some(v) = flags.estimator_sigma {
            cfg.estimator_sigma = Some(v);
        }
        if let Some(v) = flags.modes {
            cfg.modes = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be finite and non-negative, got {}", self.sigma)));
        }
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be positive".into()));
        }
        if !(self.z_probe.re.is_finite() && self.z_probe.im.is_finite()) {
            return Err(Error::Config("z_probe must be finite".into()));
        }
        self.grid()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.x_min, self.x_max, self.y_min, self.y_max, self.grid_size)
    }

    pub fn beta_smooth(&self) -> f64 {
        self.beta_smooth.unwrap_or(5.0 * self.n as f64)
    }

    pub fn load_measure(&self) -> Result<AtomicMeasure> {
        match &self.measure {
            Some(path) => AtomicMeasure::parse(&fs::read_to_string(path)?),
            None => AtomicMeasure::parse(BUNDLED_MEASURE),
        }
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.sigma, self.seed)
    }
}

/// Files produced by a command and a human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((self.dir.join(name), contents));
    }

    fn commit(self, summary: String) -> Result<Outcome> {
        fs::create_dir_all(&self.dir)?;
        let mut paths = Vec::with_capacity(self.files.len());
        for (path, contents) in self.files {
            fs::write(&path, contents)?;
            paths.push(path);
        }
        Ok(Outcome { files: paths, summary })
    }
}

/// Parses `args` (program name first) and runs the selected command.
pub fn run<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Simulate => cmd_simulate(&cfg),
        Command::Transform => cmd_transform(&cfg),
        Command::FitDensity => cmd_fit_density(&cfg),
        Command::EstimateZeros => {
            cmd_estimate(&cfg, PencilKind::Zero, cfg.mode.unwrap_or(EstimateMode::Single))
        }
        Command::EstimatePoles => {
            cmd_estimate(&cfg, PencilKind::Pole, cfg.mode.unwrap_or(EstimateMode::Single))
        }
        Command::Montecarlo => cmd_estimate(&cfg, cfg.kind.unwrap_or(PencilKind::Zero), EstimateMode::MonteCarlo),
        Command::Compare => cmd_compare(&cfg),
    }
}

fn required_input(cfg: &RunConfig) -> Result<&Path> {
    cfg.input
        .as_deref()
        .ok_or_else(|| Error::Config("this command needs --input".into()))
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let measure = cfg.load_measure()?;
    let exact = exact_moments(&measure, cfg.n)?;
    let realizations = sample_realizations(&measure, cfg.n, &cfg.noise()?, cfg.realizations)?;
    let mut out = Outputs::new(&cfg.out);
    out.add("moments_exact.csv", io::moments_to_csv(&exact));
    let width = realizations.len().saturating_sub(1).to_string().len().max(4);
    for (r, seq) in realizations.iter().enumerate() {
        out.add(&format!("moments_r{r:0width$}.csv"), io::moments_to_csv(seq));
    }
    let summary = format!(
        "simulated {} realizations of {} moments (sigma = {}, seed = {})\n",
        realizations.len(),
        cfg.n,
        cfg.sigma,
        cfg.seed
    );
    out.commit(summary)
}

pub fn cmd_transform(cfg: &RunConfig) -> Result<Outcome> {
    let input = io::read_moments(required_input(cfg)?)?;
    let transformed = phi(&input)?;
    let mut out = Outputs::new(&cfg.out);
    out.add("transformed.csv", io::moments_to_csv(&transformed));
    out.commit(format!("transformed {} moments\n", input.len()))
}

/// Pencil order for density fitting when none is configured.
fn default_fit_order(kind: PencilKind, n: usize) -> usize {
    match kind {
        PencilKind::Zero => default_zero_order(n),
        PencilKind::Pole => (n / 2).saturating_sub(1).max(1),
    }
}

/// Per diagonal index: Gamma fit, expansion and histogram distances.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub k: usize,
    pub result: std::result::Result<FitResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub expansion: LaguerreExpansion,
    pub l2_first: f64,
    pub l2_full: f64,
}

/// Fits every diagonal index from the `R²_kk` samples (one row per realization).
pub fn fit_diagonal(samples_by_realization: &[Vec<f64>], order: usize) -> Vec<FitRow> {
    let q = samples_by_realization.first().map_or(0, Vec::len);
    (0..q)
        .into_par_iter()
        .map(|k| {
            let samples: Vec<f64> = samples_by_realization.iter().map(|row| row[k]).collect();
            let result = fit_one(&samples, order).map_err(|e| e.to_string());
            FitRow { k, result }
        })
        .collect()
}

fn fit_one(samples: &[f64], order: usize) -> Result<FitResult> {
    let moments = EmpiricalMoments::from_samples(samples, order.max(2))?;
    let fit = fit_gamma(&moments)?;
    let expansion = expansion_coefficients(&moments, fit, order)?;
    let hist = Histogram::freedman_diaconis(samples)?;
    let first = expansion.truncated(0);
    let l2_first = hist.l2_distance(|y| crate::laguerre::density_eval(&first, y));
    let l2_full = hist.l2_distance(|y| crate::laguerre::density_eval(&expansion, y));
    Ok(FitResult { expansion, l2_first, l2_full })
}

pub fn cmd_fit_density(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.realizations < 100 {
        return Err(Error::Config(format!("fit-density needs at least 100 realizations, got {}", cfg.realizations)));
    }
    let kind = cfg.kind.unwrap_or(PencilKind::Zero);
    let q = cfg.order.unwrap_or_else(|| default_fit_order(kind, cfg.n));
    let measure = cfg.load_measure()?;
    let realizations = sample_realizations(&measure, cfg.n, &cfg.noise()?, cfg.realizations)?;
    let z = cfg.z_probe;
    let samples: Vec<Vec<f64>> = realizations
        .par_iter()
        .map(|d| Ok(qr_diagonal(&pencil_from_moments(d, q, kind)?, z).values))
        .collect::<Result<_>>()?;
    let rows = fit_diagonal(&samples, cfg.laguerre_order);

    let mut table = String::from("k,alpha,beta,l2_first,l2_full,status\n");
    let mut summary = format!("{kind} pencil q = {q} at z = {z}, {} realizations\n", cfg.realizations);
    let mut dump = Vec::new();
    for row in &rows {
        match &row.result {
            Ok(fit) => {
                let e = &fit.expansion;
                let _ = writeln!(table, "{},{},{},{},{},ok", row.k, e.fit.shape, e.fit.scale, fit.l2_first, fit.l2_full);
                let _ = writeln!(
                    summary,
                    "k = {:2}  alpha = {:10.4}  L2 first = {:.4e}  L2 full = {:.4e}",
                    row.k, e.fit.shape, fit.l2_first, fit.l2_full
                );
                dump.push((row.k, e.clone()));
            }
            Err(message) => {
                let _ = writeln!(table, "{},,,,,\"warning: {}\"", row.k, message.replace('"', "'"));
                let _ = writeln!(summary, "k = {:2}  warning: {message}", row.k);
            }
        }
    }
    let mut out = Outputs::new(&cfg.out);
    out.add("expansion.csv", io::expansions_to_csv(&dump));
    out.add("fit_table.csv", table);
    out.commit(summary)
}

fn estimate_prefix(kind: PencilKind) -> &'static str {
    match kind {
        PencilKind::Zero => "zeros",
        PencilKind::Pole => "poles",
    }
}

/// The moment sequences an estimate runs on: `--input` if given, otherwise
/// realization 0 (single) or realizations `0..N` (Monte Carlo).
fn estimate_inputs(cfg: &RunConfig, measure: &AtomicMeasure, mode: EstimateMode) -> Result<Vec<MomentSequence>> {
    if let Some(path) = &cfg.input {
        if mode == EstimateMode::MonteCarlo {
            return Err(Error::Config("--input supplies one realization; use single mode".into()));
        }
        return Ok(vec![io::read_moments(path)?]);
    }
    let count = match mode {
        EstimateMode::Single => 1,
        EstimateMode::MonteCarlo => cfg.realizations,
    };
    sample_realizations(measure, cfg.n, &cfg.noise()?, count)
}

pub fn cmd_estimate(cfg: &RunConfig, kind: PencilKind, mode: EstimateMode) -> Result<Outcome> {
    let measure = cfg.load_measure()?;
    let p = measure.len();
    let default_count = match kind {
        PencilKind::Zero => p.saturating_sub(1).max(1),
        PencilKind::Pole => p,
    };
    let q = cfg.order.unwrap_or(default_count);
    let sigma = cfg.estimator_sigma.unwrap_or(cfg.sigma);
    let est = EstimatorConfig::new(sigma, cfg.beta_smooth(), q, kind)?;
    let spec = cfg.grid()?;
    let inputs = estimate_inputs(cfg, &measure, mode)?;
    let estimate = estimate_condensed(&inputs, &est, &spec, mode)?;
    let count = cfg.modes.unwrap_or(default_count);
    let modes = extract_modes(&estimate.normalized, count, 2.0 * spec.dx());

    let mut modes_csv = String::from("re,im,value\n");
    for (z, v) in modes.points.iter().zip(&modes.values) {
        let _ = writeln!(modes_csv, "{},{},{}", z.re, z.im, v);
    }
    let prefix = estimate_prefix(kind);
    let mut summary = format!(
        "{prefix}: {} realization(s), q = {q}, sigma = {sigma}, beta_smooth = {}, {}x{} lattice\n",
        inputs.len(),
        est.beta_smooth,
        spec.m,
        spec.m
    );
    for z in &modes.points {
        let _ = writeln!(summary, "mode {:.6} {:+.6}i", z.re, z.im);
    }
    if !modes.complete {
        let _ = writeln!(summary, "warning: found {} of {count} requested modes", modes.points.len());
    }
    let mut out = Outputs::new(&cfg.out);
    out.add(&format!("{prefix}_density.csv"), io::grid_to_csv(&estimate.normalized));
    out.add(&format!("{prefix}_raw.csv"), io::grid_to_csv(&estimate.raw));
    out.add(&format!("{prefix}_density.pgm"), io::grid_to_pgm(&estimate.normalized));
    out.add(&format!("{prefix}_modes.csv"), modes_csv);
    if mode == EstimateMode::MonteCarlo && cfg.input.is_none() {
        let single = estimate_condensed(&inputs[..1], &est, &spec, EstimateMode::Single)?;
        let similarity = cosine_similarity(&single.normalized, &estimate.normalized);
        let _ = writeln!(summary, "cosine similarity, realization 0 vs Monte Carlo: {similarity:.6}");
    }
    out.commit(summary)
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Outcome> {
    let rows = io::parse_expansions_csv(&fs::read_to_string(required_input(cfg)?)?)?;
    let mut table = String::from("k,expected_log_first,expected_log_full,difference\n");
    let mut summary = String::new();
    for (k, e) in &rows {
        let first = expected_log(&e.truncated(0))?;
        let full = expected_log(e)?;
        let _ = writeln!(table, "{k},{first},{full},{}", full - first);
        let _ = writeln!(summary, "k = {k:2}  E[ln R2] first = {first:.6}  full = {full:.6}");
    }
    let mut out = Outputs::new(&cfg.out);
    out.add("compare.csv", table);
    out.commit(summary)
}
