//! Lattice estimates of the condensed density of poles or zeros.
//!
//! For each lattice node `z` the squared QR diagonal of the pencil at `z`
//! feeds the potential `Σ_k Ψ(R²_kk(z) / (σ² β) + 1)`; its discrete
//! Laplacian, clipped and normalized, is the density estimate. Summing the
//! potentials of several realizations gives the Monte Carlo variant.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::MomentSequence;
use crate::pencil::{pencil_from_moments, qr_diagonal, PencilKind};
use crate::specfun::digamma_unchecked;

/// Rectangular `m × m` lattice of nodes over `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, m: usize) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || !(x_max > x_min) || !(y_max > y_min) {
            return Err(Error::Grid(format!("degenerate region [{x_min}, {x_max}] x [{y_min}, {y_max}]")));
        }
        if m < 3 {
            return Err(Error::Grid(format!("lattice needs at least 3 nodes per axis, got {m}")));
        }
        Ok(Self { x_min, x_max, y_min, y_max, m })
    }

    /// `[-half, half]²` with `m` nodes per axis.
    pub fn square(half: f64, m: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, m)
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.m - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.m - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Node at row `i` (imaginary axis, ascending) and column `j`.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x_min + j as f64 * self.dx(), self.y_min + i as f64 * self.dy())
    }

    pub fn node_at(&self, index: usize) -> Complex64 {
        self.node(index / self.m, index % self.m)
    }

    /// Nearest lattice indices to `z`, clamped into the grid.
    pub fn nearest(&self, z: Complex64) -> (usize, usize) {
        let clamp = |v: f64| v.round().max(0.0).min((self.m - 1) as f64) as usize;
        (clamp((z.im - self.y_min) / self.dy()), clamp((z.re - self.x_min) / self.dx()))
    }
}

/// Real values on a [`GridSpec`], row-major with rows along the imaginary axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Length { required: spec.len(), got: values.len() });
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Complex64) -> f64) -> Self {
        let values = (0..spec.len()).map(|idx| f(spec.node_at(idx))).collect();
        Self { spec, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.m + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ values · cell area`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    pub fn scaled(&self, factor: f64) -> DensityGrid {
        DensityGrid { spec: self.spec, values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Parameters of the digamma estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Standard deviation of the noise on the raw moments.
    pub sigma: f64,
    /// Smoothing parameter `β`; larger values flatten the estimate.
    pub beta_smooth: f64,
    /// Pencil order `q`.
    pub order: usize,
    pub kind: PencilKind,
}

impl EstimatorConfig {
    pub fn new(sigma: f64, beta_smooth: f64, order: usize, kind: PencilKind) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        if !(beta_smooth > 0.0 && beta_smooth.is_finite()) {
            return Err(Error::Config(format!("beta_smooth must be positive, got {beta_smooth}")));
        }
        if order == 0 {
            return Err(Error::Config("pencil order must be positive".into()));
        }
        Ok(Self { sigma, beta_smooth, order, kind })
    }

    /// Noise level of the pencil entries. Zero pencils are built from
    /// `Φ(d)`, whose first-order perturbation is `-δd / d_0²` in every
    /// entry, so `σ` is divided by `|d_0|²`.
    pub fn entry_sigma(&self, moments: &MomentSequence) -> f64 {
        match self.kind {
            PencilKind::Pole => self.sigma,
            PencilKind::Zero => self.sigma / moments[0].norm_sqr(),
        }
    }
}

/// `Σ_{k=1}^{q} Ψ(R²_kk(z) / (σ² β) + 1)` at every lattice node, with `σ`
/// from [`EstimatorConfig::entry_sigma`].
pub fn potential_field(moments: &MomentSequence, cfg: &EstimatorConfig, spec: &GridSpec) -> Result<DensityGrid> {
    let pencil = pencil_from_moments(moments, cfg.order, cfg.kind)?;
    let sigma = cfg.entry_sigma(moments);
    let inv_scale = 1.0 / (sigma * sigma * cfg.beta_smooth);
    let values = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            let r = qr_diagonal(&pencil, spec.node_at(idx));
            r.values.iter().map(|r2| digamma_unchecked(r2 * inv_scale + 1.0)).sum()
        })
        .collect();
    DensityGrid::new(*spec, values)
}

/// Five-point Laplacian on interior nodes; the boundary ring is zero.
pub fn discrete_laplacian(grid: &DensityGrid) -> Result<DensityGrid> {
    let spec = grid.spec;
    let (dx, dy) = (spec.dx(), spec.dy());
    if (dx - dy).abs() > 1e-12 * dx.max(dy) {
        return Err(Error::Grid(format!("Laplacian needs square cells, got {dx} x {dy}")));
    }
    let m = spec.m;
    let inv_h2 = 1.0 / (dx * dy);
    let f = &grid.values;
    let mut out = vec![0.0; f.len()];
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            let c = i * m + j;
            out[c] = (f[c + m] + f[c - m] + f[c + 1] + f[c - 1] - 4.0 * f[c]) * inv_h2;
        }
    }
    DensityGrid::new(spec, out)
}

/// Clips negatives and rescales to unit mass.
pub fn normalize(grid: &DensityGrid) -> Result<DensityGrid> {
    let clipped: Vec<f64> = grid.values.iter().map(|v| if *v > 0.0 { *v } else { 0.0 }).collect();
    let mass = clipped.iter().sum::<f64>() * grid.spec.cell_area();
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::Normalization);
    }
    let inv = 1.0 / mass;
    DensityGrid::new(grid.spec, clipped.into_iter().map(|v| v * inv).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    /// Closed-form estimate from one realization.
    Single,
    /// Potentials summed over all realizations.
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Signed Laplacian of the (summed) potential.
    pub raw: DensityGrid,
    pub normalized: DensityGrid,
}

/// Potential, Laplacian and normalization for one or many realizations.
///
/// Monte Carlo potentials are evaluated in parallel and reduced in
/// realization order, so the result does not depend on scheduling.
pub fn estimate_condensed(
    realizations: &[MomentSequence],
    cfg: &EstimatorConfig,
    spec: &GridSpec,
    mode: EstimateMode,
) -> Result<Estimate> {
    if realizations.is_empty() {
        return Err(Error::Length { required: 1, got: 0 });
    }
    if mode == EstimateMode::Single && realizations.len() != 1 {
        return Err(Error::Config(format!(
            "single mode takes exactly one realization, got {}",
            realizations.len()
        )));
    }
    let fields: Vec<DensityGrid> = realizations
        .par_iter()
        .map(|d| potential_field(d, cfg, spec))
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; spec.len()];
    for field in &fields {
        for (t, v) in total.iter_mut().zip(&field.values) {
            *t += v;
        }
    }
    let raw = discrete_laplacian(&DensityGrid::new(*spec, total)?)?;
    let normalized = normalize(&raw)?;
    Ok(Estimate { raw, normalized })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modes {
    pub points: Vec<Complex64>,
    pub values: Vec<f64>,
    /// False when fewer maxima than requested were found.
    pub complete: bool,
}

/// The `count` highest interior 8-neighborhood maxima, skipping any within
/// `min_separation` of one already chosen.
pub fn extract_modes(grid: &DensityGrid, count: usize, min_separation: f64) -> Modes {
    let m = grid.spec.m;
    let f = &grid.values;
    let mut candidates = Vec::new();
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            let c = i * m + j;
            let v = f[c];
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let n = ((i as i64 + di) as usize) * m + (j as i64 + dj) as usize;
                    // ties resolve to the first node in scan order
                    let beaten = if n < c { f[n] >= v } else { f[n] > v };
                    if beaten {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push(c);
            }
        }
    }
    candidates.sort_by(|a, b| f[*b].total_cmp(&f[*a]).then(a.cmp(b)));
    let mut points: Vec<Complex64> = Vec::new();
    let mut values = Vec::new();
    for c in candidates {
        if points.len() == count {
            break;
        }
        let z = grid.spec.node_at(c);
        if points.iter().all(|p| (p - z).norm() >= min_separation) {
            points.push(z);
            values.push(f[c]);
        }
    }
    let complete = points.len() == count;
    Modes { points, values, complete }
}

/// Cosine of the angle between two fields on the same lattice.
pub fn cosine_similarity(a: &DensityGrid, b: &DensityGrid) -> f64 {
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    let na: f64 = a.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
