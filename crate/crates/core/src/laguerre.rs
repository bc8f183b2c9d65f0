//! Laguerre-series approximation of the density of a positive random
//! variable (here `R²_kk`): Gamma moment fit, expansion coefficients from
//! empirical moments, density evaluation and the closed form of `E[ln Y]`.
//!
//! The expansion is
//!
//! ```text
//! f(y) = g(y; α, β) Σ_{m=0}^{M} b_m L_m^{(α-1)}(y / τ),   L_0 = 1,
//! ```
//!
//! with `g` the Gamma density of shape `α` and scale `β`. The scale `τ` is
//! tied to `β`, and the coefficients are computed from the moments of `y / β`,
//! so that a two-moment Gamma fit always gives `b_0 = 1`, `b_1 = b_2 = 0`.

use crate::error::{Error, Result};
use crate::specfun::{digamma_unchecked, laguerre_unchecked, log_gamma_unchecked, LaguerrePolynomial};

/// Raw sample moments `γ̂_0 = 1, γ̂_1, ..., γ̂_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    gamma: Vec<f64>,
    count: usize,
}

impl EmpiricalMoments {
    /// Moments `1..=order` of `samples`.
    pub fn from_samples(samples: &[f64], order: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Length { required: 1, got: 0 });
        }
        if samples.iter().any(|y| !y.is_finite() || *y < 0.0) {
            return Err(Error::Domain("samples must be finite and non-negative".into()));
        }
        let n = samples.len() as f64;
        let scale = samples.iter().sum::<f64>() / n;
        if scale == 0.0 {
            return Err(Error::Domain("all samples are zero".into()));
        }
        // accumulate in units of the sample mean to keep high powers in range
        let mut sums = vec![0.0; order + 1];
        for &y in samples {
            let x = y / scale;
            let mut power = 1.0;
            for s in sums.iter_mut() {
                *s += power;
                power *= x;
            }
        }
        let mut gamma = Vec::with_capacity(order + 1);
        let mut scale_power = 1.0;
        for s in sums {
            gamma.push(s / n * scale_power);
            scale_power *= scale;
        }
        gamma[0] = 1.0;
        Ok(Self { gamma, count: samples.len() })
    }

    /// Wraps known moments; `gamma[0]` must be 1.
    pub fn from_moments(gamma: Vec<f64>, count: usize) -> Result<Self> {
        if gamma.first() != Some(&1.0) {
            return Err(Error::Domain("moment sequence must start with gamma_0 = 1".into()));
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::Domain("moments must be finite".into()));
        }
        Ok(Self { gamma, count })
    }

    /// Highest moment index `J`.
    pub fn order(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn values(&self) -> &[f64] {
        &self.gamma
    }
}

/// Gamma distribution with shape `α` and scale `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
}

impl GammaFit {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("invalid Gamma parameters ({shape}, {scale})")));
        }
        Ok(Self { shape, scale })
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let (a, b) = (self.shape, self.scale);
        if y < 0.0 {
            return 0.0;
        }
        if y == 0.0 {
            return match a.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => 1.0 / b,
                _ => 0.0,
            };
        }
        ((a - 1.0) * y.ln() - y / b - a * b.ln() - log_gamma_unchecked(a)).exp()
    }
}

/// Method-of-moments fit `α̂ = γ̂_1² / (γ̂_2 - γ̂_1²)`, `β̂ = (γ̂_2 - γ̂_1²) / γ̂_1`.
pub fn fit_gamma(moments: &EmpiricalMoments) -> Result<GammaFit> {
    if moments.order() < 2 {
        return Err(Error::InsufficientMoments { order: 2, available: moments.order() });
    }
    let g1 = moments.gamma[1];
    let g2 = moments.gamma[2];
    if !(g1 > 0.0) {
        return Err(Error::Domain(format!("first moment must be positive, got {g1}")));
    }
    let var = g2 - g1 * g1;
    if !(var > 0.0) {
        return Err(Error::Underdispersed { gamma2: g2, gamma1_sq: g1 * g1 });
    }
    GammaFit::new(g1 * g1 / var, var / g1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreExpansion {
    pub fit: GammaFit,
    pub tau: f64,
    /// `b_0, ..., b_M`.
    pub coefficients: Vec<f64>,
}

impl LaguerreExpansion {
    /// Truncation order `M`.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// The same expansion cut after `order` terms beyond `b_0`.
    pub fn truncated(&self, order: usize) -> LaguerreExpansion {
        let keep = (order + 1).min(self.coefficients.len());
        LaguerreExpansion { fit: self.fit, tau: self.tau, coefficients: self.coefficients[..keep].to_vec() }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `b_h = (-1)^h Γ(α) Σ_{j=0}^{h} (-1)^j C(h, j) γ_{h-j} / Γ(α + h - j)` on the
/// scale-normalized moments `γ_j = γ̂_j / β̂^j`, for `h = 0..=order`.
pub fn expansion_coefficients(moments: &EmpiricalMoments, fit: GammaFit, order: usize) -> Result<LaguerreExpansion> {
    if order > moments.order() {
        return Err(Error::InsufficientMoments { order, available: moments.order() });
    }
    let alpha = fit.shape;
    let beta = fit.scale;
    let scaled: Vec<f64> = moments
        .gamma
        .iter()
        .enumerate()
        .map(|(j, g)| g / beta.powi(j as i32))
        .collect();
    let ln_gamma_alpha = log_gamma_unchecked(alpha);
    let mut coefficients = Vec::with_capacity(order + 1);
    for h in 0..=order {
        let mut sum = 0.0;
        for j in 0..=h {
            let idx = h - j;
            let ratio = (ln_gamma_alpha - log_gamma_unchecked(alpha + idx as f64)).exp();
            let term = binomial(h, j) * scaled[idx] * ratio;
            sum += if j % 2 == 0 { term } else { -term };
        }
        coefficients.push(if h % 2 == 0 { sum } else { -sum });
    }
    coefficients[0] = 1.0;
    Ok(LaguerreExpansion { fit, tau: beta, coefficients })
}

/// Truncated series density at `y >= 0`; not clipped, so it may be negative.
pub fn density_eval(expansion: &LaguerreExpansion, y: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let a = expansion.fit.shape - 1.0;
    let x = y / expansion.tau;
    let series: f64 = expansion
        .coefficients
        .iter()
        .enumerate()
        .map(|(m, b)| b * laguerre_unchecked(m, a, x))
        .sum();
    expansion.fit.pdf(y) * series
}

/// Closed-form `E[ln Y]` of the truncated series:
///
/// `b_0 [ln β + Ψ(α)] + Σ_m b_m Σ_h c_hm Γ(α+h)/Γ(α) (β/τ)^h [ln β + Ψ(α+h)]`
///
/// where `c_hm` are the monomial coefficients of `L_m^{(α-1)}`.
pub fn expected_log(expansion: &LaguerreExpansion) -> Result<f64> {
    let alpha = expansion.fit.shape;
    let beta = expansion.fit.scale;
    let ln_beta = beta.ln();
    let ratio = beta / expansion.tau;
    let ln_gamma_alpha = log_gamma_unchecked(alpha);
    let mut total = expansion.coefficients[0] * (ln_beta + digamma_unchecked(alpha));
    for (m, &b) in expansion.coefficients.iter().enumerate().skip(1) {
        let poly = LaguerrePolynomial::new(m, alpha - 1.0)?;
        let inner: f64 = poly
            .coefficients()
            .iter()
            .enumerate()
            .map(|(h, c)| {
                let hf = h as f64;
                let gamma_ratio = (log_gamma_unchecked(alpha + hf) - ln_gamma_alpha).exp();
                c * gamma_ratio * ratio.powi(h as i32) * (ln_beta + digamma_unchecked(alpha + hf))
            })
            .sum();
        total += b * inner;
    }
    Ok(total)
}

/// Equal-width histogram normalized as a density.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start: f64,
    pub width: f64,
    pub density: Vec<f64>,
}

/// Upper bound on the number of Freedman–Diaconis bins.
pub const MAX_BINS: usize = 2000;

impl Histogram {
    /// Freedman–Diaconis bin width `2 IQR n^{-1/3}` over the sample range,
    /// capped at [`MAX_BINS`] bins.
    pub fn freedman_diaconis(samples: &[f64]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Length { required: 2, got: samples.len() });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        let lo = sorted[0];
        let hi = sorted[n - 1];
        let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
        let range = hi - lo;
        if !(range > 0.0) {
            return Err(Error::Domain("samples have zero spread".into()));
        }
        let mut width = 2.0 * iqr / (n as f64).cbrt();
        if !(width > 0.0) {
            width = range / (n as f64).sqrt();
        }
        let mut bins = (range / width).ceil() as usize;
        if bins > MAX_BINS {
            bins = MAX_BINS;
        }
        let bins = bins.max(1);
        let width = range / bins as f64;
        let mut counts = vec![0usize; bins];
        for &y in &sorted {
            let idx = (((y - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        let norm = 1.0 / (n as f64 * width);
        Ok(Self { start: lo, width, density: counts.into_iter().map(|c| c as f64 * norm).collect() })
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.density.len()).map(move |i| self.start + (i as f64 + 0.5) * self.width)
    }

    /// `(Σ_bins (h_i - f(center_i))² width)^{1/2}`.
    pub fn l2_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.centers()
            .zip(&self.density)
            .map(|(x, h)| (h - f(x)).powi(2) * self.width)
            .sum::<f64>()
            .sqrt()
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}
