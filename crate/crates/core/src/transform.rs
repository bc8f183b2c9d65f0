//! The moment involution `Φ`: reciprocal power-series coefficients obtained
//! from a lower-triangular Toeplitz solve, its determinant representation,
//! and the induced density of the transformed moments.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::MomentSequence;

/// Default relative threshold on `|d_0|`.
pub const DEFAULT_D0_THRESHOLD: f64 = 1e-12;

/// Lower-triangular Toeplitz matrix with first column `d_0, ..., d_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzLowerTriangular {
    column: Vec<Complex64>,
}

impl ToeplitzLowerTriangular {
    pub fn new(column: Vec<Complex64>) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::Length { required: 1, got: 0 });
        }
        Ok(Self { column })
    }

    pub fn order(&self) -> usize {
        self.column.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            self.column[i - j]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.column[0] != Complex64::new(0.0, 0.0)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.order())
            .map(|i| (0..=i).map(|j| self.column[i - j] * x[j]).sum())
            .collect()
    }

    /// Solves `T x = e_1` by forward substitution.
    pub fn solve_e1(&self) -> Vec<Complex64> {
        let d = &self.column;
        let inv_d0 = d[0].inv();
        let mut x = Vec::with_capacity(d.len());
        x.push(inv_d0);
        for k in 1..d.len() {
            let acc: Complex64 = (1..=k).map(|j| d[j] * x[k - j]).sum();
            x.push(-acc * inv_d0);
        }
        x
    }
}

fn check_leading(d: &[Complex64], relative_threshold: f64) -> Result<()> {
    let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = relative_threshold * scale;
    let d0_abs = d[0].norm();
    if d0_abs <= threshold || d0_abs == 0.0 || !d0_abs.is_finite() {
        return Err(Error::IllConditionedTransform { d0_abs, threshold });
    }
    Ok(())
}

/// `Φ(d) = T(d)^{-1} e_1`, the coefficients of `1 / Σ d_k z^{-k}`.
pub fn phi(d: &MomentSequence) -> Result<MomentSequence> {
    phi_with_threshold(d, DEFAULT_D0_THRESHOLD)
}

/// [`phi`] with an explicit relative threshold on `|d_0|`.
pub fn phi_with_threshold(d: &MomentSequence, relative_threshold: f64) -> Result<MomentSequence> {
    check_leading(d.values(), relative_threshold)?;
    let t = ToeplitzLowerTriangular::new(d.values().to_vec())?;
    MomentSequence::new(t.solve_e1())
}

/// Entry `k` of `Φ^{-1}(y)` from the Hankel determinant `H_k^{(-k+2)}`,
/// the `k × k` matrix with entries `y_{i+j-k+2}` (zero for negative index):
///
/// `[Φ^{-1}(y)]_k = (-1)^{k(k+1)/2} H_k^{(-k+2)} / y_0^{k+1}`.
///
/// Each call evaluates its determinant from scratch. Reversing the rows of
/// the Hankel matrix gives an upper Hessenberg Toeplitz matrix, so the
/// determinant costs `O(k²)` by pivoted elimination.
pub fn phi_inverse_entry(y: &MomentSequence, k: usize) -> Result<Complex64> {
    if k >= y.len() {
        return Err(Error::Length { required: k + 1, got: y.len() });
    }
    check_leading(y.values(), DEFAULT_D0_THRESHOLD)?;
    let y0 = y[0];
    let hankel_det = hankel_determinant(y.values(), k);
    let sign = if (k * (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(hankel_det * sign * y0.inv().powu(k as u32 + 1))
}

/// `det H_k^{(-k+2)}` for the sequence `y`.
pub fn hankel_determinant(y: &[Complex64], k: usize) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // Row r of the reversed matrix holds y_{j-r+1}.
    let mut a: Vec<Vec<Complex64>> = (0..k)
        .map(|r| {
            (0..k)
                .map(|j| if j + 1 >= r { y[j + 1 - r] } else { zero })
                .collect()
        })
        .collect();
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..k {
        if c + 1 < k && a[c + 1][c].norm() > a[c][c].norm() {
            a.swap(c, c + 1);
            det = -det;
        }
        let pivot = a[c][c];
        if pivot == zero {
            return zero;
        }
        det *= pivot;
        if c + 1 < k {
            let factor = a[c + 1][c] / pivot;
            if factor != zero {
                for j in c..k {
                    let v = a[c][j];
                    a[c + 1][j] -= factor * v;
                }
            }
        }
    }
    // undo the row reversal: sign of the reversal permutation
    if (k * (k - 1) / 2) % 2 == 1 {
        det = -det;
    }
    det
}

/// Density of `Φ(d)` when `d` is complex Gaussian with mean `μ` and total
/// per-coordinate variance `σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardDensity {
    mu: Vec<Complex64>,
    sigma: f64,
    center: Vec<Complex64>,
}

impl PushforwardDensity {
    pub fn new(mu: MomentSequence, sigma: f64) -> Result<Self> {
        if mu.len() % 2 != 0 {
            return Err(Error::Domain(format!("pushforward density needs an even length, got {}", mu.len())));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        let center = phi(&mu)?.into_vec();
        Ok(Self { mu: mu.into_vec(), sigma, center })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `Φ(μ)`, the point the density concentrates on as `σ → 0`.
    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    fn check_len(&self, y: &MomentSequence) -> Result<()> {
        if y.len() != self.len() {
            return Err(Error::Length { required: self.len(), got: y.len() });
        }
        Ok(())
    }

    /// `ln g̃(y) = -n ln(π σ² |y_0|²) - σ^{-2} Σ |Φ(y)_k - μ_k|²`.
    pub fn log_density(&self, y: &MomentSequence) -> Result<f64> {
        self.check_len(y)?;
        let back = phi(y)?;
        let s2 = self.sigma * self.sigma;
        let misfit: f64 = back.values().iter().zip(&self.mu).map(|(x, m)| (x - m).norm_sqr()).sum();
        let n = self.len() as f64;
        Ok(-n * (PI * s2 * y[0].norm_sqr()).ln() - misfit / s2)
    }

    pub fn density(&self, y: &MomentSequence) -> Result<f64> {
        self.log_density(y).map(f64::exp)
    }

    /// Log of the small-σ Gaussian approximation centred on `Φ(μ)` with
    /// per-coordinate variance `σ² / |μ_0|²`.
    pub fn log_gaussian_approx(&self, y: &MomentSequence) -> Result<f64> {
        self.check_len(y)?;
        let s2 = self.sigma * self.sigma;
        let mu0_sq = self.mu[0].norm_sqr();
        let misfit: f64 = y.values().iter().zip(&self.center).map(|(a, b)| (a - b).norm_sqr()).sum();
        let n = self.len() as f64;
        Ok(n * (mu0_sq / (PI * s2)).ln() - mu0_sq / s2 * misfit)
    }

    pub fn gaussian_approx(&self, y: &MomentSequence) -> Result<f64> {
        self.log_gaussian_approx(y).map(f64::exp)
    }
}
