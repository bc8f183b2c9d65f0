//! Atomic measures on the unit disk, their moments and Cauchy transforms,
//! and independent oracles for the zeros and poles of the transform.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Distance below which the Cauchy transform refuses to evaluate.
pub const POLE_GUARD: f64 = 1e-14;

/// Relative size of `Σ c_j` below which the zero polynomial is treated as
/// having dropped a degree.
const DEGREE_DROP_TOL: f64 = 1e-12;

/// `S(z) = Σ c_j δ(z - ξ_j)` with all nodes strictly inside the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    weights: Vec<Complex64>,
    nodes: Vec<Complex64>,
}

impl AtomicMeasure {
    pub fn new(weights: Vec<Complex64>, nodes: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("a measure needs at least one atom".into()));
        }
        if weights.len() != nodes.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} weights but {} nodes",
                weights.len(),
                nodes.len()
            )));
        }
        for (j, (c, xi)) in weights.iter().zip(&nodes).enumerate() {
            if !(c.re.is_finite() && c.im.is_finite() && xi.re.is_finite() && xi.im.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom {j} is not finite")));
            }
            if *c == Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidMeasure(format!("atom {j} has zero weight")));
            }
            if xi.norm() >= 1.0 {
                return Err(Error::InvalidMeasure(format!("node {j} = {xi} is not inside the unit disk")));
            }
        }
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i] == nodes[j] {
                    return Err(Error::InvalidMeasure(format!("nodes {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { weights, nodes })
    }

    /// The five-atom test configuration used throughout the experiments:
    /// two nearly coincident unit-modulus nodes with small weights, and a
    /// heavy node well inside the disk.
    pub fn benchmark() -> Self {
        let node = |decay: f64, turns: f64| Complex64::from_polar((-decay).exp(), 2.0 * PI * turns);
        let nodes = vec![
            node(0.1, -0.3),
            node(0.05, -0.28),
            node(0.0001, 0.2),
            node(0.0001, 0.21),
            node(0.3, -0.35),
        ];
        let weights = [6.0, 3.0, 1.0, 1.0, 20.0].iter().map(|&c| Complex64::new(c, 0.0)).collect();
        Self::new(weights, nodes).expect("benchmark measure is valid")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn total_weight(&self) -> Complex64 {
        self.weights.iter().sum()
    }

    /// Parses the `c_re c_im xi_re xi_im` per-line format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        let mut nodes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 4 numbers, found {}", fields.len()),
                });
            }
            let mut v = [0.0; 4];
            for (slot, field) in v.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("not a number: {field:?}"),
                })?;
            }
            weights.push(Complex64::new(v[0], v[1]));
            nodes.push(Complex64::new(v[2], v[3]));
        }
        Self::new(weights, nodes)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# c_re c_im xi_re xi_im\n");
        for (c, xi) in self.weights.iter().zip(&self.nodes) {
            let _ = writeln!(out, "{} {} {} {}", c.re, c.im, xi.re, xi.im);
        }
        out
    }
}

/// A finite complex sequence `d_0, ..., d_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence(Vec<Complex64>);

impl MomentSequence {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Length { required: 1, got: 0 });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for MomentSequence {
    type Output = Complex64;

    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

/// Circularly symmetric complex Gaussian noise with `E|ε|² = σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
    seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Domain(format!("noise sigma must be finite and non-negative, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for one realization: the seed picks the key,
    /// the realization index picks the ChaCha stream.
    pub fn rng(&self, realization: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(realization);
        rng
    }
}

/// `d_k = Σ_j c_j ξ_j^k` for `k < n`, with `0^0 = 1`.
pub fn exact_moments(measure: &AtomicMeasure, n: usize) -> Result<MomentSequence> {
    if n == 0 {
        return Err(Error::Length { required: 1, got: 0 });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (c, xi) in measure.weights.iter().zip(&measure.nodes) {
        let mut term = *c;
        for d in out.iter_mut() {
            *d += term;
            term *= xi;
        }
    }
    MomentSequence::new(out)
}

/// One noisy realization (stream 0 of the noise model).
pub fn sample_moments(measure: &AtomicMeasure, n: usize, noise: &NoiseModel) -> Result<MomentSequence> {
    sample_realization(measure, n, noise, 0)
}

/// Noisy realization number `realization`; deterministic in `(seed, realization)`.
pub fn sample_realization(
    measure: &AtomicMeasure,
    n: usize,
    noise: &NoiseModel,
    realization: u64,
) -> Result<MomentSequence> {
    let exact = exact_moments(measure, n)?;
    if noise.sigma == 0.0 {
        return Ok(exact);
    }
    let mut rng = noise.rng(realization);
    let scale = noise.sigma / 2f64.sqrt();
    let values = exact
        .into_vec()
        .into_iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(re, im) * scale
        })
        .collect();
    MomentSequence::new(values)
}

/// Realizations `0..count`, generated in parallel and returned in index order.
pub fn sample_realizations(
    measure: &AtomicMeasure,
    n: usize,
    noise: &NoiseModel,
    count: usize,
) -> Result<Vec<MomentSequence>> {
    (0..count as u64)
        .into_par_iter()
        .map(|r| sample_realization(measure, n, noise, r))
        .collect()
}

/// `f(z) = Σ_j c_j / (z - ξ_j)`.
pub fn cauchy_transform(measure: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    let distance = distance_to_nodes(measure, z);
    if distance < POLE_GUARD {
        return Err(Error::PoleEvaluation { distance });
    }
    Ok(measure.weights.iter().zip(&measure.nodes).map(|(c, xi)| c / (z - xi)).sum())
}

pub fn distance_to_nodes(measure: &AtomicMeasure, z: Complex64) -> f64 {
    measure.nodes.iter().map(|xi| (z - xi).norm()).fold(f64::INFINITY, f64::min)
}

/// Roots of the numerator of the Cauchy transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ZerosOracle {
    pub roots: Vec<Complex64>,
    /// Set when `Σ c_j` vanishes and the numerator loses its leading term.
    pub degree_dropped: bool,
}

/// Coefficients (constant term first) of `Σ_j c_j Π_{i≠j} (z - ξ_i)`.
pub fn numerator_polynomial(measure: &AtomicMeasure) -> Vec<Complex64> {
    let p = measure.len();
    let mut total = vec![Complex64::new(0.0, 0.0); p];
    for j in 0..p {
        let mut poly = vec![measure.weights[j]];
        for (i, xi) in measure.nodes.iter().enumerate() {
            if i != j {
                poly = multiply_linear(&poly, *xi);
            }
        }
        for (t, c) in total.iter_mut().zip(poly) {
            *t += c;
        }
    }
    total
}

fn multiply_linear(poly: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
    for (k, c) in poly.iter().enumerate() {
        out[k + 1] += c;
        out[k] -= c * root;
    }
    out
}

fn horner(poly: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for c in poly.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

/// Roots of a polynomial (constant term first) from the eigenvalues of its
/// balanced companion matrix, each followed by one Newton step.
pub fn polynomial_roots(poly: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = poly.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = poly[degree];
    let mut companion = CMatrix::zeros(degree, degree);
    for k in 0..degree {
        companion[(0, k)] = -poly[degree - 1 - k] / lead;
    }
    for k in 1..degree {
        companion[(k, k - 1)] = Complex64::new(1.0, 0.0);
    }
    let roots = linalg::eigenvalues(&companion)?;
    Ok(roots
        .into_iter()
        .map(|r| {
            let (value, deriv) = horner(poly, r);
            if deriv.norm() == 0.0 {
                return r;
            }
            let polished = r - value / deriv;
            if horner(poly, polished).0.norm() < value.norm() {
                polished
            } else {
                r
            }
        })
        .collect())
}

/// Zeros of `f(z)` via the companion matrix of its numerator.
pub fn zeros_oracle(measure: &AtomicMeasure) -> Result<ZerosOracle> {
    if measure.len() < 2 {
        return Ok(ZerosOracle { roots: Vec::new(), degree_dropped: false });
    }
    let mut poly = numerator_polynomial(measure);
    let scale: f64 = measure.weights.iter().map(|c| c.norm()).sum();
    let mut degree_dropped = false;
    while poly.len() > 1 && poly.last().map_or(false, |c| c.norm() <= DEGREE_DROP_TOL * scale) {
        poly.pop();
        degree_dropped = true;
    }
    let roots = polynomial_roots(&poly)?;
    Ok(ZerosOracle { roots, degree_dropped })
}

/// The nodes themselves, the poles of `f(z)`.
pub fn poles_oracle(measure: &AtomicMeasure) -> Vec<Complex64> {
    measure.nodes.clone()
}
