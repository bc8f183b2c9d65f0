#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerodensity::measure::AtomicMeasure;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    c(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

/// Uniform point in the disk of radius `r`.
pub fn random_in_disk(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    loop {
        let z = random_complex(rng, r);
        if z.norm() < r {
            return z;
        }
    }
}

/// Nodes in `|z| < 0.9`, pairwise at least `min_gap` apart.
pub fn random_nodes(rng: &mut ChaCha8Rng, p: usize, min_gap: f64) -> Vec<Complex64> {
    let mut nodes: Vec<Complex64> = Vec::with_capacity(p);
    while nodes.len() < p {
        let z = random_in_disk(rng, 0.9);
        if nodes.iter().all(|x| (x - z).norm() >= min_gap) {
            nodes.push(z);
        }
    }
    nodes
}

/// Random complex weights with `|Σ c_j| ≥ 0.5` and `|c_j| ≥ 0.2`.
pub fn random_measure(rng: &mut ChaCha8Rng, p: usize) -> AtomicMeasure {
    let nodes = random_nodes(rng, p, 0.15);
    loop {
        let weights: Vec<Complex64> = (0..p)
            .map(|_| {
                let w = c(rng.random_range(0.2..2.0), rng.random_range(-1.0..1.0));
                if rng.random_bool(0.3) { -w } else { w }
            })
            .collect();
        if weights.iter().sum::<Complex64>().norm() >= 0.5 {
            return AtomicMeasure::new(weights, nodes).unwrap();
        }
    }
}

pub fn random_positive_measure(rng: &mut ChaCha8Rng, p: usize) -> AtomicMeasure {
    let nodes = random_nodes(rng, p, 0.05);
    let weights = (0..p).map(|_| c(rng.random_range(0.1..5.0), 0.0)).collect();
    AtomicMeasure::new(weights, nodes).unwrap()
}

/// Largest distance after pairing each element of `a` with a distinct
/// element of `b`, trying all pairings (small sets only).
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    fn go(a: &[Complex64], b: &[Complex64], used: &mut Vec<bool>, i: usize, worst: f64, best: &mut f64) {
        if worst >= *best {
            return;
        }
        if i == a.len() {
            *best = worst;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(a, b, used, i + 1, worst.max((a[i] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(a, b, &mut vec![false; b.len()], 0, 0.0, &mut best);
    best
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_0^∞ f` split into unit-growing panels until the panel mass is negligible.
pub fn integrate_half_line(f: &dyn Fn(f64) -> f64, scale: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut width = scale;
    for _ in 0..200 {
        let part = integrate(f, lo, lo + width, tol);
        total += part;
        lo += width;
        width *= 1.5;
        if part.abs() < tol * 1e-3 && lo > 10.0 * scale {
            break;
        }
    }
    total
}
